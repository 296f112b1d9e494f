"""QAM amplitude grids with uniform or Maxwell-Boltzmann priors.

Constellation points are coherent amplitudes in the Husimi convention: the
heterodyne outcome mean equals the point itself, and the mean photon number of
the modulated ensemble is sum(p * |x|^2). Grid indexing is row-major over
(Re, Im) ascending so exported tables are stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DimensionMismatch, InvalidOrder, NonPhysicalInput, Unreachable

PROB_SUM_TOL = 1e-12
SYMMETRY_TOL = 1e-9
ENERGY_REL_TOL = 1e-10


@dataclass(frozen=True)
class Constellation:
    """Finite set of complex amplitudes with probabilities.

    ``order`` is the per-quadrature side m for an m x m grid (so the grid has
    m^2 points); it is None for free-form point sets.
    """

    points: np.ndarray
    probs: np.ndarray
    order: int | None = None

    def __post_init__(self):
        points = np.asarray(self.points, dtype=complex).ravel()
        probs = np.asarray(self.probs, dtype=float).ravel()
        if points.shape != probs.shape:
            raise DimensionMismatch(
                f"{points.size} points but {probs.size} probabilities"
            )
        if points.size == 0:
            raise InvalidOrder("constellation needs at least one point")
        if np.any(probs < 0):
            raise NonPhysicalInput("negative probability")
        if abs(float(probs.sum()) - 1.0) > PROB_SUM_TOL:
            raise NonPhysicalInput(f"probabilities sum to {probs.sum()}, not 1")
        if self.order is not None and self.order**2 != points.size:
            raise InvalidOrder(
                f"order {self.order} implies {self.order ** 2} points, got {points.size}"
            )
        _check_origin_symmetry(points, probs)
        points.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "probs", probs)

    @property
    def size(self) -> int:
        return int(self.points.size)


@dataclass(frozen=True)
class ShapingParams:
    """Maxwell-Boltzmann exponent solved for a target mean photon number.

    ``degenerate`` flags point sets with a single squared magnitude, where the
    exponent is arbitrary and 0 is returned.
    """

    nu: float
    target_energy: float
    degenerate: bool = False


def _check_origin_symmetry(points: np.ndarray, probs: np.ndarray) -> None:
    """Every point x with prob p must have -x present with the same prob."""
    scale = max(1.0, float(np.max(np.abs(points))))
    for i, x in enumerate(points):
        j = int(np.argmin(np.abs(points + x)))
        if abs(points[j] + x) > SYMMETRY_TOL * scale:
            raise NonPhysicalInput(f"no mirror point for {x}")
        if abs(probs[j] - probs[i]) > PROB_SUM_TOL:
            raise NonPhysicalInput(f"asymmetric probabilities for +-{x}")


def qam_grid(m: int, spacing: float) -> np.ndarray:
    """m x m square grid {(2i - m + 1, 2j - m + 1) * spacing / 2}, row-major."""
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise InvalidOrder(f"side order must be a positive integer, got {m}")
    if spacing <= 0:
        raise NonPhysicalInput(f"spacing must be > 0, got {spacing}")
    coords = (2.0 * np.arange(m) - m + 1) * spacing / 2.0
    re, im = np.meshgrid(coords, coords, indexing="ij")
    return (re + 1j * im).ravel()


def mb_shaped(points, nu: float) -> Constellation:
    """Constellation over ``points`` with probabilities ~ exp(-nu |x|^2)."""
    pts = np.asarray(points, dtype=complex).ravel()
    if not math.isfinite(nu):
        raise NonPhysicalInput(f"nu must be finite, got {nu}")
    mags = np.abs(pts) ** 2
    logw = -nu * mags
    logw -= logw.max()
    w = np.exp(logw)
    probs = w / w.sum()
    n = pts.size
    side = math.isqrt(n)
    order = side if side * side == n else None
    return Constellation(pts, probs, order)


def uniform(points) -> Constellation:
    """Equal-probability constellation over ``points``."""
    return mb_shaped(points, 0.0)


def _mb_energy(mags: np.ndarray, nu: float) -> float:
    logw = -nu * mags
    logw -= logw.max()
    w = np.exp(logw)
    return float((w * mags).sum() / w.sum())


def solve_nu_for_energy(points, target_mbar: float) -> ShapingParams:
    """Solve exp(-nu |x|^2) shaping so the mean photon number equals the target.

    The mean energy is monotone decreasing in nu, so a bracketed Brent root is
    exact to 1e-10 relative. Targets between the uniform mean and the largest
    squared magnitude need nu < 0, which is still a valid distribution.
    """
    pts = np.asarray(points, dtype=complex).ravel()
    mags = np.abs(pts) ** 2
    lo, hi = float(mags.min()), float(mags.max())
    if hi - lo <= SYMMETRY_TOL * max(1.0, hi):
        # single magnitude: the shaping exponent has no effect
        if abs(target_mbar - lo) > ENERGY_REL_TOL * max(1.0, lo):
            raise Unreachable(
                f"all points have |x|^2 = {lo}; target {target_mbar} unreachable"
            )
        return ShapingParams(0.0, target_mbar, degenerate=True)
    if not (lo < target_mbar < hi):
        raise Unreachable(
            f"target {target_mbar} outside attainable range ({lo}, {hi})"
        )

    def gap(nu: float) -> float:
        return _mb_energy(mags, nu) - target_mbar

    if gap(0.0) == 0.0:
        return ShapingParams(0.0, target_mbar)
    # expand a bracket around 0; energy decreases with nu
    step = 1.0 / max(hi, 1.0)
    a, b = -step, step
    while gap(a) < 0.0:
        a *= 2.0
    while gap(b) > 0.0:
        b *= 2.0
    nu = float(brentq(gap, a, b, xtol=1e-15, rtol=8.9e-16, maxiter=200))
    achieved = _mb_energy(mags, nu)
    if abs(achieved - target_mbar) > ENERGY_REL_TOL * max(1.0, abs(target_mbar)):
        raise Unreachable(
            f"root refinement stalled: E({nu}) = {achieved} vs target {target_mbar}"
        )
    return ShapingParams(nu, target_mbar)


def mean_energy(c: Constellation) -> float:
    """Mean photon number sum(p * |x|^2)."""
    return float((c.probs * np.abs(c.points) ** 2).sum())


def first_moment(c: Constellation) -> complex:
    return complex((c.probs * c.points).sum())


def sample_indices(c: Constellation, rng_seed, count: int) -> np.ndarray:
    """Draw i.i.d. point indices with the constellation law, reproducible per seed."""
    rng = np.random.default_rng(rng_seed)
    return rng.choice(c.size, size=count, p=c.probs)


def sample(c: Constellation, rng_seed, count: int) -> np.ndarray:
    """Draw i.i.d. complex amplitudes with the constellation law."""
    return c.points[sample_indices(c, rng_seed, count)]


def shaped_qam(m: int, mbar: float, coverage: float = 2.5) -> tuple[Constellation, ShapingParams]:
    """QAM grid whose MB shaping is solved to hit a mean photon number.

    Spacing policy: the grid reaches ``coverage`` per-quadrature standard
    deviations of the limiting circular Gaussian, spacing = coverage *
    sqrt(2 mbar) / (m - 1). A 2 x 2 grid has a single magnitude, so its
    spacing is forced to sqrt(2 mbar) and the probabilities stay uniform;
    a 1 x 1 grid is the vacuum point and only mbar = 0 is reachable.
    """
    if mbar < 0:
        raise NonPhysicalInput(f"mbar must be >= 0, got {mbar}")
    if m == 1:
        points = np.zeros(1, dtype=complex)
        params = solve_nu_for_energy(points, mbar)  # reachable only for mbar = 0
        return Constellation(points, np.ones(1), order=1), params
    if mbar == 0:
        raise Unreachable("an m >= 2 grid with positive spacing cannot have zero energy")
    if not coverage > 1.0:
        raise NonPhysicalInput(f"coverage must exceed 1, got {coverage}")
    if m == 2:
        points = qam_grid(2, math.sqrt(2.0 * mbar))
        return uniform(points), ShapingParams(0.0, mbar, degenerate=True)
    if m % 2 == 0 and coverage >= m - 1:
        raise Unreachable(
            f"coverage {coverage} >= m - 1 = {m - 1}: innermost ring already above target"
        )
    points = qam_grid(m, coverage * math.sqrt(2.0 * mbar) / (m - 1))
    params = solve_nu_for_energy(points, mbar)
    probs_c = mb_shaped(points, params.nu)
    return probs_c, params


def to_json_dict(c: Constellation, meta: dict | None = None) -> dict:
    """JSON-ready form {points: [[re, im], ...], probs: [...], meta}."""
    return {
        "points": [[float(x.real), float(x.imag)] for x in c.points],
        "probs": [float(p) for p in c.probs],
        "meta": dict(meta or {}, order=c.order),
    }


def from_json_dict(doc: dict) -> Constellation:
    if not isinstance(doc, dict) or "points" not in doc or "probs" not in doc:
        raise NonPhysicalInput("constellation JSON needs 'points' and 'probs'")
    points = np.array([complex(re, im) for re, im in doc["points"]])
    probs = np.asarray(doc["probs"], dtype=float)
    order = (doc.get("meta") or {}).get("order")
    return Constellation(points, probs, order)
