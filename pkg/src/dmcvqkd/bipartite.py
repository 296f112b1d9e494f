"""Purifications of constellation states and their covariance-matrix gap.

The purification |Phi> = (1_A (x) sqrt(rho)) sum |n>|n> of a mode-B state rho
is rank one; tracing out A returns rho itself and tracing out B returns rho
transposed in the Fock basis. Its covariance matrix differs from the
two-mode-squeezed (EPR) reference only in the off-diagonal Z block, and the
Hilbert-Schmidt gap between the two reduces to 2 |Z_ch - Z*|.

Two-mode operators are A-major: |l>_A |k>_B lives at index l * d + k, so the
purification amplitudes are Phi[l * d + k] = sqrt(rho)[k, l].
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonPhysicalInput, TruncationTooSevere
from .fock import DensityMatrix, annihilation_op, matrix_sqrt_psd, partial_trace

logger = logging.getLogger(__name__)

PURITY_TOL = 1e-8
PTRACE_TOL = 1e-8
DEFICIT_GATE = 1e-6


@dataclass(frozen=True)
class ChannelModel:
    """Thermal-loss channel: transmittance tau, excess noise xi at the input (SNU)."""

    tau: float
    xi: float

    def __post_init__(self):
        if not 0.0 < self.tau <= 1.0:
            raise NonPhysicalInput(f"tau must be in (0, 1], got {self.tau}")
        if self.xi < 0.0:
            raise NonPhysicalInput(f"xi must be >= 0, got {self.xi}")


@dataclass(frozen=True)
class BipartiteState:
    """Rank-one state on the two-mode (d^2) space, stored by its vector."""

    mode_dim: int
    vector: np.ndarray
    source: str = ""

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=complex).ravel()
        if vec.size != self.mode_dim**2:
            raise DimensionMismatch(
                f"vector length {vec.size} is not mode_dim^2 = {self.mode_dim ** 2}"
            )
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)

    @property
    def matrix(self) -> np.ndarray:
        """Dense |Phi><Phi| on the d^2 space. O(d^4) memory; bound mode_dim <= 64."""
        return np.outer(self.vector, self.vector.conj())

    @property
    def trace(self) -> float:
        return float(np.vdot(self.vector, self.vector).real)

    @property
    def deficit(self) -> float:
        return max(0.0, 1.0 - self.trace)


def _largest_eigenvalue(matrix: np.ndarray, iters: int = 200, tol: float = 1e-13) -> float:
    """Power iteration; accurate for PSD matrices with a dominant branch."""
    rng = np.random.default_rng(7)
    d = matrix.shape[0]
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v /= np.linalg.norm(v)
    value = 0.0
    for _ in range(iters):
        w = matrix @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        new = float(np.vdot(v, matrix @ v).real)
        if abs(new - value) <= tol * max(1.0, abs(new)):
            return new
        value = new
    return value


def purification_checks(state: BipartiteState, rho: DensityMatrix) -> dict:
    """Gap sizes for the rank-one and partial-trace invariants.

    Materializes the dense matrix, so the cost is O(d^4) memory and time.
    """
    dense = state.matrix
    rank_one_gap = abs(_largest_eigenvalue(dense) - state.trace)
    ptrace_a_gap = float(np.max(np.abs(partial_trace(dense, "A") - rho.entries)))
    ptrace_b_gap = float(np.max(np.abs(partial_trace(dense, "B") - rho.entries.T)))
    return {
        "rank_one_gap": rank_one_gap,
        "ptrace_a_gap": ptrace_a_gap,
        "ptrace_b_gap": ptrace_b_gap,
    }


def purify(rho: DensityMatrix, source: str = "", check: bool = True) -> BipartiteState:
    """Rank-one purification with amplitudes Phi[l*d + k] = sqrt(rho)[k, l].

    The vector is left sub-normalized by the truncation deficit of ``rho``;
    renormalizing would silently distort the gaps this module measures.
    """
    if rho.deficit >= DEFICIT_GATE:
        raise TruncationTooSevere(
            f"source deficit {rho.deficit:.3e} too large to purify faithfully"
        )
    root = matrix_sqrt_psd(rho)
    state = BipartiteState(rho.dim, root.T.reshape(-1), source)
    if check:
        gaps = purification_checks(state, rho)
        worst = max(gaps.values())
        if worst > PTRACE_TOL:
            raise NonPhysicalInput(f"purification invariants violated: {gaps}")
    return state


@dataclass(frozen=True)
class EPRReference:
    """Two-mode-squeezed reference quantities for a mean photon number."""

    nu: float
    z: float
    squeeze_r: float
    lam: float


def epr_reference(mbar: float) -> EPRReference:
    """EPR state parameters: nu = 2 mbar + 1, Z = 2 sqrt(mbar^2 + mbar),
    r = asinh(sqrt(mbar)), lambda = tanh(r) = sqrt(mbar/(mbar+1))."""
    if mbar < 0:
        raise NonPhysicalInput(f"mbar must be >= 0, got {mbar}")
    r = math.asinh(math.sqrt(mbar))
    lam = math.sqrt(mbar / (mbar + 1.0))
    assert abs(math.tanh(r) - lam) <= 1e-12
    return EPRReference(
        nu=2.0 * mbar + 1.0,
        z=2.0 * math.sqrt(mbar**2 + mbar),
        squeeze_r=r,
        lam=lam,
    )


def z_channel(mbar: float, tau: float) -> float:
    """Off-diagonal covariance of the channel-scaled EPR reference."""
    return 2.0 * math.sqrt(tau) * math.sqrt(mbar**2 + mbar)


def z_star(state: BipartiteState, ch: ChannelModel, w: float = 0.0) -> float:
    """Covariance lower-bound surrogate sqrt(tau) <ab + a'b'> - sqrt(2 tau xi w).

    The two-mode correlator is evaluated directly on the purification vector:
    with Phi reshaped to F[l, k], <a (x) b> = tr(F' a F b^T).
    """
    d = state.mode_dim
    if d < 2:
        raise DimensionMismatch(f"mode_dim must be >= 2, got {d}")
    if w < 0.0:
        raise NonPhysicalInput(f"w must be >= 0, got {w}")
    if state.deficit >= DEFICIT_GATE:
        raise TruncationTooSevere(f"state deficit {state.deficit:.3e} too large")
    a = annihilation_op(d)
    f = state.vector.reshape(d, d)
    corr = 2.0 * float(np.vdot(f, a @ f @ a.T).real)
    return math.sqrt(ch.tau) * corr - math.sqrt(2.0 * ch.tau * ch.xi * w)


def cm_distance(mbar: float, zstar: float, tau: float, xi: float = 0.0) -> float:
    """Hilbert-Schmidt gap 2 |Z_ch - Z*| between the two covariance matrices.

    ``xi`` does not enter the gap itself (its effect arrives through the w
    term inside Z*); it is accepted so sweep rows carry the full channel.
    """
    if not all(map(math.isfinite, (mbar, zstar, tau, xi))):
        raise NonPhysicalInput("cm_distance inputs must be finite")
    return 2.0 * abs(z_channel(mbar, tau) - zstar)


@dataclass(frozen=True)
class CovarianceMatrix:
    """4x4 block form (V_A I, Z sigma_z; Z sigma_z, V_B I) in shot-noise units."""

    va: float
    vb: float
    z: float

    def __post_init__(self):
        if self.va < 1.0 or self.vb < 1.0:
            raise NonPhysicalInput(f"V_A, V_B must be >= 1 SNU, got {self.va}, {self.vb}")
        guard = math.sqrt(max(0.0, (self.va - 1.0) * (self.vb + 1.0)))
        if abs(self.z) > guard:
            logger.warning(
                "off-diagonal Z = %s exceeds the idealized guard %s", self.z, guard
            )

    def layout(self) -> np.ndarray:
        sigma_z = np.diag([1.0, -1.0])
        top = np.hstack([self.va * np.eye(2), self.z * sigma_z])
        bottom = np.hstack([self.z * sigma_z, self.vb * np.eye(2)])
        return np.vstack([top, bottom])


def covariance_matrix(mbar: float, ch: ChannelModel, z: float) -> CovarianceMatrix:
    """Covariance matrix with V_A from the EPR reference and the conventional
    thermal-loss V_B = tau * 2 mbar + 1 + tau * xi."""
    return CovarianceMatrix(
        va=2.0 * mbar + 1.0,
        vb=ch.tau * 2.0 * mbar + 1.0 + ch.tau * ch.xi,
        z=z,
    )


def bipartite_trace_distance(a: BipartiteState, b: BipartiteState, dense: bool = False) -> float:
    """Trace-norm distance between two rank-one states on the d^2 space.

    The difference of two rank-one PSD operators acts on a two-dimensional
    subspace, so the distance has a closed form in the norms and overlap;
    this also handles sub-normalized (truncated) vectors exactly. The dense
    eigenvalue path is kept as a cross-check for small dimensions.
    """
    if a.mode_dim != b.mode_dim:
        raise DimensionMismatch(f"mode dims {a.mode_dim} and {b.mode_dim} differ")
    if dense:
        diff = a.matrix - b.matrix
        return float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
    na2 = a.trace
    nb2 = b.trace
    ov = abs(np.vdot(a.vector, b.vector)) ** 2
    half_sum = 0.5 * (na2 + nb2)
    s = math.sqrt(max(0.0, half_sum**2 - ov))
    mu_plus = 0.5 * (na2 - nb2) + s
    mu_minus = 0.5 * (na2 - nb2) - s
    return abs(mu_plus) + abs(mu_minus)


@dataclass(frozen=True)
class CovarianceSweepPoint:
    """One row of the covariance-gap sweep CSV."""

    m: int
    mbar: float
    tau: float
    xi: float
    w: float
    z_ch: float
    z_star: float
    cm_distance: float
    purification_trace_dist: float


def covariance_sweep(
    orders,
    mbar: float,
    ch: ChannelModel,
    w: float = 0.0,
    dim: int | None = None,
    coverage: float = 2.5,
) -> list[CovarianceSweepPoint]:
    """Covariance gap and purification distance across QAM side orders."""
    from .constellation import shaped_qam
    from .convergence import constellation_density, min_dim_for_deficit
    from .fock import thermal_state

    if dim is None:
        dim = min_dim_for_deficit(mbar)
    reference = purify(thermal_state(mbar, dim), source=f"EPR({mbar})")
    zc = z_channel(mbar, ch.tau)
    points = []
    for m in orders:
        c, _ = shaped_qam(int(m), mbar, coverage)
        state = purify(constellation_density(c, dim), source=f"qam{m}")
        zs = z_star(state, ch, w)
        points.append(
            CovarianceSweepPoint(
                m=int(m),
                mbar=mbar,
                tau=ch.tau,
                xi=ch.xi,
                w=w,
                z_ch=zc,
                z_star=zs,
                cm_distance=cm_distance(mbar, zs, ch.tau, ch.xi),
                purification_trace_dist=bipartite_trace_distance(state, reference),
            )
        )
    return points


def sweep_csv_rows(points: list[CovarianceSweepPoint]) -> tuple[list[str], list[list]]:
    header = [
        "m", "mbar", "tau", "xi", "w",
        "z_ch", "z_star", "cm_distance", "purification_trace_dist",
    ]
    rows = [
        [p.m, p.mbar, p.tau, p.xi, p.w, p.z_ch, p.z_star, p.cm_distance,
         p.purification_trace_dist]
        for p in points
    ]
    return header, rows
