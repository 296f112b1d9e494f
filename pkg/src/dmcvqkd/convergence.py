"""Distance of a constellation mixture to the thermal state with the same energy.

Covers the trace-distance decay across constellation orders, the geometric
tail mass of the thermal spectrum and the 6x tail bound derived from it, the
sorted-eigenvalue matching distance, and per-branch eigenvalue/eigenprojector
gaps against the thermal Fock branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constellation import Constellation, shaped_qam
from .errors import (
    DegenerateSpectrum,
    DimensionMismatch,
    NonPhysicalInput,
    TruncationTooSevere,
)
from .fock import DensityMatrix, _as_matrix, hermitian_eig, thermal_state, trace_norm_distance

DEFICIT_GATE = 1e-6
THERMAL_DEFICIT_TARGET = 1e-8
DEFAULT_BRANCHES = 6


@dataclass(frozen=True)
class ConvergenceReport:
    """One row of a constellation-vs-thermal comparison."""

    m: int
    mbar: float
    dim: int
    trace_dist: float
    tail_eps: float
    bound_6eps: float
    spectral_dist: float
    eig_gap: np.ndarray = field(repr=False)
    proj_gap: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.spectral_dist > self.trace_dist + 1e-9:
            raise NonPhysicalInput(
                f"spectral distance {self.spectral_dist} exceeds trace distance "
                f"{self.trace_dist} + 1e-9"
            )


def constellation_density(c: Constellation, dim: int) -> DensityMatrix:
    """Mixture sum(p_k |x_k><x_k|) over truncated coherent vectors.

    The coefficients are grown with the same running recurrence as
    coherent_fock, vectorized over all points at once. Raises when the
    truncation deficit reaches 1e-6; retry with a larger dim.
    """
    if dim < 1:
        raise NonPhysicalInput(f"dim must be >= 1, got {dim}")
    pts = c.points
    energies = np.abs(pts) ** 2
    if float(energies.max()) > 50.0:
        raise NonPhysicalInput("a constellation point exceeds the |x|^2 <= 50 guard")
    coeffs = np.empty((pts.size, dim), dtype=complex)
    coeffs[:, 0] = np.exp(-energies / 2.0)
    for n in range(dim - 1):
        coeffs[:, n + 1] = coeffs[:, n] * pts / math.sqrt(n + 1)
    rho = (coeffs.T * c.probs) @ coeffs.conj()
    rho = 0.5 * (rho + rho.conj().T)
    deficit = max(0.0, 1.0 - float(np.trace(rho).real))
    if deficit >= DEFICIT_GATE:
        raise TruncationTooSevere(
            f"deficit {deficit:.3e} at dim {dim}; increase the Fock cutoff"
        )
    return DensityMatrix(dim, rho, deficit)


def tail_mass(mbar: float, d: int) -> float:
    """Thermal spectrum mass above the first d levels: (mbar/(mbar+1))^d."""
    if mbar < 0:
        raise NonPhysicalInput(f"mbar must be >= 0, got {mbar}")
    if d < 0:
        raise NonPhysicalInput(f"d must be >= 0, got {d}")
    return (mbar / (mbar + 1.0)) ** d


def approximation_bound(mbar: float, d: int) -> float:
    """6 * tail_mass; values above 2 are vacuous (trace distance caps at 2)."""
    return 6.0 * tail_mass(mbar, d)


def min_dim_for_deficit(mbar: float, deficit: float = THERMAL_DEFICIT_TARGET) -> int:
    """Smallest cutoff whose thermal tail is below ``deficit``."""
    if mbar == 0:
        return 1
    d = 1
    while tail_mass(mbar, d) >= deficit:
        d += 1
    return d


def spectral_distance(a, b) -> float:
    """Optimal matching distance between eigenvalue multisets.

    For Hermitian operands the descending-sorted pairing is optimal, so this
    is max_k |lambda_k - mu_k| over sorted spectra.
    """
    ma, mb = _as_matrix(a), _as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionMismatch(f"shapes {ma.shape} and {mb.shape} differ")
    va = np.linalg.eigvalsh(ma)
    vb = np.linalg.eigvalsh(mb)
    return float(np.max(np.abs(va - vb)))


def thermal_eigenvalue(mbar: float, k: int) -> float:
    """Closed-form thermal Fock weight mbar^k / (mbar+1)^(k+1)."""
    return (mbar / (mbar + 1.0)) ** k / (mbar + 1.0)


def eigen_convergence(
    c: Constellation,
    mbar: float,
    dim: int,
    k_branches: int = DEFAULT_BRANCHES,
    strict: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-branch gaps between the constellation and thermal eigensystems.

    Eigenvalues pair by descending order, which is always well defined:
    eig_gap[k] = |lambda_{k,n} - mbar^k/(mbar+1)^(k+1)|. Projector gaps need
    identifiable branches: the k-th perturbed eigenvalue (and its neighbors)
    must stay within half the isolation gap of the k-th thermal eigenvalue.
    Unidentifiable branches raise DegenerateSpectrum when ``strict``,
    otherwise their proj_gap entry is NaN.
    """
    if not 1 <= k_branches <= dim:
        raise NonPhysicalInput(f"k_branches must be in [1, dim], got {k_branches}")
    rho = constellation_density(c, dim)
    spec = hermitian_eig(rho)
    thermal = np.array([thermal_eigenvalue(mbar, k) for k in range(dim)])
    shifts = np.abs(spec.eigenvalues - thermal)
    eig_gap = shifts[:k_branches].copy()

    proj_gap = np.full(k_branches, np.nan)
    for k in range(k_branches):
        left_ok = k == 0 or (
            thermal[k - 1] - thermal[k] > 2.0 * max(shifts[k - 1], shifts[k])
        )
        right_ok = (
            thermal[k] - thermal[k + 1] > 2.0 * max(shifts[k], shifts[k + 1])
            if k + 1 < dim
            else True
        )
        if not (left_ok and right_ok):
            if strict:
                raise DegenerateSpectrum(
                    f"branch {k} not isolated: thermal gap too small for the "
                    f"observed eigenvalue shift"
                )
            continue
        # thermal eigenvector for branch k is the Fock basis vector |k>
        overlap_sq = float(np.abs(spec.vectors[k, k]) ** 2)
        proj_gap[k] = 2.0 * math.sqrt(max(0.0, 1.0 - overlap_sq))
    return eig_gap, proj_gap


def compare_to_thermal(
    c: Constellation,
    mbar: float,
    dim: int,
    k_branches: int = DEFAULT_BRANCHES,
    m: int | None = None,
) -> ConvergenceReport:
    """Full comparison of one constellation against thermal(mbar) at a cutoff."""
    rho = constellation_density(c, dim)
    sigma = thermal_state(mbar, dim)
    trace_dist = trace_norm_distance(rho, sigma)
    spec_dist = spectral_distance(rho, sigma)
    eig_gap, proj_gap = eigen_convergence(c, mbar, dim, k_branches, strict=False)
    side = m if m is not None else (c.order or 0)
    return ConvergenceReport(
        m=side,
        mbar=mbar,
        dim=dim,
        trace_dist=trace_dist,
        tail_eps=tail_mass(mbar, dim),
        bound_6eps=approximation_bound(mbar, dim),
        spectral_dist=spec_dist,
        eig_gap=eig_gap,
        proj_gap=proj_gap,
    )


def convergence_sweep(
    orders,
    mbar: float,
    dim: int | None = None,
    k_branches: int = DEFAULT_BRANCHES,
    coverage: float = 2.5,
) -> list[ConvergenceReport]:
    """Compare MB-shaped square QAM against thermal(mbar) across side orders.

    Shaping is solved per order to hit ``mbar`` exactly (see shaped_qam). One
    shared cutoff is used for every order; by default it is chosen so the
    thermal deficit stays below 1e-8.
    """
    if dim is None:
        dim = min_dim_for_deficit(mbar)
    reports = []
    for m in orders:
        c, _ = shaped_qam(int(m), mbar, coverage)
        reports.append(compare_to_thermal(c, mbar, dim, k_branches, m=int(m)))
    return reports


def sweep_csv_rows(reports: list[ConvergenceReport]) -> tuple[list[str], list[list]]:
    """Header and rows for the sweep CSV interface."""
    if not reports:
        return [], []
    k = reports[0].eig_gap.size
    header = ["m", "mbar", "dim", "trace_dist", "tail_eps", "bound_6eps", "spectral_dist"]
    header += [f"eig_gap_{i}" for i in range(k)]
    header += [f"proj_gap_{i}" for i in range(k)]
    rows = []
    for r in reports:
        row = [r.m, r.mbar, r.dim, r.trace_dist, r.tail_eps, r.bound_6eps, r.spectral_dist]
        row += [float(g) for g in r.eig_gap]
        row += [float(g) for g in r.proj_gap]
        rows.append(row)
    return header, rows
