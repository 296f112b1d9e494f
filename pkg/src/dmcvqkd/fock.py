"""Dense complex linear algebra over the truncated Fock basis.

All states live in the first ``dim`` photon-number levels. Truncated states are
never renormalized: the trace mass lost to the cutoff is carried explicitly as
a ``deficit`` so callers can gate on it. Basis ordering is Fock index
ascending; two-mode tensors are A-major, i.e. the basis state |l>_A |k>_B sits
at row ``l * dim + k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    NonPhysicalInput,
    NotHermitian,
    NotPSD,
)

HERMITICITY_TOL = 1e-12
HERMITICITY_INPUT_TOL = 1e-10
PSD_EIGENVALUE_FLOOR = -1e-10
TRACE_BUDGET_TOL = 1e-10
ORTHONORMALITY_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-9
COHERENT_ENERGY_GUARD = 50.0


def _as_matrix(m) -> np.ndarray:
    """Accept a DensityMatrix or a raw square ndarray."""
    if isinstance(m, DensityMatrix):
        return m.entries
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FockVector:
    """State vector over the first ``dim`` Fock levels.

    Physical vectors built by this module carry squared norm <= 1 (coherent
    truncations lose tail mass, never gain it).
    """

    dim: int
    amps: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise NonPhysicalInput(f"dim must be >= 1, got {self.dim}")
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (self.dim,):
            raise DimensionMismatch(
                f"amps has shape {amps.shape}, expected ({self.dim},)"
            )
        if not np.all(np.isfinite(amps.view(float))):
            raise NonPhysicalInput("amps contains non-finite entries")
        n2 = float(np.vdot(amps, amps).real)
        if n2 > 1.0 + 1e-12:
            raise NonPhysicalInput(f"squared norm {n2} exceeds 1 + 1e-12")
        object.__setattr__(self, "amps", _readonly(amps))

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def projector(self) -> np.ndarray:
        """Rank-one operator |v><v| as a dense matrix."""
        return np.outer(self.amps, self.amps.conj())


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian PSD matrix on the truncated Fock space plus truncation deficit.

    Invariants checked at construction: Hermiticity within 1e-12, smallest
    eigenvalue >= -1e-10, and trace + deficit = 1 within 1e-10.
    """

    dim: int
    entries: np.ndarray
    deficit: float = 0.0

    def __post_init__(self):
        if self.dim < 1:
            raise NonPhysicalInput(f"dim must be >= 1, got {self.dim}")
        entries = np.asarray(self.entries, dtype=complex)
        if entries.shape != (self.dim, self.dim):
            raise DimensionMismatch(
                f"entries has shape {entries.shape}, expected ({self.dim}, {self.dim})"
            )
        herm_gap = float(np.max(np.abs(entries - entries.conj().T)))
        if herm_gap > HERMITICITY_TOL:
            raise NotHermitian(f"Hermiticity violated by {herm_gap:.3e}")
        low = float(np.linalg.eigvalsh(entries)[0])
        if low < PSD_EIGENVALUE_FLOOR:
            raise NotPSD(f"smallest eigenvalue {low:.3e} below {PSD_EIGENVALUE_FLOOR}")
        if not (0.0 <= self.deficit <= 1.0):
            raise NonPhysicalInput(f"deficit {self.deficit} outside [0, 1]")
        budget = float(np.trace(entries).real) + self.deficit
        if abs(budget - 1.0) > TRACE_BUDGET_TOL:
            raise NonPhysicalInput(f"trace + deficit = {budget} is not 1 within 1e-10")
        object.__setattr__(self, "entries", _readonly(entries))
        object.__setattr__(self, "deficit", float(self.deficit))

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)


@dataclass(frozen=True)
class Spectrum:
    """Full eigendecomposition, eigenvalues sorted descending.

    ``vectors`` holds the eigenvectors as columns, in eigenvalue order.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float)
        vecs = np.asarray(self.vectors, dtype=complex)
        if np.any(np.diff(vals) > 0):
            raise NonPhysicalInput("eigenvalues must be sorted descending")
        gram = vecs.conj().T @ vecs
        ortho_gap = float(np.max(np.abs(gram - np.eye(vecs.shape[1]))))
        if ortho_gap > ORTHONORMALITY_TOL:
            raise NonPhysicalInput(f"eigenvectors not orthonormal: {ortho_gap:.3e}")
        object.__setattr__(self, "eigenvalues", _readonly(vals))
        object.__setattr__(self, "vectors", _readonly(vecs))

    def eigenvector(self, k: int) -> FockVector:
        return FockVector(self.vectors.shape[0], self.vectors[:, k])

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.eigenvalues) @ self.vectors.conj().T


def coherent_fock(alpha: complex, dim: int) -> FockVector:
    """First ``dim`` Fock coefficients of the coherent state |alpha>.

    Coefficients follow the running recurrence c_{n+1} = c_n * alpha/sqrt(n+1)
    from c_0 = exp(-|alpha|^2/2); no explicit factorials. The squared norm is
    1 minus the upper-tail Poisson probability of mean |alpha|^2 at ``dim``.
    """
    if dim < 1:
        raise NonPhysicalInput(f"dim must be >= 1, got {dim}")
    energy = abs(alpha) ** 2
    if energy > COHERENT_ENERGY_GUARD:
        raise NonPhysicalInput(
            f"|alpha|^2 = {energy:.3f} exceeds the guard {COHERENT_ENERGY_GUARD}"
        )
    amps = np.empty(dim, dtype=complex)
    c = math.exp(-energy / 2.0)
    amps[0] = c
    for n in range(dim - 1):
        c = c * alpha / math.sqrt(n + 1)
        amps[n + 1] = c
    return FockVector(dim, amps)


def thermal_state(mbar: float, dim: int) -> DensityMatrix:
    """Thermal state with mean photon number ``mbar``, truncated to ``dim`` levels.

    Diagonal entries mbar^k/(mbar+1)^(k+1); deficit (mbar/(mbar+1))^dim.
    """
    if mbar < 0:
        raise NonPhysicalInput(f"mbar must be >= 0, got {mbar}")
    if dim < 1:
        raise NonPhysicalInput(f"dim must be >= 1, got {dim}")
    ratio = mbar / (mbar + 1.0)
    diag = np.power(ratio, np.arange(dim)) / (mbar + 1.0)
    deficit = ratio**dim
    return DensityMatrix(dim, np.diag(diag.astype(complex)), deficit)


def hermitian_eig(m) -> Spectrum:
    """Full eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    a = _as_matrix(m)
    herm_gap = float(np.max(np.abs(a - a.conj().T)))
    if herm_gap > HERMITICITY_INPUT_TOL:
        raise NotHermitian(f"input deviates from Hermitian by {herm_gap:.3e}")
    try:
        vals, vecs = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigensolver did not converge: {exc}") from exc
    spectrum = Spectrum(vals[::-1], vecs[:, ::-1])
    residual = float(np.linalg.norm(spectrum.reconstruct() - a))
    if residual > RECONSTRUCTION_TOL * max(1.0, float(np.linalg.norm(a))):
        raise ConvergenceFailure(f"reconstruction residual {residual:.3e} too large")
    return spectrum


def matrix_sqrt_psd(m) -> np.ndarray:
    """PSD square root S with S @ S = m within Frobenius 1e-8.

    Eigenvalues in [-1e-10, 0) are clamped to zero; anything lower raises,
    to distinguish numerical noise from modeling bugs.
    """
    a = _as_matrix(m)
    spec = hermitian_eig(a)
    vals = spec.eigenvalues.copy()
    low = float(vals.min(initial=0.0))
    if low < PSD_EIGENVALUE_FLOOR:
        raise NotPSD(f"eigenvalue {low:.3e} below {PSD_EIGENVALUE_FLOOR}")
    vals[vals < 0.0] = 0.0
    root = (spec.vectors * np.sqrt(vals)) @ spec.vectors.conj().T
    return 0.5 * (root + root.conj().T)


def trace_norm(m) -> float:
    """Trace (L1) norm of a Hermitian matrix: sum of absolute eigenvalues."""
    a = _as_matrix(m)
    return float(np.sum(np.abs(np.linalg.eigvalsh(a))))


def trace_norm_distance(a, b) -> float:
    """||a - b||_1 for Hermitian operators of equal dimension."""
    ma, mb = _as_matrix(a), _as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionMismatch(f"shapes {ma.shape} and {mb.shape} differ")
    return trace_norm(ma - mb)


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product with the first factor as the A (major) mode."""
    return np.kron(_as_matrix(a), _as_matrix(b))


def partial_trace(m, side: str) -> np.ndarray:
    """Trace out one mode of a two-mode operator on a d^2-dimensional space.

    ``side`` names the subsystem being traced out, so
    partial_trace(tensor_product(a, b), "B") == a * trace(b).
    """
    a = _as_matrix(m)
    total = a.shape[0]
    d = math.isqrt(total)
    if d * d != total:
        raise DimensionMismatch(f"dimension {total} is not a perfect square")
    t = a.reshape(d, d, d, d)
    if side == "A":
        return np.einsum("aiaj->ij", t)
    if side == "B":
        return np.einsum("iaja->ij", t)
    raise DimensionMismatch(f"side must be 'A' or 'B', got {side!r}")


def annihilation_op(dim: int) -> np.ndarray:
    """Truncated annihilation operator: sqrt(k) at (k-1, k)."""
    if dim < 2:
        raise NonPhysicalInput(f"dim must be >= 2, got {dim}")
    return np.diag(np.sqrt(np.arange(1.0, dim)), k=1)
