"""Exception types shared across the package."""


class DMCVQKDError(Exception):
    """Base class for all errors raised by this package."""


class NonPhysicalInput(DMCVQKDError):
    """Input outside the physically meaningful (or numerically guarded) range."""


class NotHermitian(DMCVQKDError):
    """Matrix expected to be Hermitian is not, within tolerance."""


class NotPSD(DMCVQKDError):
    """Matrix has an eigenvalue below the allowed negative tolerance."""


class ConvergenceFailure(DMCVQKDError):
    """Iterative numerical routine exceeded its iteration budget."""


class DimensionMismatch(DMCVQKDError):
    """Operands have incompatible dimensions."""


class TruncationTooSevere(DMCVQKDError):
    """Fock cutoff too small: trace mass lost to truncation exceeds the gate."""


class DegenerateSpectrum(DMCVQKDError):
    """Eigenbranch matching is ill-defined: spectral gaps too small for the perturbation."""


class InvalidOrder(DMCVQKDError):
    """Constellation side order is not a positive integer."""


class Unreachable(DMCVQKDError):
    """Requested target value lies outside the attainable range."""


class InvalidTarget(DMCVQKDError):
    """Target parameter outside its valid open interval."""


class InsufficientTestData(DMCVQKDError):
    """Not enough (or degenerate) test-set data for parameter estimation."""
