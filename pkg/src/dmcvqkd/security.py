"""Energy-test security arithmetic.

The energy-test failure term is the thermal tail (mbar/(mbar+1))^d, published
here up to the unknown constant of the original O(.) statement; outputs carry
an explicit up-to-constant marker so downstream users do not over-claim. The
diamond-norm term of the composed budget is always caller-supplied, never
computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .convergence import tail_mass
from .errors import InvalidTarget, NonPhysicalInput


@dataclass(frozen=True)
class SecurityBudget:
    """Composed attack-distinguishability budget eps_tilde + 2 * eps_test."""

    eps_test: float
    dim: int
    mbar: float
    eps_tilde: float
    eps_total: float
    up_to_constant: bool = True

    def __post_init__(self):
        if self.eps_total != self.eps_tilde + 2.0 * self.eps_test:
            raise NonPhysicalInput("eps_total must equal eps_tilde + 2 * eps_test")

    def to_json_dict(self) -> dict:
        return {
            "eps_test": self.eps_test,
            "dim": self.dim,
            "mbar": self.mbar,
            "eps_tilde": self.eps_tilde,
            "eps_total": self.eps_total,
            "up_to_constant": self.up_to_constant,
        }


def eps_test(mbar: float, d: int) -> float:
    """Energy-test tail term (mbar/(mbar+1))^d; identical to the thermal tail mass."""
    if d < 1:
        raise InvalidTarget(f"d must be >= 1, got {d}")
    return tail_mass(mbar, d)


def min_dim_for_eps(mbar: float, eps_target: float) -> int:
    """Smallest d with (mbar/(mbar+1))^d <= eps_target.

    The logarithmic candidate is verified by direct evaluation at d and d-1,
    so the result is exact despite floating-point rounding.
    """
    if not 0.0 < eps_target < 1.0:
        raise InvalidTarget(f"eps_target must be in (0, 1), got {eps_target}")
    if mbar <= 0.0:
        raise InvalidTarget(f"mbar must be > 0, got {mbar}")
    ratio = mbar / (mbar + 1.0)
    d = max(1, math.ceil(math.log(eps_target) / math.log(ratio)))
    while eps_test(mbar, d) > eps_target:
        d += 1
    while d > 1 and eps_test(mbar, d - 1) <= eps_target:
        d -= 1
    return d


def compose_budget(eps_tilde: float, mbar: float, d: int) -> SecurityBudget:
    """Total budget for the projected protocol: eps_tilde + 2 * eps_test(mbar, d)."""
    if eps_tilde < 0.0:
        raise NonPhysicalInput(f"eps_tilde must be >= 0, got {eps_tilde}")
    test = eps_test(mbar, d)
    return SecurityBudget(
        eps_test=test,
        dim=d,
        mbar=mbar,
        eps_tilde=eps_tilde,
        eps_total=eps_tilde + 2.0 * test,
    )
