"""Dynamic-range transform applied before factorization.

Measured transport spans many orders of magnitude, which a plain low-rank
factorization spends all its energy on. Compressing the range first with

    y = ln(1 + x / rho)

makes the small-but-visible tail competitive with the near-field peak. The
knee parameter rho decides where the curve bends from linear to
logarithmic; it is the single per-channel quantity the optimizer tunes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from scatterkit.errors import InvalidInputError

RHO_MIN_DEFAULT = 1e-4
RHO_MAX_DEFAULT = 1e4

# exp(710) overflows float64; leave margin for the rho multiply.
_SAFE_EXP_ARG = 700.0


@dataclass(frozen=True)
class TransformParams:
    rho: float
    rho_min: float = RHO_MIN_DEFAULT
    rho_max: float = RHO_MAX_DEFAULT

    def __post_init__(self):
        rho = float(self.rho)
        lo, hi = float(self.rho_min), float(self.rho_max)
        if not (0.0 < lo < hi) or not np.isfinite(hi):
            raise InvalidInputError(f"need 0 < rho_min < rho_max finite, got [{lo}, {hi}]")
        if not np.isfinite(rho) or not (lo <= rho <= hi):
            raise InvalidInputError(f"rho {rho} outside [{lo}, {hi}]")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "rho_min", lo)
        object.__setattr__(self, "rho_max", hi)


def forward_transform(values: np.ndarray, params: TransformParams) -> np.ndarray:
    """Map nonnegative measured values into the compressed domain elementwise."""
    x = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("transform input contains non-finite values")
    if np.any(x < 0.0):
        raise InvalidInputError("transform input must be nonnegative")
    return np.log1p(x / params.rho)


def inverse_transform(values: np.ndarray, params: TransformParams) -> tuple[np.ndarray, int]:
    """Map transformed values back to the measured domain.

    Negative reconstructions (a truncated factorization can undershoot) are
    clamped to zero; the count of clamped entries is returned alongside the
    values. Raises OverflowError when an input would exceed float64 range
    after exponentiation.
    """
    y = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(y)):
        raise InvalidInputError("inverse transform input contains non-finite values")
    if np.max(y, initial=0.0) > _SAFE_EXP_ARG:
        raise OverflowError(
            f"inverse transform input {np.max(y):.3g} overflows float64 for rho={params.rho}"
        )
    x = params.rho * np.expm1(y)
    clamped = int(np.count_nonzero(x < 0.0))
    return np.maximum(x, 0.0), clamped
