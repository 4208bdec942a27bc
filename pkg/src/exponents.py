"""Characteristic exponent of a spherical eigenvalue."""

from __future__ import annotations

import numpy as np


def gamma(lam: float | np.ndarray, dimension: int) -> float | np.ndarray:
    """Positive root of ``g * (g + N - 1) = lam``.

    Args:
        lam: Eigenvalue (or array of eigenvalues), nonnegative.
        dimension: Spatial dimension N of the flat boundary.

    Raises:
        ValueError: If ``lam`` is negative or ``dimension`` < 1.
    """
    if dimension < 1:
        raise ValueError(f"dimension must be at least 1, got {dimension}")
    values = np.asarray(lam, dtype=float)
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise ValueError("eigenvalue must be finite and nonnegative")
    half = (dimension - 1) / 2
    result = np.sqrt(half * half + values) - half
    if result.ndim == 0:
        return float(result)
    return result


__all__ = ["gamma"]
