"""Sample quantile and ECDF helpers shared by the bootstrap and the oracle."""

from __future__ import annotations

import numpy as np


def ecdf_quantile(values, level: float) -> float:
    """Sample quantile by the inverse-ECDF rule with explicit tie handling.

    Sorting the values ascending as a_1 <= ... <= a_B, returns a_{b*} where

        b* = min{ b : (1/B) * #{c : a_c <= a_b} >= level }.

    Equivalent to the inverted-CDF quantile; ties are resolved through the
    count of values <= a_b rather than through positional rank.
    """
    a = np.sort(np.asarray(values, dtype=float).ravel())
    if a.size == 0:
        raise ValueError("cannot take a quantile of an empty sequence")
    if np.any(np.isnan(a)):
        raise ValueError("quantile input contains NaN")
    if not 0.0 < level <= 1.0:
        raise ValueError(f"level must lie in (0, 1], got {level}")
    counts = np.searchsorted(a, a, side="right")
    satisfied = counts >= level * a.size
    return float(a[int(np.argmax(satisfied))])


def ecdf_pvalue(draws, observed: float) -> float:
    """Fraction of draws at or above the observed statistic.

    The complement of the empirical CDF at ``observed``; reported alongside
    binary test decisions as a convenience.
    """
    a = np.asarray(draws, dtype=float).ravel()
    if a.size == 0:
        raise ValueError("cannot compute a p-value from an empty sequence")
    return float(np.mean(a >= observed))
