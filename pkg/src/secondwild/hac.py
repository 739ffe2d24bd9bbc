"""Kernel-weighted long-run covariance estimators.

Each estimator evaluates the quadratic form

    (1/T) * sum_{i1=j1+1}^{T} sum_{i2=j2+1}^{T} K((i1 - i2)/k_T) r_{i1}^{(j1)} r_{i2}^{(j2)}

for a family of residual sequences r^{(j)}: centered lagged products for
autocovariances, their studentized combination for autocorrelations, and
the Yule-Walker linearization for fitted AR coefficients.  The double sum
is evaluated by iterating over offsets m = i1 - i2 with K(m/k_T) above a
cutoff (default 1e-12), which turns O(T^2) work into O(T * window).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVarianceError
from .kernels import KernelSpec, kernel_eval, kernel_window
from .series import (
    SecondOrderEstimates,
    _values,
    linearization_matrix,
    normalize_lag_set,
    second_order_residual_matrix,
)

TARGET_AUTOCOV = "autocovariance"
TARGET_AUTOCORR = "autocorrelation"
TARGET_ARCOEF = "ar_coefficients"


@dataclass(frozen=True)
class LongRunCov:
    """Symmetric long-run covariance matrix over a labelled index set."""

    matrix: np.ndarray
    target: str
    labels: tuple[int, ...]
    k_T: float


def _weighted_quadratic(rows: np.ndarray, spec: KernelSpec, k_T: float, cutoff: float) -> np.ndarray:
    """Kernel-weighted cross sums of zero-padded rows, divided by T.

    Rows must already be zero outside their defined range; the padding makes
    the truncated summation limits implicit.
    """
    n, T = rows.shape
    m_max = kernel_window(spec, k_T, cutoff=cutoff, limit=T - 1)
    w = np.atleast_1d(kernel_eval(spec, np.arange(m_max + 1) / k_T))
    out = np.empty((n, n))
    for a in range(n):
        r1 = rows[a]
        for b in range(a, n):
            r2 = rows[b]
            s = w[0] * (r1 @ r2)
            for m in range(1, m_max + 1):
                s += w[m] * (r1[m:] @ r2[: T - m] + r1[: T - m] @ r2[m:])
            out[a, b] = out[b, a] = s
    return out / T


def hac_autocov_cov(
    x,
    est: SecondOrderEstimates,
    H,
    spec: KernelSpec,
    k_T: float,
    window_cutoff: float = 1e-12,
) -> LongRunCov:
    """Long-run covariance of sqrt(T) * sigma_hat over the lag set ``H``."""
    v = _values(x)
    H = normalize_lag_set(H, est.d, 0, "H")
    rows = second_order_residual_matrix(v, est.sigma_hat, est.d)[list(H)]
    matrix = _weighted_quadratic(rows, spec, k_T, window_cutoff)
    return LongRunCov(matrix=matrix, target=TARGET_AUTOCOV, labels=H, k_T=float(k_T))


def hac_autocorr_cov(
    x,
    est: SecondOrderEstimates,
    I,
    spec: KernelSpec,
    k_T: float,
    window_cutoff: float = 1e-12,
) -> LongRunCov:
    """Long-run covariance of sqrt(T) * rho_hat over the lag set ``I``.

    Uses the studentized residuals

        Zhat_{i,j} = -(sigma_hat_j / sigma_hat_0^2)(X_i^2 - sigma_hat_0)
                     + (1 / sigma_hat_0)(X_i X_{i-j} - sigma_hat_j),

    summed from i = j + 1 for row j.
    """
    v = _values(x)
    I = normalize_lag_set(I, est.d, 1, "I")
    s0 = est.sigma_hat[0]
    if s0 == 0.0:
        raise DegenerateVarianceError("sample variance is zero, autocorrelation residuals undefined")
    resid = second_order_residual_matrix(v, est.sigma_hat, est.d)
    rows = np.empty((len(I), v.size))
    for idx, j in enumerate(I):
        row = resid[j] / s0 - (est.sigma_hat[j] / (s0 * s0)) * resid[0]
        row[:j] = 0.0
        rows[idx] = row
    matrix = _weighted_quadratic(rows, spec, k_T, window_cutoff)
    return LongRunCov(matrix=matrix, target=TARGET_AUTOCORR, labels=I, k_T=float(k_T))


def hac_arcoef_cov(
    x,
    est: SecondOrderEstimates,
    p: int,
    spec: KernelSpec,
    k_T: float,
    window_cutoff: float = 1e-12,
) -> LongRunCov:
    """Long-run covariance of sqrt(T) * a_hat for the order-p Yule-Walker fit.

    Row j combines the centered lagged products through the linearization
    matrix built from the sample autocovariances (pseudo-inverse route):

        Zhat_{i,j} = sum_{k=0}^{p} bhat_{jk} (X_i X_{i-k} - sigma_hat_k),

    with products at i <= k absent (the truncated-sum convention) and the
    outer sums starting at i = j + 1.
    """
    v = _values(x)
    if not 1 <= p <= est.d:
        raise ValueError(f"need 1 <= p <= d, got p={p}, d={est.d}")
    lin = linearization_matrix(est.sigma_hat[: p + 1], p)
    resid = second_order_residual_matrix(v, est.sigma_hat, p)
    rows = lin.B @ resid
    for j in range(1, p + 1):
        rows[j - 1, :j] = 0.0
    matrix = _weighted_quadratic(rows, spec, k_T, window_cutoff)
    return LongRunCov(matrix=matrix, target=TARGET_ARCOEF, labels=tuple(range(1, p + 1)), k_T=float(k_T))
