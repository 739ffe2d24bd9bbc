"""Covariance kernels, their Gram matrices, and bandwidth selection.

A kernel here is a symmetric function K with K(0) = 1, nonincreasing on
[0, inf) and with nonnegative Fourier transform, so that the Gram matrix
{K((s - j)/k_T)} is positive semi-definite for every bandwidth k_T.  The
Gaussian kernel exp(-x^2/2) is the built-in choice; custom evaluators are
accepted and sanity-checked on a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .series import _values, autocov_vector


@dataclass(frozen=True)
class KernelSpec:
    """A kernel identified by name, or a custom evaluator.

    Custom evaluators must map reals into [0, 1]; they are checked on a
    grid for K(0) = 1, symmetry, and monotone decay at construction.
    """

    kind: str = "gaussian"
    func: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.func is None:
            if self.kind != "gaussian":
                raise ValueError(f"unknown kernel kind {self.kind!r} (built-in: gaussian)")
        else:
            _check_kernel_on_grid(self.func, self.kind)


def _check_kernel_on_grid(func, kind):
    grid = np.linspace(0.0, 10.0, 201)
    vals = np.asarray([float(func(np.asarray(t))) for t in grid])
    neg = np.asarray([float(func(np.asarray(-t))) for t in grid])
    if abs(vals[0] - 1.0) > 1e-10:
        raise ValueError(f"kernel {kind!r} must satisfy K(0) = 1, got {vals[0]}")
    if np.any(vals < -1e-12) or np.any(vals > 1.0 + 1e-12):
        raise ValueError(f"kernel {kind!r} must map into [0, 1]")
    if np.max(np.abs(vals - neg)) > 1e-10:
        raise ValueError(f"kernel {kind!r} must be symmetric")
    if np.any(np.diff(vals) > 1e-12):
        raise ValueError(f"kernel {kind!r} must be nonincreasing on [0, inf)")


def kernel_eval(spec: KernelSpec, x):
    """Evaluate the kernel at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if spec.func is not None:
        out = spec.func(np.abs(x))
    else:
        out = np.exp(-0.5 * x * x)
    return float(out) if np.ndim(out) == 0 else np.asarray(out, dtype=float)


def kernel_window(spec: KernelSpec, k_T: float, cutoff: float = 1e-12, limit: int | None = None) -> int:
    """Largest integer offset m with K(m / k_T) >= cutoff.

    The kernel is nonincreasing away from zero, so scanning outward and
    stopping at the first value below the cutoff is exact.  ``limit`` caps
    the scan (typically T - 1).
    """
    if k_T <= 0:
        raise ValueError(f"bandwidth must be positive, got {k_T}")
    if cutoff <= 0:
        if limit is None:
            raise ValueError("cutoff 0 requires an explicit limit")
        return limit
    m = 0
    while limit is None or m < limit:
        if kernel_eval(spec, (m + 1) / k_T) < cutoff:
            return m
        m += 1
    return m


def kernel_gram(spec: KernelSpec, T: int, k_T: float) -> np.ndarray:
    """Symmetric Toeplitz matrix with entries K((s - j) / k_T), s, j = 1..T."""
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if k_T <= 0:
        raise ValueError(f"bandwidth must be positive, got {k_T}")
    first_row = kernel_eval(spec, np.arange(T) / k_T)
    return scipy.linalg.toeplitz(np.atleast_1d(first_row))


@dataclass(frozen=True)
class BandwidthRule:
    """Either a fixed bandwidth or the automatic flat-top threshold rule."""

    variant: str
    k_T: Optional[float] = None
    c: float = 2.0

    def __post_init__(self):
        if self.variant == "fixed":
            if self.k_T is None or self.k_T <= 0:
                raise ValueError(f"fixed bandwidth must be positive, got {self.k_T}")
        elif self.variant == "auto":
            if self.c <= 0:
                raise ValueError(f"threshold constant must be positive, got {self.c}")
        else:
            raise ValueError(f"unknown bandwidth variant {self.variant!r}")

    @classmethod
    def fixed(cls, k_T: float) -> "BandwidthRule":
        return cls(variant="fixed", k_T=float(k_T))

    @classmethod
    def auto(cls, c: float = 2.0) -> "BandwidthRule":
        return cls(variant="auto", c=float(c))


def select_bandwidth(x, rule: BandwidthRule) -> float:
    """Resolve a bandwidth rule on a concrete series.

    Fixed rules echo their value.  The automatic rule looks at the
    correlogram: with L = floor(sqrt(T)) and K_n = max(5, ceil(sqrt(log10 T)))
    it finds the smallest q such that the next K_n sample autocorrelations
    |rho_hat_{q+1}|, ..., |rho_hat_{q+K_n}| all fall below
    c * sqrt(log10(T) / T), and returns k_T = max(1, 2q).  If no such q
    exists within 0..L the conservative cap max(1, 2L) is returned.
    """
    if rule.variant == "fixed":
        return float(rule.k_T)
    v = _values(x)
    T = v.size
    if T < 20:
        raise ValueError(
            f"automatic bandwidth selection needs T >= 20 (got {T}); use BandwidthRule.fixed instead"
        )
    L = math.isqrt(T)
    K_n = max(5, math.ceil(math.sqrt(math.log10(T))))
    threshold = rule.c * math.sqrt(math.log10(T) / T)
    sigma = autocov_vector(v, min(L + K_n, T - 1))
    if sigma[0] == 0.0:
        return 1.0
    rho = np.abs(sigma / sigma[0])
    for q in range(L + 1):
        upper = q + K_n
        if upper >= rho.size:
            break
        if np.all(rho[q + 1 : upper + 1] < threshold):
            return max(1.0, 2.0 * q)
    return max(1.0, 2.0 * L)
