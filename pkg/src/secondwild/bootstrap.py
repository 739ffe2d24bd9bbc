"""Second-order wild bootstrap: residuals, replicates, bands, and tests.

The procedure perturbs the centered lagged products ("second-order
residuals") with correlated Gaussian multipliers whose covariance is a
kernel of the lag distance, recomputes the second-order estimators on each
perturbed set, and reads simultaneous confidence radii off the empirical
quantiles of the replicate max statistics:

    1. residuals   eps_i^(j) = X_i X_{i-j} - sigma_hat_j
    2. multipliers e_1..e_T joint normal, E[e_s e_t] = K((s - t)/k_T)
    3. replicate   sigma*_j = sigma_hat_j + (1/T) sum_{i>j} eps_i^(j) e_i,
                   rho*_j = sigma*_j / sigma*_0,
                   a* from the Moore-Penrose Yule-Walker solve on sigma*
    4. quantiles   of sqrt(T) max-deviations over B replicates
    5. bands       estimate +- radius / sqrt(T), or threshold tests.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .errors import DegenerateVarianceError, NumericalError
from .gaussian import PsdFactor, factorize_psd, gaussian_max_quantile
from .hac import (
    TARGET_ARCOEF,
    TARGET_AUTOCORR,
    TARGET_AUTOCOV,
    hac_arcoef_cov,
    hac_autocorr_cov,
    hac_autocov_cov,
)
from .kernels import BandwidthRule, KernelSpec, kernel_gram, select_bandwidth
from .quantiles import ecdf_pvalue, ecdf_quantile
from .rng import RngStream
from .series import (
    PINV_RCOND,
    SecondOrderEstimates,
    TimeSeries,
    _values,
    estimate_second_order,
    normalize_lag_set,
    second_order_residual_matrix,
)

# Replicates are processed in fixed-size chunks so that results do not
# depend on the number of worker threads.
_CHUNK = 64

TARGETS = (TARGET_AUTOCOV, TARGET_AUTOCORR, TARGET_ARCOEF)


@dataclass(frozen=True)
class BootstrapConfig:
    """Inputs of the bootstrap procedure.

    ``H`` indexes the autocovariances and ``I`` the autocorrelations covered
    by the simultaneous bands; ``p`` is the order of the fitted AR model.
    """

    d: int
    p: int
    H: tuple[int, ...]
    I: tuple[int, ...]
    kernel: KernelSpec = KernelSpec()
    bandwidth: BandwidthRule = field(default_factory=BandwidthRule.auto)
    B: int = 2000
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"maximum lag d must be >= 1, got {self.d}")
        if not 1 <= self.p <= self.d:
            raise ValueError(f"need 1 <= p <= d, got p={self.p}, d={self.d}")
        object.__setattr__(self, "H", normalize_lag_set(self.H, self.d, 0, "H"))
        object.__setattr__(self, "I", normalize_lag_set(self.I, self.d, 1, "I"))
        if self.B < 1:
            raise ValueError(f"replicate count B must be >= 1, got {self.B}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")

    @classmethod
    def table_defaults(cls, **overrides) -> "BootstrapConfig":
        """The default experiment layout: d=7, H={0..3}, I={1..4}, p=1."""
        base = dict(d=7, p=1, H=(0, 1, 2, 3), I=(1, 2, 3, 4))
        base.update(overrides)
        return cls(**base)


@dataclass(frozen=True)
class ResidualTable:
    """Second-order residuals, row j defined for i = j+1..T.

    ``rows`` is zero-padded to (d+1) x T so multiplier contractions are
    single matrix products; ``row(j)`` returns just the defined entries.
    """

    rows: np.ndarray
    d: int
    T: int

    def row(self, j: int) -> np.ndarray:
        if not 0 <= j <= self.d:
            raise ValueError(f"lag {j} out of range 0..{self.d}")
        return self.rows[j, j:]


def second_order_residuals(x, est: SecondOrderEstimates, d: int) -> ResidualTable:
    """Centered lagged products eps_i^(j) = X_i X_{i-j} - sigma_hat_j."""
    v = _values(x)
    if d >= v.size:
        raise ValueError(f"maximum lag {d} out of range for series of length {v.size}")
    rows = second_order_residual_matrix(v, est.sigma_hat, d)
    return ResidualTable(rows=rows, d=d, T=v.size)


@dataclass(frozen=True)
class BootstrapDraws:
    """Replicate max statistics, one entry per replicate."""

    delta_sigma: np.ndarray
    delta_rho: np.ndarray
    delta_a: np.ndarray

    def __post_init__(self):
        for name in ("delta_sigma", "delta_rho", "delta_a"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.size and not (np.all(np.isfinite(arr)) and np.all(arr >= 0.0)):
                raise ValueError(f"{name} must be nonnegative and finite")
            object.__setattr__(self, name, arr)

    def by_target(self) -> dict[str, np.ndarray]:
        return {
            TARGET_AUTOCOV: self.delta_sigma,
            TARGET_AUTOCORR: self.delta_rho,
            TARGET_ARCOEF: self.delta_a,
        }


@dataclass(frozen=True)
class FamilyBand:
    """Simultaneous band for one family of targets."""

    indices: tuple[int, ...]
    estimate: np.ndarray
    lower: np.ndarray
    upper: np.ndarray


@dataclass(frozen=True)
class TestResult:
    statistic: float
    radius: float
    reject: bool
    p_value: float


@dataclass
class InferenceReport:
    """Point estimates, simultaneous radii and bands, and provenance.

    ``radii[target]`` is the 1 - alpha quantile C* of the replicate max
    statistics; each band is estimate +- C* / sqrt(T).  ``tests`` is filled
    by :func:`hypothesis_tests`.  P-values, where present, are ECDF
    complements of the bootstrap draws (an additive convenience; the binary
    reject decision is the normative output).
    """

    estimates: SecondOrderEstimates
    radii: dict[str, float]
    bands: dict[str, FamilyBand]
    k_T: Optional[float]
    alpha: float
    seed: int
    method: str
    provenance: dict
    tests: Optional[dict[str, TestResult]] = None

    def to_dict(self) -> dict:
        est = self.estimates
        out = {
            "method": self.method,
            "alpha": self.alpha,
            "seed": self.seed,
            "k_T": self.k_T,
            "estimates": {
                "T": est.T,
                "d": est.d,
                "p": est.p,
                "H": list(est.H),
                "I": list(est.I),
                "sigma_hat": est.sigma_hat.tolist(),
                "rho_hat": est.rho_hat.tolist(),
                "a_hat": est.a_hat.tolist(),
                "used_pinv": bool(est.used_pinv),
            },
            "radii": {k: self.radii[k] for k in sorted(self.radii)},
            "bands": {
                k: {
                    "index": list(b.indices),
                    "estimate": b.estimate.tolist(),
                    "lower": b.lower.tolist(),
                    "upper": b.upper.tolist(),
                }
                for k, b in sorted(self.bands.items())
            },
            "provenance": self.provenance,
        }
        if self.tests is not None:
            out["tests"] = {
                k: {
                    "statistic": t.statistic,
                    "radius": t.radius,
                    "reject": bool(t.reject),
                    "p_value": t.p_value,
                }
                for k, t in sorted(self.tests.items())
            }
            out["p_value_definition"] = "fraction of bootstrap draws >= observed statistic"
        return out


def bootstrap_replicate(
    est: SecondOrderEstimates,
    residuals: ResidualTable,
    multipliers: np.ndarray,
    p: int,
    I,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One bootstrap replicate (sigma*, rho* over I, a*).

    ``multipliers`` is the full-length vector e_1..e_T; row j of the
    residual table consumes entries i = j+1..T of the same vector.  Raises
    ``DegenerateVarianceError`` when sigma*_0 lands exactly on zero.
    """
    multipliers = np.asarray(multipliers, dtype=float)
    if multipliers.shape != (residuals.T,):
        raise ValueError(f"multipliers must have shape ({residuals.T},), got {multipliers.shape}")
    I = normalize_lag_set(I, residuals.d, 1, "I")
    if not 1 <= p <= residuals.d:
        raise ValueError(f"need 1 <= p <= d, got p={p}, d={residuals.d}")
    delta = residuals.rows @ multipliers / residuals.T
    sigma_star = est.sigma_hat + delta
    if sigma_star[0] == 0.0:
        raise DegenerateVarianceError("replicate produced sigma*_0 = 0")
    rho_star = sigma_star[list(I)] / sigma_star[0]
    a_star = _pinv_yule_walker(sigma_star, p)
    return sigma_star, rho_star, a_star


def _pinv_yule_walker(sigma: np.ndarray, p: int) -> np.ndarray:
    """Moore-Penrose Yule-Walker solve, used unconditionally on replicates."""
    Sigma = scipy.linalg.toeplitz(sigma[:p])
    pinv = np.linalg.pinv(Sigma, rcond=PINV_RCOND, hermitian=True)
    return pinv @ sigma[1 : p + 1]


@lru_cache(maxsize=32)
def _builtin_multiplier_factor(kind: str, T: int, k_T: float) -> PsdFactor:
    return factorize_psd(kernel_gram(KernelSpec(kind=kind), T, k_T))


def multiplier_factor(kernel: KernelSpec, T: int, k_T: float) -> PsdFactor:
    """Factor of the multiplier covariance K((s - t)/k_T), cached for built-ins."""
    if kernel.func is None:
        return _builtin_multiplier_factor(kernel.kind, T, float(k_T))
    return factorize_psd(kernel_gram(kernel, T, k_T))


def run_bootstrap(
    x,
    config: BootstrapConfig,
    threads: int = 1,
    multiplier_override: Optional[Callable[[int, int], np.ndarray]] = None,
) -> tuple[InferenceReport, BootstrapDraws]:
    """Execute the full bootstrap and assemble the inference report.

    Replicate b draws its multipliers from stream (seed, b), so the result
    is a pure function of (x, config) no matter how many threads run the
    replicate loop.  ``multiplier_override`` is a test hook mapping
    (replicate index, T) to a multiplier vector, bypassing the Gaussian
    draw.

    A replicate whose sigma*_0 is exactly zero is redrawn once from stream
    (seed, B + b); a second failure aborts.  Occurrences are counted in the
    report provenance.
    """
    series = x if isinstance(x, TimeSeries) else TimeSeries.from_values(x)
    v = series.values
    T = v.size
    if T <= config.d:
        raise ValueError(f"series of length {T} too short for maximum lag {config.d}")
    est = estimate_second_order(v, config.d, config.p, config.H, config.I)
    residuals = second_order_residuals(v, est, config.d)
    k_T = select_bandwidth(v, config.bandwidth)
    factor = multiplier_factor(config.kernel, T, k_T) if multiplier_override is None else None

    B = config.B
    sqrt_T = np.sqrt(T)
    H_idx = np.asarray(config.H)
    I_idx = np.asarray(config.I)
    rho_hat_I = est.rho_hat[I_idx]
    delta_sigma = np.empty(B)
    delta_rho = np.empty(B)
    delta_a = np.empty(B)
    degenerate = [0]
    degenerate_lock = threading.Lock()

    def _multipliers(b: int) -> np.ndarray:
        if multiplier_override is not None:
            return np.asarray(multiplier_override(b, T), dtype=float)
        z = RngStream(config.seed, b).generator().standard_normal(T)
        return factor.L @ z

    def _finish(b: int, delta: np.ndarray) -> None:
        sigma_star = est.sigma_hat + delta
        if sigma_star[0] == 0.0:
            with degenerate_lock:
                degenerate[0] += 1
            redraw = _multipliers(B + b)
            delta = residuals.rows @ redraw / T
            sigma_star = est.sigma_hat + delta
            if sigma_star[0] == 0.0:
                raise NumericalError(f"replicate {b} degenerate (sigma*_0 = 0) after one redraw")
        i = b - 1
        delta_sigma[i] = sqrt_T * np.abs(delta[H_idx]).max()
        delta_rho[i] = sqrt_T * np.abs(sigma_star[I_idx] / sigma_star[0] - rho_hat_I).max()
        a_star = _pinv_yule_walker(sigma_star, config.p)
        delta_a[i] = sqrt_T * np.abs(a_star - est.a_hat).max()

    def _run_chunk(start: int) -> None:
        stop = min(start + _CHUNK, B)
        eps = np.empty((T, stop - start))
        for offset, b in enumerate(range(start + 1, stop + 1)):
            eps[:, offset] = _multipliers(b)
        deltas = residuals.rows @ eps / T
        for offset, b in enumerate(range(start + 1, stop + 1)):
            _finish(b, deltas[:, offset])

    starts = range(0, B, _CHUNK)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(_run_chunk, starts))
    else:
        for start in starts:
            _run_chunk(start)

    draws = BootstrapDraws(delta_sigma=delta_sigma, delta_rho=delta_rho, delta_a=delta_a)
    level = 1.0 - config.alpha
    radii = {target: ecdf_quantile(values, level) for target, values in draws.by_target().items()}
    report = InferenceReport(
        estimates=est,
        radii=radii,
        bands=_make_bands(est, radii),
        k_T=k_T,
        alpha=config.alpha,
        seed=config.seed,
        method="wild_bootstrap",
        provenance=_provenance(config, k_T, degenerate[0], est),
    )
    return report, draws


def _make_bands(est: SecondOrderEstimates, radii: dict[str, float]) -> dict[str, FamilyBand]:
    half = {target: radii[target] / np.sqrt(est.T) for target in radii}
    families = {
        TARGET_AUTOCOV: (est.H, est.sigma_hat[list(est.H)]),
        TARGET_AUTOCORR: (est.I, est.rho_hat[list(est.I)]),
        TARGET_ARCOEF: (tuple(range(1, est.p + 1)), est.a_hat),
    }
    return {
        target: FamilyBand(
            indices=indices,
            estimate=np.asarray(values),
            lower=np.asarray(values) - half[target],
            upper=np.asarray(values) + half[target],
        )
        for target, (indices, values) in families.items()
    }


def _provenance(config: BootstrapConfig, k_T: float, degenerate: int, est: SecondOrderEstimates) -> dict:
    return {
        "d": config.d,
        "p": config.p,
        "H": list(config.H),
        "I": list(config.I),
        "kernel": config.kernel.kind,
        "bandwidth": {
            "variant": config.bandwidth.variant,
            "k_T": config.bandwidth.k_T,
            "c": config.bandwidth.c,
        },
        "B": config.B,
        "alpha": config.alpha,
        "seed": config.seed,
        "k_T_used": k_T,
        "degenerate_resamples": degenerate,
        "used_pinv": bool(est.used_pinv),
    }


def run_plugin(
    x,
    config: BootstrapConfig,
    n_mc: int = 200_000,
    window_cutoff: float = 1e-12,
) -> InferenceReport:
    """Plug-in alternative to the bootstrap: HAC covariance + Gaussian-max oracle.

    Estimates the long-run covariance of each family with the kernel
    quadratic form and reads the simultaneous radius off Monte Carlo
    quantiles of the maximum of the matching Gaussian vector.  Exposed next
    to :func:`run_bootstrap`; neither route is canonical.
    """
    series = x if isinstance(x, TimeSeries) else TimeSeries.from_values(x)
    v = series.values
    if v.size <= config.d:
        raise ValueError(f"series of length {v.size} too short for maximum lag {config.d}")
    est = estimate_second_order(v, config.d, config.p, config.H, config.I)
    k_T = select_bandwidth(v, config.bandwidth)
    covs = {
        TARGET_AUTOCOV: hac_autocov_cov(v, est, config.H, config.kernel, k_T, window_cutoff),
        TARGET_AUTOCORR: hac_autocorr_cov(v, est, config.I, config.kernel, k_T, window_cutoff),
        TARGET_ARCOEF: hac_arcoef_cov(v, est, config.p, config.kernel, k_T, window_cutoff),
    }
    radii = {}
    for index, (target, cov) in enumerate(sorted(covs.items())):
        stream = RngStream(config.seed, index + 1)
        radii[target] = gaussian_max_quantile(cov, config.alpha, n_mc, stream)
    provenance = _provenance(config, k_T, 0, est)
    provenance["n_mc"] = n_mc
    return InferenceReport(
        estimates=est,
        radii=radii,
        bands=_make_bands(est, radii),
        k_T=k_T,
        alpha=config.alpha,
        seed=config.seed,
        method="gaussian_plugin",
        provenance=provenance,
    )


def hypothesis_tests(
    report: InferenceReport,
    draws: BootstrapDraws,
    sigma_e=None,
    rho_e=None,
    a_e=None,
) -> dict[str, TestResult]:
    """Threshold tests against hypothesized values, with ECDF p-values.

    For each provided family the null is rejected when
    sqrt(T) * max_j |estimate_j - hypothesized_j| exceeds the family's
    radius.  Hypothesized vectors align with sorted(H), sorted(I) and lags
    1..p respectively.  The decisions are attached to ``report.tests`` and
    returned.
    """
    est = report.estimates
    sqrt_T = np.sqrt(est.T)
    results: dict[str, TestResult] = {}

    def _one(target, values, hypothesized, draws_arr):
        hypothesized = np.asarray(hypothesized, dtype=float)
        if hypothesized.shape != values.shape:
            raise ValueError(
                f"hypothesized {target} values have shape {hypothesized.shape}, expected {values.shape}"
            )
        stat = float(sqrt_T * np.abs(values - hypothesized).max())
        radius = report.radii[target]
        results[target] = TestResult(
            statistic=stat,
            radius=radius,
            reject=bool(stat > radius),
            p_value=ecdf_pvalue(draws_arr, stat),
        )

    if sigma_e is not None:
        _one(TARGET_AUTOCOV, est.sigma_hat[list(est.H)], sigma_e, draws.delta_sigma)
    if rho_e is not None:
        _one(TARGET_AUTOCORR, est.rho_hat[list(est.I)], rho_e, draws.delta_rho)
    if a_e is not None:
        _one(TARGET_ARCOEF, est.a_hat, a_e, draws.delta_a)
    if not results:
        raise ValueError("no hypothesized values supplied")
    report.tests = results
    return results
