"""Monte Carlo experiments: variance study, coverage study, Gaussian-max check.

The coverage study supports two execution modes.  ``full`` runs a complete
bootstrap (B replicates) inside every Monte Carlo repetition.  The much
cheaper ``warp_speed`` mode draws exactly one bootstrap replicate per
repetition, pools those draws into a single quantile per scenario, and
counts how many repetitions' max-deviation statistics fall inside the
pooled band.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from functools import lru_cache

import numpy as np
import scipy.stats

from .bootstrap import BootstrapConfig, _pinv_yule_walker, run_bootstrap
from .dgp import MODELS, DgpSpec, InnovationKind, gen_series, model_autocovariances, parse_innovation
from .gaussian import max_abs_normal_sample
from .hac import TARGET_ARCOEF, TARGET_AUTOCORR, TARGET_AUTOCOV, hac_autocov_cov
from .kernels import BandwidthRule, KernelSpec, select_bandwidth
from .quantiles import ecdf_quantile
from .rng import RngStream, derive_seed
from .series import ar_order_select_aic, autocov_vector, estimate_second_order
from .sieve import SieveConfig, ar_sieve_bootstrap

TARGETS = (TARGET_AUTOCOV, TARGET_AUTOCORR, TARGET_ARCOEF)
METHODS = ("wild", "sieve")

# Fixed internals of the plug-in truth for the nonlinear model.
_TRUTH_SEED = 77_003_917
_TRUTH_LENGTH = 10**7
_TRUTH_BURN_IN = 10_000

_CHUNK = 32


@lru_cache(maxsize=None)
def _nlar2_plugin_autocov(innovation: InnovationKind, max_lag: int) -> tuple[float, ...]:
    spec = DgpSpec(
        model="nlar2",
        innovation=innovation,
        T=_TRUTH_LENGTH,
        burn_in=_TRUTH_BURN_IN,
        seed=_TRUTH_SEED,
    )
    series = gen_series(spec)
    return tuple(autocov_vector(series, max_lag).tolist())


def true_autocovariances(model: str, innovation, rho: float, max_lag: int) -> tuple[np.ndarray, bool]:
    """True autocovariances of a scenario, and whether they are approximate.

    Linear models have closed forms that do not depend on the innovation
    kind (all kinds share second-order structure).  The nonlinear model is
    handled by a long plug-in simulation with a fixed internal seed and is
    flagged approximate.
    """
    if model == "nlar2":
        values = _nlar2_plugin_autocov(parse_innovation(innovation), max_lag)
        return np.asarray(values), True
    return model_autocovariances(model, rho, max_lag), False


@dataclass(frozen=True)
class Scenario:
    model: str
    innovation: InnovationKind
    rho: float = 0.9

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r} (valid: {', '.join(MODELS)})")
        object.__setattr__(self, "innovation", parse_innovation(self.innovation))

    @classmethod
    def parse(cls, text: str, rho: float = 0.9) -> "Scenario":
        parts = text.split(":")
        if len(parts) != 2:
            raise ValueError(f"scenario must look like 'model:innovation', got {text!r}")
        model = parts[0].strip().lower()
        return cls(model=model, innovation=parse_innovation(parts[1].strip()), rho=rho)

    @property
    def label(self) -> str:
        return f"{self.model}:{self.innovation.value}"


def all_scenarios(rho: float = 0.9) -> list[Scenario]:
    """The full grid: five models crossed with three innovation kinds."""
    return [
        Scenario(model=m, innovation=kind, rho=rho)
        for m in ("ar1", "ar2", "ar4", "ma3", "nlar2")
        for kind in InnovationKind
    ]


@dataclass(frozen=True)
class VarianceStudyRow:
    innovation: str
    n: int
    reps: int
    mean_rho_hat: float
    var_root_rho: float
    mean_gamma1_hat: float
    var_root_gamma1: float


@dataclass(frozen=True)
class VarianceStudyReport:
    """Sampling variance of rho_hat and gamma_hat_1 under each innovation kind."""

    rows: tuple[VarianceStudyRow, ...]
    n: int
    reps: int
    rho: float
    seed: int

    def to_csv(self) -> str:
        return _rows_to_csv(self.rows, VarianceStudyRow)

    @classmethod
    def from_csv(cls, text: str, n: int, reps: int, rho: float, seed: int) -> "VarianceStudyReport":
        rows = _rows_from_csv(text, VarianceStudyRow)
        return cls(rows=tuple(rows), n=n, reps=reps, rho=rho, seed=seed)


def variance_study(n: int, reps: int, stream: RngStream, rho: float = 0.7) -> VarianceStudyReport:
    """Sampling distribution of rho_hat = sigma_hat_1/sigma_hat_0 and gamma_hat_1.

    Simulates an AR(1) with the given coefficient under each innovation
    kind and reports the mean estimate plus the variance of the root
    sqrt(n) * (estimate - truth).  The three kinds share every second-order
    parameter, so any spread across rows is a pure higher-order effect.
    """
    if n < 1000:
        raise ValueError(f"n must be >= 1000, got {n}")
    if reps < 100:
        raise ValueError(f"reps must be >= 100, got {reps}")
    gamma0 = 1.0 / (1.0 - rho * rho)
    gamma1 = rho * gamma0
    rows = []
    for k_idx, kind in enumerate(InnovationKind):
        rho_hat = np.empty(reps)
        gamma1_hat = np.empty(reps)
        for r in range(reps):
            seed = derive_seed(stream.seed, (stream.stream_index, k_idx, r))
            series = gen_series(DgpSpec(model="ar1", innovation=kind, T=n, rho=rho, seed=seed))
            sigma = autocov_vector(series, 1)
            rho_hat[r] = sigma[1] / sigma[0]
            gamma1_hat[r] = sigma[1]
        rows.append(
            VarianceStudyRow(
                innovation=kind.value,
                n=n,
                reps=reps,
                mean_rho_hat=float(rho_hat.mean()),
                var_root_rho=float(np.var(np.sqrt(n) * (rho_hat - rho), ddof=1)),
                mean_gamma1_hat=float(gamma1_hat.mean()),
                var_root_gamma1=float(np.var(np.sqrt(n) * (gamma1_hat - gamma1), ddof=1)),
            )
        )
    return VarianceStudyReport(rows=tuple(rows), n=n, reps=reps, rho=rho, seed=stream.seed)


@dataclass(frozen=True)
class CoverageRow:
    model: str
    innovation: str
    rho: float
    target: str
    method: str
    coverage: float
    se: float
    order: int
    mean_k_T: float
    reps: int
    T: int
    truth_approximate: bool


@dataclass(frozen=True)
class CoverageReport:
    """Coverage of the simultaneous bands against the scenario truths."""

    rows: tuple[CoverageRow, ...]
    T: int
    reps: int
    alpha: float
    mode: str
    B: int
    seed: int

    def row(self, model: str, innovation, target: str, method: str, rho=None) -> CoverageRow:
        innovation = parse_innovation(innovation).value
        for r in self.rows:
            if (r.model, r.innovation, r.target, r.method) == (model, innovation, target, method):
                if rho is None or r.rho == rho:
                    return r
        raise KeyError(f"no row for {model}:{innovation} {target} {method}")

    def to_csv(self) -> str:
        return _rows_to_csv(self.rows, CoverageRow)

    def to_json(self) -> dict:
        return {
            "T": self.T,
            "reps": self.reps,
            "alpha": self.alpha,
            "mode": self.mode,
            "B": self.B,
            "seed": self.seed,
            "rows": [asdict(r) for r in self.rows],
        }

    @classmethod
    def from_csv(cls, text: str, T: int, reps: int, alpha: float, mode: str, B: int, seed: int) -> "CoverageReport":
        rows = _rows_from_csv(text, CoverageRow)
        return cls(rows=tuple(rows), T=T, reps=reps, alpha=alpha, mode=mode, B=B, seed=seed)


def coverage_study(
    scenarios,
    T: int,
    reps: int,
    stream: RngStream,
    mode: str = "warp_speed",
    B: int = 500,
    alpha: float = 0.05,
    d: int = 7,
    H=(0, 1, 2, 3),
    I=(1, 2, 3, 4),
    p_max: int = 7,
    methods=METHODS,
    burn_in: int = 1000,
    threads: int = 1,
    kernel: KernelSpec = KernelSpec(),
) -> CoverageReport:
    """Empirical coverage of the wild-bootstrap and sieve bands.

    The AR order of a scenario is selected once, as the modal AIC choice
    (floored at 1) over eleven dedicated pilot series of the same length,
    and held fixed across repetitions.  Re-selecting the order inside every
    repetition would condition each dataset on its own selection event and
    visibly deflate AR-coefficient coverage, while a single pilot draw
    occasionally lands on an atypically overfit order; the modal pilot
    order is the scenario's typical AIC selection.

    Per repetition: simulate a series, run each requested method, and
    compare the repetition's max-deviation statistics against the bands.
    In ``warp_speed`` mode each repetition contributes a single bootstrap
    draw and the quantile is taken over the pooled draws; in ``full`` mode
    each repetition runs B replicates and uses its own quantile.
    """
    if reps < 100:
        raise ValueError(f"reps must be >= 100, got {reps}")
    if mode not in ("warp_speed", "full"):
        raise ValueError(f"mode must be 'warp_speed' or 'full', got {mode!r}")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r} (valid: {', '.join(METHODS)})")
    if p_max > d:
        raise ValueError(f"p_max must be <= d so the fitted order fits the lag range, got {p_max} > {d}")
    scenarios = [s if isinstance(s, Scenario) else Scenario.parse(str(s)) for s in scenarios]
    level = 1.0 - alpha
    B_rep = 1 if mode == "warp_speed" else B
    rows: list[CoverageRow] = []
    for s_idx, scen in enumerate(scenarios):
        sigma_true, approx = true_autocovariances(scen.model, scen.innovation, scen.rho, d)
        rho_true = sigma_true / sigma_true[0]
        pilot_orders = []
        for i in range(11):
            pilot_seed = derive_seed(stream.seed, (stream.stream_index, s_idx, i, 3))
            pilot = gen_series(
                DgpSpec(
                    model=scen.model,
                    innovation=scen.innovation,
                    T=T,
                    rho=scen.rho,
                    burn_in=burn_in,
                    seed=pilot_seed,
                )
            )
            pilot_orders.append(max(1, ar_order_select_aic(pilot, p_max)))
        p_scen = int(np.bincount(pilot_orders).argmax())
        a_true = _pinv_yule_walker(sigma_true, p_scen)
        stats = {t: np.empty(reps) for t in TARGETS}
        draws = {m: {t: np.empty(reps) for t in TARGETS} for m in methods}
        covered = {m: {t: np.empty(reps, dtype=bool) for t in TARGETS} for m in methods}
        kts = np.empty(reps)
        H_idx = np.asarray(sorted(H))
        I_idx = np.asarray(sorted(I))

        def _one_rep(r: int) -> None:
            dgp_seed = derive_seed(stream.seed, (stream.stream_index, s_idx, r, 0))
            series = gen_series(
                DgpSpec(
                    model=scen.model,
                    innovation=scen.innovation,
                    T=T,
                    rho=scen.rho,
                    burn_in=burn_in,
                    seed=dgp_seed,
                )
            )
            p_r = p_scen
            k_T = select_bandwidth(series, BandwidthRule.auto())
            kts[r] = k_T
            est = estimate_second_order(series, d, p_r, H_idx, I_idx)
            stats[TARGET_AUTOCOV][r] = np.sqrt(T) * np.abs(est.sigma_hat[H_idx] - sigma_true[H_idx]).max()
            stats[TARGET_AUTOCORR][r] = np.sqrt(T) * np.abs(est.rho_hat[I_idx] - rho_true[I_idx]).max()
            stats[TARGET_ARCOEF][r] = np.sqrt(T) * np.abs(est.a_hat - a_true).max()
            if "wild" in methods:
                config = BootstrapConfig(
                    d=d,
                    p=p_r,
                    H=tuple(H_idx),
                    I=tuple(I_idx),
                    kernel=kernel,
                    bandwidth=BandwidthRule.fixed(k_T),
                    B=B_rep,
                    alpha=alpha,
                    seed=derive_seed(stream.seed, (stream.stream_index, s_idx, r, 1)),
                )
                report_w, draws_w = run_bootstrap(series, config)
                for t in TARGETS:
                    draws["wild"][t][r] = draws_w.by_target()[t][0]
                    if mode == "full":
                        covered["wild"][t][r] = stats[t][r] <= report_w.radii[t]
            if "sieve" in methods:
                cfg = SieveConfig(
                    p_max=p_max,
                    B=B_rep,
                    alpha=alpha,
                    seed=derive_seed(stream.seed, (stream.stream_index, s_idx, r, 2)),
                    burn_in=burn_in,
                )
                report_s, draws_s = ar_sieve_bootstrap(series, d, p_r, H_idx, I_idx, cfg)
                for t in TARGETS:
                    draws["sieve"][t][r] = draws_s.by_target()[t][0]
                    if mode == "full":
                        covered["sieve"][t][r] = stats[t][r] <= report_s.radii[t]

        def _chunk(start: int) -> None:
            for r in range(start, min(start + _CHUNK, reps)):
                _one_rep(r)

        starts = range(0, reps, _CHUNK)
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(_chunk, starts))
        else:
            for start in starts:
                _chunk(start)

        mean_kt = float(kts.mean())
        for method in methods:
            for t in TARGETS:
                if mode == "warp_speed":
                    radius = ecdf_quantile(draws[method][t], level)
                    cov = float(np.mean(stats[t] <= radius))
                else:
                    cov = float(np.mean(covered[method][t]))
                rows.append(
                    CoverageRow(
                        model=scen.model,
                        innovation=scen.innovation.value,
                        rho=scen.rho,
                        target=t,
                        method=method,
                        coverage=cov,
                        se=float(np.sqrt(cov * (1.0 - cov) / reps)),
                        order=p_scen,
                        mean_k_T=mean_kt,
                        reps=reps,
                        T=T,
                        truth_approximate=approx,
                    )
                )
    return CoverageReport(
        rows=tuple(rows),
        T=T,
        reps=reps,
        alpha=alpha,
        mode=mode,
        B=B_rep,
        seed=stream.seed,
    )


@dataclass(frozen=True)
class ApproxCheckReport:
    """Kolmogorov-Smirnov distance between max-deviation roots and the oracle."""

    model: str
    innovation: str
    T: int
    reps: int
    ks_distance: float
    truth_k_T: float
    n_oracle: int
    seed: int

    def to_json(self) -> dict:
        return asdict(self)


def gaussian_approx_check(
    spec: DgpSpec,
    T: int,
    reps: int,
    stream: RngStream,
    H=(0, 1, 2, 3),
    n_oracle: int = 100_000,
    truth_length: int = 10**6,
    kernel: KernelSpec = KernelSpec(),
) -> ApproxCheckReport:
    """Compare max_j sqrt(T)|sigma_hat_j - sigma_j| against its Gaussian limit.

    The oracle distribution is the maximum of centered joint normals whose
    covariance is one kernel quadratic-form evaluation on a single long
    realization of the same process.  Reported is the two-sample KS
    statistic between ``reps`` simulated roots at length ``T`` and
    ``n_oracle`` oracle draws.
    """
    if reps < 1000:
        raise ValueError(f"reps must be >= 1000, got {reps}")
    H_idx = np.asarray(sorted(H))
    d = int(H_idx.max())
    sigma_true, _ = true_autocovariances(spec.model, spec.innovation, spec.rho, d)

    truth_seed = derive_seed(stream.seed, (stream.stream_index, 0))
    long_series = gen_series(replace(spec, T=truth_length, seed=truth_seed, stream_index=0))
    k_T = select_bandwidth(long_series, BandwidthRule.auto())
    d_est = max(d, 1)
    est_long = estimate_second_order(long_series, d_est, 1, H_idx, (1,))
    cov = hac_autocov_cov(long_series, est_long, H_idx, kernel, k_T)
    oracle = max_abs_normal_sample(cov.matrix, n_oracle, RngStream(derive_seed(stream.seed, (stream.stream_index, 1)), 0))

    roots = np.empty(reps)
    for r in range(reps):
        rep_seed = derive_seed(stream.seed, (stream.stream_index, 2, r))
        series = gen_series(replace(spec, T=T, seed=rep_seed, stream_index=0))
        sigma_hat = autocov_vector(series, d)
        roots[r] = np.sqrt(T) * np.abs(sigma_hat[H_idx] - sigma_true[H_idx]).max()

    ks = float(scipy.stats.ks_2samp(roots, oracle).statistic)
    return ApproxCheckReport(
        model=spec.model,
        innovation=spec.innovation.value,
        T=T,
        reps=reps,
        ks_distance=ks,
        truth_k_T=float(k_T),
        n_oracle=n_oracle,
        seed=stream.seed,
    )


def _rows_to_csv(rows, row_type) -> str:
    """Serialize dataclass rows to CSV with round-trippable floats."""
    names = [f.name for f in row_type.__dataclass_fields__.values()]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for row in rows:
        writer.writerow([repr(getattr(row, n)) if isinstance(getattr(row, n), float) else getattr(row, n) for n in names])
    return buf.getvalue()


def _rows_from_csv(text: str, row_type):
    fields = row_type.__dataclass_fields__
    names = list(fields)
    data = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    reader = csv.reader(io.StringIO(data))
    header = next(reader)
    if header != names:
        raise ValueError(f"unexpected CSV header {header}, expected {names}")
    rows = []
    for record in reader:
        if not record:
            continue
        kwargs = {}
        for name, raw in zip(names, record):
            kind = fields[name].type
            if kind == "float":
                kwargs[name] = float(raw)
            elif kind == "int":
                kwargs[name] = int(raw)
            elif kind == "bool":
                kwargs[name] = raw == "True"
            else:
                kwargs[name] = raw
        rows.append(row_type(**kwargs))
    return rows
