"""Model selection and learning-rate experiments.

The training-validation SVM splits the sample at m = floor(n/2) + 1, trains
one model per grid value of the regularization parameter on the first part,
and keeps the value whose clipped predictor minimizes the empirical risk on
the second part (smallest value wins ties).  Rate experiments repeat this
over growing sample sizes, measure the excess risk of the selected clipped
predictor by exact quadrature against the generating model, and compare the
fitted log-log slope with the theoretical exponent

    gamma = min( beta / (beta*(2 - theta + rho*theta - rho) + rho),
                 2*beta / (beta + 1) ).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .calibration import dist_norm, excess_risk, theta_exponent
from .distributions import ConditionalModel, sample_joint
from .kernels import gram, spectrum_decay
from .losses import Dataset, pinball_loss, tau_value
from .solver import SolveDiagnostics, SvmModel, predict_clipped, train
from .util import derive_rng, derive_seed_sequence, fmt17

__all__ = [
    "LambdaGrid",
    "lambda_grid",
    "TvSvmResult",
    "tv_svm",
    "theoretical_theta",
    "theoretical_gamma",
    "RateConfig",
    "RateRow",
    "RateReport",
    "fit_loglog_slope",
    "learning_rate_experiment",
]


@dataclass(frozen=True)
class LambdaGrid:
    """Finite descending grid of regularization values in (0, 1]."""

    values: tuple[float, ...]
    mode: str

    def __post_init__(self):
        vals = tuple(sorted(set(float(v) for v in self.values), reverse=True))
        if not vals:
            raise ValueError("grid must be nonempty")
        if vals[0] > 1.0 or vals[-1] <= 0.0:
            raise ValueError("grid values must lie in (0, 1]")
        object.__setattr__(self, "values", vals)


def lambda_grid(n: int, mode: str = "geometric") -> LambdaGrid:
    """strict: {i/n^2 : i=1..n^2}, an exact n^-2 net of (0,1].
    geometric: {2^-j : j=0..ceil(2 log2 n)}, the practical surrogate."""
    if n < 3:
        raise ValueError("n must be >= 3")
    if mode == "strict":
        step = 1.0 / (n * n)
        values = tuple(i * step for i in range(1, n * n + 1))
    elif mode == "geometric":
        jmax = math.ceil(2.0 * math.log2(n))
        values = tuple(2.0**-j for j in range(jmax + 1))
    else:
        raise ValueError("mode must be 'strict' or 'geometric'")
    return LambdaGrid(values=values, mode=mode)


@dataclass(frozen=True)
class TvSvmResult:
    model: SvmModel
    chosen_lambda: float
    validation_risks: dict[float, float]
    diagnostics: dict[float, SolveDiagnostics]

    def __iter__(self):  # allow (model, lam) unpacking
        return iter((self.model, self.chosen_lambda))


def tv_svm(
    data: Dataset,
    spec,
    grid: LambdaGrid,
    tau,
    tol: float = 1e-6,
    *,
    max_iter: int = 1000,
    band: float | None = None,
    seed: int = 0,
) -> TvSvmResult:
    """Training-validation SVM over the given grid.

    Models are trained on the first m = floor(n/2)+1 points along the
    descending grid with warm starts (the dual box rescales exactly by the
    ratio of consecutive lambdas), validated on the rest with clipped
    predictions, and the smallest lambda among the minimizers is returned.
    """
    n = len(data)
    if n < 3:
        raise ValueError("training-validation split needs n >= 3")
    tv = tau_value(tau)
    if band is None:
        band = max(1e-10, tol)
    m = n // 2 + 1
    d1, d2 = data.subset(0, m), data.subset(m, n)
    g1 = gram(spec, d1.x)
    min_eig = float(np.linalg.eigvalsh(g1)[0])
    if min_eig < -1e-8:
        raise ValueError(f"Gram matrix is not PSD within tolerance: min eig {min_eig:g}")
    k21 = spec.pairwise(d2.x, d1.x)

    risks: dict[float, float] = {}
    diags: dict[float, SolveDiagnostics] = {}
    models: dict[float, SvmModel] = {}
    warm = None
    prev_lam = None
    for lam in grid.values:  # descending
        if warm is not None:
            warm = warm * (prev_lam / lam)
        model, diag = train(
            d1, spec, lam, tv, tol, max_iter,
            band=band, warm_start=warm, gram_matrix=g1, psd_check=False, seed=seed,
        )
        warm = model.coef.copy()
        prev_lam = lam
        preds = np.clip(k21 @ model.coef, -1.0, 1.0)
        risks[lam] = float(np.mean(pinball_loss(tv, d2.y, preds)))
        diags[lam] = diag
        models[lam] = model

    chosen = None
    best = math.inf
    for lam in sorted(risks):  # ascending: ties resolve to the smallest lambda
        if risks[lam] < best:
            best = risks[lam]
            chosen = lam
    return TvSvmResult(
        model=models[chosen],
        chosen_lambda=chosen,
        validation_risks=risks,
        diagnostics=diags,
    )


def theoretical_theta(p, q) -> float:
    if not math.isinf(p) and p <= 0:
        raise ValueError("p must be positive or inf")
    if q < 1:
        raise ValueError("q must be >= 1")
    return theta_exponent(p, q)


def theoretical_gamma(beta: float, theta: float, rho: float) -> float:
    """Rate exponent: the learned risk decays like n^(-gamma)."""
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    first = beta / (beta * (2.0 - theta + rho * theta - rho) + rho)
    second = 2.0 * beta / (beta + 1.0)
    return min(first, second)


@dataclass(frozen=True)
class RateConfig:
    model: ConditionalModel
    kernel: object
    tau: float
    sample_sizes: tuple[int, ...]
    repetitions: int
    seed: int
    beta: float = 1.0
    p: float = math.inf
    q: float = 2.0
    rho: float | None = 0.1          # None: estimate via spectrum_decay
    grid_mode: str = "geometric"
    tol: float = 1e-4
    max_iter: int = 300

    def __post_init__(self):
        if any(n < 4 for n in self.sample_sizes):
            raise ValueError("sample sizes must be >= 4")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must lie in (0, 1]")


@dataclass(frozen=True)
class RateRow:
    n: int
    rep: int
    lambda_chosen: float
    excess_risk: float
    dist_norm: float
    converged: bool


@dataclass
class RateReport:
    rows: list[RateRow]
    r_norm: float
    excess_slope: float | None
    dist_slope: float | None
    theoretical_gamma: float
    theoretical_gamma_over_q: float
    rho_used: float
    mean_excess: dict[int, float] = field(default_factory=dict)
    mean_dist: dict[int, float] = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "rep", "lambda_chosen", "excess_risk", "dist_norm", "converged"])
        for row in self.rows:
            writer.writerow([
                row.n, row.rep, fmt17(row.lambda_chosen),
                fmt17(row.excess_risk), fmt17(row.dist_norm), int(row.converged),
            ])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "excess_slope": self.excess_slope,
            "dist_slope": self.dist_slope,
            "theoretical_gamma": self.theoretical_gamma,
            "theoretical_gamma_over_q": self.theoretical_gamma_over_q,
            "rho_used": self.rho_used,
            "r_norm": self.r_norm,
            "mean_excess": {str(k): v for k, v in sorted(self.mean_excess.items())},
            "mean_dist": {str(k): v for k, v in sorted(self.mean_dist.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2)


def fit_loglog_slope(ns, values) -> float:
    """Least-squares slope of log(values) against log(ns)."""
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(ns) < 3:
        raise ValueError("need at least 3 points for a slope")
    if np.any(values <= 0):
        raise ValueError("values must be positive for a log-log fit")
    return float(np.polyfit(np.log(ns), np.log(values), 1)[0])


def _resolve_rho(config: RateConfig) -> float:
    if config.rho is not None:
        return float(config.rho)
    rng = derive_rng(config.seed, "rho-estimate")
    xs = rng.uniform(-1.0, 1.0, size=(min(500, max(config.sample_sizes)), config.model.dim))
    return spectrum_decay(config.kernel, xs).rho_hat


def learning_rate_experiment(config: RateConfig) -> RateReport:
    """Run the TV-SVM over the configured sample sizes and fit rate slopes.

    Per-item seeds derive deterministically from (seed, n, repetition), so
    the report is reproducible and items could run in any order.
    """
    tv = tau_value(config.tau)
    r = config.q if math.isinf(config.p) else config.p * config.q / (config.p + 1.0)
    rho = _resolve_rho(config)
    rows: list[RateRow] = []
    for n in config.sample_sizes:
        grid = lambda_grid(n, config.grid_mode)
        for rep in range(config.repetitions):
            item_seed = derive_seed_sequence(config.seed, "sample", n, rep).generate_state(1)[0]
            data = sample_joint(config.model, n, int(item_seed))
            result = tv_svm(
                data, config.kernel, grid, tv,
                tol=config.tol, max_iter=config.max_iter, seed=config.seed,
            )
            model = result.model

            def f(xs, _m=model):
                return np.atleast_1d(predict_clipped(_m, xs))

            rows.append(RateRow(
                n=n,
                rep=rep,
                lambda_chosen=result.chosen_lambda,
                excess_risk=excess_risk(config.model, tv, f),
                dist_norm=dist_norm(config.model, tv, f, r),
                converged=result.diagnostics[result.chosen_lambda].converged,
            ))

    mean_excess: dict[int, float] = {}
    mean_dist: dict[int, float] = {}
    for n in config.sample_sizes:
        ok = [row for row in rows if row.n == n and row.converged]
        if ok:
            mean_excess[n] = float(np.mean([row.excess_risk for row in ok]))
            mean_dist[n] = float(np.mean([row.dist_norm for row in ok]))

    ns = sorted(mean_excess)
    excess_slope = dist_slope = None
    if len(ns) >= 3:
        excess_slope = fit_loglog_slope(ns, [mean_excess[n] for n in ns])
        dist_slope = fit_loglog_slope(ns, [mean_dist[n] for n in ns])

    theta = theoretical_theta(config.p, config.q)
    gamma = theoretical_gamma(config.beta, theta, rho)
    return RateReport(
        rows=rows,
        r_norm=r,
        excess_slope=excess_slope,
        dist_slope=dist_slope,
        theoretical_gamma=gamma,
        theoretical_gamma_over_q=gamma / config.q,
        rho_used=rho,
        mean_excess=mean_excess,
        mean_dist=mean_dist,
    )
