"""Command-line front end.

Runs the checkers and experiments from INI-style config files and writes
plot-ready artifacts: report.csv, summary.json and manifest.json in the
output directory (plus model.json for the solver commands).

Exit codes: 0 on success/pass, 1 when an inequality check fails, 2 on
usage or configuration errors.

All randomness derives from the single config seed through labeled
SeedSequences (see util.derive_seed_sequence), so identical config plus
seed reproduces identical CSV bodies byte for byte.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .calibration import (
    check_self_calibration,
    check_variance_bound,
    random_test_functions,
)
from .distributions import (
    ConditionalModel,
    SineLocation,
    ZeroLocation,
    bounded_density_mixture,
    dirac_atom_mixture,
    polynomial_density,
    sample_joint,
    two_atom,
)
from .experiments import (
    RateConfig,
    lambda_grid,
    learning_rate_experiment,
    tv_svm,
)
from .inner_risk import excess_inner_risk, inner_risk, min_inner_risk
from .kernels import GaussianKernel, MaternKernel, PolynomialKernel, spectrum_decay
from .solver import kkt_residual, model_to_json, objective, train
from .util import derive_rng, derive_seed_sequence, fmt17

COMMANDS = (
    "check-inner-risk",
    "check-calibration",
    "check-variance",
    "train",
    "tv-svm",
    "rates",
    "spectrum",
)


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def _floats(text: str) -> list[float]:
    out = []
    for token in text.replace(",", " ").split():
        out.append(math.inf if token.lower() in ("inf", "infinity") else float(token))
    return out


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.replace(",", " ").split()]


def _location(section) -> SineLocation | ZeroLocation:
    kind = section.get("location", "sine")
    if kind == "zero":
        return ZeroLocation()
    if kind == "sine":
        return SineLocation(amplitude=section.getfloat("amplitude", 0.5))
    raise ConfigError(f"unknown location {kind!r}")


def build_model(section) -> ConditionalModel:
    family = section.get("family", "bounded-density-mixture")
    loc = _location(section)
    hw = section.getfloat("halfwidth", 0.5)
    if family in ("bounded-density-mixture", "uniform"):
        return bounded_density_mixture(
            halfwidth=hw,
            contaminant_weight=section.getfloat("contaminant_weight", 0.0),
            contaminant_atom=section.getfloat("contaminant_atom", 0.0),
            location=loc,
        )
    if family == "polynomial-density":
        return polynomial_density(
            exponent=section.getfloat("exponent", 1.0),
            halfwidth=hw,
            contaminant_weight=section.getfloat("contaminant_weight", 0.0),
            contaminant_atom=(
                section.getfloat("contaminant_atom") if "contaminant_atom" in section else None
            ),
            location=loc,
        )
    if family == "dirac-atom-mixture":
        return dirac_atom_mixture(
            atom=section.getfloat("atom", 0.0),
            uniform_weight=section.getfloat("uniform_weight", 0.15),
            halfwidth=hw,
            location=loc,
        )
    if family == "two-atom":
        locs = _floats(section.get("locations", "-0.5 0.5"))
        weights = _floats(section.get("weights", "0.5 0.5"))
        return two_atom(locations=tuple(locs), weights=tuple(weights), location=loc)
    raise ConfigError(f"unknown model family {family!r}")


def build_kernel(section):
    family = section.get("family", "gaussian")
    if family == "gaussian":
        return GaussianKernel(bandwidth=section.getfloat("bandwidth", 0.5))
    if family == "polynomial":
        return PolynomialKernel(
            degree=section.getint("degree", 3),
            offset=section.getfloat("offset", 1.0),
            dim=section.getint("dim", 1),
        )
    if family == "matern":
        return MaternKernel(
            nu=section.getfloat("nu", 1.5),
            lengthscale=section.getfloat("lengthscale", 0.5),
        )
    raise ConfigError(f"unknown kernel family {family!r}")


def load_config(path: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        parser.read_string(p.read_text(), source=path)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    return parser


# ---------------------------------------------------------------------------
# artifact writing
# ---------------------------------------------------------------------------


def _write(out_dir: Path, name: str, text: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(text)


def _manifest(command: str, config_path: str, seed: int, extra=None) -> str:
    digest = hashlib.sha256(Path(config_path).read_bytes()).hexdigest()
    payload = {
        "command": command,
        "config": str(config_path),
        "config_sha256": digest,
        "seed": seed,
        "versions": {
            "kqr": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    if extra:
        payload.update(extra)
    return json.dumps(payload, indent=2)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cmd_check_inner_risk(cfg, out_dir: Path, seed: int, config_path: str) -> int:
    section = cfg["check"] if "check" in cfg else {}
    model = build_model(cfg["model"] if "model" in cfg else {})
    taus = _floats(section.get("taus", "0.1 0.5 0.9"))
    n_x = int(section.get("xs", 20))
    n_t = int(section.get("t_points", 50))
    tol = float(section.get("tolerance", 1e-8))
    rng = derive_rng(seed, "inner-risk-xs")
    xs = rng.uniform(-1.0, 1.0, size=(n_x, model.dim))
    ts = np.linspace(-1.0, 1.0, n_t)
    rows = []
    worst = 0.0
    for xi, x in enumerate(xs):
        for tau in taus:
            prof = min_inner_risk(model, x, tau)
            closed = excess_inner_risk(model, x, tau, ts)
            direct = inner_risk(model, x, tau, ts) - prof.c_star
            for t, a, b in zip(ts, closed, direct):
                err = float(abs(a - b))
                worst = max(worst, err)
                rows.append([xi, fmt17(tau), fmt17(t), fmt17(a), fmt17(b), fmt17(err)])
    _write(out_dir, "report.csv",
           _csv_text(["x_index", "tau", "t", "closed_form", "direct", "abs_err"], rows))
    passed = bool(worst <= tol)
    _write(out_dir, "summary.json", json.dumps(
        {"max_abs_err": worst, "tolerance": tol, "pass": passed}, indent=2))
    _write(out_dir, "manifest.json", _manifest("check-inner-risk", config_path, seed))
    if not passed:
        print(f"FAIL: max closed-form/direct gap {worst:g} exceeds {tol:g}")
        return 1
    print(f"ok: max gap {worst:g} within {tol:g}")
    return 0


def _run_calibration(cfg, out_dir, seed, config_path, command: str) -> int:
    section = cfg["check"] if "check" in cfg else {}
    model = build_model(cfg["model"] if "model" in cfg else {})
    taus = _floats(section.get("taus", "0.1 0.5 0.9"))
    ps = _floats(section.get("ps", "1 4 inf"))
    cells = int(section.get("cells", 8))
    count = int(section.get("count", 1000))
    tol = float(section.get("tolerance", 1e-8))
    checker = check_self_calibration if command == "check-calibration" else check_variance_bound

    rows = []
    min_slack = math.inf
    failed_at = None
    for tau in taus:
        for p in ps:
            fs_seed = derive_seed_sequence(seed, "test-functions", tau, p).generate_state(1)[0]
            fs = random_test_functions(cells, count, int(fs_seed))
            report = checker(model, tau, p, fs, tol=tol)
            for i, (lhs, rhs) in enumerate(zip(report.lhs, report.rhs)):
                slack = rhs - lhs
                if slack < min_slack:
                    min_slack = slack
                    if slack < -tol:
                        failed_at = (tau, p, i)
                rows.append([fmt17(tau), "inf" if math.isinf(p) else fmt17(p),
                             i, fmt17(lhs), fmt17(rhs), fmt17(slack)])
    _write(out_dir, "report.csv",
           _csv_text(["tau", "p", "f_index", "lhs", "rhs", "slack"], rows))
    passed = failed_at is None
    _write(out_dir, "summary.json", json.dumps(
        {"min_slack": min_slack, "tolerance": tol, "pass": passed,
         "rows": len(rows)}, indent=2))
    _write(out_dir, "manifest.json", _manifest(command, config_path, seed))
    if not passed:
        tau, p, i = failed_at
        print(f"FAIL: slack {min_slack:g} below -{tol:g} at tau={tau} p={p} f_index={i}")
        return 1
    print(f"ok: {len(rows)} rows, min slack {min_slack:g}")
    return 0


def _cmd_train(cfg, out_dir, seed, config_path) -> int:
    model = build_model(cfg["model"] if "model" in cfg else {})
    spec = build_kernel(cfg["kernel"] if "kernel" in cfg else {})
    svm = cfg["svm"] if "svm" in cfg else {}
    data_cfg = cfg["data"] if "data" in cfg else {}
    n = int(data_cfg.get("n", 200))
    lam = float(svm.get("lambda", 0.01))
    tau = float(svm.get("tau", 0.5))
    tol = float(svm.get("tol", 1e-6))
    max_iter = int(svm.get("max_iter", 1000))
    data_seed = derive_seed_sequence(seed, "train-data").generate_state(1)[0]
    data = sample_joint(model, n, int(data_seed))
    trained, diag = train(data, spec, lam, tau, tol, max_iter, seed=seed)
    preds = trained.kernel.pairwise(data.x, trained.support_x) @ trained.coef
    rows = []
    for i in range(n):
        rows.append([i, fmt17(data.x[i, 0]), fmt17(data.y[i]),
                     fmt17(preds[i]), fmt17(np.clip(preds[i], -1, 1)),
                     fmt17(trained.coef[i])])
    _write(out_dir, "report.csv",
           _csv_text(["i", "x", "y", "prediction", "clipped", "alpha"], rows))
    _write(out_dir, "model.json", model_to_json(trained))
    _write(out_dir, "summary.json", json.dumps({
        "n": n, "lambda": lam, "tau": tau,
        "objective": diag.final_objective,
        "kkt_residual": diag.kkt_residual,
        "iterations": diag.iterations,
        "converged": diag.converged,
    }, indent=2))
    _write(out_dir, "manifest.json", _manifest("train", config_path, seed))
    print(f"ok: objective {diag.final_objective:g}, kkt {diag.kkt_residual:g}, "
          f"converged {diag.converged}")
    return 0


def _cmd_tv_svm(cfg, out_dir, seed, config_path, strict_grid: bool) -> int:
    model = build_model(cfg["model"] if "model" in cfg else {})
    spec = build_kernel(cfg["kernel"] if "kernel" in cfg else {})
    svm = cfg["svm"] if "svm" in cfg else {}
    data_cfg = cfg["data"] if "data" in cfg else {}
    n = int(data_cfg.get("n", 200))
    tau = float(svm.get("tau", 0.5))
    tol = float(svm.get("tol", 1e-5))
    max_iter = int(svm.get("max_iter", 300))
    data_seed = derive_seed_sequence(seed, "tv-data").generate_state(1)[0]
    data = sample_joint(model, n, int(data_seed))
    grid = lambda_grid(n, "strict" if strict_grid else "geometric")
    result = tv_svm(data, spec, grid, tau, tol=tol, max_iter=max_iter, seed=seed)
    rows = [[fmt17(lam), fmt17(risk), int(result.diagnostics[lam].converged)]
            for lam, risk in sorted(result.validation_risks.items(), reverse=True)]
    _write(out_dir, "report.csv",
           _csv_text(["lambda", "validation_risk", "converged"], rows))
    _write(out_dir, "model.json", model_to_json(result.model))
    _write(out_dir, "summary.json", json.dumps({
        "chosen_lambda": result.chosen_lambda,
        "grid_mode": grid.mode,
        "grid_size": len(grid.values),
        "validation_risk": result.validation_risks[result.chosen_lambda],
    }, indent=2))
    _write(out_dir, "manifest.json", _manifest("tv-svm", config_path, seed))
    print(f"ok: chose lambda {result.chosen_lambda:g} out of {len(grid.values)}")
    return 0


def _cmd_rates(cfg, out_dir, seed, config_path, strict_grid: bool) -> int:
    model = build_model(cfg["model"] if "model" in cfg else {})
    spec = build_kernel(cfg["kernel"] if "kernel" in cfg else {})
    section = cfg["rates"] if "rates" in cfg else {}
    rho_raw = section.get("rho", "0.1")
    config = RateConfig(
        model=model,
        kernel=spec,
        tau=float(section.get("tau", 0.5)),
        sample_sizes=tuple(_ints(section.get("sample_sizes", "128 256 512"))),
        repetitions=int(section.get("repetitions", 5)),
        seed=seed,
        beta=float(section.get("beta", 1.0)),
        p=_floats(section.get("p", "inf"))[0],
        q=float(section.get("q", 2.0)),
        rho=None if rho_raw.strip() == "estimate" else float(rho_raw),
        grid_mode="strict" if strict_grid else section.get("grid", "geometric"),
        tol=float(section.get("tol", 1e-4)),
        max_iter=int(section.get("max_iter", 300)),
    )
    report = learning_rate_experiment(config)
    _write(out_dir, "report.csv", report.to_csv())
    _write(out_dir, "summary.json", report.to_json())
    _write(out_dir, "manifest.json", _manifest("rates", config_path, seed))
    print(f"ok: {len(report.rows)} rows; excess slope {report.excess_slope}, "
          f"dist slope {report.dist_slope}, theory gamma {report.theoretical_gamma:g}")
    return 0


def _cmd_spectrum(cfg, out_dir, seed, config_path) -> int:
    spec = build_kernel(cfg["kernel"] if "kernel" in cfg else {})
    section = cfg["spectrum"] if "spectrum" in cfg else {}
    n = int(section.get("n", 500))
    floor = float(section.get("floor", 1e-10))
    dim = int(section.get("dim", 1))
    rng = derive_rng(seed, "spectrum-points")
    xs = rng.uniform(-1.0, 1.0, size=(n, dim))
    from .kernels import gram

    evals = np.sort(np.linalg.eigvalsh(gram(spec, xs) / n))[::-1]
    est = spectrum_decay(spec, xs, floor=floor)
    rows = [[i + 1, fmt17(v)] for i, v in enumerate(evals)]
    _write(out_dir, "report.csv", _csv_text(["i", "eigenvalue"], rows))
    _write(out_dir, "summary.json", json.dumps({
        "rho_hat": est.rho_hat,
        "a_hat": est.a_hat,
        "n_used": est.n_used,
        "index_range": list(est.index_range),
        "fit_residual": est.residual,
        "note": "empirical Gram spectrum; approximates the integral operator",
    }, indent=2))
    _write(out_dir, "manifest.json", _manifest("spectrum", config_path, seed))
    print(f"ok: rho_hat {est.rho_hat:.4f} from {est.n_used} eigenvalues")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kqr", description="kernel quantile regression checks and experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="INI config file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="overrides config seed")
        if name in ("rates", "tv-svm"):
            p.add_argument("--strict-grid", action="store_true",
                           help="use the exact n^-2 net instead of the geometric grid")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        run = cfg["run"] if "run" in cfg else {}
        seed = args.seed if args.seed is not None else int(run.get("seed", 0))
        if seed < 0 or seed >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        out_dir = Path(args.out)
        if args.command == "check-inner-risk":
            return _cmd_check_inner_risk(cfg, out_dir, seed, args.config)
        if args.command in ("check-calibration", "check-variance"):
            return _run_calibration(cfg, out_dir, seed, args.config, args.command)
        if args.command == "train":
            return _cmd_train(cfg, out_dir, seed, args.config)
        if args.command == "tv-svm":
            return _cmd_tv_svm(cfg, out_dir, seed, args.config, args.strict_grid)
        if args.command == "rates":
            return _cmd_rates(cfg, out_dir, seed, args.config, args.strict_grid)
        if args.command == "spectrum":
            return _cmd_spectrum(cfg, out_dir, seed, args.config)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
