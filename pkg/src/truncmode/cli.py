"""Command-line entry point: ``truncmode {simulate,estimate,mc,fit}``.

Data goes to files under ``--out``; diagnostics go to stderr.  Every command
writes ``manifest.json`` listing its configuration, seed and artifacts.
Exit codes: 0 success, 1 runtime or data error, 2 usage error.
"""

import argparse
import datetime
import json
import logging
import os
import secrets
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import TruncModeError
from .kde import BandwidthRule, EvaluationDomain, KernelSpec
from .kde import default_domain, density_curve, mode_estimate
from .montecarlo import ExperimentConfig, run_experiment
from .realdata import gamma_cdf, gamma_mle, gamma_pdf, ks_pvalue, ks_statistic
from .realdata import load_column_csv, load_pairs_csv
from .simulation import RNG_ALGORITHM, Ma1Config, TruncationDesign
from .simulation import simulate_observed, write_pairs_csv
from .truncation import estimate_alpha

log = logging.getLogger("truncmode")

SEED_ENV = "TRUNCMODE_SEED"
_VALUE_FLAGS = ("--domain", "--rates", "--sizes")


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _open_unit(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1, got {text}")
    return v


def _nu(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0 <= v < 1:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1), got {text}")
    return v


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"must be a 64-bit unsigned integer, got {text}")
    return v


def _domain(text):
    parts = text.split(":")
    try:
        a, b = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b, got {text!r}") from None
    if not a < b:
        raise argparse.ArgumentTypeError(f"needs a < b, got {text!r}")
    return a, b


def _list_of(parse):
    def inner(text):
        items = [t for t in text.split(",") if t.strip()]
        if not items:
            raise argparse.ArgumentTypeError("expected a comma-separated list")
        return tuple(parse(t) for t in items)

    return inner


def build_parser():
    parser = argparse.ArgumentParser(
        prog="truncmode",
        description="Kernel density and mode estimation for left-truncated dependent data.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("-v", "--verbose", action="store_true")

    def seeded(p):
        p.add_argument("--seed", type=_seed, help=f"RNG seed (fallback: ${SEED_ENV}, then entropy)")

    p = sub.add_parser("simulate", help="simulate a truncated MA(1) sample")
    p.add_argument("--n", type=_positive_int, required=True, help="observed sample size")
    p.add_argument("--truncation-rate", type=_open_unit, default=0.1)
    p.add_argument("--nu", type=_nu, default=0.9)
    p.add_argument("--sigma", type=_positive_float, default=0.7)
    p.add_argument("--y-nu", type=_nu, default=None, help="defaults to --nu")
    p.add_argument("--y-sigma", type=_positive_float, default=None, help="defaults to --sigma")
    seeded(p)
    common(p)

    p = sub.add_parser("estimate", help="fit the density and mode estimators to an x,y CSV")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--bandwidth-c", type=_positive_float, default=None,
                   help="h = c * n^(-1/5); default c = 1.06 * sd(x)")
    p.add_argument("--grid", type=_positive_int, default=100)
    p.add_argument("--domain", type=_domain, default=None,
                   help="a:b (default: 5th-95th percentile of x)")
    p.add_argument("--kernel", choices=("gaussian", "epanechnikov"), default="gaussian")
    common(p)

    p = sub.add_parser("mc", help="Monte-Carlo GMSE / mode MSE tables")
    p.add_argument("--table", choices=("gmse", "mse"), default="gmse")
    p.add_argument("--sizes", type=_list_of(_positive_int), default=(50, 100, 500))
    p.add_argument("--rates", type=_list_of(_open_unit), default=(0.1, 0.3, 0.5))
    p.add_argument("--M", type=_positive_int, default=300, help="replications per cell")
    p.add_argument("--grid", type=_positive_int, default=100)
    p.add_argument("--domain", type=_domain, default=(-3.0, 3.0))
    p.add_argument("--bandwidth-c", type=_positive_float, default=None)
    p.add_argument("--kernel", choices=("gaussian", "epanechnikov"), default="gaussian")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--strict-serial", action="store_true",
                   help="force single-process execution")
    seeded(p)
    common(p)

    p = sub.add_parser("fit", help="gamma maximum-likelihood fit with K-S statistic")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--distribution", choices=("gamma",), default="gamma")
    p.add_argument("--column", type=int, default=0, help="0-based CSV column")
    p.add_argument("--grid", type=_positive_int, default=200)
    common(p)
    return parser


def _normalize_argv(argv):
    # "--domain -3:3" would otherwise parse "-3:3" as an option
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _resolve_seed(args):
    if args.seed is not None:
        return args.seed, "flag"
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return _seed(env), "env"
        except argparse.ArgumentTypeError as exc:
            raise ValueError(f"${SEED_ENV}: {exc}") from None
    return secrets.randbits(64), "entropy"


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _replay_argv(argv, seed):
    """``argv`` with the resolved seed pinned, so a rerun reproduces the files."""
    if seed is None or "--seed" in argv or any(a.startswith("--seed=") for a in argv):
        return list(argv)
    return list(argv) + ["--seed", str(seed)]


def _manifest(out, command, argv, config, artifacts, seed=None):
    manifest = {
        "command": command,
        "argv": list(argv),
        "replay_argv": _replay_argv(argv, seed),
        "config": config,
        "seed": seed,
        "rng": RNG_ALGORITHM,
        "artifacts": [str(p) for p in artifacts],
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "version": __version__,
    }
    _write_json(out / "manifest.json", manifest)


def cmd_simulate(args, argv):
    seed, source = _resolve_seed(args)
    x_cfg = Ma1Config(args.nu, args.sigma)
    y_cfg = Ma1Config(
        args.nu if args.y_nu is None else args.y_nu,
        args.sigma if args.y_sigma is None else args.y_sigma,
    )
    design = TruncationDesign.for_rate(args.truncation_rate, x_cfg, y_cfg).calibrated()
    sample = simulate_observed(design, args.n, seed, calibrate=False)
    path = args.out / "sample.csv"
    write_pairs_csv(sample, path)
    config = {"n": args.n, "truncation_rate": args.truncation_rate,
              "design": design.to_dict(), "seed_source": source}
    _manifest(args.out, "simulate", argv, config, [path], seed)
    return [path]


def cmd_estimate(args, argv):
    sample = load_pairs_csv(args.input)
    kernel = KernelSpec(args.kernel)
    rule = BandwidthRule(args.bandwidth_c)
    h = rule.for_sample(sample.x)
    if args.domain is None:
        domain = default_domain(sample.x, args.grid)
    else:
        domain = EvaluationDomain(*args.domain, args.grid)
    alpha = estimate_alpha(sample)
    curve = density_curve(sample, domain, h, kernel)
    curve_path = args.out / "curve.csv"
    curve.to_csv(curve_path)
    result = {
        "n": sample.n,
        "alpha": alpha.value,
        "alpha_max_spread": alpha.max_spread,
        "mode": mode_estimate(curve),
        "bandwidth": h,
        "bandwidth_constant": rule.constant_for(sample.x),
        "domain": [domain.a, domain.b],
        "grid_points": domain.grid_points,
        "kernel": kernel.family,
    }
    result_path = args.out / "estimate.json"
    _write_json(result_path, result)
    config = {"input": str(args.input), "bandwidth_c": args.bandwidth_c,
              "grid": args.grid, "domain": [domain.a, domain.b], "kernel": kernel.family}
    _manifest(args.out, "estimate", argv, config, [curve_path, result_path])
    return [curve_path, result_path]


def cmd_mc(args, argv):
    seed, source = _resolve_seed(args)
    config = ExperimentConfig(
        sample_sizes=args.sizes,
        truncation_rates=args.rates,
        replications=args.M,
        domain=EvaluationDomain(*args.domain, args.grid),
        base_seed=seed,
        bandwidth=BandwidthRule(args.bandwidth_c),
        kernel=KernelSpec(args.kernel),
    )
    workers = 1 if args.strict_serial else args.workers
    gmse_report, mse_report = run_experiment(config, workers)
    report = gmse_report if args.table == "gmse" else mse_report
    csv_path = args.out / f"{args.table}_report.csv"
    json_path = args.out / f"{args.table}_report.json"
    report.to_csv(csv_path)
    report.to_json(json_path)
    echo = config.to_dict()
    echo.update(table=args.table, workers=workers, seed_source=source)
    _manifest(args.out, "mc", argv, echo, [csv_path, json_path], seed)
    return [csv_path, json_path]


def cmd_fit(args, argv):
    data = load_column_csv(args.input, args.column)
    fit = gamma_mle(data)
    cdf = gamma_cdf(fit.shape, fit.scale)
    ks = ks_statistic(data, cdf)
    result = {
        "distribution": args.distribution,
        "n": int(data.size),
        "shape": fit.shape,
        "scale": fit.scale,
        "loglik": fit.log_likelihood,
        "ks_statistic": ks.statistic,
        "p_value": ks_pvalue(ks),
        "p_value_asymptotic": ks_pvalue(ks, "asymptotic"),
    }
    fit_path = args.out / "fit.json"
    _write_json(fit_path, result)
    grid = np.linspace(0.0, float(data.max()) * 1.1, args.grid)
    dens_path = args.out / "fitted_density.csv"
    with open(dens_path, "w") as fh:
        fh.write("x,density\n")
        for x, d in zip(grid.tolist(), gamma_pdf(grid, fit.shape, fit.scale).tolist()):
            fh.write(f"{x!r},{d!r}\n")
    config = {"input": str(args.input), "distribution": args.distribution,
              "column": args.column, "grid": args.grid}
    _manifest(args.out, "fit", argv, config, [fit_path, dens_path])
    return [fit_path, dens_path]


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "mc": cmd_mc, "fit": cmd_fit}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_normalize_argv(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        paths = COMMANDS[args.command](args, argv)
    except FileNotFoundError as exc:
        print(f"truncmode: error: file not found: {exc.filename}", file=sys.stderr)
        return 1
    except (TruncModeError, OSError, ValueError) as exc:
        print(f"truncmode: error: {exc}", file=sys.stderr)
        return 1
    for p in paths:
        log.info("wrote %s", p)
    return 0


def run():
    sys.exit(main())
