"""Command-line front end: ``hdlocation {test,weight,power,simulate,validate}``.

Exit status is 0 on success, 2 for usage, input or validation errors and 3
when a computation fails numerically (singular or degenerate estimates).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import SpecValidationError, UndefinedTestError
from .gauss import CSVFormatError, read_csv, summarize
from .harness import ExperimentSpec, run_experiment
from .location_tests import (
    CriticalMode,
    WeightPolicy,
    dempster_test,
    hotelling_test,
    optimal_weight,
    weighted_test,
)
from .power import ShiftProfile, asymptotic_power, c1_interval, classify_regime, omega0_ratio
from .spectral import estimate_a

SEED_ENV = "HDLOCATION_SEED"
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def fmt(x):
    """Six significant digits, independent of locale."""
    return f"{float(x):.6g}"


def _existing_file(path):
    if not Path(path).is_file():
        raise argparse.ArgumentTypeError(f"file not found: {path}")
    return path


def _level(text):
    try:
        a = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 < a < 1:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text}")
    return a


def default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        seed = int(raw)
    except ValueError:
        raise ValueError(f"{SEED_ENV} must be a non-negative integer, got {raw!r}") from None
    if seed < 0:
        raise ValueError(f"{SEED_ENV} must be a non-negative integer, got {raw!r}")
    return seed


def parse_mu0(text, p):
    """μ0 from an inline comma-separated list or a CSV file; one value broadcasts."""
    if text is None:
        return np.zeros(p)
    if Path(text).is_file():
        values = read_csv(text).ravel()
    else:
        try:
            values = np.array([float(v) for v in text.replace(";", ",").split(",") if v.strip()])
        except ValueError:
            raise ValueError(f"--mu0: expected numbers or a CSV path, got {text!r}") from None
    if values.size == 1:
        return np.full(p, values[0])
    if values.size != p:
        raise ValueError(f"--mu0 has {values.size} entries but the data have p = {p} columns")
    return values


def _row(name, outcome):
    decision = "reject" if outcome.reject else "accept"
    return (f"{name:<10} {fmt(outcome.statistic):>12} {fmt(outcome.standardized):>13} "
            f"{fmt(outcome.critical):>12}  {decision}")


def cmd_test(args, out):
    X = read_csv(args.data, header=args.header)
    N, p = X.shape
    mu0 = parse_mu0(args.mu0, p)
    summary = summarize(X, mu0)
    est = estimate_a(summary)
    print(f"N = {N}  p = {p}  n = {summary.n}  c_hat = {fmt(est.c_hat)}  alpha = {fmt(args.alpha)}", file=out)
    print(f"a1_hat = {fmt(est.a1_hat)}  a2_hat = {fmt(est.a2_hat)}  "
          f"a3_hat = {fmt(est.a3_hat)}  a4_hat = {fmt(est.a4_hat)}", file=out)
    print(f"{'test':<10} {'statistic':>12} {'standardized':>13} {'critical':>12}  decision", file=out)
    notes = list(summary.notes)
    try:
        print(_row("hotelling", hotelling_test(summary, args.alpha)), file=out)
    except UndefinedTestError:
        print(f"{'hotelling':<10} undefined (p >= N)" if p >= N else
              f"{'hotelling':<10} undefined (S singular)", file=out)
    print(_row("dempster", dempster_test(summary, est, args.alpha)), file=out)
    try:
        w = weighted_test(summary, est, args.alpha, WeightPolicy(), args.critical)
        print(_row("weighted", w), file=out)
        print(f"rho_hat = {fmt(w.rho_used)}  critical mode = {CriticalMode(args.critical).value}", file=out)
        notes += w.notes
    except UndefinedTestError:
        print(f"{'weighted':<10} undefined (p >= n)" if p >= summary.n else
              f"{'weighted':<10} undefined (S singular)", file=out)
    for note in notes:
        print(f"note: {note}", file=out)
    return 0


def cmd_weight(args, out):
    if args.data is not None:
        X = read_csv(args.data, header=args.header)
        est = estimate_a(summarize(X))
        c, a1, a2 = est.c_hat, est.a1_hat, est.a2_hat
        print(f"c_hat = {fmt(c)}  a1_hat = {fmt(a1)}  a2_hat = {fmt(a2)}", file=out)
    else:
        if None in (args.c, args.a1, args.a2):
            raise ValueError("weight needs either --data or all of --c, --a1, --a2")
        c, a1, a2 = args.c, args.a1, args.a2
    print(f"rho_star = {fmt(optimal_weight(c, a1, a2))}", file=out)
    return 0


def cmd_power(args, out):
    c, a1, a2, n, alpha = args.c, args.a1, args.a2, args.n, args.alpha
    if args.ratio is not None:
        dI = 1.0 if args.delta2_I is None else args.delta2_I
        profile = ShiftProfile(args.ratio * dI, dI, float("nan"))
    else:
        profile = ShiftProfile(args.delta2 or 0.0, args.delta2_I or 0.0, float("nan"))
    if profile.delta2 < 0 or profile.delta2_I < 0:
        raise ValueError("shift magnitudes must be non-negative")
    lower, upper, _ = c1_interval(c, a1, a2)
    print(f"rho_star = {fmt(optimal_weight(c, a1, a2))}", file=out)
    print(f"omega0_ratio = {fmt(omega0_ratio(c, a2))}", file=out)
    print(f"c1_interval = [{fmt(lower)}, {fmt(upper)}]", file=out)
    for kind in ("hotelling", "dempster", "weighted"):
        print(f"power {kind} = {fmt(asymptotic_power(kind, profile, n, c, a1, a2, alpha))}", file=out)
    if profile.delta2 > 0 and profile.delta2_I > 0:
        report = classify_regime(profile, n, c, a1, a2, alpha)
        print(f"ratio = {fmt(report.ratio)}", file=out)
        print(f"regime = {report.regime.value}", file=out)
        for note in report.notes:
            print(f"note: {note}", file=out)
    else:
        print("regime = none (null shift)", file=out)
    return 0


def _load_spec(path, seed_override):
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecValidationError([f"<root>: invalid JSON ({exc})"]) from None
    if isinstance(data, dict) and "seed" not in data:
        data["seed"] = default_seed()
    if seed_override is not None:
        data["seed"] = seed_override
    return ExperimentSpec.from_dict(data)


def cmd_simulate(args, out):
    spec = _load_spec(args.spec, args.seed)
    table = run_experiment(spec, workers=args.workers)
    mode = "asl" if spec.mu_mode == "null" else "power"
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for eta in spec.etas:
        part = type(table)(table.select(eta=float(eta)), table.metadata)
        stem = f"{mode}_eta{float(eta):g}_p{spec.p}"
        (outdir / f"{stem}.csv").write_text(part.to_csv())
        (outdir / f"{stem}.md").write_text(part.to_markdown(float(eta), spec.p))
        print(part.to_markdown(float(eta), spec.p), file=out)
        print(f"wrote {outdir / stem}.csv and .md", file=out)
    print(f"{len(table.rows)} rows, r = {spec.replications}, seed = {spec.seed}, "
          f"wall time {table.metadata['wall_time']:.1f} s", file=out)
    return 0


def cmd_validate(args, out):
    spec = _load_spec(args.spec, None)
    print(f"ok: p = {spec.p}, {len(spec.N_list)} sample sizes, {len(spec.etas)} eta values, "
          f"r = {spec.replications}, mu_mode = {spec.mu_mode}", file=out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hdlocation",
        description="One-sample location tests for high-dimensional normal data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="run all three tests on an N x p CSV data matrix")
    t.add_argument("data", type=_existing_file)
    t.add_argument("--mu0", help="hypothesised mean: comma-separated values or a CSV file (default 0)")
    t.add_argument("--alpha", type=_level, default=0.05)
    t.add_argument("--critical", choices=[m.value for m in CriticalMode], default="cf",
                   help="weighted-test critical point (default: cf, Cornish-Fisher)")
    t.add_argument("--header", action="store_true", help="skip the first CSV line")
    t.set_defaults(func=cmd_test)

    w = sub.add_parser("weight", help="optimal weight from (c, a1, a2) or from data")
    w.add_argument("--c", type=float)
    w.add_argument("--a1", type=float)
    w.add_argument("--a2", type=float)
    w.add_argument("--data", type=_existing_file)
    w.add_argument("--header", action="store_true")
    w.set_defaults(func=cmd_weight)

    pw = sub.add_parser("power", help="local asymptotic powers and regime")
    pw.add_argument("--c", type=float, required=True)
    pw.add_argument("--a1", type=float, required=True)
    pw.add_argument("--a2", type=float, required=True)
    pw.add_argument("--n", type=int, required=True)
    pw.add_argument("--alpha", type=_level, default=0.05)
    pw.add_argument("--delta2", type=float, help="Mahalanobis shift Delta^2")
    pw.add_argument("--delta2-I", dest="delta2_I", type=float, help="Euclidean shift Delta_I^2")
    pw.add_argument("--ratio", type=float, help="Delta^2 / Delta_I^2 (Delta_I^2 defaults to 1)")
    pw.set_defaults(func=cmd_power)

    s = sub.add_parser("simulate", help="run a Monte Carlo study from a JSON spec")
    s.add_argument("spec", type=_existing_file)
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--seed", type=int, help=f"override the spec seed (default from ${SEED_ENV} or 0)")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("validate", help="check a JSON experiment spec")
    v.add_argument("spec", type=_existing_file)
    v.set_defaults(func=cmd_validate)
    return parser


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "workers", 1) < 1:
            raise ValueError("--workers must be at least 1")
        if getattr(args, "seed", None) is not None and args.seed < 0:
            raise ValueError("--seed must be non-negative")
        return args.func(args, out)
    except SpecValidationError as exc:
        for problem in exc.problems:
            print(f"error: {problem}", file=sys.stderr)
        return EXIT_USAGE
    except CSVFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
