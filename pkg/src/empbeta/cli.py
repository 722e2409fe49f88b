"""Command line interface: ``empbeta {estimate,validate,sample,simulate,lre}``.

``simulate`` and ``lre`` also accept ``--config FILE``, a flat text file of
``key = value`` lines whose keys are the long option names (``model``,
``theta``, ``estimators``, ``n``, ``reps``, ``seed``, ...).  Options given on
the command line take precedence.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import sys

from .bernstein import check_copula_conditions, mixed_partial_grid_min, read_coefficients_csv
from .data import compute_ranks, read_sample_csv
from .errors import EmpBetaError
from .estimators import CopulaEstimate, regular_grid
from .harness import (
    ExperimentConfig,
    parse_estimators,
    parse_n_range,
    run_lre_heatmap,
    run_study,
    write_lre_csv,
)
from .reference import parse_model
from .sampler import BetaSampler


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_rows(path, rows) -> None:
    if path == "-":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerows(rows)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def _ranks_from_args(args):
    sample = read_sample_csv(args.input, has_header=args.header)
    return compute_ranks(sample, ties=args.ties, seed=args.tie_seed)


def cmd_estimate(args) -> int:
    ranks = _ranks_from_args(args)
    degrees = None
    if args.estimator == "bernstein":
        if not args.degrees:
            raise SystemExit("--degrees is required for the bernstein estimator")
        degrees = tuple(int(m) for m in args.degrees.split(","))
        if len(degrees) == 1:
            degrees = degrees * ranks.d
    elif args.degrees:
        raise SystemExit("--degrees only applies to the bernstein estimator")
    est = CopulaEstimate(args.estimator, ranks, degrees)
    g = regular_grid(args.grid)
    values = est.evaluate_grid([g] * ranks.d).ravel()
    rows = (
        [*(_fmt(x) for x in pt), _fmt(v)]
        for pt, v in zip(itertools.product(g, repeat=ranks.d), values)
    )
    _write_rows(args.out, rows)
    return 0


def cmd_validate(args) -> int:
    coeffs = read_coefficients_csv(args.coefficients)
    report = check_copula_conditions(coeffs)
    print(f"degrees: {coeffs.degrees}")
    print(report.summary())
    if args.grid_check:
        low = mixed_partial_grid_min(coeffs, args.grid_check)
        print(f"min mixed partial on {args.grid_check}-point interior grid: {low:.6g} "
              "(heuristic, not a proof)")
    if report.is_copula_certified:
        print("B_m(a) is a copula")
        return 0
    if report.grounded and report.uniform_margins:
        print("C.3 fails: inconclusive, B_m(a) may still be a copula")
        return 2
    print("B_m(a) is not a copula")
    return 1


def cmd_sample(args) -> int:
    ranks = _ranks_from_args(args)
    draws = BetaSampler(ranks, args.scheme, args.seed).draw(args.count)
    _write_rows(args.out, ([_fmt(x) for x in row] for row in draws))
    return 0


def _model_from_args(args):
    return parse_model(args.model, theta=args.theta, rho=args.rho, tau=args.tau, alpha=args.alpha)


def cmd_simulate(args) -> int:
    cfg = ExperimentConfig(
        model=_model_from_args(args),
        estimators=parse_estimators(args.estimators),
        n_values=parse_n_range(args.n),
        reps=args.reps,
        master_seed=args.seed,
        lre_cells=args.cells,
        n_jobs=args.jobs,
        pair_across_n=args.pair_across_n,
    )
    for p in run_study(cfg, args.out):
        print(p)
    return 0


def cmd_lre(args) -> int:
    ns = parse_n_range(args.n)
    if len(ns) != 1:
        raise SystemExit("lre takes a single sample size")
    cfg = ExperimentConfig(
        model=_model_from_args(args),
        estimators=(args.numerator, args.denominator),
        n_values=ns,
        reps=args.reps,
        master_seed=args.seed,
        lre_cells=args.cells,
        n_jobs=args.jobs,
    )
    hm = run_lre_heatmap(cfg, numerator=args.numerator, denominator=args.denominator)
    write_lre_csv(hm, args.out)
    mean, border = hm.mean_lre(), hm.border_contrast()
    print(f"mean LRE {mean.value:.3f}% (se {mean.stderr:.3f}); "
          f"border minus interior {border.value:.3f} (se {border.stderr:.3f})")
    return 0


def _add_model_args(p) -> None:
    p.add_argument("--model", required=True, help="indep | fgm | gauss | gumbel")
    p.add_argument("--theta", type=float, help="FGM parameter")
    p.add_argument("--rho", type=float, help="Gaussian correlation")
    p.add_argument("--tau", type=float, help="Gumbel Kendall's tau")
    p.add_argument("--alpha", type=float, help="Gumbel parameter (alternative to --tau)")
    p.add_argument("--reps", type=int, default=20_000, help="Monte Carlo replications L")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--config", help="key = value file mirroring these options")


def _add_input_args(p) -> None:
    p.add_argument("--input", required=True, help="CSV of observations")
    p.add_argument("--header", action="store_true", help="skip the first line")
    p.add_argument("--ties", choices=("error", "random"), default="error")
    p.add_argument("--tie-seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="empbeta", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="evaluate an estimator on a regular grid")
    _add_input_args(p)
    p.add_argument("--estimator", required=True,
                   choices=("empirical", "checkerboard", "beta", "bernstein"))
    p.add_argument("--degrees", help="m1,m2,... (or a single m for every axis)")
    p.add_argument("--grid", type=int, default=11, help="points per axis, including 0 and 1")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("validate", help="check a Bernstein coefficient array")
    p.add_argument("--coefficients", required=True, help="CSV rows s_1,...,s_d,value")
    p.add_argument("--grid-check", type=int, default=0,
                   help="also report the smallest mixed partial on an interior grid")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sample", help="draw from the fitted empirical beta copula")
    _add_input_args(p)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--scheme", choices=("direct", "orderstat"), default="direct")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("simulate", help="integrated bias/variance/MSE study")
    _add_model_args(p)
    p.add_argument("--estimators", default="empirical,checkerboard,beta",
                   help="comma list; bernstein:n/3, bernstein:jsv, bernstein:<m>, oracle")
    p.add_argument("--n", default="20:100:10", help="start:stop:step (inclusive) or list")
    p.add_argument("--cells", type=int, default=None, help="also write a K x K LRE heatmap")
    p.add_argument("--pair-across-n", action="store_true",
                   help="nest samples so replicates are paired across sample sizes")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("lre", help="localized relative efficiency heatmap")
    _add_model_args(p)
    p.add_argument("--n", default="100")
    p.add_argument("--cells", type=int, default=10)
    p.add_argument("--numerator", default="beta")
    p.add_argument("--denominator", default="empirical")
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_lre)
    return parser


def read_config_file(path) -> list[str]:
    """Turn ``key = value`` lines into ``--key value`` tokens."""
    tokens = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise SystemExit(f"{path}:{lineno}: expected key = value")
            key, value = key.strip().replace("_", "-"), value.strip()
            if value.lower() in ("true", "yes"):
                tokens.append(f"--{key}")
            elif value.lower() not in ("false", "no"):
                tokens += [f"--{key}", value]
    return tokens


def _expand_config(argv: list[str]) -> list[str]:
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise SystemExit("--config needs a file")
    extra = read_config_file(argv[i + 1])
    rest = argv[:i] + argv[i + 2:]
    # subcommand first, then file options, then explicit options (last wins)
    return rest[:1] + extra + rest[1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_expand_config(argv))
    try:
        return args.func(args)
    except (EmpBetaError, OSError) as exc:
        print(f"empbeta: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
