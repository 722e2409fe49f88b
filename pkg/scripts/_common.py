"""Argument handling shared by the experiment scripts."""

import argparse
import time

from empbeta.harness import ExperimentConfig, parse_n_range, run_study


def parser(description: str, default_n: str, default_out: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--reps", type=int, default=20_000, help="Monte Carlo replications per n")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--n", default=default_n, help="start:stop:step (inclusive) or a list")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (needs joblib)")
    p.add_argument("--out", default=default_out, help="output directory")
    return p


def run_models(models, estimators, args, **extra) -> None:
    for model in models:
        cfg = ExperimentConfig(model, estimators, parse_n_range(args.n), reps=args.reps,
                               master_seed=args.seed, n_jobs=args.jobs, **extra)
        t0 = time.perf_counter()
        paths = run_study(cfg, f"{args.out}/{model.label}")
        print(f"{model.label}: {len(paths)} files in {time.perf_counter() - t0:.1f}s")
