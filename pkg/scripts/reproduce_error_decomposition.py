#!/usr/bin/env python3
"""Reproduce the fixed-design error decomposition study.

Runs the closed-form decomposition and the paired Monte Carlo for the
equicorrelated regression preset (n=100, degree 20, rho=0.5, sigma2=1) and
writes decomposition.txt, errors.csv, summary.txt, and histogram.svg.
"""

import argparse
import sys

from optcv.cli import main


def run() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/error-decomposition")
    parser.add_argument("--reps", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--threads", type=int, default=4)
    args = parser.parse_args()

    code = main(["analytic", "--preset", "paper-fig-mse", "--out", args.out])
    if code != 0:
        return code
    return main(
        [
            "simulate", "--preset", "paper-fig-mse",
            "--reps", str(args.reps),
            "--seed", str(args.seed),
            "--threads", str(args.threads),
            "--svg",
            "--out", args.out,
        ]
    )


if __name__ == "__main__":
    sys.exit(run())
