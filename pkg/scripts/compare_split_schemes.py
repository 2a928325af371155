#!/usr/bin/env python3
"""Compare cross-validation schemes against true out-of-sample error.

Runs the AR(1) comparison (nearest-neighbor estimator) at several degrees of
autocorrelation and the equicorrelated fixed-design comparison, writing one
comparison.csv per configuration.
"""

import argparse
import sys
from pathlib import Path

from optcv.cli import main


def run() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/scheme-comparison")
    parser.add_argument("--reps", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--threads", type=int, default=4)
    args = parser.parse_args()

    for phi in (0.0, 0.5, 0.8):
        out = Path(args.out) / f"ar1-phi{phi:0.1f}"
        code = main(
            [
                "compare", "--preset", "ar1-bergmeir",
                "--phi", str(phi),
                "--reps", str(args.reps),
                "--seed", str(args.seed),
                "--threads", str(args.threads),
                "--out", str(out),
            ]
        )
        if code != 0:
            return code

    out = Path(args.out) / "equicorrelated"
    return main(
        [
            "compare", "--preset", "equicorrelated",
            "--reps", str(args.reps),
            "--seed", str(args.seed),
            "--threads", str(args.threads),
            "--out", str(out),
        ]
    )


if __name__ == "__main__":
    sys.exit(run())
