#!/usr/bin/env python3
"""Compare the truth planner and the volume-maximizing platform over budgets.

For each budget on a grid, runs both uniform optimizers and prints the
chosen rates side by side along with the located slack-region boundaries.
The platform's rate never exceeds the planner's, and above a budget
threshold the two coincide at full spend.

    python scripts/budget_frontier.py --lambda 2 --x 0.3 --points 30
"""

import argparse
import sys

import numpy as np

from rumor_inspect import ModelParams, compute_thresholds, maximize_platform, maximize_truth_uniform


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lambda", dest="lam", type=float, default=2.0)
    ap.add_argument("--x", type=float, default=0.3)
    ap.add_argument("--points", type=int, default=30)
    ap.add_argument("--out", type=str, default=None)
    args = ap.parse_args()

    p = ModelParams.from_lambda(args.lam, args.x)
    lines = ["A,planner_alpha,planner_theta0,platform_alpha,platform_theta"]
    for A in np.linspace(0.02, 1.0, args.points):
        planner = maximize_truth_uniform(p, float(A))
        platform = maximize_platform(p, float(A))
        lines.append(
            f"{float(A)!r},{planner.allocation.alpha0!r},{planner.objective!r},"
            f"{platform.allocation.alpha0!r},{platform.objective!r}"
        )

    thr = compute_thresholds(p)
    lines.append(f"# A_lower: {thr.A_lower!r}")
    lines.append(f"# A_upper: {thr.A_upper!r}")
    lines.append(f"# A_tilde: {thr.A_tilde!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
