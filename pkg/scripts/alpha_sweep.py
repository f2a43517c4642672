#!/usr/bin/env python3
"""Sweep the uniform inspection rate and dump steady-state prevalences.

The default 501-point sweep at lam=2, x=0.3 shows the non-monotone shape of
truth prevalence: it rises while the endemic rumor feeds inspectors, drops
to zero exactly at the eradication threshold 1 - 1/(lam*(1-x)), then climbs
linearly once the rumor is gone.

    python scripts/alpha_sweep.py --lambda 2 --x 0.3 --steps 501 --out sweep.csv
"""

import argparse
import sys

from rumor_inspect.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lambda", dest="lam", type=float, default=2.0)
    ap.add_argument("--x", type=float, default=0.3)
    ap.add_argument("--steps", type=int, default=501)
    ap.add_argument("--out", type=str, default=None)
    args = ap.parse_args()

    argv = ["sweep", "--axis", "alpha", "--lambda", str(args.lam), "--x", str(args.x), "--steps", str(args.steps)]
    if args.out:
        argv += ["--out", args.out]
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
