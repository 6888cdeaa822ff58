#!/usr/bin/env python3
"""Run every verification suite and stop at the first failure.

The fast suites (dpii, fredholm, oracles) take seconds; corner-asymptotics
redoes the high-precision recursion at four sizes and mc-cross samples
each model, so the whole sweep is a few minutes.
"""

import argparse
import sys

from lppdet.cli import main as lppdet_main

SUITES = ["dpii", "fredholm", "oracles", "corner-asymptotics", "mc-cross"]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="verify_reports")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=20000,
                    help="sample count for the mc-cross suite")
    args = ap.parse_args()

    for suite in SUITES:
        argv = ["--out-dir", args.out_dir, "--seed", str(args.seed),
                "verify", suite]
        if suite == "mc-cross":
            argv += ["--trials", str(args.trials)]
        print("lppdet " + " ".join(argv), flush=True)
        code = lppdet_main(argv)
        if code != 0:
            print(f"suite {suite} failed with exit code {code}", file=sys.stderr)
            return code
    print("all suites passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
