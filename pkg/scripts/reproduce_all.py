"""Run the reproduction suites and print one line per experiment.

Usage: python scripts/reproduce_all.py [--extended] [--out DIR] [--workers K]
"""

import argparse
import sys

from lonogo.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--extended", action="store_true")
    ap.add_argument("--out", default="results/reproduce")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--memory-budget", type=int, default=None)
    a = ap.parse_args()
    argv = ["reproduce", "all" if a.extended else "default", "--out", a.out, "--workers", str(a.workers)]
    if a.memory_budget is not None:
        argv += ["--memory-budget", str(a.memory_budget)]
    sys.exit(main(argv))
