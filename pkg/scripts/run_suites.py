#!/usr/bin/env python3
"""Run every verification suite once and write one JSON report per suite.

    python3 scripts/run_suites.py [--seed S] [--out-dir DIR] [suite ...]

Prints a line per suite with the number of passing checks and the wall time;
exits non-zero if any check fails.
"""

import argparse
import os
import sys
import time

from relchern.report import build_report, render, write_atomic
from relchern.suites import SUITES, SuiteConfig, run_checks


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("suites", nargs="*", default=list(SUITES))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default="reports")
    args = ap.parse_args(argv)
    failed = 0
    for name in args.suites:
        cfg = SuiteConfig(name, seed=args.seed)
        t0 = time.perf_counter()
        checks = run_checks(cfg)
        secs = time.perf_counter() - t0
        report = build_report(name, cfg.limits(), checks)
        write_atomic(os.path.join(args.out_dir, f"{name}-seed{args.seed}.json"), render(report))
        s = report["summary"]
        failed += s["failed"]
        print(f"{name:12s} {s['passed']:5d}/{s['total']:<5d} {secs:8.1f}s", flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
