#!/usr/bin/env python3
"""Run the acceptance criteria and print one PASS/FAIL line per criterion."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

import test_acceptance  # noqa: E402


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--only", type=int, nargs="*", help="criterion numbers to run (default: all)")
    args = parser.parse_args(argv)
    tests = sorted((name, fn) for name, fn in vars(test_acceptance).items() if name.startswith("test_criterion_"))
    chosen = [(n, fn) for n, fn in tests if not args.only or int(n.split("_")[2]) in args.only]
    failed = 0
    for _, fn in chosen:
        try:
            fn()
        except AssertionError:
            failed += 1
    print(f"{len(chosen) - failed}/{len(chosen)} criteria passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
