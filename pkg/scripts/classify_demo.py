#!/usr/bin/env python3
"""Classify twisted bundles with fibre a two-point set over small bases.

For each base the script counts twisting functions up to equivalence, counts maps into
the classifying complex up to homotopy, and reports whether the two agree.
"""
from __future__ import annotations

import argparse
import time

from minfib.bundles import classify, swap_action
from minfib.category import arrow_category
from minfib.simplicial import boundary, circle, standard_simplex

BASES = {
    "delta1": lambda N: standard_simplex(1, N),
    "circle": circle,
    "boundary2": lambda N: boundary(2, N),
}


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--bases", nargs="*", default=list(BASES), choices=list(BASES))
    parser.add_argument("--dim", type=int, default=2)
    parser.add_argument("--budget", type=int, default=10 ** 6)
    parser.add_argument("--arrow", action="store_true", help="use fibres indexed by the category a -> b")
    args = parser.parse_args(argv)
    act = swap_action(arrow_category() if args.arrow else None, args.dim)
    for name in args.bases:
        B = BASES[name](args.dim)
        start = time.perf_counter()
        rep = classify(B, act.group, act, args.dim, args.budget)
        print(f"{name:10s} {rep.summary()} ({time.perf_counter() - start:.2f}s)")


if __name__ == "__main__":
    main()
