#!/usr/bin/env python3
"""Extract minimal models of a few fibrations and print their sizes."""
from __future__ import annotations

import argparse
import time

from minfib.category import arrow_category, cospan_category
from minfib.diagrams import CDiagram, free_diagram_from, projection_to_constant, to_point
from minfib.groups import cyclic
from minfib.minimal import extract_minimal, is_minimal
from minfib.simplicial import circle, codiscrete, nerve, product


def corpus(N: int):
    E = codiscrete(cyclic(2).elements, N, "EZ/2")
    yield "EZ/2 -> *", to_point(CDiagram.single(E))
    yield "BZ/2 -> *", to_point(CDiagram.single(nerve(cyclic(2), N)))
    yield "BZ/2 x EZ/2 -> *", to_point(CDiagram.single(product(nerve(cyclic(2), N), E)))
    S = circle(N)
    P = product(E, S)
    yield "EZ/2 x S1 -> S1", projection_to_constant(CDiagram.single(P), S,
                                                    {"*": {g: P.explicit[P.ident(g)][1] for g in P.gen_dim}})
    yield "free on EZ/2 at a (a -> b)", to_point(free_diagram_from(arrow_category(), "a", E))
    yield "free on BZ/2 at a (cospan)", to_point(free_diagram_from(cospan_category(), "a", nerve(cyclic(2), N)))


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dim", type=int, default=2, help="dimension cap d; inputs are built at d + 2")
    parser.add_argument("--budget", type=int, default=10 ** 6)
    args = parser.parse_args(argv)
    for name, p in corpus(args.dim + 2):
        start = time.perf_counter()
        m = extract_minimal(p, args.dim, args.budget)
        ok = m.verify() == [] and is_minimal(m.projection(), args.dim, basis=m.sub_basis).ok
        sizes = {c: m.sub.at[c].counts() for c in m.sub.cat.objects}
        before = {c: p.source.at[c].counts()[: args.dim + 2] for c in p.source.cat.objects}
        print(f"{name:28s} {before} -> {sizes}  verified={ok} ({time.perf_counter() - start:.2f}s)")


if __name__ == "__main__":
    main()
