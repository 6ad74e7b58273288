"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import io
import json
import random
import sys
import time
from contextlib import contextmanager, redirect_stdout
from pathlib import Path

from minfib.bundles import (Atlas, TwistingFunction, build_tcp, classify, enumerate_twisting, swap_action,
                            transformation_elements, validate_twisting, wbar)
from minfib.category import arrow_category, cospan_category, group_category, trivial_category
from minfib.cli import run
from minfib.diagrams import (CDiagram, compute_basis, delta, free_diagram_from, is_fibration_upto,
                             projection_to_constant, pullback_constant_base, to_point, verify_basis)
from minfib.groups import cyclic
from minfib.minimal import (MinimalModel, PreorderedSet, extract_minimal, is_minimal, minimal_iso, minimal_subset)
from minfib.simplicial import (SimplicialMap, boundary, circle, codiscrete, components, horn, nerve, point_set,
                               product, standard_simplex)

DATA = Path(__file__).resolve().parent.parent / "data"
RESULTS: dict = {}


@contextmanager
def criterion(number: int, title: str, limit: float):
    start = time.perf_counter()
    status, detail = "FAIL", ""
    try:
        yield
        status = "PASS"
    except AssertionError as exc:
        detail = f" -- {str(exc).splitlines()[0]}" if str(exc) else ""
        raise
    finally:
        elapsed = time.perf_counter() - start
        if status == "PASS" and elapsed >= limit:
            status, detail = "FAIL", f" -- runtime {elapsed:.1f}s exceeds {limit:.0f}s"
        line = f"[{status}] criterion {number}: {title} ({elapsed:.2f}s, limit {limit:.0f}s){detail}"
        RESULTS[number] = line
        print(line)
    assert elapsed < limit, f"runtime {elapsed:.1f}s exceeds {limit:.0f}s"


# 1 ---------------------------------------------------------------------------

def test_criterion_1_simplicial_identities():
    with criterion(1, "simplicial identities hold exhaustively on the corpus", 5):
        corpus = [standard_simplex(n) for n in range(4)] + [boundary(2), horn(2, 0), horn(2, 1), horn(2, 2)]
        corpus += [nerve(cyclic(2), 4), nerve(cyclic(3), 4), codiscrete(cyclic(2).elements, 3, "EZ/2"), circle(3)]
        checked = 0
        for X in corpus:
            bad = X.identity_violations()
            assert bad == [], f"{X.name}: {bad[0]}"
            checked += sum(len(X.simplices(n)) for n in range(X.truncation + 1))
        assert checked > 0


# 2 ---------------------------------------------------------------------------

def test_criterion_2_basis_axioms():
    with criterion(2, "free bases of representables verified; constant diagram over a->b refuted", 5):
        for cat in (trivial_category(), arrow_category(), group_category(cyclic(2))):
            for c in cat.objects:
                for n in range(3):
                    X = delta(cat, c, n, 2)
                    basis = compute_basis(X)
                    assert basis is not None, f"no basis for delta^{c}_{n} over {cat.name}"
                    check = verify_basis(X, basis.gens)
                    assert check.ok, check.reason
                    # every simplex has exactly one witness, and the basis is degeneracy closed
                    assert len(check.witness) == sum(len(X.simplices(m)) for m in range(3))
        const = CDiagram.constant_diagram(arrow_category(), point_set(2))
        found = compute_basis(const)
        assert found is None, ("constant diagram over a->b admits the basis "
                               + ", ".join(f"{b.obj}:{b.simplex}" for b in found.gens)
                               + " (its structure map is injective)")


# 3 ---------------------------------------------------------------------------

def _model_cert(name):
    path = str(DATA / name)
    with redirect_stdout(io.StringIO()):
        return run(["minimal-model", "--diagram", path, "--dim", "2", "--budget", str(10 ** 6), "--format", "json"],
                   timestamp="fixed")


def test_criterion_3_minimal_models():
    with criterion(3, "E(Z/2) -> * gives a point; BZ/2 -> * is unchanged; certificates re-validate", 60):
        E = CDiagram.single(codiscrete(cyclic(2).elements, 4, "EZ/2"))
        m = extract_minimal(to_point(E), 2, 10 ** 6)
        assert m.is_point() and m.verify() == []
        B = nerve(cyclic(2), 4)
        pB = to_point(CDiagram.single(B))
        mb = extract_minimal(pB, 2, 10 ** 6)
        assert mb.verify() == []
        assert all(mb.sub.contains(s) for n in range(4) for s in pB.source.simplices(n)), "nerve was shrunk"
        assert all(mb.retraction[x] == x for x in mb.retraction)
        for name, point in (("ez2.json", True), ("bz2.json", False)):
            code, doc = _model_cert(name)
            assert code == 0, doc["verdict"]
            data = json.loads((DATA / name).read_text())
            X = CDiagram.from_json(data)
            again = MinimalModel.from_json(to_point(X), doc["artifacts"]["model"])
            assert again.verify() == [] and again.is_point() == point
            assert is_minimal(again.projection(), 2, basis=again.sub_basis).ok


# 4 ---------------------------------------------------------------------------

def _permuted(X: CDiagram) -> CDiagram:
    mapping = {c: {g: f"z{i}_{len(g)}" for i, g in enumerate(sorted(X.at[c].gen_dim, reverse=True))}
               for c in X.cat.objects}
    return X.renamed(mapping, reorder=lambda lv: list(reversed(lv)))


def test_criterion_4_uniqueness_up_to_iso():
    with criterion(4, "models from permuted presentations are isomorphic", 60):
        inputs = [CDiagram.single(product(nerve(cyclic(2), 4), codiscrete(cyclic(2).elements, 4))),
                  free_diagram_from(cospan_category(), "a", codiscrete(cyclic(2).elements, 4)),
                  CDiagram.single(codiscrete(cyclic(3).elements, 4))]
        for X in inputs:
            pt = point_set(4)
            Y = _permuted(X)
            assert Y.identity_violations() == [] and Y.naturality_violations() == []
            assert set(Y.at[X.cat.objects[0]].gen_dim).isdisjoint(X.at[X.cat.objects[0]].gen_dim)
            m1 = extract_minimal(to_point(X, pt), 2, 10 ** 6)
            m2 = extract_minimal(to_point(Y, pt), 2, 10 ** 6)
            assert m1.verify() == [] and m2.verify() == []
            iso = minimal_iso(m1.projection(), m2.projection(), 10 ** 6)
            assert iso is not None, f"no isomorphism between the models of {X.name}"
            assert iso.is_bijective()


# 5 ---------------------------------------------------------------------------

def _brute_minimal_masks(n, below):
    """Bitmasks of all subsets satisfying R1 and minimal among those (R2)."""
    r1 = [m for m in range(1 << n) if all(m & below[w] for w in range(n))]
    r1_set = set(r1)
    out = []
    for m in r1:
        sub = (m - 1) & m
        ok = True
        while True:
            if sub != m and sub in r1_set:
                ok = False
                break
            if sub == 0:
                break
            sub = (sub - 1) & m
        if ok:
            out.append(m)
    return out


def test_criterion_5_preorder_selection():
    with criterion(5, "minimal_subset satisfies R1 and R2 on 500 random preorders", 30):
        rng = random.Random(20261016)
        preferred_checks = 0
        for trial in range(500):
            n = rng.randint(1, 10)
            pairs = [(rng.randrange(n), rng.randrange(n)) for _ in range(rng.randint(0, 2 * n))]
            A = PreorderedSet(range(n), pairs)
            marked = {x for x in range(n) if rng.random() < 0.3}
            below = [sum(1 << x for x in range(n) if A.leq(x, w)) for w in range(n)]
            out = minimal_subset(A, lambda x: x in marked)
            mask = sum(1 << x for x in out)
            assert mask in _brute_minimal_masks(n, below), f"trial {trial}: {out} is not a minimal R1 subset"
            for x in out:
                cls = [y for y in range(n) if A.equivalent(x, y)]
                if any(y in marked for y in cls):
                    preferred_checks += 1
                    assert x in marked, f"trial {trial}: preference ignored in class {cls}"
        assert preferred_checks > 0


# 6 ---------------------------------------------------------------------------

def test_criterion_6_tcp_round_trip():
    with criterion(6, "TCPs over Delta[1] and the circle: naturality, fibration, xi^0 = t, connectivity", 10):
        for cat in (None, arrow_category()):
            act = swap_action(cat, 2)
            for B in (standard_simplex(1, 2), circle(2)):
                ts = enumerate_twisting(B, act.group, 2)
                assert len(ts) == 2
                for t in ts:
                    bundle = build_tcp(B, t, act)
                    X = bundle.total
                    assert X.naturality_violations() == [] and X.identity_violations() == []
                    assert is_fibration_upto(bundle.projection, 2).ok
                    xi = transformation_elements(Atlas.tautological(bundle))
                    assert all(xi[(v, 0)] == t(v) for v in B.all_simplices() if v.dim >= 1)
                    edge = B.nondegenerate(1)[0]
                    for c in X.cat.objects:
                        n_comp = len(components(X.at[c]))
                        if B.name.startswith("Delta"):
                            assert n_comp == 2
                        else:
                            assert (n_comp == 1) == (t(edge) == "g")


# 7 ---------------------------------------------------------------------------

def _brute_twisting_count(B, G):
    from itertools import product as cart
    cells = [v for m in range(1, B.truncation + 1) for v in B.nondegenerate(m)]
    count = 0
    for vals in cart(*[G.elements(v.dim - 1) for v in cells]):
        if not validate_twisting(TwistingFunction(B, G, dict(zip(cells, vals)))):
            count += 1
    return count


def _brute_map_count(B, W):
    from itertools import product as cart
    gens = [g for lv in B.generators for g in lv]
    count = 0
    for vals in cart(*[W.simplices(B.gen_dim[g]) for g in gens]):
        try:
            SimplicialMap(B, W, dict(zip(gens, vals)))
        except Exception:
            continue
        count += 1
    return count


def test_criterion_7_classification():
    with criterion(7, "circle / Z/2: 2 twisting classes, 2 homotopy classes, bijection", 120):
        act = swap_action(None, 2)
        B = circle(2)
        rep = classify(B, act.group, act, 2, 10 ** 6)
        assert rep.twisting_count == _brute_twisting_count(B, act.group)
        assert rep.map_count == _brute_map_count(B, wbar(act.group, 2))
        assert len(rep.twisting_classes) == 2, rep.summary()
        assert len(rep.map_classes) == 2, rep.summary()
        assert rep.bijection, rep.summary()


# 8 ---------------------------------------------------------------------------

def _inclusions(B, N):
    """A vertex and an edge of ``B`` as maps from Delta[0], Delta[1] truncated at ``N``."""
    v = B.simplices(0)[0]
    edges = B.nondegenerate(1)
    e = edges[0] if edges else B.degeneracy(0, v)
    pt, D = standard_simplex(0, N), standard_simplex(1, N)
    return [("vertex", SimplicialMap(pt, B, {"0": v})),
            ("edge", SimplicialMap(D, B, {g: B.apply(D.explicit[D.ident(g)], e) for g in D.gen_dim}))]


def test_criterion_8_pullback_minimality():
    with criterion(8, "pullbacks of minimal fibrations along a vertex and an edge stay minimal", 30):
        corpus = []
        for order in (2, 3):
            corpus.append((f"BZ/{order}", to_point(CDiagram.single(nerve(cyclic(order), 3)))))
        corpus.append(("free cospan", to_point(free_diagram_from(cospan_category(), "a", nerve(cyclic(2), 3)))))
        act = swap_action(arrow_category(), 3)
        S = circle(3)
        for value in ("e", "g"):
            t = TwistingFunction(S, act.group, {S.ref("e"): value})
            corpus.append((f"cover t={value}", build_tcp(S, t, act).projection))
        E = codiscrete(cyclic(2).elements, 4, "E")
        S4 = circle(4)
        P = product(E, S4)
        X = CDiagram.single(P)
        model = extract_minimal(projection_to_constant(X, S4, {"*": {g: P.explicit[P.ident(g)][1]
                                                                     for g in P.gen_dim}}), 2, 10 ** 6)
        corpus.append(("model of E x S1", model.projection()))
        for name, p in corpus:
            assert is_minimal(p, 2).ok, f"{name} is not minimal"
            X = p.source
            basis = X.basis if X.basis is not None else compute_basis(X)
            B = p.target.at[p.target.cat.objects[0]]
            for kind, alpha in _inclusions(B, X.truncation):
                q = pullback_constant_base(alpha, p)
                A = alpha.source
                predicted = sum(1 for b in basis.gens for u in A.simplices(b.dim)
                                if alpha(u) == p.components[b.obj](b.simplex))
                assert len(q.source.basis.gens) == predicted, f"{name} along {kind}: basis size"
                rep = is_minimal(q, 2, basis=q.source.basis)
                assert rep.ok and not rep.unknown, f"{name} along {kind}: {rep.verdict}"


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for fn in tests:
        try:
            fn()
        except AssertionError:
            failed += 1
    print(f"{len(tests) - failed}/{len(tests)} criteria passed")
    sys.exit(1 if failed else 0)
