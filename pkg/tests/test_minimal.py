from __future__ import annotations

from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from minfib.category import arrow_category, cospan_category, group_category
from minfib.diagrams import CDiagram, free_diagram_from, projection_to_constant, to_point
from minfib.errors import UnsupportedError, ValidationError
from minfib.groups import cyclic
from minfib.minimal import (MinimalModel, PreorderedSet, extract_minimal, is_minimal, minimal_iso, minimal_subset,
                            satisfies_r1)
from minfib.simplicial import circle, codiscrete, nerve, product, standard_simplex


def brute_minimal_r1_subsets(A: PreorderedSet):
    """All subsets satisfying R1 none of whose proper subsets does."""
    els = list(A.elems)
    r1 = [set(s) for k in range(len(els) + 1) for s in combinations(els, k) if satisfies_r1(A, s)]
    return [s for s in r1 if not any(t < s for t in r1)]


@st.composite
def preorders(draw):
    n = draw(st.integers(1, 7))
    els = list(range(n))
    pairs = draw(st.lists(st.tuples(st.sampled_from(els), st.sampled_from(els)), max_size=12))
    marked = draw(st.sets(st.sampled_from(els)))
    return PreorderedSet(els, pairs), marked


@settings(max_examples=150, deadline=None)
@given(preorders())
def test_minimal_subset_is_r1_and_r2(data):
    A, marked = data
    out = set(minimal_subset(A, lambda x: x in marked))
    assert satisfies_r1(A, out)
    assert out in brute_minimal_r1_subsets(A)
    # a class containing a preferred element contributes a preferred one
    for x in out:
        cls = [y for y in A.elems if A.equivalent(x, y)]
        if any(y in marked for y in cls):
            assert x in marked


def test_preorder_closure():
    A = PreorderedSet("abc", [("a", "b"), ("b", "c")])
    assert A.leq("a", "c") and not A.leq("c", "a")
    B = PreorderedSet("abc", [("a", "b"), ("b", "a")])
    assert B.equivalent("a", "b")
    assert minimal_subset(B) == ["a", "c"]


def _check(model: MinimalModel, d=2):
    assert model.verify() == []
    rep = is_minimal(model.projection(), d, basis=model.sub_basis)
    assert rep.ok and not rep.unknown
    return model


def test_contractible_total_space_gives_point():
    X = CDiagram.single(codiscrete(cyclic(2).elements, 4, "EZ/2"))
    m = _check(extract_minimal(to_point(X), 2, 10 ** 6))
    assert m.is_point()


@pytest.mark.parametrize("order", [2, 3])
def test_nerve_is_already_minimal(order):
    B = nerve(cyclic(order), 4)
    X = CDiagram.single(B)
    m = _check(extract_minimal(to_point(X), 2, 10 ** 6))
    assert m.sub.at["*"].counts() == B.counts()[:4]  # the model is carried to dimension d + 1


def test_fibrewise_retraction_over_circle():
    E = codiscrete(cyclic(2).elements, 4, "E")
    S = circle(4)
    P = product(E, S)
    X = CDiagram.single(P)
    p = projection_to_constant(X, S, {"*": {g: P.explicit[P.ident(g)][1] for g in P.gen_dim}})
    m = _check(extract_minimal(p, 2, 10 ** 6))
    assert m.sub.at["*"].counts() == (1, 1, 0, 0)


@pytest.mark.parametrize("cat,c", [(arrow_category(), "a"), (group_category(cyclic(2)), "*")])
def test_free_diagrams_on_contractible(cat, c):
    X = free_diagram_from(cat, c, codiscrete(cyclic(2).elements, 4, "E"))
    m = _check(extract_minimal(to_point(X), 2, 10 ** 6))
    # one vertex per morphism out of c
    for d in cat.objects:
        assert len(m.sub.at[d].simplices(0)) == len(cat.hom(c, d))
        assert m.sub.at[d].counts()[1:] == (0, 0, 0)


def test_model_json_round_trip():
    X = CDiagram.single(codiscrete(cyclic(2).elements, 4, "EZ/2"))
    p = to_point(X)
    m = extract_minimal(p, 2, 10 ** 6)
    again = MinimalModel.from_json(p, m.to_json())
    assert again.verify() == []
    assert again.to_json() == m.to_json()


def test_extraction_refuses_bad_inputs():
    D = CDiagram.single(standard_simplex(1, 4))
    with pytest.raises(ValidationError):
        extract_minimal(to_point(D), 2, 10 ** 5)
    from minfib.errors import TruncationError
    with pytest.raises(TruncationError):
        extract_minimal(to_point(CDiagram.single(nerve(cyclic(2), 3))), 2)


def test_nerve_times_contractible_is_nerve():
    B = nerve(cyclic(2), 4)
    X = CDiagram.single(product(B, codiscrete(cyclic(2).elements, 4)))
    m = _check(extract_minimal(to_point(X), 2, 10 ** 6))
    pt = m.p.target.at["*"]
    q = to_point(CDiagram.single(nerve(cyclic(2), 3)), pt)
    assert minimal_iso(m.projection(), q) is not None
    # the nerve of Z/3 is not isomorphic to it
    r = to_point(CDiagram.single(nerve(cyclic(3), 3)), pt)
    assert minimal_iso(m.projection(), r) is None


def test_non_ei_category_refused():
    from minfib.category import idempotent_category
    X = free_diagram_from(idempotent_category(), "a", codiscrete(cyclic(2).elements, 4))
    with pytest.raises(UnsupportedError):
        extract_minimal(to_point(X), 2, 10 ** 5)


def test_free_cospan_diagram_on_nerve_is_minimal():
    B = nerve(cyclic(2), 4)
    X = free_diagram_from(cospan_category(), "a", B)
    m = _check(extract_minimal(to_point(X), 2, 10 ** 6))
    assert m.sub.at["b"].counts() == B.counts()[:4]
    assert m.sub.at["c"].counts() == (0, 0, 0, 0)
