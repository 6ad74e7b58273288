from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from minfib.errors import ValidationError
from minfib.groups import cyclic, symmetric
from minfib.simplicial import (HornProblem, SimplicialMap, SimplicialSet, boundary, circle, codiscrete, components,
                               fill_horn, horn, is_kan_upto, nerve, normalize, parse_ops, parse_word, product,
                               standard_simplex)


def binom(n, k):
    from math import comb
    return comb(n, k)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_standard_simplex_counts(n):
    D = standard_simplex(n)
    assert D.counts() == tuple(binom(n + 1, k + 1) for k in range(n + 1))
    # all simplices of dim k: monotone maps [k] -> [n]
    for k in range(n + 1):
        assert len(D.simplices(k)) == binom(n + k + 1, k + 1)


def test_boundary_and_horn_counts():
    assert boundary(2).counts() == (3, 3, 0)
    assert boundary(2, 1).counts() == (3, 3)
    assert horn(2, 1).counts() == (3, 2, 0)
    assert horn(3, 0, 3).counts() == (4, 6, 3, 0)


def test_nerve_counts():
    for m in (2, 3):
        B = nerve(cyclic(m), 4)
        assert [len(B.simplices(n)) for n in range(5)] == [m ** n for n in range(5)]
        assert B.identity_violations() == []


def test_codiscrete_is_contractible_shape():
    E = codiscrete(cyclic(2).elements, 3, "EZ/2")
    assert [len(E.simplices(n)) for n in range(4)] == [2, 4, 8, 16]
    assert len(components(E)) == 1


def test_parse_rejects_non_decreasing_words():
    assert parse_word("s3 s1 x") == ("x", (3, 1))
    with pytest.raises(ValidationError):
        parse_word("s1 s3 x")
    with pytest.raises(ValidationError):
        parse_word("s1 s1 x")


def test_face_of_degenerate_reduces():
    D = standard_simplex(2, 4)
    x = D.ref("s1 s0 01")
    assert x.dim == 3 and D.explicit[x] == (0, 0, 0, 1)
    assert D.face(0, x) == D.ref("s0 01")
    assert D.face(3, x) == D.ref("s1 s0 0")
    # face/degeneracy cancellation: d_i s_i = d_{i+1} s_i = id
    y = D.ref("012")
    for i in range(3):
        s = D.degeneracy(i, y)
        assert D.face(i, s) == y and D.face(i + 1, s) == y


def test_normalize_operator_words():
    D = standard_simplex(2, 4)
    y = D.ref("012")
    # d1 then s1: (0,1,2) -> (0,2) -> (0,2,2)
    z = normalize(D, parse_ops("d1 s1"), y)
    assert D.explicit[z] == (0, 2, 2)
    assert z == D.ref("s1 02")


def test_circle_and_product():
    S = circle(2)
    assert S.counts() == (1, 1, 0)
    I = standard_simplex(1, 2)
    P = product(I, I)
    assert P.counts() == (4, 5, 2)
    assert P.identity_violations() == []


def test_horn_fill_in_nerve():
    B = nerve(cyclic(2), 3)
    g = B.ref_of[("g",)]
    prob = HornProblem(B, 2, 1, (g, None, g))
    z = fill_horn(B, prob)
    assert B.explicit[z] == ("g", "g")
    assert B.explicit[B.face(1, z)] == ("e",)


def test_boundary_horn_has_no_filler():
    X = boundary(2, 2)
    e01, e12 = X.ref("01"), X.ref("12")
    assert fill_horn(X, HornProblem(X, 2, 1, (e12, None, e01))) is None
    assert not is_kan_upto(X, 2).ok
    assert is_kan_upto(nerve(cyclic(3), 3), 3).ok


def test_map_validation_catches_bad_assignment():
    D = standard_simplex(1, 1)
    S = circle(1)
    good = SimplicialMap(D, S, {"0": S.ref("v"), "1": S.ref("v"), "01": S.ref("e")})
    assert good(D.ref("01")) == S.ref("e")
    with pytest.raises(ValidationError):
        SimplicialMap(S, D, {"v": D.ref("0"), "e": D.ref("01")})


def test_json_round_trip():
    X = nerve(symmetric(3), 2)
    Y = SimplicialSet.from_json(X.to_json())
    assert Y.counts() == X.counts()
    assert Y.identity_violations() == []


@st.composite
def operator_words(draw, top=4):
    """A valid sequence of face/degeneracy steps starting from dimension 2."""
    steps, dim = [], 2
    for _ in range(draw(st.integers(0, 6))):
        if dim < top and (dim == 0 or draw(st.booleans())):
            steps.append(("s", draw(st.integers(0, dim))))
            dim += 1
        else:
            steps.append(("d", draw(st.integers(0, dim))))
            dim -= 1
    return steps


@settings(max_examples=200, deadline=None)
@given(operator_words())
def test_operators_agree_with_vertex_composition(steps):
    """Applying steps one at a time matches acting on the explicit vertex tuple."""
    D = standard_simplex(2, 4)
    x = D.ref("012")
    verts = (0, 1, 2)
    for kind, i in steps:
        if kind == "d":
            x = D.face(i, x)
            verts = verts[:i] + verts[i + 1:]
        else:
            x = D.degeneracy(i, x)
            verts = verts[: i + 1] + verts[i:]
    assert D.explicit[x] == verts
