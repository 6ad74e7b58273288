from __future__ import annotations

import pytest

from minfib.errors import Budget, BudgetExhausted, ValidationError
from minfib.groups import cyclic
from minfib.lifting import (CellInclusion, LiftingProblem, constant_prisms, prism_ends, prism_face, prism_homotopy,
                            prism_value, prism_violations, solve)
from minfib.simplicial import SimplicialMap, codiscrete, horn, nerve, point_set, standard_simplex


def _to_point(X, pt):
    return SimplicialMap.to_point(X, pt)


def test_horn_extension_into_nerve():
    B = nerve(cyclic(2), 2)
    L = horn(2, 1, 2)
    D = standard_simplex(2, 2)
    g = B.ref_of[("g",)]
    # the horn as a subcomplex of Delta[2]
    small = [x for x in D.gen_dim if x in L.gen_dim]
    partial = {"0": B.ref_of[()], "1": B.ref_of[()], "2": B.ref_of[()], "01": g, "12": g}
    pt = point_set(2)
    prob = LiftingProblem(CellInclusion.of(D, small), _to_point(B, pt), partial, _to_point(D, pt))
    lift = solve(prob)
    assert B.explicit[lift(D.ref("012"))] == ("g", "g")


def test_not_a_subcomplex_rejected():
    D = standard_simplex(1, 1)
    with pytest.raises(ValidationError):
        CellInclusion.of(D, ["01"])


def test_budget_is_distinct_from_refutation():
    E = codiscrete(cyclic(2).elements, 3)
    x, y = E.ref_of[("e",)], E.ref_of[("g",)]
    with pytest.raises(BudgetExhausted):
        prism_homotopy(E, x, y, None, budget=Budget(0))
    H = prism_homotopy(E, x, y, None)
    assert H is not None and prism_ends(E, H) == (x, y)


def test_nerve_vertices_vs_loops():
    B = nerve(cyclic(2), 3)
    e, g = B.ref_of[("e",)], B.ref_of[("g",)]
    # rel boundary: the loop g is not homotopic to the constant loop
    assert prism_homotopy(B, e, g, None) is None
    assert prism_homotopy(B, g, g, None) == constant_prisms(B, g)


def test_prism_value_matches_pieces():
    E = codiscrete(cyclic(2).elements, 3)
    x = E.ref_of[("e", "g")]
    y = E.ref_of[("g", "g")]
    H = prism_homotopy(E, x, y, None, rel_boundary=False)
    assert H is not None and prism_violations(E, H) == []
    assert prism_value(E, H, (0, 1), (0, 0)) == x
    assert prism_value(E, H, (0, 1), (1, 1)) == y
    # restriction to the faces is again a homotopy between the faces
    for i in range(2):
        F = prism_face(E, H, i)
        assert prism_ends(E, F) == (E.face(i, x), E.face(i, y))
