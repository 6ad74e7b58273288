from __future__ import annotations

import pytest

from minfib.category import arrow_category, cospan_category, group_category, trivial_category
from minfib.diagrams import (CDiagram, DiagramMap, attach_cell, aut_group, compute_basis, delta, diagram_maps,
                             external_product, find_basis, free_diagram_from, is_fibration_upto,
                             mapping_space, mapping_space_face, pullback_constant_base, simplex_inclusion,
                             to_point, verify_basis, vertex_inclusion)
from minfib.diagrams import _map_key
from minfib.errors import ValidationError
from minfib.groups import cyclic
from minfib.simplicial import (SimplicialMap, SimplicialSet, circle, codiscrete, discrete, nerve, point_set,
                               standard_simplex)


def _collapse_diagram():
    """Two points at ``a`` glued to one point at ``b``: ``X(f)`` is not injective."""
    C = arrow_category()
    Xa, Xb = discrete(["p", "q"], 2), discrete(["r"], 2)
    act = {"id_a": SimplicialMap.identity(Xa), "id_b": SimplicialMap.identity(Xb),
           "f": SimplicialMap(Xa, Xb, {"p": Xb.ident("r"), "q": Xb.ident("r")})}
    return CDiagram(C, {"a": Xa, "b": Xb}, act)


@pytest.mark.parametrize("cat,c", [(trivial_category(), "*"), (arrow_category(), "a"), (arrow_category(), "b"),
                                   (group_category(cyclic(2)), "*"), (cospan_category(), "c")])
@pytest.mark.parametrize("n", [0, 1, 2])
def test_representable_bases(cat, c, n):
    X = delta(cat, c, n, 2)
    assert X.naturality_violations() == [] and X.identity_violations() == []
    basis = compute_basis(X)
    assert basis is not None
    check = verify_basis(X, basis.gens)
    assert check.ok
    # one generator per simplex of Delta[n], all living at c
    assert len(basis.gens) == sum(len(standard_simplex(n, 2).simplices(k)) for k in range(3))
    assert {b.obj for b in basis.gens} == {c}


def test_non_injective_arrow_diagram_is_not_free():
    X = _collapse_diagram()
    X.validate()
    basis, reason = find_basis(X)
    assert basis is None and reason


def test_constant_arrow_diagram_has_basis_at_source():
    # X(f) = identity is injective, so X is free on X(a)
    X = CDiagram.constant_diagram(arrow_category(), circle(2))
    basis = compute_basis(X)
    assert basis is not None
    assert {b.obj for b in basis.gens} == {"a"}
    assert verify_basis(X, basis.gens).ok


def test_free_action_of_group_category():
    G = group_category(cyclic(2))
    # Z/2 acting freely on two points is free, acting trivially on one point is not
    pts = discrete(["p", "q"], 1)
    swap = SimplicialMap(pts, pts, {"p": pts.ident("q"), "q": pts.ident("p")})
    X = CDiagram(G, {"*": pts}, {"id_*": SimplicialMap.identity(pts), "g": swap})
    assert compute_basis(X) is not None
    one = discrete(["p"], 1)
    Y = CDiagram(G, {"*": one}, {"id_*": SimplicialMap.identity(one), "g": SimplicialMap.identity(one)})
    assert compute_basis(Y) is None


def test_non_natural_diagram_rejected():
    C = arrow_category()
    Xa, Xb = standard_simplex(1, 1), discrete(["r", "s"], 1)
    with pytest.raises(ValidationError):
        CDiagram(C, {"a": Xa, "b": Xb}, {"id_a": SimplicialMap.identity(Xa), "id_b": SimplicialMap.identity(Xb),
                                         "f": SimplicialMap(Xa, Xb, {"0": Xb.ident("r"), "1": Xb.ident("s"),
                                                                      "01": Xb.ref("s0 r")})})


def test_attach_cell_builds_circle():
    C = trivial_category()
    P = free_diagram_from(C, "*", point_set(2))
    v = P.at["*"].simplices(0)[0]
    S = attach_cell(P, "*", 1, (v, v), "e")
    assert S.at["*"].counts() == (1, 1, 0)
    assert S.basis is not None and verify_basis(S, S.basis.gens).ok
    assert find_basis(S)[0] is not None


def test_fibration_checks():
    E = CDiagram.single(codiscrete(cyclic(2).elements, 3))
    assert is_fibration_upto(to_point(E), 3).ok
    D = CDiagram.single(standard_simplex(1, 2))
    assert not is_fibration_upto(to_point(D), 2).ok


def test_external_product_and_pullback_basis_size():
    B = circle(2)
    X = external_product(CDiagram.single(codiscrete(cyclic(2).elements, 2)), B)
    X.basis = compute_basis(X)
    Xs = X.at["*"]
    from minfib.diagrams import projection_to_constant
    p = projection_to_constant(X, B, {"*": {g: Xs.explicit[Xs.ident(g)][1] for g in Xs.gen_dim}})
    q = pullback_constant_base(vertex_inclusion(B, B.ref("v")), p)
    # fibre over the vertex is E(Z/2) itself
    assert [len(q.source.at["*"].simplices(n)) for n in range(3)] == [2, 4, 8]
    r = pullback_constant_base(simplex_inclusion(B, B.ref("e")), p)
    assert [len(r.source.at["*"].simplices(n)) for n in range(3)] == [2 * 2, 4 * 3, 8 * 4]


def test_mapping_space_and_aut_group():
    pt = CDiagram.single(point_set(1))
    three = CDiagram.single(discrete(["a", "b", "c"], 1))
    assert len(mapping_space(pt, three, 0)) == 3
    two = CDiagram.single(discrete(["p", "q"], 1))
    A = aut_group(two, 0)
    assert len(A.group.elements) == 2
    A.group.validate()
    phis = mapping_space(pt, three, 1)
    vertices = {_map_key(m) for m in mapping_space(pt, three, 0)}
    assert len(phis) == 3
    assert all(_map_key(mapping_space_face(phi, pt, 0, 1)) in vertices for phi in phis)


def test_diagram_maps_enumeration():
    X = CDiagram.single(standard_simplex(1, 1))
    Y = CDiagram.single(discrete(["p", "q"], 1))
    assert len(list(diagram_maps(X, Y))) == 2
