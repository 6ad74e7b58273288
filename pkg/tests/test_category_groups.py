from __future__ import annotations

import pytest

from minfib.category import (FiniteCategory, arrow_category, cospan_category, group_category, idempotent_category,
                             poset_category, trivial_category)
from minfib.errors import ValidationError
from minfib.groups import FiniteGroup, cyclic, symmetric, trivial


def test_group_tables():
    for G in (cyclic(1), cyclic(2), cyclic(5), symmetric(3), trivial()):
        G.validate()
    S3 = symmetric(3)
    assert len(S3.elements) == 6
    assert sum(1 for a in S3.elements if S3.mul(a, a) == S3.unit) == 4  # unit and three transpositions
    G = cyclic(4)
    assert G.mul("g", "g3") == "e" and G.inv("g") == "g3"


def test_bad_group_table_rejected():
    with pytest.raises(ValidationError):
        FiniteGroup.from_table(["e", "a"], [["e", "a"], ["a", "a"]])


def test_builtin_categories_valid():
    for C in (trivial_category(), arrow_category(), cospan_category(), group_category(cyclic(3)),
              idempotent_category(), poset_category(["x", "y", "z"], [("x", "y"), ("y", "z")])):
        assert C.law_violations() == []


def test_ei_detection():
    assert arrow_category().is_EI()
    assert group_category(cyclic(2)).is_EI()
    assert not idempotent_category().is_EI()


def test_component_poset():
    P = poset_category(["x", "y", "z"], [("x", "y"), ("y", "z")]).component_poset()
    assert len(P.classes) == 3 and P.is_antisymmetric()
    assert P.leq(P.class_of("x"), P.class_of("z"))
    G = group_category(cyclic(2)).component_poset()
    assert len(G.classes) == 1


def test_missing_identity_in_file_rejected():
    data = {"objects": ["a"], "morphisms": [], "composition": []}
    with pytest.raises(ValidationError):
        FiniteCategory.from_json(data)


def test_associativity_failure_detected():
    objs = ["a"]
    morphs = {"u": ("a", "a"), "v": ("a", "a")}
    comp = {("u", "u"): "v", ("u", "v"): "u", ("v", "u"): "v", ("v", "v"): "v"}
    with pytest.raises(ValidationError):
        FiniteCategory.build(objs, morphs, comp)


def test_category_json_round_trip():
    C = cospan_category()
    D = FiniteCategory.from_json(C.to_json())
    assert set(D.morphisms) == set(C.morphisms)
    assert D.compose("f", "id_a") == "f"
