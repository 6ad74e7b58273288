"""Finite index categories with composition tables."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product as cartesian
from typing import Sequence

from .errors import ValidationError
from .groups import FiniteGroup


def identity_name(obj: str) -> str:
    return f"id_{obj}"


@dataclass(frozen=True, eq=False)
class FiniteCategory:
    """Objects, named morphisms ``name -> (src, dst)`` and ``compose[g, f] = g o f``."""

    objects: tuple
    morphisms: dict
    composition: dict
    name: str = ""
    _homs: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for m, (a, b) in self.morphisms.items():
            self._homs.setdefault((a, b), []).append(m)

    def src(self, f: str) -> str:
        return self.morphisms[f][0]

    def dst(self, f: str) -> str:
        return self.morphisms[f][1]

    def identity(self, obj: str) -> str:
        return identity_name(obj)

    def hom(self, a: str, b: str) -> list[str]:
        return list(self._homs.get((a, b), ()))

    def out_of(self, a: str) -> list[str]:
        return [f for b in self.objects for f in self.hom(a, b)]

    def compose(self, g: str, f: str) -> str:
        """``g o f`` (first f, then g)."""
        if self.dst(f) != self.src(g):
            raise ValidationError(f"{g} o {f} is not composable")
        return self.composition[g, f]

    def is_iso(self, f: str) -> bool:
        return self.inverse(f) is not None

    def inverse(self, f: str) -> str | None:
        a, b = self.morphisms[f]
        for g in self.hom(b, a):
            if self.compose(g, f) == identity_name(a) and self.compose(f, g) == identity_name(b):
                return g
        return None

    def law_violations(self) -> list[str]:
        bad = []
        for a in self.objects:
            if self.morphisms.get(identity_name(a)) != (a, a):
                bad.append(f"identity {identity_name(a)} missing or misplaced")
        if bad:
            return bad
        for f, (a, b) in self.morphisms.items():
            if self.composition.get((f, identity_name(a))) != f or self.composition.get((identity_name(b), f)) != f:
                bad.append(f"identity law fails at {f}")
        for f, (a, b) in self.morphisms.items():
            for g in self.out_of(b):
                h = self.composition.get((g, f))
                if h is None or h not in self.morphisms:
                    bad.append(f"composite {g} o {f} undefined")
                elif self.morphisms[h] != (a, self.dst(g)):
                    bad.append(f"composite {g} o {f} = {h} has the wrong endpoints")
        if bad:
            return bad
        for f in self.morphisms:
            for g in self.out_of(self.dst(f)):
                for h in self.out_of(self.dst(g)):
                    left = self.compose(h, self.compose(g, f))
                    right = self.compose(self.compose(h, g), f)
                    if left != right:
                        bad.append(f"associativity fails at ({h}, {g}, {f}): {left} != {right}")
        return bad

    def validate(self):
        bad = self.law_violations()
        if bad:
            raise ValidationError(bad[0])
        return True

    def is_EI(self) -> bool:
        """Every endomorphism is an isomorphism."""
        return all(self.is_iso(f) for a in self.objects for f in self.hom(a, a))

    def component_poset(self) -> "ComponentPoset":
        reach = {(a, b): bool(self.hom(a, b)) for a in self.objects for b in self.objects}
        classes: list[tuple] = []
        seen = set()
        for a in self.objects:
            if a in seen:
                continue
            cls = tuple(b for b in self.objects if reach[a, b] and reach[b, a])
            seen.update(cls)
            classes.append(cls)
        order = {(i, j) for i, ci in enumerate(classes) for j, cj in enumerate(classes) if reach[ci[0], cj[0]]}
        return ComponentPoset(tuple(classes), frozenset(order))

    def is_artinian(self) -> bool:
        """Always true here: a finite poset has no infinite descending chain."""
        return True

    def to_json(self) -> dict:
        return {
            "objects": list(self.objects),
            "morphisms": [{"name": m, "src": a, "dst": b} for m, (a, b) in self.morphisms.items()],
            "composition": [[g, f, h] for (g, f), h in self.composition.items()
                            if not (g.startswith("id_") or f.startswith("id_"))],
        }

    @classmethod
    def build(cls, objects: Sequence[str], morphisms: dict, composition: dict, name: str = "",
              validate: bool = True) -> "FiniteCategory":
        """Identities and composites with identities are filled in automatically."""
        morphs = {identity_name(a): (a, a) for a in objects}
        for m, ends in morphisms.items():
            if m in morphs and morphs[m] != tuple(ends):
                raise ValidationError(f"identity {m} declared with wrong endpoints")
            morphs[m] = tuple(ends)
        comp = dict(composition)
        for f, (a, b) in morphs.items():
            comp.setdefault((f, identity_name(a)), f)
            comp.setdefault((identity_name(b), f), f)
        cat = cls(tuple(objects), morphs, comp, name)
        if validate:
            cat.validate()
        return cat

    @classmethod
    def from_json(cls, data: dict) -> "FiniteCategory":
        try:
            objects = list(data["objects"])
            morphs = {}
            for m in data.get("morphisms", []):
                if isinstance(m, dict):
                    morphs[m["name"]] = (m["src"], m["dst"])
                else:
                    morphs[m[0]] = (m[1], m[2])
            comp = {}
            raw = data.get("composition", [])
            if isinstance(raw, dict):
                for k, h in raw.items():
                    g, f = k.split(".")
                    comp[g, f] = h
            else:
                for g, f, h in raw:
                    comp[g, f] = h
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed category: {exc}") from exc
        for a in objects:
            if identity_name(a) not in morphs:
                raise ValidationError(f"identity {identity_name(a)} must be listed")
        return cls.build(objects, morphs, comp, data.get("name", ""))


@dataclass(frozen=True)
class ComponentPoset:
    """Classes of mutually reachable objects, ordered by ``[a] <= [b]`` iff ``Mor(a, b)`` is non-empty."""

    classes: tuple
    order: frozenset

    def leq(self, i: int, j: int) -> bool:
        return (i, j) in self.order

    def class_of(self, obj: str) -> int:
        for i, c in enumerate(self.classes):
            if obj in c:
                return i
        raise KeyError(obj)

    def maximal(self) -> list[int]:
        return [i for i in range(len(self.classes))
                if not any(self.leq(i, j) and i != j for j in range(len(self.classes)))]

    def minimal(self) -> list[int]:
        return [i for i in range(len(self.classes))
                if not any(self.leq(j, i) and i != j for j in range(len(self.classes)))]

    def is_antisymmetric(self) -> bool:
        return all(not (self.leq(i, j) and self.leq(j, i)) or i == j
                   for i in range(len(self.classes)) for j in range(len(self.classes)))


# -- builders -----------------------------------------------------------------

@lru_cache(maxsize=None)
def trivial_category() -> FiniteCategory:
    """The one-object category; shared so diagrams over it are comparable."""
    return FiniteCategory.build(["*"], {}, {}, "1")


def arrow_category() -> FiniteCategory:
    """``a --f--> b``."""
    return FiniteCategory.build(["a", "b"], {"f": ("a", "b")}, {}, "a->b")


def cospan_category() -> FiniteCategory:
    """``a --f--> b <--g-- c``."""
    return FiniteCategory.build(["a", "b", "c"], {"f": ("a", "b"), "g": ("c", "b")}, {}, "a->b<-c")


def poset_category(objects: Sequence[str], relations: Sequence[tuple]) -> FiniteCategory:
    """Category of a finite poset given by generating relations ``(a, b)`` meaning ``a <= b``."""
    leq = {(a, a) for a in objects} | set(relations)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in list(cartesian(leq, leq)):
            if b == c and (a, d) not in leq:
                leq.add((a, d))
                changed = True
    morphs = {(identity_name(a) if a == b else f"{a}<{b}"): (a, b) for a, b in leq}
    name_of = {ends: m for m, ends in morphs.items()}
    comp = {}
    for g, (b, c) in morphs.items():
        for f, (a, b2) in morphs.items():
            if b == b2:
                comp[g, f] = name_of[a, c]
    return FiniteCategory.build(objects, morphs, comp, "poset")


def group_category(group: FiniteGroup) -> FiniteCategory:
    """One object ``*``; morphisms are the group elements, the unit named ``id_*``."""
    def nm(x):
        return identity_name("*") if x == group.unit else str(x)

    morphs = {nm(x): ("*", "*") for x in group.elements}
    comp = {(nm(a), nm(b)): nm(group.mul(a, b)) for a in group.elements for b in group.elements}
    return FiniteCategory.build(["*"], morphs, comp, f"B{group.name}")


def idempotent_category() -> FiniteCategory:
    """Objects a, b; a non-invertible idempotent ``e: a -> a`` and ``f: a -> b`` with ``f o e = f``."""
    return FiniteCategory.build(["a", "b"], {"e": ("a", "a"), "f": ("a", "b")},
                                {("e", "e"): "e", ("f", "e"): "f"}, "idempotent")


def load_category(path) -> FiniteCategory:
    with open(path) as fh:
        return FiniteCategory.from_json(json.load(fh))
