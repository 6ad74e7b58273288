"""Finite groups given by explicit multiplication tables."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Hashable, Sequence

from .errors import ValidationError


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    elements: tuple
    table: dict  # (a, b) -> a*b
    unit: Hashable
    name: str = ""
    _inverse: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for a in self.elements:
            for b in self.elements:
                if self.table[a, b] == self.unit:
                    self._inverse[a] = b
                    break

    def mul(self, a, b):
        return self.table[a, b]

    def inv(self, a):
        return self._inverse[a]

    def __len__(self):
        return len(self.elements)

    def index(self, a):
        return self.elements.index(a)

    def validate(self):
        els = set(self.elements)
        if self.unit not in els:
            raise ValidationError("unit is not an element")
        for a in self.elements:
            if self.mul(self.unit, a) != a or self.mul(a, self.unit) != a:
                raise ValidationError(f"unit law fails at {a!r}")
            if a not in self._inverse:
                raise ValidationError(f"{a!r} has no inverse")
            for b in self.elements:
                if self.table[a, b] not in els:
                    raise ValidationError(f"product {a!r}*{b!r} leaves the group")
                for c in self.elements:
                    if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)):
                        raise ValidationError(f"associativity fails at ({a!r}, {b!r}, {c!r})")
        return True

    def to_json(self):
        return {
            "elements": [str(a) for a in self.elements],
            "unit": str(self.unit),
            "table": [[str(self.mul(a, b)) for b in self.elements] for a in self.elements],
        }

    @classmethod
    def from_table(cls, elements: Sequence, rows: Sequence[Sequence], unit=None, name=""):
        elements = tuple(elements)
        if len(rows) != len(elements) or any(len(r) != len(elements) for r in rows):
            raise ValidationError("multiplication table has the wrong shape")
        table = {(a, b): rows[i][j] for i, a in enumerate(elements) for j, b in enumerate(elements)}
        if unit is None:
            unit = elements[0]
        group = cls(elements, table, unit, name)
        group.validate()
        return group

    @classmethod
    def from_json(cls, data):
        return cls.from_table(data["elements"], data["table"], data.get("unit"), data.get("name", ""))


def cyclic(n: int) -> FiniteGroup:
    """Z/n with elements 'e', 'g', 'g2', ... (additive exponents)."""
    names = ["e"] + ["g" if k == 1 else f"g{k}" for k in range(1, n)]
    table = {(names[a], names[b]): names[(a + b) % n] for a in range(n) for b in range(n)}
    return FiniteGroup(tuple(names), table, "e", f"Z/{n}")


def trivial() -> FiniteGroup:
    return cyclic(1)


def symmetric(n: int) -> FiniteGroup:
    elems = tuple(permutations(range(n)))
    table = {(a, b): tuple(a[b[i]] for i in range(n)) for a in elems for b in elems}
    return FiniteGroup(elems, table, tuple(range(n)), f"S{n}")
