"""Backtracking extension/lifting solver and prism homotopies.

A homotopy ``H: Delta[n] x Delta[1] -> X`` is stored as its prism pieces
``(P_0, ..., P_n)``, where ``P_j`` is the image of the (n+1)-simplex
``(0,0) .. (j,0) (j,1) .. (n,1)``. Then ``d_{n+1} P_n = H_0``,
``d_0 P_0 = H_1`` and ``d_j P_j = d_j P_{j-1}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import Budget, TruncationError, ValidationError
from .simplicial import SimplexRef, SimplicialMap, SimplicialSet, product, standard_simplex


@dataclass(frozen=True)
class CellInclusion:
    """``small`` is a subcomplex of ``big`` given by generator names."""

    big: SimplicialSet
    small: frozenset

    def __post_init__(self):
        for g in self.small:
            if g not in self.big.gen_dim:
                raise ValidationError(f"{g!r} is not a generator of the big complex")
            for f in self.big.faces[g]:
                if f.gen not in self.small:
                    raise ValidationError(f"small part is not a subcomplex: face {f} of {g!r} is missing")

    def cells(self) -> list[str]:
        rest = [g for g in self.big.gen_dim if g not in self.small]
        return sorted(rest, key=lambda g: self.big.key(self.big.ident(g)))

    @classmethod
    def of(cls, big: SimplicialSet, small: Sequence[str]) -> "CellInclusion":
        return cls(big, frozenset(small))


@dataclass
class LiftingProblem:
    inclusion: CellInclusion
    fibration: SimplicialMap
    partial: dict
    base: SimplicialMap

    def __post_init__(self):
        big, p = self.inclusion.big, self.fibration
        X = p.source
        if self.base.source is not big or self.base.target is not p.target:
            raise ValidationError("base map must go from the big complex to the base of the fibration")
        if X.truncation < big.truncation:
            raise TruncationError("total space truncation is below the big complex")
        for g in self.inclusion.small:
            if g not in self.partial:
                raise ValidationError(f"partial map is undefined on {g!r}")
        for g in self.inclusion.small:
            v = self.partial[g]
            m = big.gen_dim[g]
            if not X.contains(v) or v.dim != m:
                raise ValidationError(f"partial value at {g!r} is not an {m}-simplex")
            for i, f in enumerate(big.faces[g]):
                if X.face(i, v) != X.apply(f.sigma, self.partial[f.gen]):
                    raise ValidationError(f"partial map does not commute with d{i} at {g!r}")
            if p(v) != self.base(big.ident(g)):
                raise ValidationError(f"square does not commute at {g!r}")


def solve(problem: LiftingProblem, budget=None) -> SimplicialMap | None:
    """Canonically least lift, or ``None`` when the exhaustive search refutes one."""
    budget = Budget.of(budget, "lifting")
    big = problem.inclusion.big
    p = problem.fibration
    X = p.source
    cells = problem.inclusion.cells()
    assign = {g: problem.partial[g] for g in problem.inclusion.small}
    indexes = {}
    for g in cells:
        n = big.gen_dim[g]
        if n not in indexes:
            indexes[n] = X.face_index(n, None, label=p, tag=p)
    wanted = [(g, big.faces[g], problem.base(big.ident(g))) for g in cells]

    def rec(pos):
        if pos == len(wanted):
            return True
        g, faces, b = wanted[pos]
        n = big.gen_dim[g]
        key = (tuple(X.apply(f.sigma, assign[f.gen]) for f in faces), b)
        for z in indexes[n].get(key, ()):
            budget.tick()
            assign[g] = z
            if rec(pos + 1):
                return True
        assign.pop(g, None)
        return False

    if not rec(0):
        return None
    return SimplicialMap(big, X, assign, validate=False)


# -- prisms -----------------------------------------------------------------

def prism_vertices(n: int, j: int) -> tuple:
    return tuple((a, 0) for a in range(j + 1)) + tuple((a, 1) for a in range(j, n + 1))


def constant_prisms(X: SimplicialSet, x: SimplexRef) -> tuple:
    return tuple(X.degeneracy(j, x) for j in range(x.dim + 1))


def prism_ends(X: SimplicialSet, prisms: Sequence[SimplexRef]) -> tuple:
    """``(H_0, H_1)`` of a prism homotopy."""
    n = len(prisms) - 1
    return X.face(n + 1, prisms[n]), X.face(0, prisms[0])


def prism_face(X: SimplicialSet, prisms: Sequence[SimplexRef], i: int) -> tuple:
    """Prisms of the restricted homotopy over ``d_i`` of the base simplex."""
    n = len(prisms) - 1
    out = []
    for j in range(n):
        if i <= j:
            out.append(X.face(i, prisms[j + 1]))
        else:
            out.append(X.face(i + 1, prisms[j]))
    return tuple(out)


def prism_degeneracy(X: SimplicialSet, prisms: Sequence[SimplexRef], i: int) -> tuple:
    """Prisms of the homotopy over ``s_i`` of the base simplex."""
    n = len(prisms) - 1
    out = []
    for j in range(n + 2):
        if j <= i:
            out.append(X.degeneracy(i + 1, prisms[j]))
        else:
            out.append(X.degeneracy(i, prisms[j - 1]))
    return tuple(out)


def prism_value(X: SimplicialSet, prisms: Sequence[SimplexRef], a: Sequence[int], b: Sequence[int]) -> SimplexRef:
    """Value of the homotopy on the simplex ``(a, b)`` of ``Delta[n] x Delta[1]``."""
    zeros = [a[t] for t in range(len(a)) if b[t] == 0]
    j = max(zeros) if zeros else 0
    theta = tuple(a[t] if b[t] == 0 else a[t] + 1 for t in range(len(a)))
    return X.apply(theta, prisms[j])


def prism_violations(X: SimplicialSet, prisms: Sequence[SimplexRef]) -> list[str]:
    """Internal compatibility of prism pieces: ``d_j P_j = d_j P_{j-1}``."""
    bad = []
    for j in range(1, len(prisms)):
        if X.face(j, prisms[j]) != X.face(j, prisms[j - 1]):
            bad.append(f"d{j} P{j} != d{j} P{j - 1}")
    return bad


def prism_search(X: SimplicialSet, n: int, top: SimplexRef | None, bottom: SimplexRef | None,
                 side: Callable[[int, int], SimplexRef] | None, base: Callable[[int], object] | None = None,
                 p: SimplicialMap | None = None, budget=None) -> tuple | None:
    """Find prisms ``P_0..P_n`` in ``X_{n+1}`` with prescribed ends and side faces.

    ``side(i, j)`` is the j-th prism piece over ``d_i`` of the base simplex;
    ``base(j)`` (with ``p``) is the required projection of ``P_j``.
    Either end may be ``None`` (free); side faces are mandatory for ``n >= 1``.
    """
    if n + 1 > X.truncation:
        raise TruncationError(f"prisms of dimension {n + 1} exceed truncation {X.truncation}")
    budget = Budget.of(budget, "prism search")
    if (base is None) != (p is None):
        raise ValidationError("base constraint needs both base and p")
    sims = X.simplices(n + 1)
    indexes: dict = {}

    def lookup(known: dict, label):
        pattern = tuple(sorted(known))
        idx = indexes.get(pattern)
        if idx is None:
            idx = {}
            for z in sims:
                k = (tuple(X.face(i, z) for i in pattern), p(z) if p is not None else None)
                idx.setdefault(k, []).append(z)
            indexes[pattern] = idx
        return idx.get((tuple(known[i] for i in pattern), label), ())

    chosen: list = []

    def rec(j):
        if j == n + 1:
            return True
        known = {}
        if j == 0 and top is not None:
            known[0] = top
        if j > 0:
            known[j] = X.face(j, chosen[j - 1])
        if j == n and bottom is not None:
            known[n + 1] = bottom
        for i in range(n + 2):
            if i < j:
                known[i] = side(i, j - 1)
            elif i > j + 1:
                known[i] = side(i - 1, j)
        label = base(j) if base is not None else None
        for z in lookup(known, label):
            budget.tick()
            chosen.append(z)
            if rec(j + 1):
                return True
            chosen.pop()
        return False

    return tuple(chosen) if rec(0) else None


def prism_homotopy(X: SimplicialSet, x: SimplexRef, y: SimplexRef, p: SimplicialMap | None = None,
                   rel_boundary: bool = True, fibrewise: bool = True, budget=None) -> tuple | None:
    """Prism pieces of a homotopy from ``x`` (at 0) to ``y`` (at 1), or ``None``."""
    n = x.dim
    if y.dim != n:
        raise ValidationError("homotopy ends must have equal dimension")
    if n + 1 > X.truncation:
        raise TruncationError(f"prisms of dimension {n + 1} exceed truncation {X.truncation}")
    if rel_boundary and X.boundary_of(x) != X.boundary_of(y):
        raise ValidationError("relative homotopy needs equal boundaries")
    if fibrewise and p is not None and p(x) != p(y):
        raise ValidationError("fibrewise homotopy needs equal projections")
    if x == y:
        return constant_prisms(X, x)
    use_base = fibrewise and p is not None
    B = p.target if use_base else None
    base = (lambda j: B.degeneracy(j, p(x))) if use_base else None
    if rel_boundary or n == 0:
        side = (lambda i, j: X.degeneracy(j, X.face(i, x))) if n > 0 else None
        return prism_search(X, n, y, x, side, base, p if use_base else None, budget)
    return _free_prism_homotopy(X, x, y, p if use_base else None, budget)


def _free_prism_homotopy(X, x, y, p, budget):
    """Homotopy with free boundary, solved on the presented product."""
    n = x.dim
    N = n + 1
    D, I = standard_simplex(n, N), standard_simplex(1, N)
    P = product(D, I)
    ends = {0: x, 1: y}
    small, partial = [], {}
    for g in P.gen_dim:
        ra, rb = P.explicit[P.ident(g)]
        b = I.explicit[rb]
        if len(set(b)) == 1:
            small.append(g)
            partial[g] = X.apply(D.explicit[ra], ends[b[0]])
    from .simplicial import point_set
    if p is None:
        p = SimplicialMap.to_point(X, point_set(X.truncation))
    bx = p(x)
    base = SimplicialMap(P, p.target, {g: p.target.apply(D.explicit[P.explicit[P.ident(g)][0]], bx)
                                       for g in P.gen_dim}, validate=False)
    lift = solve(LiftingProblem(CellInclusion.of(P, small), p, partial, base), budget)
    if lift is None:
        return None
    return tuple(lift(P.ref_of[(D.ref_of[tuple(v[0] for v in prism_vertices(n, j))],
                                I.ref_of[tuple(v[1] for v in prism_vertices(n, j))])])
                 for j in range(n + 1))
