"""Fibrewise homotopy of simplices, minimality, and minimal-model extraction."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

from .diagrams import (CDiagram, DiagramMap, FreeBasis, GammaSimplex, diagram_maps, ensure_basis,
                       is_fibration_upto, verify_basis)
from .errors import Budget, BudgetExhausted, TruncationError, UnsupportedError, ValidationError
from .lifting import (CellInclusion, LiftingProblem, constant_prisms, prism_degeneracy, prism_face,
                      prism_homotopy, prism_search, prism_value, prism_vertices, prism_violations, solve)
from .simplicial import SimplexRef, SimplicialMap, SimplicialSet, product, standard_simplex


# -- preorders and the minimal subset -----------------------------------------

class PreorderedSet:
    """Finite set with the reflexive-transitive closure of the supplied pairs."""

    def __init__(self, elems: Sequence, pairs: Iterable[tuple] = ()):
        self.elems = tuple(elems)
        self.pos = {x: i for i, x in enumerate(self.elems)}
        n = len(self.elems)
        up = [{i} for i in range(n)]
        for a, b in pairs:
            up[self.pos[a]].add(self.pos[b])
        changed = True
        while changed:
            changed = False
            for i in range(n):
                grown = set(up[i])
                for j in up[i]:
                    grown |= up[j]
                if len(grown) != len(up[i]):
                    up[i] = grown
                    changed = True
        self._up = up

    def leq(self, a, b) -> bool:
        return self.pos[b] in self._up[self.pos[a]]

    def equivalent(self, a, b) -> bool:
        return self.leq(a, b) and self.leq(b, a)

    def classes(self) -> list[list]:
        out, seen = [], set()
        for x in self.elems:
            if x in seen:
                continue
            cls = [y for y in self.elems if self.equivalent(x, y)]
            seen.update(cls)
            out.append(cls)
        return out

    def pairs(self) -> set:
        return {(self.elems[i], self.elems[j]) for i in range(len(self.elems)) for j in self._up[i]}


def satisfies_r1(A: PreorderedSet, subset: Iterable) -> bool:
    """Every element of ``A`` lies above some member of ``subset``."""
    sub = list(subset)
    return all(any(A.leq(x, w) for x in sub) for w in A.elems)


def minimal_subset(A: PreorderedSet, prefer: Callable[[object], bool] | None = None) -> list:
    """One representative per minimal equivalence class.

    Within a class the first element satisfying ``prefer`` wins, otherwise
    the first element in the order of ``A.elems``.
    """
    prefer = prefer or (lambda x: False)
    out = []
    for cls in A.classes():
        x = cls[0]
        if any(A.leq(y, x) and not A.leq(x, y) for y in A.elems):
            continue
        liked = [y for y in cls if prefer(y)]
        out.append(liked[0] if liked else x)
    return sorted(out, key=A.pos.__getitem__)


# -- fibrewise homotopy of simplices ------------------------------------------

def p_homotopic(x: GammaSimplex, y: GammaSimplex, p: DiagramMap, budget=None) -> tuple | None:
    """Prisms of a fibrewise homotopy rel boundary from ``x`` to ``y`` in ``X(c)``."""
    if x.obj != y.obj or x.dim != y.dim:
        raise ValidationError("p-homotopy compares simplices of one object and one dimension")
    X = p.source.at[x.obj]
    pc = p.components[x.obj]
    if X.boundary_of(x.simplex) != X.boundary_of(y.simplex) or pc(x.simplex) != pc(y.simplex):
        raise ValidationError("p-homotopy needs equal boundaries and equal projections")
    return prism_homotopy(X, x.simplex, y.simplex, pc, True, True, budget)


def _comparable(X: CDiagram, p: DiagramMap, a: GammaSimplex, b: GammaSimplex) -> bool:
    Xc = X.at[a.obj]
    return (Xc.boundary_of(a.simplex) == Xc.boundary_of(b.simplex)
            and p.components[a.obj](a.simplex) == p.components[b.obj](b.simplex))


class SubPreorder(NamedTuple):
    order: PreorderedSet
    witnesses: dict  # (x, y) -> (f, prisms from f(x) to y)
    unknown: list  # pairs whose search ran out of budget


def sub_p_preorder(p: DiagramMap, basis: FreeBasis, d: int, budget=None) -> SubPreorder:
    """``x <= y`` iff ``f(x)`` is p-homotopic to ``y`` for some morphism ``f`` (dimensions up to ``d``)."""
    X = p.source
    if d + 1 > X.truncation:
        raise TruncationError(f"the preorder in dimension {d} needs truncation {d + 1}")
    elems = sorted((b for b in basis.gens if b.dim <= d), key=X.key)
    pairs, witnesses, unknown = [], {}, []
    for x in elems:
        for f in X.cat.out_of(x.obj):
            fx = X.apply(f, x)
            for y in elems:
                if y.obj != fx.obj or y.dim != fx.dim or (x, y) in witnesses:
                    continue
                if not _comparable(X, p, fx, y):
                    continue
                per_pair = Budget(budget.limit if isinstance(budget, Budget) else budget, "p-homotopy")
                try:
                    H = p_homotopic(fx, y, p, per_pair)
                except BudgetExhausted:
                    unknown.append((x, y))
                    continue
                if H is not None:
                    pairs.append((x, y))
                    witnesses[(x, y)] = (f, H)
    return SubPreorder(PreorderedSet(elems, pairs), witnesses, unknown)


class MinimalityReport(NamedTuple):
    dim: int
    ok: bool
    violations: list
    unknown: list

    @property
    def verdict(self) -> str:
        if not self.ok:
            return "not minimal"
        if self.unknown:
            return f"minimal up to budget (dimension {self.dim})"
        return f"minimal up to dimension {self.dim}"


def is_minimal(p: DiagramMap, d: int, budget=None, basis: FreeBasis | None = None) -> MinimalityReport:
    X = p.source
    basis = basis or ensure_basis(X)
    pre = sub_p_preorder(p, basis, d, budget)
    bad = [(x, y, pre.witnesses[(x, y)][0]) for (x, y) in pre.witnesses if x != y]
    return MinimalityReport(d, not bad, bad, pre.unknown)


# -- the model ---------------------------------------------------------------

@dataclass
class MinimalModel:
    p: DiagramMap
    dim: int
    sub: CDiagram
    sub_basis: FreeBasis
    members: set  # simplices of the retract, all dimensions up to dim + 1
    retraction: dict  # simplex -> simplex, dimensions up to dim
    homotopy: dict  # simplex -> prisms, dimensions up to dim
    chosen: list = field(default_factory=list)  # the selected generators
    notes: list = field(default_factory=list)

    def projection(self) -> DiagramMap:
        """``q: X^ -> B``, the restriction of ``p``."""
        B = self.p.target
        comps = {c: SimplicialMap(self.sub.at[c], B.at[c],
                                  {g: self.p.components[c](self.sub.at[c].ident(g)) for g in self.sub.at[c].gen_dim},
                                  validate=False)
                 for c in self.sub.cat.objects}
        return DiagramMap(self.sub, B, comps)

    def verify(self) -> list[str]:
        """Every defining identity of a strong fibrewise deformation retraction, checked exhaustively."""
        X, p = self.p.source, self.p
        bad: list[str] = []

        def note(msg):
            if len(bad) < 25:
                bad.append(msg)

        for n in range(self.dim + 2):
            for x in X.simplices(n):
                if (x in self.members) != self.sub.contains(x):
                    note(f"membership of {x} disagrees with the sub-diagram")
        for n in range(self.dim + 1):
            for x in X.simplices(n):
                Xc = X.at[x.obj]
                if x not in self.homotopy or x not in self.retraction:
                    note(f"{x} has no homotopy or retraction value")
                    continue
                P, r = self.homotopy[x], self.retraction[x]
                if len(P) != n + 1 or any(z.dim != n + 1 or not Xc.contains(z) for z in P):
                    note(f"prisms of {x} have the wrong shape")
                    continue
                for msg in prism_violations(Xc, P):
                    note(f"{x}: {msg}")
                if Xc.face(0, P[0]) != x.simplex:
                    note(f"H_1 != identity at {x}")
                if Xc.face(n + 1, P[n]) != r.simplex or r.obj != x.obj:
                    note(f"H_0 != retraction at {x}")
                if r not in self.members:
                    note(f"r({x}) = {r} lies outside the retract")
                pc = p.components[x.obj]
                B = pc.target
                for j, z in enumerate(P):
                    if pc(z) != B.degeneracy(j, pc(x.simplex)):
                        note(f"homotopy of {x} is not fibrewise at prism {j}")
                if x in self.members and (r != x or tuple(P) != constant_prisms(Xc, x.simplex)):
                    note(f"homotopy is not constant on the retract at {x}")
                for i in range(n + 1 if n > 0 else 0):
                    dx = X.face(i, x)
                    if prism_face(Xc, P, i) != tuple(self.homotopy.get(dx, ())):
                        note(f"face {i} of the homotopy at {x} disagrees")
                    if X.face(i, r) != self.retraction.get(dx):
                        note(f"retraction does not commute with d{i} at {x}")
                if n < self.dim:
                    for i in range(n + 1):
                        sx = X.degeneracy(i, x)
                        if prism_degeneracy(Xc, P, i) != tuple(self.homotopy.get(sx, ())):
                            note(f"homotopy does not commute with s{i} at {x}")
                for f in X.cat.out_of(x.obj):
                    fx = X.apply(f, x)
                    m = X.act[f]
                    if tuple(m(z) for z in P) != tuple(self.homotopy.get(fx, ())):
                        note(f"homotopy is not natural for {f} at {x}")
                    if X.apply(f, r) != self.retraction.get(fx):
                        note(f"retraction is not natural for {f} at {x}")
        return bad

    def is_point(self) -> bool:
        return all(len(self.sub.at[c].simplices(n)) == 1
                   for c in self.sub.cat.objects for n in range(self.sub.truncation + 1))

    # serialization
    def to_json(self) -> dict:
        def gs(x):
            return [x.obj, str(x.simplex)]

        return {
            "dim": self.dim,
            "sub": self.sub.to_json(),
            "sub_basis": [gs(b) for b in self.sub_basis.gens],
            "chosen": [gs(b) for b in self.chosen],
            "retraction": [[gs(x), str(r.simplex)] for x, r in sorted(self.retraction.items(),
                                                                        key=lambda kv: self.p.source.key(kv[0]))],
            "homotopy": [[gs(x), [str(z) for z in P]] for x, P in sorted(self.homotopy.items(),
                                                                         key=lambda kv: self.p.source.key(kv[0]))],
            "notes": list(self.notes),
        }

    @classmethod
    def from_json(cls, p: DiagramMap, data: dict) -> "MinimalModel":
        X = p.source

        def gs(pair):
            c, text = pair
            return GammaSimplex(c, X.at[c].ref(text))

        dim = int(data["dim"])
        members = set()
        sub_gens = {c: set() for c in X.cat.objects}
        for c in X.cat.objects:
            for level in data["sub"]["objects"][c]["generators"]:
                sub_gens[c].update(level)
        for c in X.cat.objects:
            for n in range(dim + 2):
                for s in X.at[c].simplices(n):
                    if s.gen in sub_gens[c]:
                        members.add(GammaSimplex(c, s))
        sub = X.restrict({c: [g for g in X.at[c].gen_dim if g in sub_gens[c]] for c in X.cat.objects})
        sub = _truncate_diagram(sub, dim + 1)
        retraction = {gs(k): GammaSimplex(k[0], X.at[k[0]].ref(v)) for k, v in data["retraction"]}
        homotopy = {gs(k): tuple(X.at[k[0]].ref(t) for t in v) for k, v in data["homotopy"]}
        basis = FreeBasis(tuple(GammaSimplex(c, sub.at[c].ref(t)) for c, t in data["sub_basis"]))
        chosen = [gs(b) for b in data.get("chosen", [])]
        return cls(p, dim, sub, basis, members, retraction, homotopy, chosen, list(data.get("notes", [])))


def _truncate_diagram(X: CDiagram, N: int) -> CDiagram:
    at = {c: X.at[c].truncate(N) if X.at[c].truncation > N else X.at[c] for c in X.cat.objects}
    act = {}
    for f, (a, b) in X.cat.morphisms.items():
        act[f] = SimplicialMap(at[a], at[b], {g: X.act[f].assignment[g] for g in at[a].gen_dim}, validate=False)
    return CDiagram(X.cat, at, act, name=X.name)


# -- extraction ----------------------------------------------------------------

class _JShape:
    """``Delta[n] x Delta[2]`` with the vertex data needed for the second lifting square."""

    def __init__(self, n: int):
        N = n + 2
        self.D, self.T = standard_simplex(n, N), standard_simplex(2, N)
        self.P = product(self.D, self.T)
        self.n = n
        self.cells = {}
        for g in self.P.gen_dim:
            ra, rb = self.P.explicit[self.P.ident(g)]
            self.cells[g] = (self.D.explicit[ra], self.T.explicit[rb])
        self.small = [g for g, (a, b) in self.cells.items()
                      if 2 not in b or 1 not in b or len(set(a)) < n + 1]

    def prism_cell(self, j: int) -> str:
        verts = prism_vertices(self.n, j)
        a = tuple(v[0] for v in verts)
        b = tuple(v[1] + 1 for v in verts)
        return self.P.ref_of[(self.D.ref_of[a], self.T.ref_of[b])]


def extract_minimal(p: DiagramMap, d: int, budget=None, check_fibration: bool = True) -> MinimalModel:
    """Minimal model of a fibration of free diagrams over a constant base, up to dimension ``d``."""
    X = p.source
    cat = X.cat
    if not cat.is_EI():
        raise UnsupportedError("the index category is not EI")
    if not p.target.constant:
        raise UnsupportedError("the base must be a constant diagram")
    if X.truncation < d + 2:
        raise TruncationError(f"extraction up to dimension {d} needs truncation {d + 2}, have {X.truncation}")
    limit = budget.limit if isinstance(budget, Budget) else budget
    if check_fibration:
        report = is_fibration_upto(p, d + 2)
        if not report.ok:
            raise ValidationError(report.summary())
    basis = ensure_basis(X)
    top = d + 1
    notes = [f"truncation cap: dimension {d}; retract built up to dimension {top}",
             "witness-dependent: the retract and homotopy follow canonically least lifts"]

    # selection of generators, preferring degenerate ones
    pre = sub_p_preorder(p, basis, top, limit)
    if pre.unknown:
        notes.append(f"{len(pre.unknown)} comparison(s) hit the budget; treated as unrelated")
    chosen = minimal_subset(pre.order, prefer=lambda x: x.simplex.is_degenerate)
    chosen_set = set(chosen)
    for x in chosen:
        if x.dim < top:
            for i in range(x.dim + 1):
                if X.degeneracy(i, x) not in chosen_set:
                    raise ValidationError(f"selected generators are not closed under degeneracies at {x}")

    # the retract: grow by orbits of selected generators whose faces are present
    members: set = set()

    def adjoin(x):
        for h in cat.out_of(x.obj):
            hx = X.apply(h, x)
            stack = [hx]
            while stack:
                y = stack.pop()
                if y in members:
                    continue
                members.add(y)
                if y.dim < top:
                    stack.extend(X.degeneracy(i, y) for i in range(y.dim + 1))

    for n in range(top + 1):
        for x in chosen:
            if x.dim == n and x not in members:
                if all(X.face(i, x) in members for i in range(n + 1 if n > 0 else 0)):
                    adjoin(x)
    keep = {c: {x.simplex.gen for x in members if x.obj == c} for c in cat.objects}
    sub = _truncate_diagram(X.restrict({c: [g for g in X.at[c].gen_dim if g in keep[c]] for c in cat.objects}), top)
    sub_gens = [GammaSimplex(x.obj, x.simplex) for x in chosen if x in members]
    check = verify_basis(sub, sub_gens)
    if not check.ok:
        raise ValidationError(f"the retract is not free on the selected generators: {check.reason}")
    sub_basis = FreeBasis(tuple(sorted(sub_gens, key=X.key)), check.witness)

    # retraction and homotopy, cell by cell
    r: dict = {}
    H: dict = {}
    shapes: dict = {}
    for n in range(d + 1):
        for b in sorted(basis.at_dim(n), key=X.key):
            c = b.obj
            Xc = X.at[c]
            if b in members:
                rb, Hb = b, constant_prisms(Xc, b.simplex)
            elif b.simplex.is_degenerate:
                i = b.simplex.word[-1]
                w = X.face(i, b)
                rb = X.degeneracy(i, r[w])
                Hb = prism_degeneracy(Xc, H[w], i)
            else:
                rb, Hb = _retract_cell(p, b, H, chosen, members, shapes, limit)
            for h in cat.out_of(c):
                hb = X.apply(h, b)
                m = X.act[h]
                r[hb] = X.apply(h, rb)
                H[hb] = tuple(m(z) for z in Hb)
    return MinimalModel(p, d, sub, sub_basis, members, r, H, chosen, notes)


def _retract_cell(p, z, H, chosen, members, shapes, limit):
    """Both lifting squares for one non-degenerate generator outside the retract.

    Each search gets its own node cap ``limit``.
    """
    X = p.source
    c, n = z.obj, z.dim
    Xc, pc = X.at[c], p.components[c]
    B = pc.target
    bz = pc(z.simplex)
    sides = [H[X.face(i, z)] for i in range(n + 1)] if n > 0 else []

    # first square: push z down along the homotopy of its boundary
    G = prism_search(Xc, n, z.simplex, None, (lambda i, j: sides[i][j]) if n > 0 else None,
                     lambda j: B.degeneracy(j, bz), pc, Budget(limit, "first square"))
    if G is None:
        raise ValidationError(f"no prism extension at {z}; the map is not a fibration at this dimension")
    z1 = Xc.face(n + 1, G[n])

    # a selected generator homotopic to z1
    F, y = None, None
    for x in chosen:
        if x.dim != n:
            continue
        for f in X.cat.hom(x.obj, c):
            cand = X.apply(f, x)
            if cand not in members:
                continue
            if Xc.boundary_of(cand.simplex) != Xc.boundary_of(z1) or pc(cand.simplex) != pc(z1):
                continue
            F = prism_homotopy(Xc, z1, cand.simplex, pc, True, True, Budget(limit, "p-homotopy"))
            if F is not None:
                y = cand
                break
        if F is not None:
            break
    if F is None:
        raise ValidationError(f"no selected generator is p-homotopic to the image of {z}")

    # second square on Delta[n] x Delta[2]
    shape = shapes.get(n)
    if shape is None:
        shape = shapes[n] = _JShape(n)
    partial = {}
    for g in shape.small:
        a, b = shape.cells[g]
        if len(set(a)) < n + 1:
            i = min(t for t in range(n + 1) if t not in a)
            a2 = tuple(t if t < i else t - 1 for t in a)
            partial[g] = prism_value(Xc, sides[i], a2, tuple(0 if t <= 1 else 1 for t in b))
        elif 2 not in b:
            partial[g] = prism_value(Xc, F, a, b)
        else:
            partial[g] = prism_value(Xc, G, a, tuple(0 if t == 0 else 1 for t in b))
    base = SimplicialMap(shape.P, B, {g: B.apply(shape.cells[g][0], bz) for g in shape.P.gen_dim}, validate=False)
    J = solve(LiftingProblem(CellInclusion.of(shape.P, shape.small), pc, partial, base),
              Budget(limit, "second square"))
    if J is None:
        raise ValidationError(f"the second lifting square has no solution at {z}")
    prisms = tuple(J(shape.prism_cell(j)) for j in range(n + 1))
    return y, prisms


# -- comparison of minimal fibrations ------------------------------------------

def minimal_iso(p: DiagramMap, q: DiagramMap, budget=None) -> DiagramMap | None:
    """An isomorphism ``X -> Y`` over the common base, or ``None`` if the search refutes one."""
    if p.target.cat is not q.target.cat:
        raise ValidationError("fibrations over different index categories")
    for c in p.source.cat.objects:
        if p.components[c].target is not q.components[c].target:
            raise ValidationError("fibrations over different bases")
    for phi in diagram_maps(p.source, q.source, over=(p, q), iso=True, budget=budget, limit=1):
        return phi
    return None
