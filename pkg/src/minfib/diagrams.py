"""Diagrams of simplicial sets indexed by a finite category."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .category import FiniteCategory, identity_name, trivial_category
from .errors import Budget, TruncationError, UnsupportedError, ValidationError
from .groups import FiniteGroup
from .simplicial import (KanReport, SimplexRef, SimplicialMap, SimplicialSet, from_operators,
                         identity_ref, is_kan_fibration_upto, parse_word, point_set, product,
                         standard_simplex)


class GammaSimplex(NamedTuple):
    obj: str
    simplex: SimplexRef

    @property
    def dim(self):
        return self.simplex.dim

    def __str__(self):
        return f"{self.simplex}@{self.obj}"


class CDiagram:
    """Functor data: a presentation per object and a simplicial map per morphism."""

    def __init__(self, cat: FiniteCategory, at: dict, act: dict | None = None, basis: "FreeBasis | None" = None,
                 constant: bool = False, name: str = "", validate: bool = True):
        self.cat = cat
        self.at = {c: at[c] for c in cat.objects}
        truncs = {X.truncation for X in self.at.values()}
        if len(truncs) != 1:
            raise ValidationError(f"objects carry different truncations {sorted(truncs)}")
        self.truncation = truncs.pop()
        act = dict(act or {})
        for c in cat.objects:
            act.setdefault(identity_name(c), SimplicialMap.identity(self.at[c]))
        self.act = act
        self.basis = basis
        self.constant = constant
        self.name = name
        self._obj_index = {c: i for i, c in enumerate(cat.objects)}
        if validate:
            self.validate()

    def __repr__(self):
        return f"CDiagram({self.name or '?'} over {self.cat.name or '?'}; N={self.truncation})"

    # structure
    def apply(self, f: str, x: GammaSimplex) -> GammaSimplex:
        if self.cat.src(f) != x.obj:
            raise ValidationError(f"{f} does not start at {x.obj}")
        return GammaSimplex(self.cat.dst(f), self.act[f](x.simplex))

    def face(self, i: int, x: GammaSimplex) -> GammaSimplex:
        return GammaSimplex(x.obj, self.at[x.obj].face(i, x.simplex))

    def degeneracy(self, i: int, x: GammaSimplex) -> GammaSimplex:
        return GammaSimplex(x.obj, self.at[x.obj].degeneracy(i, x.simplex))

    def key(self, x: GammaSimplex):
        s = x.simplex
        return (s.dim, self._obj_index[x.obj], self.at[x.obj].key(s))

    def simplices(self, n: int) -> list[GammaSimplex]:
        return [GammaSimplex(c, s) for c in self.cat.objects for s in self.at[c].simplices(n)]

    def generators(self) -> list[GammaSimplex]:
        out = [GammaSimplex(c, self.at[c].ident(g)) for c in self.cat.objects for g in self.at[c].gen_dim]
        return sorted(out, key=self.key)

    def contains(self, x: GammaSimplex) -> bool:
        return x.obj in self.at and self.at[x.obj].contains(x.simplex)

    # checks
    def validate(self):
        for f, (a, b) in self.cat.morphisms.items():
            if f not in self.act:
                raise ValidationError(f"no map given for morphism {f}")
            m = self.act[f]
            if m.source is not self.at[a] or m.target is not self.at[b]:
                raise ValidationError(f"map for {f} has the wrong endpoints")
        for c in self.cat.objects:
            ident = self.act[identity_name(c)]
            for g in self.at[c].gen_dim:
                if ident(self.at[c].ident(g)) != self.at[c].ident(g):
                    raise ValidationError(f"{identity_name(c)} does not act as the identity on {g!r}")
        for (g, f), h in self.cat.composition.items():
            a = self.cat.src(f)
            for gen in self.at[a].gen_dim:
                x = self.at[a].ident(gen)
                if self.act[g](self.act[f](x)) != self.act[h](x):
                    raise ValidationError(f"act({g}) o act({f}) != act({h}) on {gen!r} at {a}")
        return True

    def naturality_violations(self, upto: int | None = None, limit: int = 20) -> list[str]:
        """Exhaustive check that every morphism commutes with every face and degeneracy."""
        N = self.truncation if upto is None else upto
        bad = []
        for f, (a, b) in self.cat.morphisms.items():
            X, Y, m = self.at[a], self.at[b], self.act[f]
            for n in range(N + 1):
                for x in X.simplices(n):
                    if n > 0:
                        for i in range(n + 1):
                            if m(X.face(i, x)) != Y.face(i, m(x)) and len(bad) < limit:
                                bad.append(f"{f} o d{i} != d{i} o {f} on {x}")
                    if n < N:
                        for i in range(n + 1):
                            if m(X.degeneracy(i, x)) != Y.degeneracy(i, m(x)) and len(bad) < limit:
                                bad.append(f"{f} o s{i} != s{i} o {f} on {x}")
        return bad

    def identity_violations(self, upto: int | None = None) -> list[str]:
        return [f"{c}: {msg}" for c in self.cat.objects for msg in self.at[c].identity_violations(upto)]

    # sub-diagrams
    def restrict(self, keep: dict, name: str = "") -> "CDiagram":
        """Sub-diagram on generator subsets ``keep[c]``; must be closed under the structure."""
        at = {c: self.at[c].restrict(keep[c]) for c in self.cat.objects}
        act = {}
        for f, (a, b) in self.cat.morphisms.items():
            assign = {}
            for g in at[a].gen_dim:
                v = self.act[f].assignment[g]
                if v.gen not in keep[b]:
                    raise ValidationError(f"{f} sends {g!r} outside the sub-diagram")
                assign[g] = v
            act[f] = SimplicialMap(at[a], at[b], assign, validate=False)
        return CDiagram(self.cat, at, act, name=name or self.name)

    def renamed(self, mapping: dict, reorder=None) -> "CDiagram":
        """Rename generators (``mapping[c][g]``), keeping the structure; ``reorder`` permutes each level."""
        at = {c: self.at[c].renamed(mapping.get(c, {}), reorder) for c in self.cat.objects}

        def rn(c, s):
            return SimplexRef(mapping.get(c, {}).get(s.gen, s.gen), s.sigma)

        act = {}
        for f, (a, b) in self.cat.morphisms.items():
            act[f] = SimplicialMap(at[a], at[b], {mapping.get(a, {}).get(g, g): rn(b, v)
                                                  for g, v in self.act[f].assignment.items()}, validate=False)
        basis = None
        if self.basis is not None:
            basis = FreeBasis(tuple(GammaSimplex(b.obj, rn(b.obj, b.simplex)) for b in self.basis.gens))
        return CDiagram(self.cat, at, act, basis, self.constant, self.name)

    # constructors
    @classmethod
    def constant_diagram(cls, cat: FiniteCategory, X: SimplicialSet, name: str = "") -> "CDiagram":
        ident = SimplicialMap.identity(X)
        return cls(cat, {c: X for c in cat.objects}, {f: ident for f in cat.morphisms},
                   constant=True, name=name or X.name)

    @classmethod
    def single(cls, X: SimplicialSet) -> "CDiagram":
        return cls(trivial_category(), {"*": X}, name=X.name)

    # serialization
    def to_json(self) -> dict:
        return {
            "category": self.cat.to_json(),
            "objects": {c: self.at[c].to_json() for c in self.cat.objects},
            "morphisms": {f: self.act[f].to_json() for f in self.cat.morphisms if not f.startswith("id_")},
        }

    @classmethod
    def from_json(cls, data: dict, base_dir: str = ".") -> "CDiagram":
        cat_data = data.get("category")
        if isinstance(cat_data, str):
            with open(os.path.join(base_dir, cat_data)) as fh:
                cat_data = json.load(fh)
        if cat_data is None:
            cat = trivial_category()
        else:
            cat = FiniteCategory.from_json(cat_data)
        objs = data.get("objects", {})
        if data.get("constant") is not None:
            X = _load_presentation(data["constant"], base_dir)
            return cls.constant_diagram(cat, X)
        at = {}
        for c in cat.objects:
            if c not in objs:
                raise ValidationError(f"diagram gives no presentation for object {c!r}")
            at[c] = _load_presentation(objs[c], base_dir)
        act = {}
        morphs = data.get("morphisms", {})
        for f, (a, b) in cat.morphisms.items():
            if f.startswith("id_") and f not in morphs:
                continue
            if f not in morphs:
                raise ValidationError(f"diagram gives no assignment for morphism {f!r}")
            table = morphs[f]
            assign = {}
            for g, text in table.items():
                gen, word = parse_word(text)
                assign[g] = at[b].ref(text)
            act[f] = SimplicialMap(at[a], at[b], assign)
        basis = None
        if "basis" in data:
            basis = FreeBasis(tuple(GammaSimplex(c, at[c].ref(t)) for c, t in data["basis"]))
        return cls(cat, at, act, basis)


def _load_presentation(entry, base_dir) -> SimplicialSet:
    if isinstance(entry, str):
        with open(os.path.join(base_dir, entry)) as fh:
            entry = json.load(fh)
    return SimplicialSet.from_json(entry)


def load_diagram(path) -> CDiagram:
    with open(path) as fh:
        data = json.load(fh)
    return CDiagram.from_json(data, os.path.dirname(os.path.abspath(path)))


# -- maps of diagrams ----------------------------------------------------------

class DiagramMap:
    def __init__(self, source: CDiagram, target: CDiagram, components: dict, validate: bool = True):
        self.source = source
        self.target = target
        self.components = {c: components[c] for c in source.cat.objects}
        if validate:
            self.validate()

    def __call__(self, x: GammaSimplex) -> GammaSimplex:
        return GammaSimplex(x.obj, self.components[x.obj](x.simplex))

    def validate(self):
        if self.source.cat is not self.target.cat:
            raise ValidationError("diagram maps need a common index category")
        for c in self.source.cat.objects:
            m = self.components[c]
            if m.source is not self.source.at[c] or m.target is not self.target.at[c]:
                raise ValidationError(f"component at {c} has the wrong endpoints")
            m.validate()
        for f, (a, b) in self.source.cat.morphisms.items():
            for g in self.source.at[a].gen_dim:
                x = self.source.at[a].ident(g)
                if self.target.act[f](self.components[a](x)) != self.components[b](self.source.act[f](x)):
                    raise ValidationError(f"square for {f} does not commute at {g!r}")
        return True

    def compose(self, first: "DiagramMap") -> "DiagramMap":
        return DiagramMap(first.source, self.target,
                          {c: self.components[c].compose(first.components[c]) for c in self.source.cat.objects},
                          validate=False)

    def is_bijective(self) -> bool:
        return all(m.is_bijective() for m in self.components.values())

    @classmethod
    def identity(cls, X: CDiagram) -> "DiagramMap":
        return cls(X, X, {c: SimplicialMap.identity(X.at[c]) for c in X.cat.objects}, validate=False)

    def to_json(self):
        return {c: m.to_json() for c, m in self.components.items()}

    @classmethod
    def from_json(cls, source, target, data):
        return cls(source, target, {c: SimplicialMap.from_json(source.at[c], target.at[c], data[c])
                                    for c in source.cat.objects})


def projection_to_constant(X: CDiagram, B: SimplicialSet, assignments: dict) -> DiagramMap:
    """Map ``X -> const(B)`` from per-object generator assignments."""
    Bc = CDiagram.constant_diagram(X.cat, B)
    return DiagramMap(X, Bc, {c: SimplicialMap(X.at[c], B, assignments[c]) for c in X.cat.objects})


def to_point(X: CDiagram, pt: SimplicialSet | None = None) -> DiagramMap:
    """Map to the constant point diagram; pass ``pt`` to share one base between fibrations."""
    pt = pt if pt is not None else point_set(X.truncation)
    Bc = CDiagram.constant_diagram(X.cat, pt)
    return DiagramMap(X, Bc, {c: SimplicialMap.to_point(X.at[c], pt) for c in X.cat.objects}, validate=False)


# -- free diagrams and bases -------------------------------------------------

@dataclass
class FreeBasis:
    gens: tuple
    witness: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.gens)

    def __contains__(self, x):
        return x in set(self.gens)

    def at_dim(self, n: int) -> list:
        return [b for b in self.gens if b.dim == n]


class BasisCheck(NamedTuple):
    ok: bool
    reason: str
    witness: dict


def verify_basis(X: CDiagram, gens: Iterable[GammaSimplex]) -> BasisCheck:
    """Exhaustive check of the free-basis axioms up to the truncation."""
    gens = list(gens)
    gset = set(gens)
    if len(gset) != len(gens):
        return BasisCheck(False, "repeated generator", {})
    N = X.truncation
    witness: dict = {}
    for b in gens:
        if not X.contains(b):
            return BasisCheck(False, f"{b} is not a simplex of the diagram", {})
        for h in X.cat.out_of(b.obj):
            x = X.apply(h, b)
            if x in witness:
                b0, h0 = witness[x]
                return BasisCheck(False, f"{x} = {h0}({b0}) = {h}({b}): witness not unique", {})
            witness[x] = (b, h)
    for n in range(N + 1):
        for x in X.simplices(n):
            if x not in witness:
                return BasisCheck(False, f"{x} is not reached from the basis", {})
    for b in gens:
        if b.dim < N:
            for i in range(b.dim + 1):
                if X.degeneracy(i, b) not in gset:
                    return BasisCheck(False, f"s{i}({b}) is missing: not closed under degeneracies", {})
    return BasisCheck(True, "free basis verified", witness)


def find_basis(X: CDiagram) -> tuple[FreeBasis | None, str]:
    """Basis search: representatives of the minimal orbits in every dimension, then exhaustive verification."""
    cat = X.cat
    chosen: list[GammaSimplex] = []
    chosen_set: set = set()
    for n in range(X.truncation + 1):
        sims = X.simplices(n)
        up = {x: {X.apply(h, x) for h in cat.out_of(x.obj)} for x in sims}
        down: dict = {x: set() for x in sims}
        for x, ys in up.items():
            for y in ys:
                down[y].add(x)
        minimal = [x for x in sims if all(y in up[x] for y in down[x])]
        lower = [b for b in chosen if b.dim == n - 1]
        preferred = {X.degeneracy(i, b) for b in lower for i in range(n)} if n > 0 else set()
        done = set()
        for x in sorted(minimal, key=X.key):
            if x in done:
                continue
            cls = sorted((y for y in minimal if y in up[x] and x in up[y]), key=X.key)
            done.update(cls)
            pref = [y for y in cls if y in preferred]
            pick = pref[0] if pref else cls[0]
            chosen.append(pick)
            chosen_set.add(pick)
    check = verify_basis(X, chosen)
    if not check.ok:
        return None, check.reason
    return FreeBasis(tuple(sorted(chosen, key=X.key)), check.witness), check.reason


def compute_basis(X: CDiagram) -> FreeBasis | None:
    return find_basis(X)[0]


def ensure_basis(X: CDiagram) -> FreeBasis:
    """The stored basis (verified) or a computed one; raises if the diagram is not free."""
    if X.basis is not None:
        if not X.basis.witness:
            check = verify_basis(X, X.basis.gens)
            if not check.ok:
                raise UnsupportedError(f"declared basis is invalid: {check.reason}")
            X.basis.witness = check.witness
        return X.basis
    basis, reason = find_basis(X)
    if basis is None:
        raise UnsupportedError(f"diagram is not free: {reason}")
    X.basis = basis
    return basis


def free_diagram_from(cat: FiniteCategory, c: str, Y: SimplicialSet) -> CDiagram:
    """Left Kan extension along the inclusion of ``c``: copies of ``Y`` indexed by ``Mor(c, d)``."""
    def nm(g, h):
        return f"{g}@{h}"

    at = {}
    for d in cat.objects:
        homs = cat.hom(c, d)
        levels = [[nm(g, h) for h in homs for g in Y.generators[m]] for m in range(Y.truncation + 1)]
        faces = {nm(g, h): tuple(SimplexRef(nm(f.gen, h), f.sigma) for f in Y.faces[g])
                 for h in homs for g in Y.gen_dim}
        at[d] = SimplicialSet(levels, faces, Y.truncation, f"{Y.name}x{c}->{d}", validate=False)
    act = {}
    for k, (d, e) in cat.morphisms.items():
        act[k] = SimplicialMap(at[d], at[e], {nm(g, h): identity_ref(nm(g, cat.compose(k, h)), Y.gen_dim[g])
                                              for h in cat.hom(c, d) for g in Y.gen_dim}, validate=False)
    idc = identity_name(c)
    gens = tuple(GammaSimplex(c, SimplexRef(nm(s.gen, idc), s.sigma)) for s in Y.all_simplices())
    X = CDiagram(cat, at, act, name=f"free({Y.name}@{c})")
    X.basis = FreeBasis(tuple(sorted(gens, key=X.key)))
    return X


def delta(cat: FiniteCategory, c: str, n: int, truncation: int | None = None) -> CDiagram:
    return free_diagram_from(cat, c, standard_simplex(n, truncation))


def empty_diagram(cat: FiniteCategory, truncation: int) -> CDiagram:
    at = {c: SimplicialSet([], {}, truncation, "empty") for c in cat.objects}
    act = {f: SimplicialMap(at[a], at[b], {}) for f, (a, b) in cat.morphisms.items()}
    return CDiagram(cat, at, act, basis=FreeBasis(()), name="empty")


# -- fibrations ----------------------------------------------------------------

class FibrationReport(NamedTuple):
    dim: int
    ok: bool
    per_object: dict

    def failing_objects(self):
        return [c for c, r in self.per_object.items() if not r.ok]

    def summary(self):
        if self.ok:
            return f"fibration up to dimension {self.dim}"
        return f"not a fibration up to dimension {self.dim}; failing objects: {', '.join(self.failing_objects())}"


def is_fibration_upto(p: DiagramMap, d: int, budget=None) -> FibrationReport:
    budget = Budget.of(budget, "fibration check")
    per = {c: is_kan_fibration_upto(p.components[c], d, budget) for c in p.source.cat.objects}
    return FibrationReport(d, all(r.ok for r in per.values()), per)


# -- constructions -------------------------------------------------------------

def attach_cell(X: CDiagram, c: str, n: int, boundary: Sequence[SimplexRef], name: str) -> CDiagram:
    """Push out along the boundary inclusion of the free n-cell at ``c``.

    ``boundary`` lists ``(x_0, ..., x_n)`` in ``X(c)`` (empty for a 0-cell),
    the adjoint form of a map from the boundary cell.
    """
    if X.basis is None:
        raise UnsupportedError("attaching a cell needs a free diagram with known basis")
    if n > X.truncation:
        raise TruncationError(f"cell dimension {n} exceeds truncation {X.truncation}")
    Xc = X.at[c]
    boundary = tuple(boundary)
    if len(boundary) != (n + 1 if n > 0 else 0):
        raise ValidationError(f"an {n}-cell needs {n + 1 if n > 0 else 0} boundary faces")
    for i, x in enumerate(boundary):
        if not Xc.contains(x) or x.dim != n - 1:
            raise ValidationError(f"boundary face {i} is not an ({n - 1})-simplex of X({c})")
    for j in range(len(boundary)):
        for i in range(j):
            if n >= 2 and Xc.face(i, boundary[j]) != Xc.face(j - 1, boundary[i]):
                raise ValidationError(f"boundary faces {i} and {j} do not match")
    cat = X.cat

    def nm(h):
        return name if h == identity_name(c) else f"{name}@{h}"

    at = {}
    for d in cat.objects:
        homs = cat.hom(c, d)
        old = X.at[d]
        levels = [list(lv) for lv in old.generators]
        faces = dict(old.faces)
        for h in homs:
            if nm(h) in old.gen_dim:
                raise ValidationError(f"generator name {nm(h)!r} already used at {d}")
            levels[n].append(nm(h))
            faces[nm(h)] = tuple(X.act[h](x) for x in boundary)
        at[d] = SimplicialSet(levels, faces, X.truncation, old.name)
    act = {}
    for k, (d, e) in cat.morphisms.items():
        assign = dict(X.act[k].assignment)
        for h in cat.hom(c, d):
            assign[nm(h)] = identity_ref(nm(cat.compose(k, h)), n)
        act[k] = SimplicialMap(at[d], at[e], assign, validate=False)
    new = [GammaSimplex(c, s) for s in at[c].all_simplices() if s.gen == name]
    Y = CDiagram(cat, at, act, name=X.name)
    Y.basis = FreeBasis(tuple(sorted(list(X.basis.gens) + new, key=Y.key)))
    return Y


def external_product(X: CDiagram, K: SimplicialSet) -> CDiagram:
    at = {c: product(X.at[c], K) for c in X.cat.objects}
    act = {}
    for f, (a, b) in X.cat.morphisms.items():
        src, dst = at[a], at[b]
        assign = {}
        for g in src.gen_dim:
            x, k = src.explicit[src.ident(g)]
            assign[g] = dst.ref_of[(X.act[f](x), k)]
        act[f] = SimplicialMap(src, dst, assign, validate=False)
    Y = CDiagram(X.cat, at, act, name=f"{X.name}x{K.name}")
    if X.basis is not None:
        Y.basis = FreeBasis(tuple(sorted((GammaSimplex(b.obj, at[b.obj].ref_of[(b.simplex, k)])
                                          for b in X.basis.gens for k in K.simplices(b.dim)), key=Y.key)))
    return Y


def pullback_constant_base(alpha: SimplicialMap, p: DiagramMap) -> DiagramMap:
    """Pull ``p: X -> const(B)`` back along ``alpha: A -> B``; returns ``A x_B X -> const(A)``."""
    X = p.source
    A, B = alpha.source, alpha.target
    if X.truncation != A.truncation:
        raise ValidationError("pullback needs equal truncations")
    N = X.truncation
    at = {}
    for c in X.cat.objects:
        pc, Xc = p.components[c], X.at[c]
        if pc.target is not B:
            raise ValidationError("the fibration must lie over the target of alpha")
        levels = []
        for n in range(N + 1):
            by_base: dict = {}
            for x in Xc.simplices(n):
                by_base.setdefault(pc(x), []).append(x)
            levels.append([(u, x) for u in A.simplices(n) for x in by_base.get(alpha(u), ())])
        at[c] = from_operators(levels,
                               lambda i, q, Xc=Xc: (A.face(i, q[0]), Xc.face(i, q[1])),
                               lambda i, q, Xc=Xc: (A.degeneracy(i, q[0]), Xc.degeneracy(i, q[1])),
                               lambda q: f"({q[0]}|{q[1]})", f"{A.name}x{Xc.name}")
    act = {}
    for f, (a, b) in X.cat.morphisms.items():
        src, dst = at[a], at[b]
        assign = {}
        for g in src.gen_dim:
            u, x = src.explicit[src.ident(g)]
            assign[g] = dst.ref_of[(u, X.act[f](x))]
        act[f] = SimplicialMap(src, dst, assign, validate=False)
    P = CDiagram(X.cat, at, act, name=f"pullback({X.name})")
    if X.basis is not None:
        gens = []
        for b in X.basis.gens:
            pb = p.components[b.obj](b.simplex)
            for u in A.simplices(b.dim):
                if alpha(u) == pb:
                    gens.append(GammaSimplex(b.obj, at[b.obj].ref_of[(u, b.simplex)]))
        check = verify_basis(P, gens)
        if not check.ok:
            raise ValidationError(f"pulled-back basis fails: {check.reason}")
        P.basis = FreeBasis(tuple(sorted(gens, key=P.key)), check.witness)
    Ac = CDiagram.constant_diagram(X.cat, A)
    comps = {}
    for c in X.cat.objects:
        src = at[c]
        comps[c] = SimplicialMap(src, A, {g: src.explicit[src.ident(g)][0] for g in src.gen_dim}, validate=False)
    return DiagramMap(P, Ac, comps)


def vertex_inclusion(B: SimplicialSet, v: SimplexRef) -> SimplicialMap:
    pt = point_set(B.truncation)
    return SimplicialMap(pt, B, {pt.generators[0][0]: v})


def simplex_inclusion(B: SimplicialSet, x: SimplexRef) -> SimplicialMap:
    """The characteristic map ``Delta[n] -> B`` of an n-simplex."""
    D = standard_simplex(x.dim, B.truncation)
    return SimplicialMap(D, B, {g: B.apply(D.explicit[D.ident(g)], x) for g in D.gen_dim})


def fibre(p: DiagramMap, v: SimplexRef) -> DiagramMap:
    return pullback_constant_base(vertex_inclusion(p.target.at[p.target.cat.objects[0]], v), p)


# -- maps between diagrams: search ---------------------------------------------

def diagram_maps(X: CDiagram, Y: CDiagram, over: tuple | None = None, iso: bool = False,
                 budget=None, limit: int | None = None, fixed: dict | None = None):
    """Enumerate diagram maps ``X -> Y`` in canonical order.

    ``over=(p, q)`` restricts to maps with ``q o phi = p``; ``iso`` keeps only
    levelwise bijections; ``fixed`` pins values ``{(obj, gen): ref}``.
    """
    budget = Budget.of(budget, "diagram map search")
    cat = X.cat
    if iso:
        for c in cat.objects:
            if X.at[c].counts() != Y.at[c].counts():
                return
    gens = [(c, g) for c in cat.objects for g in X.at[c].gen_dim]
    gens.sort(key=lambda cg: X.key(GammaSimplex(cg[0], X.at[cg[0]].ident(cg[1]))))
    outgoing: dict = {cg: [] for cg in gens}
    incoming: dict = {cg: [] for cg in gens}
    for f, (a, b) in cat.morphisms.items():
        if f.startswith("id_"):
            continue
        for g in X.at[a].gen_dim:
            tgt = X.act[f].assignment[g]
            outgoing[(a, g)].append((f, tgt))
            incoming[(b, tgt.gen)].append((a, g, f, tgt))
    val: dict = {}
    used: dict = {c: set() for c in cat.objects}
    count = 0

    def ev(c, s):
        return Y.at[c].apply(s.sigma, val[(c, s.gen)])

    def ok(c, g):
        x = val[(c, g)]
        for f, tgt in outgoing[(c, g)]:
            b = cat.dst(f)
            if (b, tgt.gen) in val and Y.act[f](x) != ev(b, tgt):
                return False
        for a, g0, f, tgt in incoming[(c, g)]:
            if (a, g0) in val and Y.act[f](val[(a, g0)]) != ev(c, tgt):
                return False
        return True

    def rec(pos):
        nonlocal count
        if pos == len(gens):
            comps = {c: SimplicialMap(X.at[c], Y.at[c], {g: val[(c, g)] for g in X.at[c].gen_dim}, validate=False)
                     for c in cat.objects}
            phi = DiagramMap(X, Y, comps, validate=False)
            if iso and not phi.is_bijective():
                return
            count += 1
            yield phi
            return
        c, g = gens[pos]
        Xc, Yc = X.at[c], Y.at[c]
        m = Xc.gen_dim[g]
        faces = tuple(ev(c, f) for f in Xc.faces[g])
        if over is not None:
            p, q = over
            label = p.components[c](Xc.ident(g))
            cands = Yc.face_index(m, None, label=q.components[c], tag=q.components[c]).get((faces, label), ())
        else:
            cands = Yc.face_index(m).get(faces, ())
        pinned = fixed.get((c, g)) if fixed else None
        for z in cands:
            if pinned is not None and z != pinned:
                continue
            if iso and (z.is_degenerate or z.gen in used[c]):
                continue
            budget.tick()
            val[(c, g)] = z
            if ok(c, g):
                used[c].add(z.gen)
                yield from rec(pos + 1)
                used[c].discard(z.gen)
                if limit is not None and count >= limit:
                    del val[(c, g)]
                    return
            del val[(c, g)]

    yield from rec(0)


def mapping_space(X: CDiagram, Y: CDiagram, n: int, budget=None) -> list[DiagramMap]:
    """The n-simplices of the function complex: maps ``X x Delta[n] -> Y``."""
    Xn = external_product(X, standard_simplex(n, X.truncation))
    return list(diagram_maps(Xn, Y, budget=budget))


def mapping_space_operator(phi: DiagramMap, X: CDiagram, theta: Sequence[int], n: int) -> DiagramMap:
    """Precompose a simplex ``X x Delta[n] -> Y`` with ``1 x theta`` for ``theta: [k] -> [n]``."""
    N = X.truncation
    k = len(theta) - 1
    Dn, Dk = standard_simplex(n, N), standard_simplex(k, N)
    Xk = external_product(X, Dk)
    comps = {}
    for c in X.cat.objects:
        old, new = phi.source.at[c], Xk.at[c]
        assign = {}
        for g in new.gen_dim:
            x, r = new.explicit[new.ident(g)]
            t = tuple(theta[a] for a in Dk.explicit[r])
            assign[g] = phi.components[c](old.ref_of[(x, Dn.ref_of[t])])
        comps[c] = SimplicialMap(new, phi.target.at[c], assign, validate=False)
    return DiagramMap(Xk, phi.target, comps)


def mapping_space_face(phi: DiagramMap, X: CDiagram, i: int, n: int) -> DiagramMap:
    return mapping_space_operator(phi, X, tuple(a for a in range(n + 1) if a != i), n)


def mapping_space_degeneracy(phi: DiagramMap, X: CDiagram, i: int, n: int) -> DiagramMap:
    return mapping_space_operator(phi, X, tuple(a if a <= i else a - 1 for a in range(n + 2)), n)


class AutGroup(NamedTuple):
    group: FiniteGroup
    maps: tuple  # element name -> DiagramMap (by position)


def aut_group(F: CDiagram, n: int = 0, budget=None) -> AutGroup:
    """Automorphisms of ``F x Delta[n]`` over ``Delta[n]``, with composition table."""
    D = standard_simplex(n, F.truncation)
    Fn = external_product(F, D)
    pr = projection_to_constant(
        Fn, D, {c: {g: Fn.at[c].explicit[Fn.at[c].ident(g)][1] for g in Fn.at[c].gen_dim} for c in F.cat.objects})
    autos = list(diagram_maps(Fn, Fn, over=(pr, pr), iso=True, budget=budget))
    keys = [_map_key(a) for a in autos]
    index = {k: i for i, k in enumerate(keys)}
    ident = _map_key(DiagramMap.identity(Fn))
    names = ["e" if k == ident else f"a{i}" for i, k in enumerate(keys)]
    table = {}
    for i, a in enumerate(autos):
        for j, b in enumerate(autos):
            table[names[i], names[j]] = names[index[_map_key(a.compose(b))]]
    return AutGroup(FiniteGroup(tuple(names), table, "e", f"aut_{n}"), tuple(autos))


def _map_key(phi: DiagramMap):
    return tuple(sorted((c, g, v) for c, m in phi.components.items() for g, v in m.assignment.items()))
