"""Simplicial groups, twisting functions, twisted cartesian products and their classification."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product as cartesian
from typing import Callable, NamedTuple, Sequence

from .category import FiniteCategory, trivial_category
from .diagrams import (CDiagram, DiagramMap, FreeBasis, GammaSimplex, diagram_maps, find_basis,
                       projection_to_constant, verify_basis)
from .errors import Budget, BudgetExhausted, TruncationError, UnsupportedError, ValidationError
from .groups import FiniteGroup, cyclic
from .lifting import CellInclusion, LiftingProblem, solve
from .simplicial import (SimplexRef, SimplicialMap, SimplicialSet, _monotone, components, discrete,
                         from_operators, operator_steps, point_set, product, standard_simplex)


# -- simplicial groups ---------------------------------------------------------

class SimplicialGroup:
    """Levelwise finite groups with face and degeneracy homomorphisms.

    ``faces[n][i]`` maps ``G_n -> G_{n-1}``; ``degeneracies[n][i]`` maps ``G_n -> G_{n+1}``.
    """

    def __init__(self, levels: Sequence[FiniteGroup], faces: Sequence[Sequence[dict]],
                 degeneracies: Sequence[Sequence[dict]], name: str = "", validate: bool = True):
        self.levels = tuple(levels)
        self.truncation = len(self.levels) - 1
        self.faces = [list(f) for f in faces]
        self.degeneracies = [list(s) for s in degeneracies]
        self.name = name
        self.is_constant = False
        if validate:
            self.validate()

    def __repr__(self):
        return f"SimplicialGroup({self.name or '?'}; N={self.truncation})"

    def elements(self, n: int) -> tuple:
        return self.levels[n].elements

    def unit(self, n: int):
        return self.levels[n].unit

    def mul(self, n: int, a, b):
        return self.levels[n].mul(a, b)

    def inv(self, n: int, a):
        return self.levels[n].inv(a)

    def face(self, i: int, n: int, g):
        return self.faces[n][i][g]

    def degeneracy(self, i: int, n: int, g):
        return self.degeneracies[n][i][g]

    def apply(self, theta: Sequence[int], n: int, g):
        """``theta^*(g)`` for ``g`` in ``G_n``."""
        m = n
        for kind, i in operator_steps(theta, n):
            if kind == "d":
                g = self.face(i, m, g)
                m -= 1
            else:
                g = self.degeneracy(i, m, g)
                m += 1
        return g

    def violations(self) -> list[str]:
        bad = []
        N = self.truncation
        for n, G in enumerate(self.levels):
            try:
                G.validate()
            except ValidationError as exc:
                bad.append(f"level {n}: {exc}")
        for n in range(N + 1):
            G = self.levels[n]
            ops = []
            if n > 0:
                ops += [("d", i, self.levels[n - 1]) for i in range(n + 1)]
            if n < N:
                ops += [("s", i, self.levels[n + 1]) for i in range(n + 1)]
            for kind, i, H in ops:
                table = (self.faces if kind == "d" else self.degeneracies)[n][i]
                if table[G.unit] != H.unit:
                    bad.append(f"{kind}{i} does not preserve the unit at level {n}")
                for a in G.elements:
                    for b in G.elements:
                        if table[G.mul(a, b)] != H.mul(table[a], table[b]):
                            bad.append(f"{kind}{i} is not a homomorphism at level {n}")
                            break
        d, s = self.face, self.degeneracy
        for n in range(N + 1):
            for g in self.elements(n):
                if n >= 2:
                    for j in range(n + 1):
                        for i in range(j):
                            if d(i, n - 1, d(j, n, g)) != d(j - 1, n - 1, d(i, n, g)):
                                bad.append(f"d{i}d{j} != d{j - 1}d{i} on {g} at level {n}")
                if n < N:
                    for j in range(n + 1):
                        y = s(j, n, g)
                        if d(j, n + 1, y) != g or d(j + 1, n + 1, y) != g:
                            bad.append(f"d s != 1 at s{j} on {g}")
                        for i in range(n + 2):
                            if i < j and d(i, n + 1, y) != s(j - 1, n - 1, d(i, n, g)):
                                bad.append(f"d{i}s{j} != s{j - 1}d{i} on {g}")
                            if i > j + 1 and d(i, n + 1, y) != s(j, n - 1, d(i - 1, n, g)):
                                bad.append(f"d{i}s{j} != s{j}d{i - 1} on {g}")
                if n + 2 <= N:
                    for j in range(n + 1):
                        for i in range(j + 1):
                            if s(i, n + 1, s(j, n, g)) != s(j + 1, n + 1, s(i, n, g)):
                                bad.append(f"s{i}s{j} != s{j + 1}s{i} on {g}")
        return bad

    def validate(self):
        bad = self.violations()
        if bad:
            raise ValidationError(bad[0])
        return True

    @classmethod
    def constant(cls, G: FiniteGroup, truncation: int) -> "SimplicialGroup":
        ident = {g: g for g in G.elements}
        N = truncation
        faces = [[] if n == 0 else [ident] * (n + 1) for n in range(N + 1)]
        degs = [[ident] * (n + 1) if n < N else [] for n in range(N + 1)]
        S = cls([G] * (N + 1), faces, degs, G.name, validate=False)
        S.is_constant = True
        return S

    @classmethod
    def codiscrete(cls, G: FiniteGroup, truncation: int) -> "SimplicialGroup":
        """``G_n = G^{n+1}`` with pointwise product; faces delete and degeneracies repeat an entry."""
        N = truncation
        levels = []
        for n in range(N + 1):
            els = list(cartesian(G.elements, repeat=n + 1))
            rows = [[tuple(G.mul(x, y) for x, y in zip(a, b)) for b in els] for a in els]
            levels.append(FiniteGroup.from_table(els, rows, (G.unit,) * (n + 1), f"{G.name}^{n + 1}"))
        faces = [[{a: a[:i] + a[i + 1:] for a in levels[n].elements} for i in range(n + 1)] if n else []
                 for n in range(N + 1)]
        degs = [[{a: a[:i + 1] + a[i:] for a in levels[n].elements} for i in range(n + 1)] if n < N else []
                for n in range(N + 1)]
        return cls(levels, faces, degs, f"E{G.name}")

    def as_simplicial_set(self, truncation: int | None = None) -> SimplicialSet:
        """Underlying simplicial set; explicit simplices are ``(n, g)``."""
        N = self.truncation if truncation is None else min(truncation, self.truncation)
        levels = [[(n, g) for g in self.elements(n)] for n in range(N + 1)]
        return from_operators(levels,
                              lambda i, x: (x[0] - 1, self.face(i, x[0], x[1])),
                              lambda i, x: (x[0] + 1, self.degeneracy(i, x[0], x[1])),
                              lambda x: f"{x[1]}" if x[0] == 0 else f"{x[1]}/{x[0]}",
                              self.name)

    def to_json(self):
        if self.is_constant:
            return {"constant": self.levels[0].to_json(), "name": self.name, "truncation": self.truncation}
        return {
            "levels": [G.to_json() for G in self.levels],
            "faces": [[{str(k): str(v) for k, v in t.items()} for t in lv] for lv in self.faces],
            "degeneracies": [[{str(k): str(v) for k, v in t.items()} for t in lv] for lv in self.degeneracies],
        }

    @classmethod
    def from_json(cls, data: dict, truncation: int | None = None) -> "SimplicialGroup":
        if "cyclic" in data:
            return cls.constant(cyclic(int(data["cyclic"])), int(data.get("truncation", truncation or 0)))
        if "constant" in data:
            G = FiniteGroup.from_json(data["constant"])
            return cls.constant(G, int(data.get("truncation", truncation or 0)))
        levels = [FiniteGroup.from_json(g) for g in data["levels"]]
        return cls(levels, data["faces"], data["degeneracies"], data.get("name", ""))


# -- actions -------------------------------------------------------------------

class GroupAction:
    """Left action ``G_n x F_{c,n} -> F_{c,n}``, given as a function ``act(n, c, g, x)``."""

    def __init__(self, group: SimplicialGroup, space: CDiagram, act: Callable, validate: bool = True,
                 table: dict | None = None):
        if group.truncation < space.truncation:
            raise TruncationError("group truncation is below the fibre truncation")
        self.group = group
        self.space = space
        self._act = act
        self._cache: dict = {}
        self.table = table
        if validate:
            self.validate()

    def __call__(self, n: int, c: str, g, x: SimplexRef) -> SimplexRef:
        key = (c, g, x)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._act(n, c, g, x)
            self._cache[key] = hit
        return hit

    def violations(self, limit: int = 20) -> list[str]:
        G, F = self.group, self.space
        bad = []

        def note(msg):
            if len(bad) < limit:
                bad.append(msg)

        for c in F.cat.objects:
            Fc = F.at[c]
            for n in range(F.truncation + 1):
                for x in Fc.simplices(n):
                    if self(n, c, G.unit(n), x) != x:
                        note(f"unit does not act trivially on {x} at {c}")
                    for g in G.elements(n):
                        gx = self(n, c, g, x)
                        if not Fc.contains(gx) or gx.dim != n:
                            note(f"{g}.{x} is not an {n}-simplex")
                            continue
                        for h in G.elements(n):
                            if self(n, c, g, self(n, c, h, x)) != self(n, c, G.mul(n, g, h), x):
                                note(f"({g}{h}).{x} != {g}.({h}.{x})")
                        for i in range(n + 1 if n > 0 else 0):
                            if Fc.face(i, gx) != self(n - 1, c, G.face(i, n, g), Fc.face(i, x)):
                                note(f"d{i} does not commute with the action at ({g}, {x})")
                        if n < F.truncation:
                            for i in range(n + 1):
                                if Fc.degeneracy(i, gx) != self(n + 1, c, G.degeneracy(i, n, g), Fc.degeneracy(i, x)):
                                    note(f"s{i} does not commute with the action at ({g}, {x})")
                        for f in F.cat.out_of(c):
                            d = F.cat.dst(f)
                            if F.act[f](gx) != self(n, d, g, F.act[f](x)):
                                note(f"{f} does not commute with the action at ({g}, {x})")
        return bad

    def validate(self):
        bad = self.violations()
        if bad:
            raise ValidationError(bad[0])
        return True

    @classmethod
    def from_automorphisms(cls, group: SimplicialGroup, space: CDiagram, autos: dict) -> "GroupAction":
        """Constant group acting through diagram automorphisms ``autos[g][c][gen] = ref``."""
        if not group.is_constant:
            raise UnsupportedError("automorphism tables describe actions of constant groups only")

        def act(n, c, g, x):
            return space.at[c].apply(x.sigma, autos[g][c][x.gen])

        table = {str(g): {c: {k: str(v) for k, v in t.items()} for c, t in per.items()} for g, per in autos.items()}
        return cls(group, space, act, table=table)

    def to_json(self):
        if self.table is None:
            raise UnsupportedError("this action has no table form")
        return {"group": self.group.to_json(), "fibre": self.space.to_json(), "action": self.table}

    @classmethod
    def from_json(cls, data: dict) -> "GroupAction":
        F = CDiagram.from_json(data["fibre"])
        G = SimplicialGroup.from_json(data["group"], F.truncation)
        names = {str(g): g for g in G.elements(0)}
        autos = {}
        for g, per in data["action"].items():
            if g not in names:
                raise ValidationError(f"action names unknown group element {g!r}")
            autos[names[g]] = {c: {k: F.at[c].ref(v) for k, v in t.items()} for c, t in per.items()}
        for g in G.elements(0):
            autos.setdefault(g, {c: {k: F.at[c].ident(k) for k in F.at[c].gen_dim} for c in F.cat.objects})
        return cls.from_automorphisms(G, F, autos)


def swap_action(cat: FiniteCategory | None = None, truncation: int = 2) -> GroupAction:
    """Z/2 swapping the two points of the constant two-point diagram."""
    cat = cat or trivial_category()
    F = CDiagram.constant_diagram(cat, discrete(["p", "q"], truncation), name="2pt")
    G = SimplicialGroup.constant(cyclic(2), truncation)
    Fc = F.at[cat.objects[0]]
    ident = {c: {"p": Fc.ident("p"), "q": Fc.ident("q")} for c in cat.objects}
    swap = {c: {"p": Fc.ident("q"), "q": Fc.ident("p")} for c in cat.objects}
    return GroupAction.from_automorphisms(G, F, {"e": ident, "g": swap})


def left_translation(G: SimplicialGroup, truncation: int | None = None) -> GroupAction:
    """``G`` acting on its underlying simplicial set (over the trivial category)."""
    S = G.as_simplicial_set(truncation)
    F = CDiagram.single(S)

    def act(n, c, g, x):
        m, h = S.explicit[x]
        return S.ref_of[(m, G.mul(m, g, h))]

    return GroupAction(G, F, act)


# -- twisting functions ------------------------------------------------------

class TwistingFunction:
    """Values ``t(v)`` in ``G_{n-1}`` for ``v`` in ``B_n``, ``n >= 1``.

    Values on degenerate simplices are derived unless given explicitly:
    ``t(s_0 w) = e`` and ``t(s_{i+1} w) = s_i t(w)``.
    """

    def __init__(self, base: SimplicialSet, group: SimplicialGroup, values: dict):
        if group.truncation < base.truncation - 1:
            raise TruncationError("group truncation is too small for the base")
        self.base = base
        self.group = group
        self.values = dict(values)

    def __call__(self, v: SimplexRef):
        hit = self.values.get(v)
        if hit is not None:
            return hit
        n = v.dim
        if n < 1:
            raise ValidationError("twisting functions start in dimension 1")
        word = v.word
        if not word:
            raise ValidationError(f"no twisting value for the non-degenerate simplex {v}")
        j = word[-1]
        if j == 0:
            return self.group.unit(n - 1)
        w = self.base.face(j, v)
        return self.group.degeneracy(j - 1, n - 2, self(w))

    def __eq__(self, other):
        if not isinstance(other, TwistingFunction):
            return NotImplemented
        return all(self(v) == other(v) for v in self.base.all_simplices() if v.dim >= 1)

    def __hash__(self):
        return hash(tuple(self(v) for v in self.base.all_simplices() if v.dim >= 1))

    def table(self) -> dict:
        return {v: self(v) for v in self.base.all_simplices() if v.dim >= 1}

    def to_json(self) -> dict:
        return {str(v): str(g) for v, g in self.values.items()}

    @classmethod
    def from_json(cls, base, group, data: dict) -> "TwistingFunction":
        values = {}
        for text, g in data.items():
            v = base.ref(text)
            names = {str(x): x for x in group.elements(v.dim - 1)}
            if g not in names:
                raise ValidationError(f"{g!r} is not an element of G_{v.dim - 1}")
            values[v] = names[g]
        return cls(base, group, values)

    @classmethod
    def unit(cls, base, group) -> "TwistingFunction":
        return cls(base, group, {v: group.unit(v.dim - 1) for m in range(1, base.truncation + 1)
                                 for v in base.nondegenerate(m)})


def validate_twisting(t: TwistingFunction, upto: int | None = None, limit: int = 20) -> list[str]:
    """Every identity of a twisting function on every simplex; returns violations."""
    B, G = t.base, t.group
    N = B.truncation if upto is None else min(upto, B.truncation)
    bad = []

    def note(msg):
        if len(bad) < limit:
            bad.append(msg)

    for n in range(0, N + 1):
        for v in B.simplices(n):
            if n + 1 <= N:
                if t(B.degeneracy(0, v)) != G.unit(n):
                    note(f"t(s0 v) != e at v = {v}")
            if n >= 1 and n + 1 <= N:
                for i in range(n):
                    if G.degeneracy(i, n - 1, t(v)) != t(B.degeneracy(i + 1, v)):
                        note(f"s{i} t(v) != t(s{i + 1} v) at v = {v}")
            if n >= 2:
                m = n - 1
                for i in range(1, n):
                    if G.face(i, m, t(v)) != t(B.face(i + 1, v)):
                        note(f"d{i} t(v) != t(d{i + 1} v) at v = {v}")
                lhs = G.face(0, m, t(v))
                rhs = G.mul(m - 1, G.inv(m - 1, t(B.face(0, v))), t(B.face(1, v)))
                if lhs != rhs:
                    note(f"d0 t(v) != t(d0 v)^-1 t(d1 v) at v = {v}")
    return bad


def enumerate_twisting(B: SimplicialSet, G: SimplicialGroup, d: int | None = None, budget=None) -> list[TwistingFunction]:
    """All twisting functions up to dimension ``d`` (exhaustive)."""
    N = B.truncation if d is None else d
    if N < B.truncation:
        B = B.truncate(N)
    budget = Budget.of(budget, "twisting enumeration")
    cells = [v for m in range(1, N + 1) for v in B.nondegenerate(m)]
    found = []
    vals: dict = {}
    probe = TwistingFunction(B, G, vals)

    def consistent(v):
        n = v.dim
        if n < 2:
            return True
        m = n - 1
        tv = vals[v]
        try:
            for i in range(1, n):
                if G.face(i, m, tv) != probe(B.face(i + 1, v)):
                    return False
            return G.face(0, m, tv) == G.mul(m - 1, G.inv(m - 1, probe(B.face(0, v))), probe(B.face(1, v)))
        except ValidationError:
            return True

    def rec(pos):
        if pos == len(cells):
            t = TwistingFunction(B, G, dict(vals))
            if not validate_twisting(t):
                found.append(t)
            return
        v = cells[pos]
        for g in G.elements(v.dim - 1):
            budget.tick()
            vals[v] = g
            probe.values = vals
            if consistent(v):
                rec(pos + 1)
            del vals[v]

    rec(0)
    return found


# -- twisted cartesian products --------------------------------------------------

@dataclass
class TCPBundle:
    base: SimplicialSet
    twisting: TwistingFunction
    action: GroupAction
    total: CDiagram
    projection: DiagramMap

    def ref(self, c: str, v: SimplexRef, x: SimplexRef) -> SimplexRef:
        return self.total.at[c].ref_of[(v, x)]


def build_tcp(B: SimplicialSet, t: TwistingFunction, action: GroupAction) -> TCPBundle:
    """``B x_t F``: ``d_0(b, x) = (d_0 b, t(b) d_0 x)``, other operators coordinatewise, ``f(b, x) = (b, f x)``."""
    bad = validate_twisting(t)
    if bad:
        raise ValidationError(f"invalid twisting function: {bad[0]}")
    F = action.space
    if F.truncation != B.truncation:
        raise ValidationError("base and fibre need equal truncations")
    N = B.truncation
    at = {}
    for c in F.cat.objects:
        Fc = F.at[c]
        levels = [[(v, x) for v in B.simplices(n) for x in Fc.simplices(n)] for n in range(N + 1)]

        def face(i, q, Fc=Fc, c=c):
            v, x = q
            if i == 0:
                return B.face(0, v), action(v.dim - 1, c, t(v), Fc.face(0, x))
            return B.face(i, v), Fc.face(i, x)

        at[c] = from_operators(levels, face,
                               lambda i, q, Fc=Fc: (B.degeneracy(i, q[0]), Fc.degeneracy(i, q[1])),
                               lambda q: f"({q[0]}|{q[1]})", f"{B.name}x_t{Fc.name}")
    act = {}
    for f, (a, b) in F.cat.morphisms.items():
        src, dst = at[a], at[b]
        assign = {}
        for g in src.gen_dim:
            v, x = src.explicit[src.ident(g)]
            assign[g] = dst.ref_of[(v, F.act[f](x))]
        act[f] = SimplicialMap(src, dst, assign, validate=False)
    X = CDiagram(F.cat, at, act, name=f"{B.name}x_t{F.name}")
    p = projection_to_constant(X, B, {c: {g: at[c].explicit[at[c].ident(g)][0] for g in at[c].gen_dim}
                                      for c in F.cat.objects})
    fb = F.basis if F.basis is not None else find_basis(F)[0]
    if fb is not None:
        gens = [GammaSimplex(b.obj, at[b.obj].ref_of[(v, b.simplex)]) for b in fb.gens for v in B.simplices(b.dim)]
        check = verify_basis(X, gens)
        if check.ok:
            X.basis = FreeBasis(tuple(sorted(gens, key=X.key)), check.witness)
    return TCPBundle(B, t, action, X, p)


def tcp_isomorphism(b1: TCPBundle, b2: TCPBundle, gamma: Callable) -> DiagramMap:
    """``h(v, x) = (v, gamma(v) x)`` from ``b1`` to ``b2``; validated as a diagram map."""
    X1, X2 = b1.total, b2.total
    comps = {}
    for c in X1.cat.objects:
        src = X1.at[c]
        assign = {}
        for g in src.gen_dim:
            v, x = src.explicit[src.ident(g)]
            assign[g] = X2.at[c].ref_of[(v, b1.action(v.dim, c, gamma(v), x))]
        comps[c] = SimplicialMap(src, X2.at[c], assign)
    return DiagramMap(X1, X2, comps)


# -- atlases -------------------------------------------------------------------

def _tau(t: TwistingFunction, v: SimplexRef, theta: tuple):
    """Twist picked up by the tautological trivialization along ``theta``."""
    G = t.group
    k = len(theta) - 1
    if theta[0] == 0:
        return G.unit(k)
    return t(t.base.apply((0,) + tuple(theta), v))


@dataclass
class Atlas:
    """Trivializations ``beta(v) = beta_taut(v) o rho(gauge(v))`` of a twisted cartesian product.

    ``gauge`` holds one element of ``G_n`` for every n-simplex of the base.
    """

    bundle: TCPBundle
    gauge: dict

    def beta(self, v: SimplexRef, c: str, theta: tuple, x: SimplexRef) -> SimplexRef:
        t = self.bundle.twisting
        G = t.group
        k = len(theta) - 1
        g = G.mul(k, _tau(t, v, theta), G.apply(theta, v.dim, self.gauge[v]))
        return self.bundle.ref(c, self.bundle.base.apply(theta, v), self.bundle.action(k, c, g, x))

    def beta_table(self, v: SimplexRef, pre: Callable[[tuple], tuple] | None = None, dim: int | None = None,
                   gauge_override=None) -> dict:
        """All values of ``beta(v) o (pre x 1)`` on ``Delta[dim] x F``."""
        F = self.bundle.action.space
        N = F.truncation
        dim = v.dim if dim is None else dim
        out = {}
        for c in F.cat.objects:
            Fc = F.at[c]
            for k in range(N + 1):
                for theta in _monotone(dim, k):
                    th = pre(theta) if pre else theta
                    for x in Fc.simplices(k):
                        out[(c, theta, x)] = self.beta(v, c, th, x)
        return out

    def to_json(self):
        return {"gauge": {str(v): str(g) for v, g in self.gauge.items()}}

    @classmethod
    def tautological(cls, bundle: TCPBundle) -> "Atlas":
        G = bundle.twisting.group
        return cls(bundle, {v: G.unit(v.dim) for v in bundle.base.all_simplices()})

    @classmethod
    def from_json(cls, bundle: TCPBundle, data: dict) -> "Atlas":
        G = bundle.twisting.group
        gauge = {v: G.unit(v.dim) for v in bundle.base.all_simplices()}
        for text, g in data.get("gauge", {}).items():
            v = bundle.base.ref(text)
            names = {str(x): x for x in G.elements(v.dim)}
            if g not in names:
                raise ValidationError(f"{g!r} is not an element of G_{v.dim}")
            gauge[v] = names[g]
        return cls(bundle, gauge)


def _with_rho(atlas: Atlas, v: SimplexRef, g, dim: int) -> dict:
    """Table of ``beta_taut(v) o rho(g)`` on ``Delta[dim] x F``."""
    trial = Atlas(atlas.bundle, {v: g})
    return trial.beta_table(v, dim=dim)


def validate_atlas(a: Atlas) -> list[str]:
    """Each trivialization is simplicial, lies over its simplex and is a pullback."""
    B = a.bundle.base
    X = a.bundle.total
    F = a.bundle.action.space
    p = a.bundle.projection
    bad = []
    for v in B.all_simplices():
        n = v.dim
        table = a.beta_table(v)
        for (c, theta, x), y in table.items():
            k = len(theta) - 1
            if p.components[c](y) != B.apply(theta, v):
                bad.append(f"beta({v}) is not over {v} at {theta}")
            if k > 0:
                Fc = F.at[c]
                for i in range(k + 1):
                    th = theta[:i] + theta[i + 1:]
                    if X.at[c].face(i, y) != table[(c, th, Fc.face(i, x))]:
                        bad.append(f"beta({v}) does not commute with d{i} at {theta}")
        for c in F.cat.objects:
            for k in range(F.truncation + 1):
                for theta in _monotone(n, k):
                    images = {table[(c, theta, x)] for x in F.at[c].simplices(k)}
                    fibre = {y for y in X.at[c].simplices(k) if p.components[c](y) == B.apply(theta, v)}
                    if images != fibre:
                        bad.append(f"beta({v}) is not a pullback square at {theta}")
        if len(bad) > 20:
            break
    return bad


def is_normal(a: Atlas) -> bool:
    B = a.bundle.base
    for v in B.all_simplices():
        if v.dim >= B.truncation:
            continue
        for i in range(v.dim + 1):
            lhs = a.beta_table(B.degeneracy(i, v))
            rhs = a.beta_table(v, pre=lambda th, i=i: tuple(t if t <= i else t - 1 for t in th), dim=v.dim + 1)
            if lhs != rhs:
                return False
    return True


def _solve_gauge(a: Atlas, w: SimplexRef, target: dict):
    G = a.bundle.twisting.group
    hits = [g for g in G.elements(w.dim) if _with_rho(a, w, g, w.dim) == target]
    if len(hits) != 1:
        raise ValidationError(f"trivialization over {w} is not a G-translate of the tautological one")
    return hits[0]


def normalize_atlas(a: Atlas) -> Atlas:
    """Redefine trivializations over degenerate simplices by ``beta(s_i v) = s_i beta(v)``."""
    B = a.bundle.base
    new = Atlas(a.bundle, dict(a.gauge))
    for n in range(1, B.truncation + 1):
        for w in B.simplices(n):
            if not w.is_degenerate:
                continue
            tables = []
            for i in w.word:
                v = B.face(i, w)
                tables.append(new.beta_table(v, pre=lambda th, i=i: tuple(t if t <= i else t - 1 for t in th),
                                             dim=n))
            if any(tb != tables[0] for tb in tables[1:]):
                raise ValidationError(f"normalization is ill-defined at {w}")
            new.gauge[w] = _solve_gauge(a, w, tables[0])
    return new


def transformation_elements(a: Atlas, allowed: Callable[[int, object], bool] | None = None) -> dict:
    """``xi^i(v)`` with ``d_i beta(v) = beta(d_i v) o xi^i(v)``, found by exhaustive comparison."""
    B = a.bundle.base
    G = a.bundle.twisting.group
    out = {}
    for n in range(1, B.truncation + 1):
        for v in B.simplices(n):
            for i in range(n + 1):
                target = a.beta_table(v, pre=lambda th, i=i: tuple(t if t < i else t + 1 for t in th), dim=n - 1)
                w = B.face(i, v)
                hits = []
                for g in G.elements(n - 1):
                    trial = Atlas(a.bundle, {w: G.mul(n - 1, a.gauge[w], g)})
                    if trial.beta_table(w) == target:
                        hits.append(g)
                if len(hits) != 1:
                    raise ValidationError(f"no unique transformation element at ({v}, {i})")
                if allowed is not None and not allowed(n - 1, hits[0]):
                    raise UnsupportedError(f"transformation element at ({v}, {i}) lies outside the structure group")
                out[(v, i)] = hits[0]
    return out


def is_regular(xi: dict, group: SimplicialGroup) -> bool:
    """``xi^i = e`` for every ``i >= 1``."""
    return all(i == 0 or g == group.unit(v.dim - 1) for (v, i), g in xi.items())


def regularize(a: Atlas, budget=None) -> Atlas:
    """A regular atlas in the same G-class: ``xi^i(v) = e`` for ``i >= 1``."""
    B = a.bundle.base
    G = a.bundle.twisting.group
    budget = Budget.of(budget, "regularize")
    new = Atlas(a.bundle, dict(a.gauge))
    for n in range(1, B.truncation + 1):
        for v in B.simplices(n):
            if v.is_degenerate:
                continue
            targets = []
            for i in range(1, n + 1):
                targets.append((i, new.beta_table(B.face(i, v))))
            order = [a.gauge[v]] + [g for g in G.elements(n) if g != a.gauge[v]]
            pick = None
            for g in order:
                budget.tick()
                trial = Atlas(a.bundle, {v: g})
                if all(trial.beta_table(v, pre=lambda th, i=i: tuple(t if t < i else t + 1 for t in th), dim=n - 1) == tb
                       for i, tb in targets):
                    pick = g
                    break
            if pick is None:
                raise ValidationError(f"no regular trivialization over {v}")
            new.gauge[v] = pick
    for n in range(1, B.truncation + 1):
        for w in B.simplices(n):
            if w.is_degenerate:
                i = w.word[0]
                new.gauge[w] = G.degeneracy(i, n - 1, new.gauge[B.face(i, w)])
    return new


def atlas_twisting(a: Atlas, xi: dict | None = None) -> TwistingFunction:
    xi = xi if xi is not None else transformation_elements(a)
    B = a.bundle.base
    return TwistingFunction(B, a.bundle.twisting.group, {v: xi[(v, 0)] for v in B.all_simplices() if v.dim >= 1})


def atlas_isomorphism(a: Atlas, new: TCPBundle) -> DiagramMap:
    """``h(v, z) = beta(v)(iota_n, z)`` from ``B x_xi F`` to the bundle of ``a``."""
    X1, X2 = new.total, a.bundle.total
    comps = {}
    for c in X1.cat.objects:
        src = X1.at[c]
        assign = {}
        for g in src.gen_dim:
            v, z = src.explicit[src.ident(g)]
            assign[g] = a.beta(v, c, tuple(range(v.dim + 1)), z)
        comps[c] = SimplicialMap(src, X2.at[c], assign)
    return DiagramMap(X1, X2, comps)


# -- equivalence of twisting functions -------------------------------------------

def twisting_equivalent(t: TwistingFunction, t2: TwistingFunction, action: GroupAction | None = None,
                        budget=None) -> dict | None:
    """A degree-preserving ``gamma`` with ``t2(v) d_0 gamma(v) = gamma(d_0 v) t(v)``,
    ``d_i gamma = gamma d_i`` for ``i > 0`` and ``s_i gamma = gamma s_i``; ``None`` if refuted."""
    B, G = t.base, t.group
    budget = Budget.of(budget, "twisting equivalence")
    cells = [v for m in range(B.truncation + 1) for v in B.nondegenerate(m)]
    gamma: dict = {}

    def value(v):
        if v in gamma:
            return gamma[v]
        i = v.word[0]
        return G.degeneracy(i, v.dim - 1, value(B.face(i, v)))

    def ok(v):
        n = v.dim
        if n == 0:
            return True
        g = gamma[v]
        for i in range(1, n + 1):
            if G.face(i, n, g) != value(B.face(i, v)):
                return False
        lhs = G.mul(n - 1, t2(v), G.face(0, n, g))
        rhs = G.mul(n - 1, value(B.face(0, v)), t(v))
        return lhs == rhs

    def rec(pos):
        if pos == len(cells):
            return True
        v = cells[pos]
        for g in G.elements(v.dim):
            budget.tick()
            gamma[v] = g
            if ok(v) and rec(pos + 1):
                return True
        gamma.pop(v, None)
        return False

    if not rec(0):
        return None
    full = {v: value(v) for v in B.all_simplices()}
    for v in B.all_simplices():
        if v.dim >= 1 and not all(ok_full(B, G, t, t2, full, v)):
            raise ValidationError(f"gauge fails the equivalence identities at {v}")
    if action is not None:
        tcp_isomorphism(build_tcp(B, t, action), build_tcp(B, t2, action), full.__getitem__)
    return full


def ok_full(B, G, t, t2, gamma, v):
    n = v.dim
    yield G.mul(n - 1, t2(v), G.face(0, n, gamma[v])) == G.mul(n - 1, gamma[B.face(0, v)], t(v))
    for i in range(1, n + 1):
        yield G.face(i, n, gamma[v]) == gamma[B.face(i, v)]
    if n < B.truncation:
        for i in range(n + 1):
            yield G.degeneracy(i, n, gamma[v]) == gamma[B.degeneracy(i, v)]


def gauge_transform(t: TwistingFunction, gamma: dict) -> TwistingFunction:
    """The twisting function ``t2`` with ``t2(v) = gamma(d_0 v) t(v) (d_0 gamma(v))^{-1}``."""
    B, G = t.base, t.group
    vals = {}
    for v in B.all_simplices():
        n = v.dim
        if n >= 1:
            vals[v] = G.mul(n - 1, G.mul(n - 1, gamma[B.face(0, v)], t(v)), G.inv(n - 1, G.face(0, n, gamma[v])))
    return TwistingFunction(B, G, vals)


# -- the classifying complex -----------------------------------------------------

def wbar(G: SimplicialGroup, d: int) -> SimplicialSet:
    """``W G`` up to dimension ``d``: n-simplices are ``(g_{n-1}, ..., g_0)`` with ``g_k`` in ``G_k``."""
    if d > G.truncation + 1:
        raise TruncationError("the group is truncated below the requested dimension")
    levels = [[()]] + [list(cartesian(*[G.elements(k) for k in reversed(range(n))])) for n in range(1, d + 1)]

    def face(i, w):
        n = len(w)
        g = {n - 1 - pos: x for pos, x in enumerate(w)}  # g[k] in G_k
        if i == 0:
            return w[1:]
        if i == n:
            return tuple(G.face(i - (n - k), k, g[k]) for k in reversed(range(1, n)))
        out = []
        for k in reversed(range(n - i + 1, n)):
            out.append(G.face(i - (n - k), k, g[k]))
        out.append(G.mul(n - i - 1, g[n - i - 1], G.face(0, n - i, g[n - i])))
        for k in reversed(range(n - i - 1)):
            out.append(g[k])
        return tuple(out)

    def degen(i, w):
        n = len(w)
        g = {n - 1 - pos: x for pos, x in enumerate(w)}
        if i == 0:
            return (G.unit(n),) + w
        out = []
        for k in reversed(range(n - i, n)):
            out.append(G.degeneracy(i - (n - k), k, g[k]))
        out.append(G.unit(n - i))
        for k in reversed(range(n - i)):
            out.append(g[k])
        return tuple(out)

    return from_operators(levels, face, degen,
                          lambda w: "[" + ",".join(map(str, w)) + "]", f"W{G.name}")


def universal_twisting(W: SimplicialSet, G: SimplicialGroup) -> TwistingFunction:
    return TwistingFunction(W, G, {v: W.explicit[v][0] for v in W.all_simplices() if v.dim >= 1})


def classifying_map(t: TwistingFunction, W: SimplicialSet) -> SimplicialMap:
    """``v -> (t(v), t(d_0 v), ..., t(d_0^{n-1} v))``."""
    B = t.base
    assign = {}
    for g in B.gen_dim:
        v = B.ident(g)
        vals, w = [], v
        while w.dim >= 1:
            vals.append(t(w))
            w = B.face(0, w)
        assign[g] = W.ref_of[tuple(vals)]
    return SimplicialMap(B, W, assign)


def principal_tcp(B: SimplicialSet, t: TwistingFunction) -> TCPBundle:
    return build_tcp(B, t, left_translation(t.group, B.truncation))


class AssociatedBundle(NamedTuple):
    bundle: TCPBundle
    quotient: dict  # (c, ((v, g), x)) -> simplex of B x_t F
    orbits_ok: bool


def associated(B: SimplicialSet, t: TwistingFunction, action: GroupAction) -> AssociatedBundle:
    """``(B x_t G) x_G F``, realized as ``B x_t F`` through ``((v, g), x) -> (v, g x)``.

    Checks that the fibres of this map are exactly the orbits of the diagonal
    action and that it commutes with all operators.
    """
    G = t.group
    P = principal_tcp(B, t)
    Pt = P.total.at["*"]
    S = P.action.space.at["*"]
    target = build_tcp(B, t, action)
    F = action.space
    quotient = {}
    ok = True
    for c in F.cat.objects:
        Fc, Xc = F.at[c], target.total.at[c]
        for n in range(B.truncation + 1):
            for q in Pt.simplices(n):
                v, gref = Pt.explicit[q]
                _, g = S.explicit[gref]
                for x in Fc.simplices(n):
                    y = Xc.ref_of[(v, action(n, c, g, x))]
                    quotient[(c, q, x)] = y
            for q in Pt.simplices(n):
                v, gref = Pt.explicit[q]
                _, g = S.explicit[gref]
                for x in Fc.simplices(n):
                    for h in G.elements(n):
                        q2 = Pt.ref_of[(v, S.ref_of[(n, G.mul(n, g, G.inv(n, h)))])]
                        if quotient[(c, q2, action(n, c, h, x))] != quotient[(c, q, x)]:
                            ok = False
                    if n > 0:
                        for i in range(n + 1):
                            if Xc.face(i, quotient[(c, q, x)]) != quotient[(c, Pt.face(i, q), Fc.face(i, x))]:
                                ok = False
            sizes: dict = {}
            for (cc, q, x), y in quotient.items():
                if cc == c and q.dim == n:
                    sizes[y] = sizes.get(y, 0) + 1
            if set(sizes) != set(Xc.simplices(n)) or any(s != len(G.elements(n)) for s in sizes.values()):
                ok = False
    return AssociatedBundle(target, quotient, ok)


# -- classification ------------------------------------------------------------

class ClassificationReport(NamedTuple):
    dim: int
    twisting_count: int
    twisting_classes: list
    map_count: int
    map_classes: list
    bijection: bool
    class_map: dict

    def summary(self) -> str:
        verdict = "bijection confirmed" if self.bijection else "bijection FAILS"
        return (f"dimension {self.dim}: {self.twisting_count} twisting functions in "
                f"{len(self.twisting_classes)} classes; {self.map_count} maps into WG in "
                f"{len(self.map_classes)} homotopy classes; {verdict}")


def _classes(items, related):
    parent = list(range(len(items)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if find(i) != find(j) and related(items[i], items[j]):
                parent[find(j)] = find(i)
    groups: dict = {}
    for i in range(len(items)):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def maps_homotopic(f: SimplicialMap, g: SimplicialMap, budget=None) -> SimplicialMap | None:
    """A homotopy ``B x Delta[1] -> Y`` from ``f`` to ``g``, or ``None``."""
    B, Y = f.source, f.target
    N = B.truncation
    I = standard_simplex(1, N)
    P = product(B, I)
    ends = {0: f, 1: g}
    small, partial = [], {}
    for gen in P.gen_dim:
        b, r = P.explicit[P.ident(gen)]
        verts = I.explicit[r]
        if len(set(verts)) == 1:
            small.append(gen)
            partial[gen] = ends[verts[0]](b)
    pt = point_set(Y.truncation)
    q = SimplicialMap.to_point(Y, pt)
    base = SimplicialMap(P, pt, {gen: pt.apply((0,) * (P.gen_dim[gen] + 1), pt.ident(pt.generators[0][0]))
                                 for gen in P.gen_dim}, validate=False)
    return solve(LiftingProblem(CellInclusion.of(P, small), q, partial, base), budget)


def classify(B: SimplicialSet, G: SimplicialGroup, action: GroupAction | None, d: int, budget=None,
             max_candidates: int = 10 ** 6) -> ClassificationReport:
    """Twisting functions up to equivalence against homotopy classes of maps into ``W G``."""
    if B.truncation > d:
        B = B.truncate(d)
    elif B.truncation < d:
        raise TruncationError(f"base truncation {B.truncation} is below {d}")
    size = 1
    for m in range(1, d + 1):
        size *= len(G.elements(m - 1)) ** len(B.generators[m])
    if size > max_candidates:
        raise UnsupportedError(f"{size} candidate twisting functions exceed the size guard {max_candidates}")
    limit = budget.limit if isinstance(budget, Budget) else budget
    ts = enumerate_twisting(B, G, d, Budget(limit, "twisting enumeration"))
    act = action if action is not None and action.space.truncation >= d else None

    def t_related(a, b):
        return twisting_equivalent(a, b, None, Budget(limit, "twisting equivalence")) is not None

    t_classes = _classes(ts, t_related)
    W = wbar(G, d)
    maps = [phi.components["*"] for phi in diagram_maps(CDiagram.single(B), CDiagram.single(W),
                                                        budget=Budget(limit, "map enumeration"))]

    def m_related(f, g):
        return maps_homotopic(f, g, Budget(limit, "homotopy search")) is not None

    m_classes = _classes(maps, m_related)
    index = {tuple(sorted(m.assignment.items())): k for k, m in enumerate(maps)}
    cls_of_map = {i: ci for ci, members in enumerate(m_classes) for i in members}
    class_map = {}
    ok = True
    for ci, members in enumerate(t_classes):
        images = set()
        for i in members:
            f = classifying_map(ts[i], W)
            images.add(cls_of_map[index[tuple(sorted(f.assignment.items()))]])
        if len(images) != 1:
            ok = False
        class_map[ci] = sorted(images)
    hit = [x for v in class_map.values() for x in v]
    if len(set(hit)) != len(hit) or set(hit) != set(range(len(m_classes))):
        ok = False
    return ClassificationReport(d, len(ts), t_classes, len(maps), m_classes, ok, class_map)
