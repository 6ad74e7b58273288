"""Finite truncated simplicial sets in generator / face-table form.

A simplex is stored in Eilenberg-Zilber normal form: a non-degenerate
generator ``x`` of dimension ``m`` together with a surjection
``sigma: [n] -> [m]`` (a non-decreasing tuple), meaning ``sigma^*(x)``.
The degeneracy word ``s_{j_t} ... s_{j_1}`` (``j_t > ... > j_1``) of the
normal form is the set of positions ``j`` with ``sigma[j] == sigma[j+1]``.

Everything is carried up to an explicit truncation ``N``; every
universally quantified check holds "up to dimension N" only.
"""
from __future__ import annotations

import json
import re
from itertools import combinations, product as cartesian
from typing import Any, Callable, Hashable, Iterable, NamedTuple, Sequence

from .errors import Budget, TruncationError, ValidationError


class SimplexRef(NamedTuple):
    gen: str
    sigma: tuple

    @property
    def dim(self) -> int:
        return len(self.sigma) - 1

    @property
    def gen_dim(self) -> int:
        return self.sigma[-1]

    @property
    def word(self) -> tuple:
        """Degeneracy indices of the normal form, strictly decreasing."""
        return tuple(j for j in reversed(range(self.dim)) if self.sigma[j] == self.sigma[j + 1])

    @property
    def is_degenerate(self) -> bool:
        return self.dim != self.gen_dim

    def __str__(self):
        return " ".join([f"s{j}" for j in self.word] + [self.gen])


def identity_ref(gen: str, dim: int) -> SimplexRef:
    return SimplexRef(gen, tuple(range(dim + 1)))


def sigma_from_word(gen_dim: int, word: Sequence[int]) -> tuple:
    """Surjection of ``s_{j_t}...s_{j_1}`` applied to an ``gen_dim``-simplex."""
    word = tuple(word)
    if any(a <= b for a, b in zip(word, word[1:])):
        raise ValidationError(f"degeneracy word {word} is not strictly decreasing")
    sigma = tuple(range(gen_dim + 1))
    for j in reversed(word):
        if j > len(sigma) - 1:
            raise ValidationError(f"degeneracy s{j} out of range in word {word}")
        sigma = sigma[: j + 1] + sigma[j:]
    return sigma


def make_ref(gen: str, gen_dim: int, word: Sequence[int] = ()) -> SimplexRef:
    return SimplexRef(gen, sigma_from_word(gen_dim, word))


_WORD_TOKEN = re.compile(r"^s(\d+)$")


def parse_word(text: str) -> tuple[str, tuple]:
    """Split ``"s3 s1 x"`` into ``("x", (3, 1))``; rejects non-decreasing words."""
    tokens = text.split()
    if not tokens:
        raise ValidationError("empty simplex reference")
    *ops, gen = tokens
    word = []
    for tok in ops:
        m = _WORD_TOKEN.match(tok)
        if not m:
            raise ValidationError(f"bad degeneracy token {tok!r} in {text!r}")
        word.append(int(m.group(1)))
    if any(a <= b for a, b in zip(word, word[1:])):
        raise ValidationError(f"degeneracy word in {text!r} is not strictly decreasing")
    return gen, tuple(word)


# -- operators on [n] ---------------------------------------------------------

def coface(n: int, i: int) -> tuple:
    """delta^i: [n-1] -> [n] as a vertex tuple."""
    return tuple(t for t in range(n + 1) if t != i)


def codegeneracy(n: int, i: int) -> tuple:
    """sigma^i: [n+1] -> [n] as a vertex tuple."""
    return tuple(t if t <= i else t - 1 for t in range(n + 2))


def operator_steps(theta: Sequence[int], n: int) -> list[tuple[str, int]]:
    """Factor ``theta: [k] -> [n]`` into face/degeneracy steps in application order."""
    theta = tuple(theta)
    image = sorted(set(theta))
    missing = [a for a in range(n + 1) if a not in image]
    steps = [("d", a) for a in reversed(missing)]
    delta = [image.index(v) for v in theta]
    repeats = [j for j in range(len(delta) - 1) if delta[j] == delta[j + 1]]
    steps.extend(("s", j) for j in repeats)
    return steps


def parse_ops(text: str | Sequence) -> list[tuple[str, int]]:
    """Operators written in composition order, e.g. ``"d1 s0"`` = d_1 after s_0.

    Returned in application order (rightmost first).
    """
    if isinstance(text, str):
        toks = text.split()
        ops = []
        for tok in toks:
            if not re.match(r"^[ds]\d+$", tok):
                raise ValidationError(f"bad operator token {tok!r}")
            ops.append((tok[0], int(tok[1:])))
    else:
        ops = [(a, int(b)) for a, b in text]
    return list(reversed(ops))


# -- presentations ------------------------------------------------------------

class SimplicialSet:
    """Levelwise-finite simplicial set truncated at ``truncation``.

    ``generators[m]`` lists the non-degenerate m-simplices (order is the
    canonical generator order); ``faces[x]`` gives ``(d_0 x, ..., d_m x)``
    as normal-form references.
    """

    def __init__(self, generators: Sequence[Sequence[str]], faces: dict, truncation: int | None = None,
                 name: str = "", validate: bool = True):
        gens = [tuple(level) for level in generators]
        if truncation is None:
            truncation = max(len(gens) - 1, 0)
        if len(gens) > truncation + 1:
            if any(gens[truncation + 1:]):
                raise TruncationError(f"generators above truncation {truncation}")
            gens = gens[: truncation + 1]
        gens += [()] * (truncation + 1 - len(gens))
        self.truncation = truncation
        self.generators = tuple(gens)
        self.faces = {g: tuple(faces.get(g, ())) for level in gens for g in level}
        self.name = name
        self.gen_dim = {}
        self.gen_index = {}
        for m, level in enumerate(gens):
            for idx, g in enumerate(level):
                if g in self.gen_dim:
                    raise ValidationError(f"duplicate generator name {g!r}")
                self.gen_dim[g] = m
                self.gen_index[g] = idx
        # populated by from_operators
        self.explicit: dict[SimplexRef, Any] = {}
        self.ref_of: dict[Any, SimplexRef] = {}
        self._face_cache: dict = {}
        self._simplices: dict[int, tuple] = {}
        self._indexes: dict = {}
        if validate:
            self.validate()

    # basic structure
    def __repr__(self):
        counts = ",".join(str(len(level)) for level in self.generators)
        return f"SimplicialSet({self.name or '?'}; N={self.truncation}; gens=({counts}))"

    def ident(self, gen: str) -> SimplexRef:
        return identity_ref(gen, self.gen_dim[gen])

    def ref(self, text: str) -> SimplexRef:
        gen, word = parse_word(text)
        if gen not in self.gen_dim:
            raise ValidationError(f"unknown generator {gen!r}")
        s = make_ref(gen, self.gen_dim[gen], word)
        if s.dim > self.truncation:
            raise TruncationError(f"{text!r} has dimension {s.dim} > truncation {self.truncation}")
        return s

    def key(self, s: SimplexRef):
        return (s.dim, self.gen_dim[s.gen], self.gen_index[s.gen], s.word)

    def contains(self, s: SimplexRef) -> bool:
        if s.gen not in self.gen_dim or s.dim > self.truncation:
            return False
        sig = s.sigma
        if sig[0] != 0 or sig[-1] != self.gen_dim[s.gen]:
            return False
        return all(b - a in (0, 1) for a, b in zip(sig, sig[1:]))

    def is_empty(self) -> bool:
        return not self.generators[0]

    # operators
    def face(self, i: int, s: SimplexRef) -> SimplexRef:
        hit = self._face_cache.get((i, s))
        if hit is not None:
            return hit
        sigma = s.sigma
        n = len(sigma) - 1
        if n < 1 or not 0 <= i <= n:
            raise ValidationError(f"d{i} undefined on the {n}-simplex {s}")
        v = sigma[i]
        rest = sigma[:i] + sigma[i + 1:]
        if (i > 0 and sigma[i - 1] == v) or (i < n and sigma[i + 1] == v):
            out = SimplexRef(s.gen, rest)
        else:
            base = self.faces[s.gen][v]
            shifted = [x if x < v else x - 1 for x in rest]
            out = SimplexRef(base.gen, tuple(base.sigma[x] for x in shifted))
        self._face_cache[(i, s)] = out
        return out

    def degeneracy(self, i: int, s: SimplexRef) -> SimplexRef:
        n = s.dim
        if not 0 <= i <= n:
            raise ValidationError(f"s{i} undefined on the {n}-simplex {s}")
        if n + 1 > self.truncation:
            raise TruncationError(f"s{i} of a {n}-simplex exceeds truncation {self.truncation}")
        return SimplexRef(s.gen, s.sigma[: i + 1] + s.sigma[i:])

    def apply(self, theta: Sequence[int], s: SimplexRef) -> SimplexRef:
        """``theta^*(s)`` for an order-preserving ``theta: [k] -> [dim s]``."""
        sigma = s.sigma
        comp = tuple(sigma[t] for t in theta)
        image = sorted(set(comp))
        m = sigma[-1]
        base = identity_ref(s.gen, m)
        if len(image) != m + 1:
            for a in reversed([a for a in range(m + 1) if a not in set(image)]):
                base = self.face(a, base)
        pos = {v: idx for idx, v in enumerate(image)}
        return SimplexRef(base.gen, tuple(base.sigma[pos[c]] for c in comp))

    def apply_ops(self, steps: Iterable[tuple[str, int]], s: SimplexRef) -> SimplexRef:
        for kind, i in steps:
            s = self.face(i, s) if kind == "d" else self.degeneracy(i, s)
        return s

    def boundary_of(self, s: SimplexRef) -> tuple:
        if s.dim == 0:
            return ()
        return tuple(self.face(i, s) for i in range(s.dim + 1))

    # enumeration
    def simplices(self, n: int) -> tuple:
        """All n-simplices (degenerate included) in canonical order."""
        if n > self.truncation:
            raise TruncationError(f"dimension {n} > truncation {self.truncation}")
        if n < 0:
            return ()
        cached = self._simplices.get(n)
        if cached is not None:
            return cached
        out = []
        for m in range(n + 1):
            for g in self.generators[m]:
                for jumps in combinations(range(n), m):
                    sig = [0]
                    for t in range(n):
                        sig.append(sig[-1] + (1 if t in jumps else 0))
                    out.append(SimplexRef(g, tuple(sig)))
        out.sort(key=self.key)
        result = tuple(out)
        self._simplices[n] = result
        return result

    def all_simplices(self, upto: int | None = None):
        upto = self.truncation if upto is None else upto
        for n in range(upto + 1):
            yield from self.simplices(n)

    def nondegenerate(self, n: int) -> tuple:
        return tuple(self.ident(g) for g in self.generators[n])

    def counts(self) -> tuple:
        return tuple(len(level) for level in self.generators)

    def vertices(self) -> tuple:
        return self.simplices(0)

    def face_index(self, n: int, skip: int | None = None, label: Callable | None = None, tag=None) -> dict:
        """Index of n-simplices by their face tuple (face ``skip`` dropped).

        With ``label`` (e.g. a projection) the key also carries ``label(z)``;
        ``tag`` distinguishes caches for different labels.
        """
        cache_key = (n, skip, tag if label is not None else None)
        idx = self._indexes.get(cache_key)
        if idx is not None:
            return idx
        idx = {}
        for z in self.simplices(n):
            faces = tuple(self.face(i, z) for i in range(n + 1) if i != skip) if n > 0 else ()
            k = (faces, label(z)) if label is not None else faces
            idx.setdefault(k, []).append(z)
        self._indexes[cache_key] = idx
        return idx

    # checks
    def validate(self):
        for m, level in enumerate(self.generators):
            for g in level:
                fs = self.faces[g]
                if m == 0:
                    if fs:
                        raise ValidationError(f"vertex {g!r} has faces")
                    continue
                if len(fs) != m + 1:
                    raise ValidationError(f"generator {g!r} needs {m + 1} faces, has {len(fs)}")
                for i, f in enumerate(fs):
                    if not isinstance(f, SimplexRef) or not self.contains(f) or f.dim != m - 1:
                        raise ValidationError(f"face d{i} of {g!r} is not an ({m - 1})-simplex: {f!r}")
        for m in range(2, self.truncation + 1):
            for g in self.generators[m]:
                x = self.ident(g)
                for j in range(m + 1):
                    for i in range(j):
                        a = self.face(i, self.face(j, x))
                        b = self.face(j - 1, self.face(i, x))
                        if a != b:
                            raise ValidationError(
                                f"d{i} d{j} {g} = {a} but d{j - 1} d{i} {g} = {b}")
        return True

    def identity_violations(self, upto: int | None = None, limit: int = 20) -> list[str]:
        """Exhaustively check every relation among faces/degeneracies up to ``upto``."""
        N = self.truncation if upto is None else min(upto, self.truncation)
        bad: list[str] = []

        def note(msg):
            if len(bad) < limit:
                bad.append(msg)

        d, s = self.face, self.degeneracy
        for n in range(N + 1):
            for x in self.simplices(n):
                if n >= 2:
                    for j in range(n + 1):
                        for i in range(j):
                            if d(i, d(j, x)) != d(j - 1, d(i, x)):
                                note(f"d{i}d{j} != d{j - 1}d{i} on {x}")
                if n + 1 <= N:
                    for j in range(n + 1):
                        y = s(j, x)
                        if d(j, y) != x or d(j + 1, y) != x:
                            note(f"d{j}s{j} or d{j + 1}s{j} != 1 on {x}")
                        for i in range(n + 2):
                            if i < j and d(i, y) != s(j - 1, d(i, x)):
                                note(f"d{i}s{j} != s{j - 1}d{i} on {x}")
                            if i > j + 1 and d(i, y) != s(j, d(i - 1, x)):
                                note(f"d{i}s{j} != s{j}d{i - 1} on {x}")
                if n + 2 <= N:
                    for j in range(n + 1):
                        for i in range(j + 1):
                            if s(i, s(j, x)) != s(j + 1, s(i, x)):
                                note(f"s{i}s{j} != s{j + 1}s{i} on {x}")
        return bad

    # derived presentations
    def restrict(self, gens: Iterable[str], truncation: int | None = None, name: str = "") -> "SimplicialSet":
        keep = set(gens)
        N = self.truncation if truncation is None else truncation
        levels = [[g for g in self.generators[m] if g in keep] for m in range(min(N, self.truncation) + 1)]
        sub = SimplicialSet(levels, {g: self.faces[g] for lv in levels for g in lv}, N,
                            name or self.name, validate=False)
        for lv in levels:
            for g in lv:
                for f in self.faces[g]:
                    if f.gen not in keep:
                        raise ValidationError(f"face {f} of {g!r} lies outside the requested subcomplex")
        sub.explicit = {k: v for k, v in self.explicit.items() if k.gen in keep and k.dim <= N}
        sub.ref_of = {v: k for k, v in sub.explicit.items()}
        return sub

    def truncate(self, N: int) -> "SimplicialSet":
        if N > self.truncation:
            raise TruncationError(f"cannot raise truncation {self.truncation} to {N}")
        return self.restrict(self.gen_dim, N)

    def renamed(self, mapping: dict, reorder: Callable | None = None) -> "SimplicialSet":
        """Copy with generators renamed; ``reorder`` may permute each level's list."""
        def rn(s):
            return SimplexRef(mapping.get(s.gen, s.gen), s.sigma)
        levels = [[mapping.get(g, g) for g in lv] for lv in self.generators]
        if reorder is not None:
            levels = [list(reorder(lv)) for lv in levels]
        faces = {mapping.get(g, g): tuple(rn(f) for f in fs) for g, fs in self.faces.items()}
        out = SimplicialSet(levels, faces, self.truncation, self.name)
        out.explicit = {rn(k): v for k, v in self.explicit.items()}
        out.ref_of = {v: k for k, v in out.explicit.items()}
        return out

    # serialization
    def to_json(self) -> dict:
        return {
            "truncation": self.truncation,
            "generators": [list(lv) for lv in self.generators],
            "faces": {g: [str(f) for f in self.faces[g]] for lv in self.generators[1:] for g in lv},
        }

    @classmethod
    def from_json(cls, data: dict, name: str = "") -> "SimplicialSet":
        if "builtin" in data:
            return builtin(data)
        try:
            N = int(data["truncation"])
            raw = data["generators"]
            if isinstance(raw, dict):
                top = max((int(k) for k in raw), default=0)
                levels = [list(raw.get(str(m), [])) for m in range(top + 1)]
            else:
                levels = [list(lv) for lv in raw]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed presentation: {exc}") from exc
        dims = {g: m for m, lv in enumerate(levels) for g in lv}
        faces = {}
        for g, refs in data.get("faces", {}).items():
            if g not in dims:
                raise ValidationError(f"faces given for unknown generator {g!r}")
            parsed = []
            for text in refs:
                fg, word = parse_word(text)
                if fg not in dims:
                    raise ValidationError(f"face {text!r} of {g!r} names unknown generator {fg!r}")
                parsed.append(make_ref(fg, dims[fg], word))
            faces[g] = parsed
        return cls(levels, faces, N, name)


# -- maps ---------------------------------------------------------------------

class SimplicialMap:
    """Map of presentations, determined by its values on generators."""

    def __init__(self, source: SimplicialSet, target: SimplicialSet, assignment: dict, validate: bool = True):
        self.source = source
        self.target = target
        self.assignment = dict(assignment)
        self._cache: dict = {}
        if validate:
            self.validate()

    def __call__(self, s: SimplexRef) -> SimplexRef:
        hit = self._cache.get(s)
        if hit is None:
            hit = self.target.apply(s.sigma, self.assignment[s.gen])
            self._cache[s] = hit
        return hit

    def __eq__(self, other):
        return (isinstance(other, SimplicialMap) and self.source is other.source
                and self.target is other.target and self.assignment == other.assignment)

    def __hash__(self):
        return hash((id(self.source), id(self.target), tuple(sorted(self.assignment.items()))))

    def __repr__(self):
        return f"SimplicialMap({self.source.name or '?'} -> {self.target.name or '?'})"

    def validate(self):
        if self.target.truncation < self.source.truncation:
            raise ValidationError("target truncation is below source truncation")
        for m, level in enumerate(self.source.generators):
            for g in level:
                if g not in self.assignment:
                    raise ValidationError(f"generator {g!r} is unassigned")
                v = self.assignment[g]
                if not self.target.contains(v) or v.dim != m:
                    raise ValidationError(f"{g!r} must go to an {m}-simplex, got {v!r}")
                for i, f in enumerate(self.source.faces[g]):
                    if self.target.face(i, v) != self(f):
                        raise ValidationError(
                            f"d{i} does not commute at {g!r}: d{i} f({g}) = {self.target.face(i, v)}, "
                            f"f(d{i} {g}) = {self(f)}")
        return True

    def compose(self, first: "SimplicialMap") -> "SimplicialMap":
        """``self o first``."""
        if first.target is not self.source:
            raise ValidationError("maps are not composable")
        return SimplicialMap(first.source, self.target,
                             {g: self(v) for g, v in first.assignment.items()}, validate=False)

    def is_bijective(self, upto: int | None = None) -> bool:
        N = self.source.truncation if upto is None else upto
        for n in range(N + 1):
            xs = self.source.simplices(n)
            if len(xs) != len(self.target.simplices(n)):
                return False
            if len({self(x) for x in xs}) != len(xs):
                return False
        return True

    def is_injective(self, upto: int | None = None) -> bool:
        N = self.source.truncation if upto is None else upto
        return all(len({self(x) for x in self.source.simplices(n)}) == len(self.source.simplices(n))
                   for n in range(N + 1))

    @classmethod
    def identity(cls, X: SimplicialSet) -> "SimplicialMap":
        return cls(X, X, {g: X.ident(g) for g in X.gen_dim}, validate=False)

    @classmethod
    def from_function(cls, source, target, fn, validate=True) -> "SimplicialMap":
        return cls(source, target, {g: fn(source.ident(g)) for g in source.gen_dim}, validate)

    @classmethod
    def to_point(cls, source: SimplicialSet, point: SimplicialSet | None = None) -> "SimplicialMap":
        point = point or point_set(source.truncation)
        v = point.ident(point.generators[0][0])
        return cls(source, point, {g: point.apply((0,) * (m + 1), v)
                                   for m, lv in enumerate(source.generators) for g in lv}, validate=False)

    def to_json(self):
        return {g: str(v) for g, v in self.assignment.items()}

    @classmethod
    def from_json(cls, source, target, data):
        return cls(source, target, {g: target.ref(t) for g, t in data.items()})


# -- construction from explicit operators ------------------------------------

def from_operators(levels: Sequence[Sequence[Hashable]], face: Callable, degeneracy: Callable,
                   name_of: Callable[[Any], str] = str, name: str = "") -> SimplicialSet:
    """Present a finite simplicial set given explicitly by its simplices and operators.

    ``levels[n]`` lists every n-simplex (degenerate ones included);
    ``face(i, x)`` and ``degeneracy(i, x)`` act on explicit simplices.
    Non-degenerate simplices become generators in the order they appear.
    """
    N = len(levels) - 1
    ref_of: dict = {}
    gens: list[list[str]] = []
    faces: dict = {}
    for n in range(N + 1):
        level = list(levels[n])
        members = set(level)
        if len(members) != len(level):
            raise ValidationError(f"duplicate simplices in level {n}")
        if n > 0:
            for y in levels[n - 1]:
                ry = ref_of[y]
                for i in range(n):
                    x = degeneracy(i, y)
                    if x not in members:
                        raise ValidationError(f"s{i}({y!r}) = {x!r} is missing from level {n}")
                    r = SimplexRef(ry.gen, ry.sigma[: i + 1] + ry.sigma[i:])
                    prev = ref_of.setdefault(x, r)
                    if prev != r:
                        raise ValidationError(f"{x!r} has two normal forms {prev} and {r}")
        here = []
        for x in level:
            if x in ref_of:
                continue
            g = "_".join(str(name_of(x)).split())  # names must survive the "s1 s0 x" text form
            if g in faces:
                raise ValidationError(f"generator name {g!r} is not unique")
            faces[g] = tuple(ref_of[face(i, x)] for i in range(n + 1)) if n > 0 else ()
            ref_of[x] = identity_ref(g, n)
            here.append(g)
        gens.append(here)
    X = SimplicialSet(gens, faces, N, name)
    X.ref_of = ref_of
    X.explicit = {r: x for x, r in ref_of.items()}
    for n in range(N + 1):
        if len(X.simplices(n)) != len(levels[n]):
            raise ValidationError(f"level {n}: {len(levels[n])} explicit simplices but the presentation "
                                  f"has {len(X.simplices(n))}; operators are not simplicial")
    return X


def _monotone(n: int, k: int):
    """All order-preserving maps [k] -> [n] as tuples, lexicographic."""
    out = []

    def rec(prefix, lo):
        if len(prefix) == k + 1:
            out.append(tuple(prefix))
            return
        for v in range(lo, n + 1):
            rec(prefix + [v], v)

    rec([], 0)
    return out


def _vertex_set(n, N, keep=lambda t: True, name=""):
    levels = [[t for t in _monotone(n, k) if keep(t)] for k in range(N + 1)]
    return from_operators(levels,
                          lambda i, t: t[:i] + t[i + 1:],
                          lambda i, t: t[: i + 1] + t[i:],
                          lambda t: "".join(map(str, t)) if n < 10 else "-".join(map(str, t)),
                          name)


def standard_simplex(n: int, truncation: int | None = None) -> SimplicialSet:
    """Delta[n]; simplices are the order-preserving vertex tuples."""
    N = n if truncation is None else truncation
    if N < n:
        raise TruncationError(f"truncation {N} is below {n}")
    return _vertex_set(n, N, name=f"Delta[{n}]")


def boundary(n: int, truncation: int | None = None) -> SimplicialSet:
    N = n if truncation is None else truncation
    return _vertex_set(n, N, lambda t: len(set(t)) < n + 1, name=f"dDelta[{n}]")


def horn(n: int, k: int, truncation: int | None = None) -> SimplicialSet:
    if n < 1 or not 0 <= k <= n:
        raise ValidationError(f"no horn Lambda^{k}[{n}]")
    N = n if truncation is None else truncation
    full = set(range(n + 1))
    return _vertex_set(n, N, lambda t: not (full - {k}) <= set(t), name=f"Lambda^{k}[{n}]")


def point_set(truncation: int = 0) -> SimplicialSet:
    return standard_simplex(0, truncation)


def discrete(points: Sequence[str], truncation: int = 0) -> SimplicialSet:
    return SimplicialSet([list(points)], {}, truncation, name="discrete")


def nerve(group, truncation: int) -> SimplicialSet:
    """Nerve BG: n-simplices are tuples (g_1, ..., g_n)."""
    els = group.elements
    levels = [list(cartesian(els, repeat=n)) for n in range(truncation + 1)]

    def face(i, x):
        n = len(x)
        if i == 0:
            return x[1:]
        if i == n:
            return x[:-1]
        return x[: i - 1] + (group.mul(x[i - 1], x[i]),) + x[i + 1:]

    def degen(i, x):
        return x[:i] + (group.unit,) + x[i:]

    return from_operators(levels, face, degen,
                          lambda x: "(" + ",".join(str(g).replace(" ", "") for g in x) + ")",
                          f"B{group.name}")


def codiscrete(elements: Sequence, truncation: int, name: str = "") -> SimplicialSet:
    """Codiscrete nerve: n-simplices are arbitrary (x_0, ..., x_n); E(G) when fed a group."""
    levels = [list(cartesian(elements, repeat=n + 1)) for n in range(truncation + 1)]
    return from_operators(levels,
                          lambda i, x: x[:i] + x[i + 1:],
                          lambda i, x: x[: i + 1] + x[i:],
                          lambda x: "<" + ",".join(map(str, x)) + ">",
                          name or "E")


def circle(truncation: int = 1) -> SimplicialSet:
    """One vertex ``v`` and one edge ``e`` with both ends at ``v``."""
    v = identity_ref("v", 0)
    return SimplicialSet([["v"], ["e"]], {"e": (v, v)}, truncation, name="S1")


def product(X: SimplicialSet, K: SimplicialSet, name: str = "") -> SimplicialSet:
    """Levelwise product; explicit simplices are pairs of normal forms."""
    if X.truncation != K.truncation:
        raise ValidationError("product needs equal truncations")
    N = X.truncation
    levels = [[(a, b) for a in X.simplices(n) for b in K.simplices(n)] for n in range(N + 1)]
    return from_operators(levels,
                          lambda i, p: (X.face(i, p[0]), K.face(i, p[1])),
                          lambda i, p: (X.degeneracy(i, p[0]), K.degeneracy(i, p[1])),
                          lambda p: f"({p[0]}|{p[1]})",
                          name or f"{X.name}x{K.name}")


def components(X: SimplicialSet) -> list[set]:
    """Connected components as sets of vertices."""
    parent = {v: v for v in X.simplices(0)}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    if X.truncation >= 1:
        for e in X.simplices(1):
            a, b = find(X.face(0, e)), find(X.face(1, e))
            if a != b:
                parent[a] = b
    groups: dict = {}
    for v in parent:
        groups.setdefault(find(v), set()).add(v)
    return sorted(groups.values(), key=lambda s: min(X.key(v) for v in s))


# -- operations from the simplicial-core contract -------------------------------

def normalize(X: SimplicialSet, ops, s: SimplexRef) -> SimplexRef:
    """Normal form of an operator word (composition order, e.g. ``"d1 s0"``) applied to ``s``."""
    return X.apply_ops(parse_ops(ops), s)


def enumerate_simplices(X: SimplicialSet, n: int) -> set:
    return set(X.simplices(n))


class HornProblem:
    """A map Lambda^k[n] -> X written as (x_0, ..., x_{k-1}, -, x_{k+1}, ..., x_n)."""

    def __init__(self, space: SimplicialSet, n: int, k: int, faces: Sequence[SimplexRef | None]):
        if n < 1 or not 0 <= k <= n:
            raise ValidationError(f"no horn Lambda^{k}[{n}]")
        faces = tuple(faces)
        if len(faces) != n + 1:
            raise ValidationError(f"a horn in dimension {n} needs {n + 1} slots")
        if faces[k] is not None:
            raise ValidationError(f"slot {k} of the horn must be empty")
        for i, x in enumerate(faces):
            if i != k and (x is None or not space.contains(x) or x.dim != n - 1):
                raise ValidationError(f"horn face {i} must be an ({n - 1})-simplex of the space")
        if n >= 2:
            for j in range(n + 1):
                for i in range(j):
                    if k in (i, j):
                        continue
                    if space.face(i, faces[j]) != space.face(j - 1, faces[i]):
                        raise ValidationError(f"incompatible horn faces: d{i} x{j} != d{j - 1} x{i}")
        self.space, self.n, self.k, self.faces = space, n, k, faces

    def key(self):
        return tuple(x for i, x in enumerate(self.faces) if i != self.k)

    def __repr__(self):
        return "(" + ", ".join("-" if x is None else str(x) for x in self.faces) + ")"


def fill_horn(X: SimplicialSet, problem: HornProblem, over=None) -> SimplexRef | None:
    """Canonically least filler; with ``over=(p, b)`` the filler must project to ``b``."""
    n, k = problem.n, problem.k
    if n > X.truncation:
        raise TruncationError(f"horn dimension {n} > truncation {X.truncation}")
    if over is None:
        hits = X.face_index(n, k).get(problem.key(), [])
        return hits[0] if hits else None
    p, b = over
    hits = X.face_index(n, k, label=p, tag=p).get((problem.key(), b), [])
    return hits[0] if hits else None


def horns(X: SimplicialSet, n: int, k: int):
    """Every compatible horn Lambda^k[n] -> X, in canonical order."""
    lower = X.simplices(n - 1)
    slots = [i for i in range(n + 1) if i != k]
    chosen: dict[int, SimplexRef] = {}

    def rec(pos):
        if pos == len(slots):
            yield tuple(chosen.get(i) for i in range(n + 1))
            return
        j = slots[pos]
        for x in lower:
            ok = True
            for i in slots[:pos]:
                if n >= 2 and X.face(i, x) != X.face(j - 1, chosen[i]):
                    ok = False
                    break
            if ok:
                chosen[j] = x
                yield from rec(pos + 1)
                del chosen[j]

    yield from rec(0)


class KanReport(NamedTuple):
    dim: int
    ok: bool
    checked: int
    failures: list  # (n, k, horn faces, base simplex)

    def summary(self):
        verdict = "passes" if self.ok else f"fails ({len(self.failures)} horn(s))"
        return f"Kan condition up to dimension {self.dim}: {verdict}; {self.checked} lifting problems checked"


def is_kan_fibration_upto(p: SimplicialMap, d: int, budget=None, max_failures: int = 50) -> KanReport:
    """Exhaustive horn-lifting check for ``p: X -> B`` in dimensions 1..d."""
    X, B = p.source, p.target
    if d > X.truncation or d > B.truncation:
        raise TruncationError(f"check dimension {d} exceeds truncation")
    p.validate()
    budget = Budget.of(budget, "kan check")
    failures = []
    checked = 0
    total_fail = 0
    for n in range(1, d + 1):
        for k in range(n + 1):
            base_idx = B.face_index(n, k)
            lift_idx = X.face_index(n, k, label=p, tag=p)
            for faces in horns(X, n, k):
                budget.tick()
                key = tuple(x for i, x in enumerate(faces) if i != k)
                pkey = tuple(p(x) for x in key)
                for b in base_idx.get(pkey, ()):
                    checked += 1
                    if (key, b) not in lift_idx:
                        total_fail += 1
                        if len(failures) < max_failures:
                            failures.append((n, k, faces, b))
    return KanReport(d, total_fail == 0, checked, failures)


def is_kan_upto(X: SimplicialSet, d: int, budget=None) -> KanReport:
    return is_kan_fibration_upto(SimplicialMap.to_point(X), d, budget)


# -- builtin presentations for files ----------------------------------------

def builtin(data: dict) -> SimplicialSet:
    from . import groups

    kind = data["builtin"]
    N = data.get("truncation")
    if kind == "standard_simplex":
        return standard_simplex(int(data["n"]), N)
    if kind == "boundary":
        return boundary(int(data["n"]), N)
    if kind == "horn":
        return horn(int(data["n"]), int(data["k"]), N)
    if kind == "point":
        return point_set(N or 0)
    if kind == "discrete":
        return discrete(data["points"], N or 0)
    if kind == "circle":
        return circle(N if N is not None else 1)
    if kind == "nerve_cyclic":
        return nerve(groups.cyclic(int(data["order"])), N)
    if kind == "codiscrete_cyclic":
        g = groups.cyclic(int(data["order"]))
        return codiscrete(g.elements, N, f"E{g.name}")
    raise ValidationError(f"unknown builtin presentation {kind!r}")


def load_presentation(path) -> SimplicialSet:
    with open(path) as fh:
        return SimplicialSet.from_json(json.load(fh))
