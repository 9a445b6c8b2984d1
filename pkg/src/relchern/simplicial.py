"""Finite (truncated) simplicial sets given by face and degeneracy tables."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property


class SimplicialError(ValueError):
    pass


def compose(f: tuple, g: tuple) -> tuple:
    """(f∘g)(i) = f(g(i)) for maps given as tuples."""
    return tuple(f[i] for i in g)


@dataclass
class FiniteSimplicialSet:
    """Simplices up to dimension ``N`` with face tables ``faces[p][σ] = (∂_0σ, …, ∂_pσ)``
    and degeneracy tables ``degens[p][σ] = (s_0σ, …, s_pσ)`` for ``p < N``."""

    name: str
    N: int
    simplices: list
    faces: list
    degens: list
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.validate()

    # ------------------------------------------------------------------
    def validate(self):
        N = self.N
        if len(self.simplices) != N + 1:
            raise SimplicialError("need simplex lists for dimensions 0..N")
        sets = [set(s) for s in self.simplices]
        for p, s in enumerate(self.simplices):
            if len(sets[p]) != len(s):
                raise SimplicialError(f"duplicate simplex ids in dimension {p}")
        for p in range(1, N + 1):
            for x in self.simplices[p]:
                fs = self.faces[p].get(x)
                if fs is None or len(fs) != p + 1:
                    raise SimplicialError(f"face table incomplete for {x!r}")
                if any(f not in sets[p - 1] for f in fs):
                    raise SimplicialError(f"face of {x!r} not a {p - 1}-simplex")
        for p in range(N):
            for x in self.simplices[p]:
                ds = self.degens[p].get(x)
                if ds is None or len(ds) != p + 1:
                    raise SimplicialError(f"degeneracy table incomplete for {x!r}")
                if any(s not in sets[p + 1] for s in ds):
                    raise SimplicialError(f"degeneracy of {x!r} not a {p + 1}-simplex")
        f = self.face
        s = self.degen
        for p in range(2, N + 1):
            for x in self.simplices[p]:
                for j in range(p + 1):
                    for i in range(j):
                        if f(f(x, p, j), p - 1, i) != f(f(x, p, i), p - 1, j - 1):
                            raise SimplicialError(f"face identity fails at {x!r}, i={i}, j={j}")
        for p in range(N - 1):
            for x in self.simplices[p]:
                for j in range(p + 1):
                    for i in range(j + 1):
                        if s(s(x, p, j), p + 1, i) != s(s(x, p, i), p + 1, j + 1):
                            raise SimplicialError(f"degeneracy identity fails at {x!r}")
        for p in range(N):
            for x in self.simplices[p]:
                for j in range(p + 1):
                    y = s(x, p, j)
                    for i in range(p + 2):
                        lhs = f(y, p + 1, i)
                        if i < j:
                            rhs = s(f(x, p, i), p - 1, j - 1) if p >= 1 else None
                        elif i in (j, j + 1):
                            rhs = x
                        else:
                            rhs = s(f(x, p, i - 1), p - 1, j) if p >= 1 else None
                        if rhs is not None and lhs != rhs:
                            raise SimplicialError(f"mixed identity fails at {x!r}, i={i}, j={j}")

    # ------------------------------------------------------------------
    def face(self, x, p: int, i: int):
        return self.faces[p][x][i]

    def degen(self, x, p: int, i: int):
        return self.degens[p][x][i]

    def dim_of(self, x) -> int:
        for p, s in enumerate(self.simplices):
            if x in s:
                return p
        raise SimplicialError(f"unknown simplex {x!r}")

    @cached_property
    def _degen_source(self) -> dict:
        out = {}
        for p in range(self.N):
            for x in self.simplices[p]:
                for j, y in enumerate(self.degens[p][x]):
                    out.setdefault((p + 1, y), (j, x))
        return out

    def is_degenerate(self, x, p: int) -> bool:
        return (p, x) in self._degen_source

    @cached_property
    def nondegenerate(self) -> list:
        return [[x for x in self.simplices[p] if not self.is_degenerate(x, p)] for p in range(self.N + 1)]

    def decompose(self, x, p: int):
        """(τ, k, ψ) with τ nondegenerate in dimension k and x = ψ^*τ, ψ: [p]→[k] surjective."""
        key = ("dec", p, x)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        src = self._degen_source.get((p, x))
        if src is None:
            res = (x, p, tuple(range(p + 1)))
        else:
            j, y = src
            tau, k, psi = self.decompose(y, p - 1)
            sj = tuple(a if a <= j else a - 1 for a in range(p + 1))
            res = (tau, k, compose(psi, sj))
        self._cache[key] = res
        return res

    def act(self, phi, x, p: int):
        """φ^*x for an increasing map φ: [q]→[p]."""
        phi = tuple(phi)
        key = ("act", phi, p, x)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if any(b < a for a, b in zip(phi, phi[1:])) or phi[-1] > p or phi[0] < 0:
            raise SimplicialError(f"{phi} is not an increasing map into [{p}]")
        image = sorted(set(phi))
        cur, dim = x, p
        for v in sorted(set(range(p + 1)) - set(image), reverse=True):
            cur = self.face(cur, dim, v)
            dim -= 1
        # now cur is the face spanned by ``image``; pull back along the surjection
        target = [image.index(v) for v in phi]
        L = list(range(dim + 1))
        while L != target:
            i = next(k for k in range(len(target)) if k >= len(L) or L[k] != target[k])
            cur = self.degen(cur, dim, i - 1)
            dim += 1
            L = L[:i] + [L[i - 1]] + L[i:]
        self._cache[key] = cur
        return cur

    def vertices_of(self, x, p: int) -> tuple:
        return tuple(self.act((i,), x, p) for i in range(p + 1))

    def edge(self, x, p: int, i: int, j: int):
        return self.act((i, j), x, p)

    def count(self) -> list:
        return [len(s) for s in self.simplices]

    # ------------------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "name": self.name,
            "max_dim": self.N,
            "simplices": {str(p): list(s) for p, s in enumerate(self.simplices)},
            "faces": {str(p): {x: list(self.faces[p][x]) for x in self.simplices[p]} for p in range(1, self.N + 1)},
            "degeneracies": {str(p): {x: list(self.degens[p][x]) for x in self.simplices[p]} for p in range(self.N)},
        }

    @staticmethod
    def from_json(data) -> "FiniteSimplicialSet":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            N = int(data["max_dim"])
            simplices = [list(data["simplices"][str(p)]) for p in range(N + 1)]
            faces = [{}] + [{k: tuple(v) for k, v in data["faces"][str(p)].items()} for p in range(1, N + 1)]
            degens = [{k: tuple(v) for k, v in data["degeneracies"][str(p)].items()} for p in range(N)] + [{}]
        except (KeyError, TypeError, ValueError) as exc:
            raise SimplicialError(f"malformed simplicial set description: {exc}") from None
        return FiniteSimplicialSet(data.get("name", "X"), N, simplices, faces, degens)


# --------------------------------------------------------------------------
# constructors


def _label(seq) -> str:
    return "[" + ",".join(str(a) for a in seq) + "]"


def _from_sequences(name: str, N: int, seqs_by_dim, face_fn, degen_fn) -> FiniteSimplicialSet:
    simplices = [[_label(s) for s in seqs] for seqs in seqs_by_dim]
    faces: list = [{}]
    for p in range(1, N + 1):
        faces.append({_label(s): tuple(_label(face_fn(s, i)) for i in range(p + 1)) for s in seqs_by_dim[p]})
    degens: list = []
    for p in range(N):
        degens.append({_label(s): tuple(_label(degen_fn(s, i)) for i in range(p + 1)) for s in seqs_by_dim[p]})
    degens.append({})
    return FiniteSimplicialSet(name, N, simplices, faces, degens)


def standard_simplex(m: int, N: int) -> FiniteSimplicialSet:
    """Δ[m]: p-simplices are weakly increasing sequences in [m] of length p+1."""
    seqs = [list(itertools.combinations_with_replacement(range(m + 1), p + 1)) for p in range(N + 1)]
    return _from_sequences(f"Delta[{m}]", N, seqs,
                           lambda s, i: s[:i] + s[i + 1:],
                           lambda s, i: s[:i + 1] + s[i:])


def boundary_simplex(m: int, N: int) -> FiniteSimplicialSet:
    """∂Δ[m]: simplices of Δ[m] missing at least one vertex."""
    full = set(range(m + 1))
    seqs = [[s for s in itertools.combinations_with_replacement(range(m + 1), p + 1) if set(s) != full]
            for p in range(N + 1)]
    return _from_sequences(f"dDelta[{m}]", N, seqs,
                           lambda s, i: s[:i] + s[i + 1:],
                           lambda s, i: s[:i + 1] + s[i:])


def nerve(elements, mul, unit, N: int, name: str = "BG") -> FiniteSimplicialSet:
    """Nerve of a finite group: p-simplices are p-tuples (g1, …, gp)."""
    elements = list(elements)
    seqs = [list(itertools.product(elements, repeat=p)) for p in range(N + 1)]

    def face(s, i):
        p = len(s)
        if i == 0:
            return s[1:]
        if i == p:
            return s[:-1]
        return s[:i - 1] + (mul(s[i - 1], s[i]),) + s[i + 1:]

    def degen(s, i):
        return s[:i] + (unit,) + s[i:]

    return _from_sequences(name, N, seqs, face, degen)


def nerve_z2(N: int) -> FiniteSimplicialSet:
    table = {("e", "e"): "e", ("e", "a"): "a", ("a", "e"): "a", ("a", "a"): "e"}
    return nerve(["e", "a"], lambda g, h: table[(g, h)], "e", N, name="BZ/2")


# --------------------------------------------------------------------------


@dataclass
class SimplicialMap:
    source: FiniteSimplicialSet
    target: FiniteSimplicialSet
    images: list  # images[p][σ] = f(σ)

    def __post_init__(self):
        S, T = self.source, self.target
        if S.N > T.N:
            raise SimplicialError("target truncated below source")
        for p in range(S.N + 1):
            for x in S.simplices[p]:
                if x not in self.images[p]:
                    raise SimplicialError(f"map undefined on {x!r}")
                y = self.images[p][x]
                if p >= 1:
                    for i in range(p + 1):
                        if self.images[p - 1][S.face(x, p, i)] != T.face(y, p, i):
                            raise SimplicialError("map does not commute with faces")
                if p < S.N:
                    for i in range(p + 1):
                        if self.images[p + 1][S.degen(x, p, i)] != T.degen(y, p, i):
                            raise SimplicialError("map does not commute with degeneracies")

    def __call__(self, x, p: int):
        return self.images[p][x]


def vertex_map(source: FiniteSimplicialSet, target: FiniteSimplicialSet, f) -> SimplicialMap:
    """Map between Δ-type sets (labels are vertex sequences) induced by a monotone vertex map."""
    images = []
    for p in range(source.N + 1):
        row = {}
        for x in source.simplices[p]:
            verts = [int(a) for a in x.strip("[]").split(",")]
            row[x] = _label([f(v) for v in verts])
        images.append(row)
    return SimplicialMap(source, target, images)
