"""Exact coefficient arithmetic.

Rationals are gmpy2 ``mpq`` values.  Polynomials live over a :class:`Ring`,
an ordered universe of tagged variables.  Simplex coordinates are ``x1..xp``;
``x0`` is never stored and is expanded as ``1 - x1 - ... - xp`` whenever it is
requested.  Nilpotent variables carry exponent cap 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

from gmpy2 import mpq

Q = mpq
ZERO = mpq(0)
ONE = mpq(1)

KINDS = ("x", "t", "y", "eps")


class UniverseError(ValueError):
    """Operands live over different variable universes."""


class CertificateError(ArithmeticError):
    """An invertibility or smallness certificate could not be established."""


def to_q(c) -> mpq:
    if isinstance(c, str):
        return mpq(c.replace(" ", ""))
    return mpq(c)


# --------------------------------------------------------------------------
# raw polynomial dicts: {exponent tuple: mpq}


def padd_into(out: dict, b: dict, scale=ONE) -> dict:
    for e, c in b.items():
        v = out.get(e)
        v = c * scale if v is None else v + c * scale
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return out


def pclean(d: dict) -> dict:
    """Drop zero coefficients left over by in-place accumulation."""
    return {e: c for e, c in d.items() if c}


_FIELD = 20
_MASK = (1 << _FIELD) - 1


def _pack(e: tuple) -> int:
    k = 0
    for i, v in enumerate(e):
        k |= v << (_FIELD * i)
    return k


_SHIFTS = [tuple(_FIELD * i for i in range(n)) for n in range(64)]
_AND = _MASK.__and__


def _unpack(k: int, n: int) -> tuple:
    return tuple(map(_AND, map(k.__rshift__, _SHIFTS[n])))


def pmul(a: dict, b: dict, nil: tuple = ()) -> dict:
    """Product of raw polynomials; exponents of ``nil`` variables are capped at 1."""
    if not a or not b:
        return {}
    n = len(next(iter(a)))
    # exponents are packed into integers so the inner loop adds one int per pair
    pa = [(_pack(e), c) for e, c in a.items()]
    pb = [(_pack(e), c) for e, c in b.items()]
    out: dict = {}
    get = out.get
    if nil:
        twos = [2 << (_FIELD * k) for k in nil]
        masks = [_MASK << (_FIELD * k) for k in nil]
        checks = list(zip(masks, twos))
        for ka, ca in pa:
            for kb, cb in pb:
                k = ka + kb
                if any((k & m) >= t for m, t in checks):
                    continue
                v = get(k)
                out[k] = ca * cb if v is None else v + ca * cb
    else:
        for ka, ca in pa:
            for kb, cb in pb:
                k = ka + kb
                v = get(k)
                out[k] = ca * cb if v is None else v + ca * cb
    return {_unpack(k, n): c for k, c in out.items() if c}


def pscale(a: dict, c) -> dict:
    if not c:
        return {}
    return {e: v * c for e, v in a.items()}


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Ring:
    """Ordered variable universe.  Order: simplex coords, intervals, params, nilpotents."""

    names: tuple
    kinds: tuple

    def __post_init__(self):
        if len(self.names) != len(self.kinds):
            raise ValueError("names/kinds length mismatch")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names in {self.names}")
        for k in self.kinds:
            if k not in KINDS:
                raise ValueError(f"unknown variable kind {k!r}")
        xs = [n for n, k in zip(self.names, self.kinds) if k == "x"]
        if xs != [f"x{i}" for i in range(1, len(xs) + 1)]:
            raise ValueError("simplex coordinates must be x1..xp in order")
        order = [KINDS.index(k) for k in self.kinds]
        if order != sorted(order):
            raise ValueError("variables must be ordered x, t, y, eps")
        for n in self.names:
            if n.startswith("d") or not n.isidentifier():
                raise ValueError(f"bad variable name {n!r}")

    @staticmethod
    def make(p: int = 0, intervals=(), params=(), nilpotents=()) -> "Ring":
        return _make_ring(p, tuple(intervals), tuple(params), tuple(nilpotents))

    @property
    def nvars(self) -> int:
        return len(self.names)

    @property
    def simplex_dim(self) -> int:
        return self.kinds.count("x")

    @property
    def nil(self) -> tuple:
        return tuple(i for i, k in enumerate(self.kinds) if k == "eps")

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UniverseError(f"variable {name!r} not in {self.names}") from None

    def names_of(self, kind: str) -> tuple:
        return tuple(n for n, k in zip(self.names, self.kinds) if k == kind)

    def zero_exp(self) -> tuple:
        return (0,) * self.nvars

    # constructors
    def const(self, c) -> "Poly":
        c = to_q(c)
        return Poly(self, {self.zero_exp(): c} if c else {})

    def var(self, name: str) -> "Poly":
        if name == "x0":
            out = {self.zero_exp(): ONE}
            for i in range(self.simplex_dim):
                e = [0] * self.nvars
                e[i] = 1
                out[tuple(e)] = -ONE
            return Poly(self, out)
        i = self.index(name)
        e = [0] * self.nvars
        e[i] = 1
        return Poly(self, {tuple(e): ONE})

    def gens(self) -> tuple:
        return tuple(self.var(n) for n in self.names)


@lru_cache(maxsize=None)
def _make_ring(p, intervals, params, nilpotents) -> Ring:
    names = tuple(f"x{i}" for i in range(1, p + 1)) + intervals + params + nilpotents
    kinds = ("x",) * p + ("t",) * len(intervals) + ("y",) * len(params) + ("eps",) * len(nilpotents)
    return Ring(names, kinds)


def grlex_key(e: tuple):
    # larger total degree first, then lexicographically larger first
    return (-sum(e), tuple(-i for i in e))


def monomial_str(names, e) -> str:
    parts = []
    for n, k in zip(names, e):
        if k == 1:
            parts.append(n)
        elif k > 1:
            parts.append(f"{n}**{k}")
    return "*".join(parts)


def term_str(c, mono: str, first: bool) -> str:
    neg = c < 0
    a = -c if neg else c
    if mono:
        body = mono if a == 1 else f"{a}*{mono}"
    else:
        body = str(a)
    if first:
        return f"-{body}" if neg else body
    return f" - {body}" if neg else f" + {body}"


class Poly:
    """Polynomial with exact rational coefficients over a :class:`Ring`."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms: dict | None = None, check: bool = True):
        self.ring = ring
        terms = {} if terms is None else terms
        if check:
            nil = ring.nil
            clean = {}
            for e, c in terms.items():
                if len(e) != ring.nvars:
                    raise UniverseError("exponent length does not match ring")
                if any(e[i] > 1 for i in nil):
                    continue
                c = to_q(c)
                if c:
                    clean[tuple(e)] = c
            terms = clean
        self.terms = terms

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.ring != self.ring:
                raise UniverseError(f"ring mismatch: {self.ring.names} vs {other.ring.names}")
            return other
        return self.ring.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        return Poly(self.ring, padd_into(dict(self.terms), other.terms), check=False)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.ring, {e: -c for e, c in self.terms.items()}, check=False)

    def __sub__(self, other):
        other = self._coerce(other)
        return Poly(self.ring, padd_into(dict(self.terms), other.terms, -ONE), check=False)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly(self.ring, pscale(self.terms, to_q(other)), check=False)
        other = self._coerce(other)
        return Poly(self.ring, pmul(self.terms, other.terms, self.ring.nil), check=False)

    def __rmul__(self, other):
        return self * other

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = self.ring.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.ring == other.ring and self.terms == other.terms
        try:
            return self.terms == self.ring.const(other).terms
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def constant_term(self) -> mpq:
        return self.terms.get(self.ring.zero_exp(), ZERO)

    def coefficient(self, monomial: dict) -> mpq:
        e = [0] * self.ring.nvars
        for n, k in monomial.items():
            e[self.ring.index(n)] = k
        return self.terms.get(tuple(e), ZERO)

    def derivative(self, name: str) -> "Poly":
        i = self.ring.index(name)
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                f = list(e)
                f[i] -= 1
                out[tuple(f)] = c * e[i]
        return Poly(self.ring, out, check=False)

    def substitute(self, images: dict, target: Ring | None = None) -> "Poly":
        """Ring homomorphism sending variable ``name`` to ``images[name]``.

        Variables not in ``images`` map to the same-named variable of ``target``.
        """
        target = self.ring if target is None else target
        imgs = []
        for n in self.ring.names:
            if n in images:
                v = images[n]
                imgs.append(v if isinstance(v, Poly) else target.const(v))
            else:
                imgs.append(target.var(n))
        return Poly(target, substitute_raw(self.terms, [v.terms for v in imgs], target), check=False)

    def __call__(self, **values):
        return self.substitute(values)

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for k, (e, c) in enumerate(self.sorted_terms()):
            out.append(term_str(c, monomial_str(self.ring.names, e), k == 0))
        return "".join(out)

    def __repr__(self):
        return f"Poly({str(self)!r})"


def _pmul_packed(a: dict, b: dict, checks) -> dict:
    out: dict = {}
    get = out.get
    for ka, ca in a.items():
        for kb, cb in b.items():
            k = ka + kb
            if checks and any((k & m) >= t for m, t in checks):
                continue
            out[k] = get(k, ZERO) + ca * cb
    return {k: c for k, c in out.items() if c}


def substitute_raw(terms: dict, images: list, target: Ring) -> dict:
    """Substitute raw image dicts for each variable.

    Monomial images act directly on packed exponents; the remaining variables
    are expanded Horner-style, grouping terms by their exponents.
    """
    if not terms:
        return {}
    checks = [(_MASK << (_FIELD * k), 2 << (_FIELD * k)) for k in target.nil]
    n = target.nvars
    mono, general = {}, []
    for i, img in enumerate(images):
        if len(img) <= 1:
            mono[i] = next(((_pack(e), c) for e, c in img.items()), None)
        else:
            general.append(i)
    gimg = {i: {_pack(e): c for e, c in images[i].items()} for i in general}
    groups: dict = {}
    for e, c in terms.items():
        key, coef, dead = 0, c, False
        for i, m in mono.items():
            k = e[i]
            if not k:
                continue
            if m is None:
                dead = True
                break
            key += m[0] * k
            coef = coef * m[1] ** k
        if dead or (checks and any((key & msk) >= t for msk, t in checks)):
            continue
        gk = tuple(e[i] for i in general)
        tgt = groups.setdefault(gk, {})
        tgt[key] = tgt.get(key, ZERO) + coef

    cache: dict = {}

    def power(j, k):
        r = cache.get((j, k))
        if r is None:
            r = {0: ONE} if k == 0 else _pmul_packed(power(j, k - 1), gimg[general[j]], checks)
            cache[(j, k)] = r
        return r

    def rec(items, j):
        while j < len(general) and all(not g[j] for g, _ in items):
            j += 1
        if j == len(general):
            out: dict = {}
            for _, d in items:
                for k, c in d.items():
                    out[k] = out.get(k, ZERO) + c
            return out
        buckets: dict = {}
        for g, d in items:
            buckets.setdefault(g[j], []).append((g, d))
        out = {}
        for k, group in buckets.items():
            sub = rec(group, j + 1)
            if k:
                sub = _pmul_packed(sub, power(j, k), checks)
            for kk, c in sub.items():
                out[kk] = out.get(kk, ZERO) + c
        return out

    res = rec(list(groups.items()), 0)
    return {_unpack(k, n): c for k, c in res.items() if c}


# --------------------------------------------------------------------------
# matrices over a commutative (or graded-commutative) coefficient ring


class Matrix:
    """Square matrix whose entries support ``+``, ``-`` and ``*``.

    Entries may be :class:`Poly`, differential forms, or plain rationals.
    """

    __slots__ = ("rows",)

    def __init__(self, rows):
        rows = tuple(tuple(r) for r in rows)
        r = len(rows)
        if any(len(row) != r for row in rows):
            raise ValueError("matrix must be square")
        self.rows = rows

    @property
    def size(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    @staticmethod
    def identity(r: int, one, zero) -> "Matrix":
        return Matrix([[one if i == j else zero for j in range(r)] for i in range(r)])

    def map(self, f) -> "Matrix":
        return Matrix([[f(a) for a in row] for row in self.rows])

    def __add__(self, other: "Matrix") -> "Matrix":
        return Matrix([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __sub__(self, other: "Matrix") -> "Matrix":
        return Matrix([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __neg__(self):
        return self.map(lambda a: -a)

    def __mul__(self, other):
        if not isinstance(other, Matrix):
            return self.map(lambda a: a * other)
        if other.size != self.size:
            raise ValueError("size mismatch")
        r = self.size
        cols = list(zip(*other.rows))
        out = []
        for i in range(r):
            row = []
            for j in range(r):
                acc = None
                for a, b in zip(self.rows[i], cols[j]):
                    t = a * b
                    acc = t if acc is None else acc + t
                row.append(acc)
            out.append(row)
        return Matrix(out)

    def __rmul__(self, c):
        return self.map(lambda a: c * a)

    def __eq__(self, other):
        return isinstance(other, Matrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return "Matrix(" + repr([[str(a) for a in row] for row in self.rows]) + ")"

    def is_zero(self) -> bool:
        return all(not a for row in self.rows for a in row)

    def trace(self):
        acc = self.rows[0][0]
        for i in range(1, self.size):
            acc = acc + self.rows[i][i]
        return acc

    def transpose(self) -> "Matrix":
        return Matrix(list(zip(*self.rows)))


def trace(m: Matrix):
    return m.trace()


def poly_matrix(ring: Ring, rows) -> Matrix:
    """Matrix of Poly from nested lists of Poly/str/rational entries."""
    from .serialize import parse_poly

    def conv(a):
        if isinstance(a, Poly):
            return a
        if isinstance(a, str):
            return parse_poly(a, ring)
        return ring.const(a)

    return Matrix([[conv(a) for a in row] for row in rows])


def poly_identity(ring: Ring, r: int) -> Matrix:
    return Matrix.identity(r, ring.const(1), ring.const(0))


def elementary(ring: Ring, r: int, i: int, j: int, f) -> Matrix:
    """e_ij(f) = 1 + f E_ij with 0-based indices, i != j."""
    if i == j:
        raise ValueError("elementary matrix needs i != j")
    f = f if isinstance(f, Poly) else ring.const(f)
    rows = [[ring.const(1 if a == b else 0) for b in range(r)] for a in range(r)]
    rows[i][j] = f
    return Matrix(rows)


def matrix_power_series(h: Matrix, terms: int, one, zero) -> Matrix:
    """sum_{k<terms} h^k."""
    r = h.size
    ident = Matrix.identity(r, one, zero)
    acc = ident
    hk = ident
    for _ in range(1, terms):
        hk = hk * h
        acc = acc + hk
    return acc


def matrix_neumann_inverse(m: Matrix, mode: str = "nilpotent", p: int | None = None,
                           prec: int | None = None, max_terms: int | None = None) -> Matrix:
    """Inverse of ``m = 1 - h`` by the Neumann series.

    ``mode="nilpotent"``: ``h`` must be nilpotent; the sum is exact.  Over a
    ring whose nilradical is generated by ``k`` cap-1 variables a nilpotent
    ``r x r`` matrix satisfies ``h^(r(k+1)) = 0``, which bounds the search.

    ``mode="padic"``: all coefficients of ``h`` must have positive ``p``-adic
    valuation; the sum is truncated so that ``m n = 1 - h^K`` with
    ``h^K = 0 mod p^prec``.
    """
    r = m.size
    sample = m[0, 0]
    if isinstance(sample, Poly):
        ring = sample.ring
        one, zero = ring.const(1), ring.const(0)
    else:
        one, zero = ONE, ZERO
    h = Matrix.identity(r, one, zero) - m
    if mode == "nilpotent":
        nilk = len(ring.nil) if isinstance(sample, Poly) else 0
        bound = max_terms or r * (nilk + 1) + 1
        acc = Matrix.identity(r, one, zero)
        hk = acc
        for _ in range(bound):
            hk = hk * h
            if hk.is_zero():
                return acc
            acc = acc + hk
        raise CertificateError("no nilpotency certificate: h^k did not vanish")
    if mode == "padic":
        if p is None or prec is None:
            raise ValueError("padic mode needs p and prec")
        v = min_valuation_matrix(h, p)
        if v is not None and v < 1:
            raise CertificateError(f"h is not p-adically small (valuation {v})")
        if v is None:
            return Matrix.identity(r, one, zero)
        terms = -(-prec // v)
        if max_terms is not None and terms > max_terms:
            raise CertificateError("precision unreachable within max_terms")
        return matrix_power_series(h, terms, one, zero)
    raise ValueError(f"unknown mode {mode!r}")


# --------------------------------------------------------------------------
# p-adic valuations


@dataclass(frozen=True)
class PAdicValuation:
    """v_p of a rational; ``value is None`` encodes +infinity."""

    p: int
    value: int | None

    @property
    def infinite(self) -> bool:
        return self.value is None

    def __add__(self, other: "PAdicValuation") -> "PAdicValuation":
        if self.p != other.p:
            raise ValueError("prime mismatch")
        if self.value is None or other.value is None:
            return PAdicValuation(self.p, None)
        return PAdicValuation(self.p, self.value + other.value)

    def __le__(self, other: "PAdicValuation") -> bool:
        if other.value is None:
            return True
        if self.value is None:
            return False
        return self.value <= other.value

    def __ge__(self, other: "PAdicValuation") -> bool:
        return other <= self

    def __lt__(self, other):
        return self <= other and self != other

    def __gt__(self, other):
        return other < self


def vp_int(n: int, p: int) -> int:
    n = abs(int(n))
    if n == 0:
        raise ValueError("valuation of 0")
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def vp(a, p: int) -> int | None:
    """p-adic valuation of a rational; None for zero."""
    a = to_q(a)
    if not a:
        return None
    return vp_int(a.numerator, p) - vp_int(a.denominator, p)


def valuation(a, p: int) -> PAdicValuation:
    return PAdicValuation(p, vp(a, p))


def abs_p(a, p: int) -> mpq:
    v = vp(a, p)
    if v is None:
        return ZERO
    return mpq(1, p ** v) if v >= 0 else mpq(p ** (-v))


def vp_factorial(n: int, p: int) -> int:
    k, q = 0, p
    while q <= n:
        k += n // q
        q *= p
    return k


def min_valuation_poly(f: Poly, p: int) -> int | None:
    vals = [vp(c, p) for c in f.terms.values()]
    return min(vals) if vals else None


def min_valuation_matrix(m: Matrix, p: int) -> int | None:
    vals = []
    for row in m.rows:
        for a in row:
            v = min_valuation_poly(a, p) if isinstance(a, Poly) else vp(a, p)
            if v is not None:
                vals.append(v)
    return min(vals) if vals else None


def reduce_mod(a, p: int, prec: int) -> mpq:
    """Canonical representative of ``a`` modulo ``p^prec`` in Q_p.

    Writes ``a = p^v u`` with ``u`` a unit and returns ``p^v (u mod p^(prec-v))``
    with the residue in ``[0, p^(prec-v))``; zero if ``v >= prec``.
    """
    a = to_q(a)
    v = vp(a, p)
    if v is None or v >= prec:
        return ZERO
    u = a / (mpq(p) ** v) if v >= 0 else a * (mpq(p) ** (-v))
    mod = p ** (prec - v)
    res = (int(u.numerator) * pow(int(u.denominator), -1, mod)) % mod
    return mpq(res) * (mpq(p) ** v)


def congruent(a, b, p: int, prec: int) -> bool:
    d = to_q(a) - to_q(b)
    v = vp(d, p)
    return v is None or v >= prec


def factorial(n: int) -> int:
    return math.factorial(n)


def sign_of_permutation(perm: Iterable[int]) -> int:
    perm = list(perm)
    s = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            s = -s
    return s
