"""Differential forms on Δ^p × (intervals) × (parameters) with polynomial coefficients.

A form is stored as ``{generator tuple: raw polynomial dict}``.  Generator ``g``
is the differential of ring variable ``g``; nilpotent variables have no
differential.  Since simplex coordinates come first in the ring, the Δ
generators ``dx1..dxp`` are always the leading ones of a sorted tuple, so
``dx1∧…∧dxp∧η`` is already in canonical order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from math import factorial

from gmpy2 import mpq

from .exact import (ONE, ZERO, Matrix, Poly, Ring, UniverseError, padd_into, pclean, pmul,
                    pscale, substitute_raw, to_q, grlex_key, monomial_str, term_str)


class ChartError(ValueError):
    pass


class IntegrationDegreeWarning(UserWarning):
    """Components below top Δ-degree were dropped by simplex integration."""


@dataclass(frozen=True)
class Chart:
    p: int = 0
    intervals: tuple = ()
    params: tuple = ()
    nilpotents: tuple = ()

    def __post_init__(self):
        for f in ("intervals", "params", "nilpotents"):
            object.__setattr__(self, f, tuple(getattr(self, f)))

    @property
    def ring(self) -> Ring:
        return Ring.make(self.p, self.intervals, self.params, self.nilpotents)

    @property
    def ngens(self) -> int:
        return self.p + len(self.intervals) + len(self.params)

    def gen_name(self, g: int) -> str:
        return "d" + self.ring.names[g]

    def fiber(self) -> "Chart":
        return Chart(0, self.intervals, self.params, self.nilpotents)

    def with_p(self, p: int) -> "Chart":
        return Chart(p, self.intervals, self.params, self.nilpotents)

    def with_interval(self, name: str) -> "Chart":
        if name in self.ring.names:
            raise ChartError(f"{name!r} already in chart")
        return Chart(self.p, self.intervals + (name,), self.params, self.nilpotents)

    def without_interval(self, name: str) -> "Chart":
        if name not in self.intervals:
            raise ChartError(f"{name!r} is not an interval variable of the chart")
        return Chart(self.p, tuple(t for t in self.intervals if t != name), self.params, self.nilpotents)

    # elementary forms
    def zero(self) -> "Form":
        return Form(self, {})

    def const(self, c) -> "Form":
        c = to_q(c)
        return Form(self, {(): {self.ring.zero_exp(): c}} if c else {})

    def var(self, name: str) -> "Form":
        return Form.from_poly(self.ring.var(name), self)

    def x(self, i: int) -> "Form":
        return self.var(f"x{i}")

    def d(self, name: str) -> "Form":
        return exterior_d(self.var(name))

    def dx(self, i: int) -> "Form":
        return self.d(f"x{i}")

    def is_delta_gen(self, g: int) -> bool:
        return g < self.p


@lru_cache(maxsize=200000)
def merge_gens(a: tuple, b: tuple):
    """(sign, merged) for dx_a ∧ dx_b, or None if they share a generator."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    sa = set(a)
    if any(g in sa for g in b):
        return None
    inv = 0
    for g in b:
        for h in a:
            if h > g:
                inv += 1
    return (-1 if inv & 1 else 1), tuple(sorted(a + b))


class Form:
    """Element of the exterior algebra over a :class:`Chart`."""

    __slots__ = ("chart", "comps")

    def __init__(self, chart: Chart, comps: dict):
        self.chart = chart
        self.comps = {g: c for g, c in comps.items() if c}

    @staticmethod
    def from_poly(f: Poly, chart: Chart) -> "Form":
        if f.ring != chart.ring:
            f = reembed_poly(f, chart.ring)
        return Form(chart, {(): dict(f.terms)} if f.terms else {})

    @staticmethod
    def from_components(chart: Chart, comps: dict) -> "Form":
        out = {}
        for gens, f in comps.items():
            gens = tuple(gens)
            if list(gens) != sorted(set(gens)):
                raise ChartError("generator tuples must be strictly increasing")
            if gens and gens[-1] >= chart.ngens:
                raise ChartError("generator index out of range")
            out[gens] = dict(f.terms) if isinstance(f, Poly) else dict(f)
        return Form(chart, out)

    # basic protocol ------------------------------------------------------
    def _check(self, other: "Form"):
        if self.chart != other.chart:
            raise ChartError(f"chart mismatch: {self.chart} vs {other.chart}")

    def _coerce(self, other) -> "Form":
        if isinstance(other, Form):
            self._check(other)
            return other
        if isinstance(other, Poly):
            return Form.from_poly(other, self.chart)
        return self.chart.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = {g: dict(c) for g, c in self.comps.items()}
        for g, c in other.comps.items():
            out[g] = padd_into(out.get(g, {}), c)
        return Form(self.chart, out)

    __radd__ = __add__

    def __neg__(self):
        return Form(self.chart, {g: pscale(c, -ONE) for g, c in self.comps.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        out = {g: dict(c) for g, c in self.comps.items()}
        for g, c in other.comps.items():
            out[g] = padd_into(out.get(g, {}), c, -ONE)
        return Form(self.chart, out)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (Form, Poly)):
            return wedge(self, self._coerce(other))
        c = to_q(other)
        return Form(self.chart, {g: pscale(v, c) for g, v in self.comps.items()})

    def __rmul__(self, other):
        if isinstance(other, Poly):
            return wedge(self._coerce(other), self)
        return self * other

    def __pow__(self, k: int):
        out = self.chart.const(1)
        for _ in range(k):
            out = wedge(out, self)
        return out

    def __xor__(self, other):
        return wedge(self, self._coerce(other))

    def __eq__(self, other):
        if isinstance(other, Form):
            return self.chart == other.chart and self.comps == other.comps
        if isinstance(other, (int, mpq, Poly)):
            return self == self._coerce(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.chart, frozenset((g, frozenset(c.items())) for g, c in self.comps.items())))

    def __bool__(self):
        return bool(self.comps)

    def is_zero(self) -> bool:
        return not self.comps

    # structure -----------------------------------------------------------
    def components(self) -> dict:
        ring = self.chart.ring
        return {g: Poly(ring, dict(c), check=False) for g, c in self.comps.items()}

    def coefficient(self, gens=()) -> Poly:
        return Poly(self.chart.ring, dict(self.comps.get(tuple(gens), {})), check=False)

    def nterms(self) -> int:
        return sum(len(c) for c in self.comps.values())

    def bidegrees(self) -> set:
        p = self.chart.p
        out = set()
        for g in self.comps:
            k = sum(1 for a in g if a < p)
            out.add((k, len(g) - k))
        return out

    def degrees(self) -> set:
        return {len(g) for g in self.comps}

    def part(self, k: int | None = None, l: int | None = None) -> "Form":
        """Component of Δ-degree k and fiber degree l (None = any)."""
        p = self.chart.p
        out = {}
        for g, c in self.comps.items():
            dk = sum(1 for a in g if a < p)
            if (k is None or dk == k) and (l is None or len(g) - dk == l):
                out[g] = c
        return Form(self.chart, out)

    def degree_part(self, n: int) -> "Form":
        return Form(self.chart, {g: c for g, c in self.comps.items() if len(g) == n})

    def to_poly(self) -> Poly:
        if any(self.comps.keys() - {()}):
            raise ValueError("form has positive degree")
        return self.coefficient(())

    def __str__(self):
        return form_to_str(self)

    def __repr__(self):
        return f"Form({str(self)!r})"


# --------------------------------------------------------------------------
# algebra


def wedge(a: Form, b: Form) -> Form:
    if a.chart != b.chart:
        raise ChartError(f"chart mismatch: {a.chart} vs {b.chart}")
    nil = a.chart.ring.nil
    out: dict = {}
    for ga, pa in a.comps.items():
        for gb, pb in b.comps.items():
            m = merge_gens(ga, gb)
            if m is None:
                continue
            sign, g = m
            prod = pmul(pa, pb, nil)
            if not prod:
                continue
            tgt = out.get(g)
            if tgt is None:
                out[g] = prod if sign > 0 else pscale(prod, -ONE)
            else:
                padd_into(tgt, prod, ONE if sign > 0 else -ONE)
    return Form(a.chart, out)


def exterior_d(w: Form, part: str = "all") -> Form:
    """de Rham differential; ``part`` in {"all", "delta", "fiber"}."""
    ch = w.chart
    if part == "all":
        vars_ = range(ch.ngens)
    elif part == "delta":
        vars_ = range(ch.p)
    elif part == "fiber":
        vars_ = range(ch.p, ch.ngens)
    else:
        raise ValueError(f"unknown part {part!r}")
    out: dict = {}
    for g, poly in w.comps.items():
        gset = set(g)
        for v in vars_:
            if v in gset:
                continue
            sign = -1 if sum(1 for a in g if a < v) & 1 else 1
            ng = tuple(sorted(g + (v,)))
            tgt = out.setdefault(ng, {})
            for e, c in poly.items():
                k = e[v]
                if k:
                    f = list(e)
                    f[v] -= 1
                    padd_into(tgt, {tuple(f): c * k}, ONE if sign > 0 else -ONE)
    return Form(ch, out)


def d(w: Form) -> Form:
    return exterior_d(w)


def d_delta(w: Form) -> Form:
    return exterior_d(w, "delta")


def d_fiber(w: Form) -> Form:
    return exterior_d(w, "fiber")


def interior_product(w: Form, name: str) -> Form:
    """i_{∂/∂name}: antiderivation, sign (-1)^(position of d name)."""
    ring = w.chart.ring
    v = ring.index(name)
    if v >= w.chart.ngens:
        raise ChartError(f"{name!r} has no differential")
    out = {}
    for g, c in w.comps.items():
        if v in g:
            pos = g.index(v)
            ng = g[:pos] + g[pos + 1:]
            out[ng] = c if pos % 2 == 0 else pscale(c, -ONE)
    return Form(w.chart, out)


def _drop_index(gens: tuple, v: int) -> tuple:
    return tuple(a if a < v else a - 1 for a in gens if a != v)


def homotopy_K(w: Form, t: str = "t") -> Form:
    """K = ∫_0^1 i_{∂/∂t}(·) dt; the result lives on the chart without ``t``."""
    ch = w.chart
    if t not in ch.intervals:
        raise ChartError(f"interval variable {t!r} not in chart")
    v = ch.ring.index(t)
    new = ch.without_interval(t)
    out: dict = {}
    for g, c in w.comps.items():
        if v not in g:
            continue
        pos = g.index(v)
        sign = ONE if pos % 2 == 0 else -ONE
        ng = _drop_index(g, v)
        tgt = out.setdefault(ng, {})
        for e, coef in c.items():
            k = e[v]
            ne = e[:v] + e[v + 1:]
            padd_into(tgt, {ne: coef / (k + 1)}, sign)
    return Form(new, out)


def endpoint(w: Form, t: str, value) -> Form:
    """i_value^*: restrict to t = value (dt ↦ 0); drops ``t`` from the chart."""
    ch = w.chart
    v = ch.ring.index(t)
    new = ch.without_interval(t)
    value = to_q(value)
    out: dict = {}
    for g, c in w.comps.items():
        if v in g:
            continue
        ng = _drop_index(g, v)
        tgt = out.setdefault(ng, {})
        for e, coef in c.items():
            k = e[v]
            if k and not value:
                continue
            padd_into(tgt, {e[:v] + e[v + 1:]: coef * value ** k})
    return Form(new, out)


def reembed_poly(f: Poly, ring: Ring) -> Poly:
    idx = []
    for n in f.ring.names:
        idx.append(ring.names.index(n) if n in ring.names else None)
    out = {}
    z = [0] * ring.nvars
    for e, c in f.terms.items():
        ne = list(z)
        for i, k in enumerate(e):
            if k:
                if idx[i] is None:
                    raise UniverseError(f"variable {f.ring.names[i]} missing from target ring")
                ne[idx[i]] = k
        out[tuple(ne)] = c
    return Poly(ring, out)


def reembed(w: Form, chart: Chart) -> Form:
    """Move a form to a chart containing all of its variables (matched by name)."""
    if w.chart == chart:
        return w
    src = w.chart.ring
    dst = chart.ring
    idx = [dst.names.index(n) if n in dst.names else None for n in src.names]
    for g in range(w.chart.ngens):
        if idx[g] is not None and idx[g] >= chart.ngens:
            raise ChartError("differential variable mapped to a nilpotent")
    z = [0] * dst.nvars
    out: dict = {}
    for g, c in w.comps.items():
        ng = []
        for a in g:
            if idx[a] is None:
                raise ChartError(f"generator d{src.names[a]} missing from target chart")
            ng.append(idx[a])
        srt = tuple(sorted(ng))
        sign = _perm_sign(ng)
        tgt = out.setdefault(srt, {})
        for e, coef in c.items():
            ne = list(z)
            for i, k in enumerate(e):
                if k:
                    if idx[i] is None:
                        raise ChartError(f"variable {src.names[i]} missing from target chart")
                    ne[idx[i]] = k
            padd_into(tgt, {tuple(ne): coef}, ONE if sign > 0 else -ONE)
    return Form(chart, out)


def _perm_sign(seq) -> int:
    s = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                s = -s
    return s


def pullback(w: Form, target: Chart, images: dict) -> Form:
    """Pull back along the map given by ``images[name]`` (0-forms or Polys on ``target``).

    Variables absent from ``images`` map to the same-named variable of ``target``.
    The differential of each image is ``d(image)``, so the result commutes with d.
    """
    src = w.chart
    sring, tring = src.ring, target.ring
    img_polys = []
    for n in sring.names:
        if n in images:
            v = images[n]
            if isinstance(v, Form):
                if v.chart != target:
                    raise ChartError("image on wrong chart")
                v = v.to_poly()
            elif not isinstance(v, Poly):
                v = tring.const(v)
            elif v.ring != tring:
                v = reembed_poly(v, tring)
        else:
            v = tring.var(n)
        img_polys.append(v)
    for i in sring.nil:
        img = img_polys[i]
        if img.terms and any(e[j] for e in img.terms for j in range(target.ngens)):
            raise ChartError("nilpotent variable must map into nilpotent/constant part")
    dimgs = [exterior_d(Form.from_poly(img_polys[g], target)) for g in range(src.ngens)]
    raw = [f.terms for f in img_polys]
    out = target.zero()
    # group by generator tuple; coefficient substitution then wedge of differentials
    for g, c in w.comps.items():
        coeff = Form(target, {(): substitute_raw(c, raw, tring)})
        if not coeff:
            continue
        acc = coeff
        for a in g:
            acc = wedge(acc, dimgs[a])
            if not acc:
                break
        out = out + acc
    return out


# --------------------------------------------------------------------------
# simplex maps


def check_increasing(phi, q: int | None = None):
    phi = tuple(phi)
    for a, b in zip(phi, phi[1:]):
        if b < a:
            raise ValueError(f"map {phi} is not increasing")
    if phi and phi[0] < 0:
        raise ValueError("negative vertex")
    if q is not None and phi and phi[-1] > q:
        raise ValueError(f"map {phi} leaves [{q}]")
    return phi


def simplex_images(phi, target_ring: Ring, q: int) -> dict:
    """Images of x1..xq under φ_Δ: Δ^p → Δ^q, x_i ↦ Σ_{φ(j)=i} x_j (x0 eliminated)."""
    phi = check_increasing(phi, q)
    out = {}
    for i in range(1, q + 1):
        acc = target_ring.const(0)
        for j, fj in enumerate(phi):
            if fj == i:
                acc = acc + target_ring.var(f"x{j}")
        out[f"x{i}"] = acc
    return out


def simplex_substitute(a: Poly, phi) -> Poly:
    """Pull a polynomial on Δ^q back along the affine map of increasing φ: [p]→[q]."""
    q = a.ring.simplex_dim
    p = len(tuple(phi)) - 1
    fiber = [(n, k) for n, k in zip(a.ring.names, a.ring.kinds) if k != "x"]
    target = Ring.make(p, tuple(n for n, k in fiber if k == "t"), tuple(n for n, k in fiber if k == "y"),
                       tuple(n for n, k in fiber if k == "eps"))
    return a.substitute(simplex_images(phi, target, q), target)


def pullback_simplex(w: Form, phi) -> Form:
    """(φ_Δ × id)^* for increasing φ: [p]→[q], q the chart dimension."""
    phi = tuple(phi)
    q = w.chart.p
    target = w.chart.with_p(len(phi) - 1)
    return pullback(w, target, simplex_images(phi, target.ring, q))


def coface(i: int, p: int) -> tuple:
    """δ^i: [p-1] → [p], omitting i."""
    return tuple(j for j in range(p + 1) if j != i)


def codegeneracy(i: int, p: int) -> tuple:
    """σ^i: [p+1] → [p], hitting i twice."""
    return tuple(j if j <= i else j - 1 for j in range(p + 2))


def pullback_coface(w: Form, i: int) -> Form:
    return pullback_simplex(w, coface(i, w.chart.p))


def pullback_codegeneracy(w: Form, i: int) -> Form:
    return pullback_simplex(w, codegeneracy(i, w.chart.p))


def vertex_pullback(w: Form, j: int) -> Form:
    """(e_j × id)^*: pull back along the constant map Δ^p → {e_j} ⊂ Δ^p (same chart)."""
    ch = w.chart
    p = ch.p
    images = {f"x{i}": (1 if i == j else 0) for i in range(1, p + 1)}
    out = {}
    ring = ch.ring
    for g, c in w.comps.items():
        if g and g[0] < p:
            continue
        raw = {}
        for e, coef in c.items():
            ok = True
            for i in range(p):
                if e[i] and images[f"x{i + 1}"] == 0:
                    ok = False
                    break
            if ok:
                ne = (0,) * p + e[p:]
                padd_into(raw, {ne: coef})
        out[g] = raw
    return Form(ch, out)


def restrict_to_fiber(w: Form) -> Form:
    """Drop simplex variables from a form that does not involve them."""
    ch = w.chart
    p = ch.p
    fib = ch.fiber()
    out = {}
    for g, c in w.comps.items():
        if g and g[0] < p:
            raise ChartError("form has Δ generators")
        ng = tuple(a - p for a in g)
        raw = {}
        for e, coef in c.items():
            if any(e[:p]):
                raise ChartError("form depends on simplex coordinates")
            raw[e[p:]] = coef
        out[ng] = raw
    return Form(fib, out)


def evaluate_at_vertex(w: Form, j: int) -> Form:
    """e_j^* as a form on the fiber chart."""
    return restrict_to_fiber(vertex_pullback(w, j))


def lift(w: Form, chart: Chart) -> Form:
    """Pull a fiber form back along the projection onto the fiber."""
    return reembed(w, chart)


def shift_var(w: Form, v: int, c) -> Form:
    """Substitute variable v ↦ v + c in all coefficients (generators untouched)."""
    c = to_q(c)
    if not c:
        return w
    powers = [ONE]
    out = {}
    for g, poly in w.comps.items():
        raw: dict = {}
        get = raw.get
        for e, coef in poly.items():
            k = e[v]
            if not k:
                raw[e] = get(e, ZERO) + coef
                continue
            while len(powers) <= k:
                powers.append(powers[-1] * c)
            binom = 1
            base = list(e)
            for m in range(k + 1):
                # choose m copies of the variable, c^(k-m)
                base[v] = m
                key = tuple(base)
                raw[key] = get(key, ZERO) + coef * binom * powers[k - m]
                binom = binom * (k - m) // (m + 1)
        raw = pclean(raw)
        if raw:
            out[g] = raw
    return Form(w.chart, out)


# --------------------------------------------------------------------------
# integration


def simplex_monomial_integral(a) -> mpq:
    """∫_{Δ^p} x1^a1…xp^ap dx1…dxp = Π a_i! / (p + Σa_i)!."""
    num = 1
    for k in a:
        num *= factorial(k)
    return mpq(num, factorial(len(a) + sum(a)))


def integrate_simplex(w: Form, warn: bool = True) -> Form:
    """Fiber integral over Δ^p with orientation dx1∧…∧dxp; result on the fiber chart."""
    ch = w.chart
    p = ch.p
    top = tuple(range(p))
    fib = ch.fiber()
    out = {}
    dropped = False
    for g, c in w.comps.items():
        if g[:p] != top:
            if c:
                dropped = True
            continue
        ng = tuple(a - p for a in g[p:])
        raw: dict = {}
        for e, coef in c.items():
            padd_into(raw, {e[p:]: coef * simplex_monomial_integral(e[:p])})
        out[ng] = raw
    if dropped and warn:
        warnings.warn("lower Δ-degree components integrate to zero", IntegrationDegreeWarning, stacklevel=2)
    return Form(fib, out)


def integrate_simplex_scalar(w: Form) -> mpq:
    """Integral of a top form on Δ^p with no fiber dependence, as a rational."""
    r = integrate_simplex(w)
    if not r:
        return ZERO
    f = r.to_poly()
    if f.degree() > 0:
        raise ValueError(f"integral is not a scalar: {r}")
    return f.constant_term()


def cube_to_simplex_images(p: int, target: Chart) -> dict:
    """ψ: x_i ↦ t1⋯ti(1 − t_{i+1}) with t_{p+1} := 0 (cube coordinates t1..tp)."""
    ring = target.ring
    out = {}
    for i in range(1, p + 1):
        acc = ring.const(1)
        for j in range(1, i + 1):
            acc = acc * ring.var(f"t{j}")
        if i < p:
            acc = acc * (1 - ring.var(f"t{i + 1}"))
        out[f"x{i}"] = acc
    return out


def integrate_simplex_via_cube(w: Form) -> Form:
    """Iterated-interval integral: pull back to the cube by ψ and apply K in each variable."""
    ch = w.chart
    p = ch.p
    names = tuple(f"t{j}" for j in range(1, p + 1))
    if set(names) & set(ch.ring.names):
        raise ChartError("cube variables collide with chart variables")
    cube = Chart(0, names + ch.intervals, ch.params, ch.nilpotents)
    pulled = pullback(w, cube, cube_to_simplex_images(p, cube))
    res = pulled
    for j in range(1, p + 1):
        res = homotopy_K(res, f"t{j}")
    return res


# --------------------------------------------------------------------------
# matrices of forms


def matrix_d(m: Matrix, part: str = "all") -> Matrix:
    return m.map(lambda a: exterior_d(a, part))


def matrix_map(m: Matrix, f) -> Matrix:
    return m.map(f)


def form_matrix(chart: Chart, m: Matrix) -> Matrix:
    """Convert a matrix of Polys (possibly over a smaller ring) to 0-forms on ``chart``."""
    def conv(a):
        if isinstance(a, Form):
            return reembed(a, chart)
        if isinstance(a, Poly):
            return Form.from_poly(reembed_poly(a, chart.ring), chart)
        return chart.const(a)

    return m.map(conv)


def form_identity(chart: Chart, r: int) -> Matrix:
    return Matrix.identity(r, chart.const(1), chart.zero())


def form_zero_matrix(chart: Chart, r: int) -> Matrix:
    return Matrix.identity(r, chart.zero(), chart.zero())


# --------------------------------------------------------------------------
# text


def form_to_str(w: Form) -> str:
    if not w.comps:
        return "0"
    ring = w.chart.ring
    out = []
    first = True
    for g in sorted(w.comps, key=lambda g: (len(g), g)):
        dpart = "*".join("d" + ring.names[a] for a in g)
        for e, c in sorted(w.comps[g].items(), key=lambda kv: grlex_key(kv[0])):
            mono = monomial_str(ring.names, e)
            mono = "*".join(s for s in (mono, dpart) if s)
            out.append(term_str(c, mono, first))
            first = False
    return "".join(out)
