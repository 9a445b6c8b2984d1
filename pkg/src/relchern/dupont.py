"""Simplicial differential forms and Dupont's operators I, E, s and h_(j).

A :class:`SimplicialForm` stores one form on Δ^p × Y per nondegenerate
p-simplex; values on degenerate simplices are pulled back along the
codegeneracy that produces them.  Cosimplicial elements are normalized
cochains: they vanish on degenerate simplices.

Fiber differentials come in two flavours.  ``d_fiber`` is the plain component
of d in the fiber directions.  ``d_fiber_signed`` multiplies the Δ-degree-k part
by (-1)^k; with it d_Δ and the fiber differential commute, and the Dupont
operators commute with the fiber differential on the nose.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import factorial

from .exact import _FIELD, _MASK, ONE, ZERO, _pack, _unpack, pclean, pscale, padd_into
from .forms import (Chart, ChartError, Form, evaluate_at_vertex, exterior_d, homotopy_K,
                    integrate_simplex, lift, pullback, pullback_coface, pullback_simplex,
                    merge_gens, vertex_pullback, wedge)
from .simplicial import FiniteSimplicialSet


class TruncationError(ValueError):
    pass


# --------------------------------------------------------------------------
# h_(j)


def _shift_packed(comps: dict, v: int, c) -> dict:
    """x_v ↦ x_v + c on packed exponents."""
    sh = _FIELD * v
    out = {}
    for g, poly in comps.items():
        raw: dict = {}
        get = raw.get
        for key, coef in poly.items():
            k = (key >> sh) & _MASK
            if not k:
                raw[key] = get(key, ZERO) + coef
                continue
            low = key - (k << sh)
            binom = 1
            cm = coef * c ** k
            for m in range(k + 1):
                nk = low + (m << sh)
                raw[nk] = get(nk, ZERO) + cm * binom
                binom = binom * (k - m) // (m + 1)
                if m < k:
                    cm = cm / c
        raw = pclean(raw)
        if raw:
            out[g] = raw
    return out


def _h_packed(j: int, comps: dict, p: int, degs: dict) -> dict:
    if j >= 1:
        comps = _shift_packed(comps, j - 1, ONE)
    out: dict = {}
    for g, poly in comps.items():
        k = 0
        while k < len(g) and g[k] < p:
            k += 1
        if not k:
            continue
        for m in range(k):
            step = 1 << (_FIELD * g[m])
            ng = g[:m] + g[m + 1:]
            sign = -ONE if m % 2 == 0 else ONE
            tgt = out.setdefault(ng, {})
            get = tgt.get
            for key, c in poly.items():
                deg = degs.get(key)
                if deg is None:
                    deg = degs[key] = sum((key >> (_FIELD * i)) & _MASK for i in range(p))
                nk = key + step
                tgt[nk] = get(nk, ZERO) + c * sign / (deg + k)
    out = {g: d for g, d in ((g, pclean(d)) for g, d in out.items()) if d}
    if j >= 1:
        out = _shift_packed(out, j - 1, -ONE)
    return out


def _pack_form(w: Form) -> dict:
    return {g: {_pack(e): c for e, c in poly.items()} for g, poly in w.comps.items()}


def _unpack_form(chart: Chart, comps: dict) -> Form:
    n = chart.ring.nvars
    return Form(chart, {g: {_unpack(k, n): c for k, c in poly.items()} for g, poly in comps.items()})


def h_operator(j: int, w: Form) -> Form:
    """h_(j)(ω) = ∫_0^1 i_{∂/∂s} g_j^*ω ds with g_j(s, x) = s e_j + (1 - s) x.

    In coordinates centred at e_j the map g_j scales by (1 - s), which gives
    h(u^a du_I ∧ η) = -1/(|a| + |I|) Σ_m (-1)^m u_{i_m} u^a du_{I∖i_m} ∧ η.
    """
    p = w.chart.p
    if not 0 <= j <= p:
        raise ValueError(f"vertex {j} not in [{p}]")
    return _unpack_form(w.chart, _h_packed(j, _pack_form(w), p, {}))


def h_operator_via_pullback(j: int, w: Form, s: str = "_s") -> Form:
    """Reference implementation: literal pullback along g_j followed by K_s."""
    ch = w.chart
    p = ch.p
    if not 0 <= j <= p:
        raise ValueError(f"vertex {j} not in [{p}]")
    big = ch.with_interval(s)
    ring = big.ring
    sv = ring.var(s)
    images = {}
    for i in range(1, p + 1):
        images[f"x{i}"] = (1 - sv) * ring.var(f"x{i}") + (sv if i == j else 0)
    return homotopy_K(pullback(w, big, images), s)


def elementary_form(chart: Chart, phi: tuple) -> Form:
    """Σ_j (-1)^j x_{φ(j)} dx_{φ(0)} … (omit j) … dx_{φ(k)} on the chart."""
    key = (chart, phi)
    hit = _ELEM_CACHE.get(key)
    if hit is not None:
        return hit
    xs = [chart.x(i) for i in phi]
    dxs = [chart.dx(i) for i in phi]
    acc = chart.zero()
    for j in range(len(phi)):
        term = xs[j]
        for m in range(len(phi)):
            if m != j:
                term = wedge(term, dxs[m])
        acc = acc + term if j % 2 == 0 else acc - term
    _ELEM_CACHE[key] = acc
    return acc


_ELEM_CACHE: dict = {}


# --------------------------------------------------------------------------


def _render_values(values: dict) -> str:
    """Canonical text for values on simplices, ordered by degree and simplex label."""
    items = sorted(values.items(), key=lambda kv: (kv[0][0], str(kv[0][1])))
    return "{" + ", ".join(f"{k}:{x}: {v}" for (k, x), v in items) + "}"


@dataclass
class CosimplicialElement:
    """Normalized cochain with fiber-form values: ``values[(k, σ)]`` for nondegenerate σ."""

    base: FiniteSimplicialSet
    fiber: Chart
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.fiber.p != 0:
            raise ChartError("fiber chart must have p = 0")
        clean = {}
        for (k, x), v in self.values.items():
            if k > self.base.N:
                raise TruncationError(f"degree {k} above truncation {self.base.N}")
            if self.base.is_degenerate(x, k):
                if v:
                    raise ValueError("normalized cochains vanish on degenerate simplices")
                continue
            if v.chart != self.fiber:
                raise ChartError("value on wrong chart")
            if v:
                clean[(k, x)] = v
        self.values = clean

    def value(self, k: int, x) -> Form:
        return self.values.get((k, x), self.fiber.zero())

    def __str__(self):
        return _render_values(self.values)

    def degrees(self) -> set:
        return {k for k, _ in self.values}

    def _combine(self, other, sign):
        if other.base is not self.base or other.fiber != self.fiber:
            raise ValueError("cochains on different bases")
        out = dict(self.values)
        for key, v in other.values.items():
            out[key] = out[key] + v * sign if key in out else v * sign
        return CosimplicialElement(self.base, self.fiber, out)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __eq__(self, other):
        return (isinstance(other, CosimplicialElement) and self.base is other.base
                and self.fiber == other.fiber and self.values == other.values)

    def map_values(self, f) -> "CosimplicialElement":
        return CosimplicialElement(self.base, self.fiber, {key: f(key[0], v) for key, v in self.values.items()})

    def d_fiber(self) -> "CosimplicialElement":
        return self.map_values(lambda k, v: exterior_d(v, "fiber"))

    def degree_part(self, k: int) -> "CosimplicialElement":
        return CosimplicialElement(self.base, self.fiber, {key: v for key, v in self.values.items() if key[0] == k})

    def restrict(self, max_k: int) -> "CosimplicialElement":
        return CosimplicialElement(self.base, self.fiber, {key: v for key, v in self.values.items() if key[0] <= max_k})

    def pullback(self, f) -> "CosimplicialElement":
        """f^*a along a simplicial map f: S → base."""
        S = f.source
        vals = {}
        for k in self.degrees():
            if k > S.N:
                continue
            for x in S.nondegenerate[k]:
                v = self.value(k, f(x, k))
                if v:
                    vals[(k, x)] = v
        return CosimplicialElement(S, self.fiber, vals)


def cosimplicial_delta(a: CosimplicialElement) -> CosimplicialElement:
    """δ = Σ (-1)^i ∂_i^*; degree-N components are dropped (nothing above truncation)."""
    X = a.base
    out = {}
    for k in sorted(a.degrees()):
        if k + 1 > X.N:
            continue
        for x in X.nondegenerate[k + 1]:
            acc = a.fiber.zero()
            for i in range(k + 2):
                v = a.value(k, X.face(x, k + 1, i))
                if v:
                    acc = acc + v if i % 2 == 0 else acc - v
            if (k + 1, x) in out:
                acc = out[(k + 1, x)] + acc
            out[(k + 1, x)] = acc
    return CosimplicialElement(X, a.fiber, out)


# --------------------------------------------------------------------------


class SimplicialForm:
    """Compatible family ω_p on Δ^p × Y over a truncated simplicial set."""

    def __init__(self, base: FiniteSimplicialSet, fiber: Chart, values: dict | None = None, N: int | None = None):
        if fiber.p != 0:
            raise ChartError("fiber chart must have p = 0")
        self.base = base
        self.fiber = fiber
        self.N = base.N if N is None else N
        if self.N > base.N:
            raise TruncationError("form truncation above the simplicial set's")
        self.values = {}
        for (p, x), v in (values or {}).items():
            if p > self.N:
                continue
            if base.is_degenerate(x, p):
                raise ValueError("store values on nondegenerate simplices only")
            if v.chart != fiber.with_p(p):
                raise ChartError(f"value at {(p, x)} on chart {v.chart}")
            if v:
                self.values[(p, x)] = v
        self._deg_cache: dict = {}

    def __str__(self):
        return _render_values(self.values)

    @staticmethod
    def from_kernel(base, fiber, kernel, N=None) -> "SimplicialForm":
        """Evaluate ``kernel(p, σ)`` on every nondegenerate simplex."""
        N = base.N if N is None else N
        vals = {}
        for p in range(N + 1):
            for x in base.nondegenerate[p]:
                vals[(p, x)] = kernel(p, x)
        return SimplicialForm(base, fiber, vals, N)

    def chart(self, p: int) -> Chart:
        return self.fiber.with_p(p)

    def value(self, p: int, x) -> Form:
        if p > self.N:
            raise TruncationError(f"level {p} above truncation {self.N}")
        v = self.values.get((p, x))
        if v is not None:
            return v
        if not self.base.is_degenerate(x, p):
            return self.chart(p).zero()
        hit = self._deg_cache.get((p, x))
        if hit is None:
            tau, k, psi = self.base.decompose(x, p)
            hit = pullback_simplex(self.value(k, tau), psi)
            self._deg_cache[(p, x)] = hit
        return hit

    def items(self):
        for p in range(self.N + 1):
            for x in self.base.simplices[p]:
                yield p, x, self.value(p, x)

    def map(self, f) -> "SimplicialForm":
        """Apply a natural per-simplex operation (commuting with simplex pullbacks)."""
        return SimplicialForm(self.base, self.fiber, {key: f(v) for key, v in self.values.items()}, self.N)

    def _binary(self, other, op):
        if other.base is not self.base or other.fiber != self.fiber:
            raise ValueError("forms on different bases")
        N = min(self.N, other.N)
        vals = {}
        for p in range(N + 1):
            for x in self.base.nondegenerate[p]:
                vals[(p, x)] = op(self.value(p, x), other.value(p, x))
        return SimplicialForm(self.base, self.fiber, vals, N)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __neg__(self):
        return self.map(lambda v: -v)

    def wedge(self, other) -> "SimplicialForm":
        return self._binary(other, wedge)

    __mul__ = wedge

    def scale(self, c) -> "SimplicialForm":
        return self.map(lambda v: v * c)

    def __eq__(self, other):
        return (isinstance(other, SimplicialForm) and self.base is other.base and self.fiber == other.fiber
                and self.N == other.N and self.values == other.values)

    def is_zero(self) -> bool:
        return not self.values

    def pullback(self, f) -> "SimplicialForm":
        """f^*ω along a simplicial map f: S → base, (f^*ω)_p(σ) = ω_p(f(σ))."""
        S = f.source
        N = min(self.N, S.N)
        vals = {(p, x): self.value(p, f(x, p)) for p in range(N + 1) for x in S.nondegenerate[p]}
        return SimplicialForm(S, self.fiber, vals, N)

    def truncate(self, N: int) -> "SimplicialForm":
        return SimplicialForm(self.base, self.fiber, self.values, min(N, self.N))

    def part(self, k=None, l=None) -> "SimplicialForm":
        return self.map(lambda v: v.part(k, l))

    def bidegrees(self) -> set:
        out = set()
        for v in self.values.values():
            out |= v.bidegrees()
        return out

    def d(self) -> "SimplicialForm":
        return self.map(exterior_d)

    def d_delta(self) -> "SimplicialForm":
        return self.map(lambda v: exterior_d(v, "delta"))

    def d_fiber(self) -> "SimplicialForm":
        return self.map(lambda v: exterior_d(v, "fiber"))

    def d_fiber_signed(self) -> "SimplicialForm":
        return self.map(d_fiber_signed)

    def compatibility_defects(self, levels=None) -> list:
        """All (p, σ, i) where (δ^i)^*ω_p(σ) ≠ ω_{p-1}(∂_iσ), over all simplices."""
        bad = []
        levels = range(1, self.N + 1) if levels is None else levels
        for p in levels:
            for x in self.base.simplices[p]:
                w = self.value(p, x)
                for i in range(p + 1):
                    if pullback_coface(w, i) != self.value(p - 1, self.base.face(x, p, i)):
                        bad.append((p, x, i))
        return bad

    def is_compatible(self) -> bool:
        return not self.compatibility_defects()


def d_fiber_signed(w: Form) -> Form:
    """(-1)^k d_fiber on the Δ-degree-k part."""
    out = w.chart.zero()
    for k in sorted({b[0] for b in w.bidegrees()}):
        part = exterior_d(w.part(k), "fiber")
        out = out + part if k % 2 == 0 else out - part
    return out


# --------------------------------------------------------------------------
# I, E, s


def _injections(k: int, p: int):
    return itertools.combinations(range(p + 1), k + 1)


def I_via_integral(w: Form, k: int) -> Form:
    return integrate_simplex(w.part(k), warn=False)


def I_via_h(w: Form, k: int) -> Form:
    cur = w.part(k)
    for j in range(k):
        cur = h_operator(j, cur)
        if not cur:
            return w.chart.fiber().zero()
    res = evaluate_at_vertex(cur, k)
    return res if k % 2 == 0 else -res


def dupont_I(w: SimplicialForm, k: int | None = None, method: str = "integral") -> CosimplicialElement:
    """I(ω) on nondegenerate k-simplices (all k ≤ N if ``k`` is None).

    ``method`` is "integral", "h", or "both" (computes both and raises on mismatch).
    """
    X = w.base
    ks = range(w.N + 1) if k is None else [k]
    if k is not None and k > w.N:
        raise TruncationError(f"truncation level {w.N} < {k}")
    out = {}
    for kk in ks:
        for x in X.nondegenerate[kk]:
            v = w.value(kk, x)
            if method == "integral":
                r = I_via_integral(v, kk)
            elif method == "h":
                r = I_via_h(v, kk)
            elif method == "both":
                r = I_via_integral(v, kk)
                r2 = I_via_h(v, kk)
                if r != r2:
                    raise AssertionError(f"I formulas disagree on {(kk, x)}: {r} vs {r2}")
            else:
                raise ValueError(method)
            out[(kk, x)] = r
    return CosimplicialElement(X, w.fiber, out)


def E_kernel(a: CosimplicialElement, p: int, x) -> Form:
    X = a.base
    chart = a.fiber.with_p(p)
    acc = chart.zero()
    for k in sorted(a.degrees()):
        if k > p:
            continue
        fk = factorial(k)
        for phi in _injections(k, p):
            v = a.value(k, X.act(phi, x, p))
            if not v:
                continue
            acc = acc + wedge(elementary_form(chart, phi), lift(v, chart)) * fk
    return acc


def dupont_E(a: CosimplicialElement, N: int | None = None) -> SimplicialForm:
    return SimplicialForm.from_kernel(a.base, a.fiber, lambda p, x: E_kernel(a, p, x), N)


def s_kernel_form(w: Form) -> Form:
    """s on a single simplex: Σ_i i! Σ_φ ε_φ ∧ h_{φ(i)}∘…∘h_{φ(0)}(ω)."""
    chart = w.chart
    p = chart.p
    chains = {(): _pack_form(w)}
    degs: dict = {}

    def chain(phi):
        hit = chains.get(phi)
        if hit is None:
            prev = chain(phi[:-1])
            hit = _h_packed(phi[-1], prev, p, degs) if prev else prev
            chains[phi] = hit
        return hit

    nil = chart.ring.nil
    checks = [(_MASK << (_FIELD * k), 2 << (_FIELD * k)) for k in nil]
    packed: dict = {}
    for i in range(p + 1):
        fi = factorial(i)
        any_nonzero = False
        for phi in _injections(i, p):
            hw = chain(phi)
            if not hw:
                continue
            any_nonzero = True
            _wedge_packed_into(packed, _pack_form(elementary_form(chart, phi)), hw, fi, checks)
        if not any_nonzero:
            break
    return _unpack_form(chart, {g: d for g, d in ((g, pclean(d)) for g, d in packed.items()) if d})


def _wedge_packed_into(acc: dict, a: dict, b: dict, scale, checks) -> None:
    for ga, pa in a.items():
        for gb, pb in b.items():
            m = merge_gens(ga, gb)
            if m is None:
                continue
            sign, g = m
            tgt = acc.setdefault(g, {})
            get = tgt.get
            for ka, ca in pa.items():
                ca = ca * scale if sign > 0 else -ca * scale
                for kb, cb in pb.items():
                    k = ka + kb
                    if checks and any((k & msk) >= t for msk, t in checks):
                        continue
                    tgt[k] = get(k, ZERO) + ca * cb


def product_function_kernel(c: CosimplicialElement, p: int, x) -> Form:
    """Σ_φ x_{φ(0)}⋯x_{φ(k)} ∧ c(φ^*σ): compatible because c vanishes on degenerate simplices."""
    X = c.base
    chart = c.fiber.with_p(p)
    acc = chart.zero()
    for k in sorted(c.degrees()):
        if k > p:
            continue
        for phi in _injections(k, p):
            v = c.value(k, X.act(phi, x, p))
            if not v:
                continue
            mono = chart.const(1)
            for i in phi:
                mono = wedge(mono, chart.x(i))
            acc = acc + wedge(mono, lift(v, chart))
    return acc


def product_function(c: CosimplicialElement, N: int | None = None) -> SimplicialForm:
    return SimplicialForm.from_kernel(c.base, c.fiber, lambda p, x: product_function_kernel(c, p, x), N)


def dupont_s(w: SimplicialForm) -> SimplicialForm:
    return w.map(s_kernel_form)


def s_kernel(w: SimplicialForm, p: int, x) -> Form:
    return s_kernel_form(w.value(p, x))
