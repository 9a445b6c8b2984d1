"""p-adic side: Gauss norms, the ν-map, the explicit p-adic cocycle and the Lazard map.

p-adic numbers are exact rationals; "equality in Q_p" means congruence modulo
p^M.  Overconvergent series are represented by polynomial truncations together
with norm certificates that bound what was dropped.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import factorial

from gmpy2 import mpq

from .exact import (CertificateError, Matrix, Poly, Ring, abs_p, congruent, reduce_mod,
                    sign_of_permutation, to_q, vp, vp_factorial)
from .forms import Chart, Form, form_identity, integrate_simplex, matrix_d


class PrecisionError(ArithmeticError):
    """Requested precision cannot be certified within the configured truncation."""


# --------------------------------------------------------------------------
# Gauss norms and formal integration


def gauss_norm(f, p: int, rho=2) -> mpq:
    """max_ν |a_ν|_p ρ^{|ν|} over the terms of a polynomial (exact rational)."""
    rho = to_q(rho)
    terms = f.terms if isinstance(f, Poly) else f
    best = mpq(0)
    for e, c in terms.items():
        v = abs_p(c, p) * rho ** sum(e)
        if v > best:
            best = v
    return best


def gauss_norm_matrix(m: Matrix, p: int, rho=2) -> mpq:
    return max(gauss_norm(_poly_of(a), p, rho) for row in m.rows for a in row)


def _poly_of(a) -> Poly:
    return a.to_poly() if isinstance(a, Form) else a


@dataclass(frozen=True)
class DaggerSeries:
    """Truncation of an overconvergent series: polynomial part, prime, precision and radius."""

    poly: Poly
    p: int
    M: int
    rho: mpq = mpq(2)

    def __post_init__(self):
        if to_q(self.rho) <= 1:
            raise ValueError("radius must exceed 1")

    def norm(self) -> mpq:
        return gauss_norm(self.poly, self.p, self.rho)

    def _like(self, poly) -> "DaggerSeries":
        return DaggerSeries(poly, self.p, self.M, self.rho)

    def __add__(self, other):
        return self._like(self.poly + (other.poly if isinstance(other, DaggerSeries) else other))

    def __sub__(self, other):
        return self._like(self.poly - (other.poly if isinstance(other, DaggerSeries) else other))

    def __mul__(self, other):
        return self._like(self.poly * (other.poly if isinstance(other, DaggerSeries) else other))

    def congruent(self, other, prec: int | None = None) -> bool:
        prec = self.M if prec is None else prec
        diff = self.poly - (other.poly if isinstance(other, DaggerSeries) else other)
        return all(congruent(c, 0, self.p, prec) for c in diff.terms.values())


def drop_variable_ring(ring: Ring, name: str) -> Ring:
    i = ring.index(name)
    return Ring(ring.names[:i] + ring.names[i + 1:], ring.kinds[:i] + ring.kinds[i + 1:])


def formal_integrate(f, t: str = "t", p: int | None = None, rho=2):
    """∫_0^1 f dt termwise (t^k ↦ 1/(k+1)).

    Returns the integral, and when ``p`` is given also the constant
    C = max_k |1/(k+1)|_p ρ^{-k} over the t-degrees in the support, which
    satisfies |∫f|_ρ ≤ C|f|_ρ.
    """
    series = f if isinstance(f, DaggerSeries) else None
    poly = f.poly if series else f
    ring = poly.ring
    i = ring.index(t)
    target = drop_variable_ring(ring, t)
    out: dict = {}
    degrees = set()
    for e, c in poly.terms.items():
        k = e[i]
        degrees.add(k)
        e2 = e[:i] + e[i + 1:]
        v = out.get(e2, 0) + c / (k + 1)
        if v:
            out[e2] = v
        else:
            out.pop(e2, None)
    res = Poly(target, out)
    if series:
        res = DaggerSeries(res, series.p, series.M, series.rho)
        p, rho = series.p, series.rho
    if p is None:
        return res
    rho = to_q(rho)
    C = max((abs_p(mpq(1, k + 1), p) / rho ** k for k in degrees), default=mpq(0))
    return res, C


# --------------------------------------------------------------------------
# unit group elements and the ν-map


@dataclass(frozen=True)
class UnitGroupElement:
    """Rational matrix with v_p(g - 1) ≥ 1 entrywise, i.e. an element of 1 + p·Mat_r(Z_(p))."""

    matrix: tuple
    p: int

    def __post_init__(self):
        r = len(self.matrix)
        for i, row in enumerate(self.matrix):
            if len(row) != r:
                raise ValueError("matrix must be square")
            for j, a in enumerate(row):
                v = vp(to_q(a) - (1 if i == j else 0), self.p)
                if v is not None and v < 1:
                    raise CertificateError(f"entry ({i},{j}) = {a} is not ≡ δ_ij mod p")

    @staticmethod
    def from_rows(rows, p: int) -> "UnitGroupElement":
        return UnitGroupElement(tuple(tuple(to_q(a) for a in row) for row in rows), p)

    @property
    def r(self) -> int:
        return len(self.matrix)

    def as_matrix(self, chart: Chart) -> Matrix:
        return Matrix([[chart.const(a) for a in row] for row in self.matrix])


def suffix_products(gs: list, chart: Chart) -> list:
    """[G_1, …, G_{q+1}] with G_i = g_i ⋯ g_q (G_{q+1} = 1); list index i holds G_{i+1}."""
    r = gs[0].size
    out = [form_identity(chart, r)]
    for g in reversed(gs):
        out.append(g * out[-1])
    return out[::-1]


def nu_matrix(gs: list, chart: Chart) -> Matrix:
    """ν(g_1, …, g_q) = Σ_{i=0}^q x_i g_{i+1} ⋯ g_q on Δ^q (x_0 = 1 - Σ x_i)."""
    q = len(gs)
    if chart.p != q:
        raise ValueError(f"ν of a {q}-tuple lives on Δ^{q}")
    G = suffix_products(gs, chart)
    acc = None
    for i in range(q + 1):
        xi = chart.x(i)
        term = G[i].map(lambda a: xi * a)
        acc = term if acc is None else acc + term
    return acc


@dataclass
class NuCertificate:
    norm_h: mpq
    bound: mpq
    rho: mpq
    p: int
    min_valuation: int | None

    @property
    def ok(self) -> bool:
        return self.norm_h <= self.bound < 1


def nu_map(gs, rho=2):
    """(ν, h, certificate) with ν = 1 - h and |h|_ρ ≤ ρ/p < 1."""
    gs = list(gs)
    if not gs:
        raise ValueError("empty tuple")
    p = gs[0].p
    rho = to_q(rho)
    if rho >= p:
        raise CertificateError(f"ρ = {rho} ≥ p = {p}: no contraction certificate")
    chart = Chart(len(gs))
    nu = nu_matrix([g.as_matrix(chart) for g in gs], chart)
    h = form_identity(chart, gs[0].r) - nu
    norm = gauss_norm_matrix(h, p, rho)
    vals = [vp(c, p) for row in h.rows for a in row for c in a.to_poly().terms.values()]
    cert = NuCertificate(norm, rho / p, rho, p, min(vals) if vals else None)
    if not cert.ok:
        raise CertificateError(f"|h|_ρ = {norm} exceeds ρ/p = {rho / p}")
    return nu, h, cert


def neumann_partial(h: Matrix, K: int) -> Matrix:
    """Σ_{k=0}^K h^k."""
    chart = h[0, 0].chart
    ident = form_identity(chart, h.size)
    acc, hk = ident, ident
    for _ in range(K):
        hk = hk * h
        acc = acc + hk
    return acc


def nu_inverse(gs, prec: int, rho=2) -> tuple:
    """(ν, ν⁻¹ truncated, K) with ν·ν⁻¹ ≡ 1 mod p^prec coefficientwise."""
    nu, h, cert = nu_map(gs, rho)
    v = cert.min_valuation
    if v is None:
        return nu, form_identity(nu[0, 0].chart, nu.size), 0
    K = max(0, -(-prec // v) - 1)
    return nu, neumann_partial(h, K), K


def matrix_congruent_identity(m: Matrix, p: int, prec: int) -> bool:
    r = m.size
    for i in range(r):
        for j in range(r):
            f = m[i, j].to_poly() - (1 if i == j else 0)
            if any(not congruent(c, 0, p, prec) for c in f.terms.values()):
                return False
    return True


# --------------------------------------------------------------------------
# the p-adic cocycle


def padic_constant(n: int) -> mpq:
    return mpq((-1) ** (n - 1) * factorial(n - 1), factorial(2 * n - 1))


def truncation_order(n: int, p: int, M: int, v: int = 1, max_order: int = 200) -> int:
    """Least K such that all Neumann terms h^j, j > K, contribute with valuation ≥ M.

    A dropped monomial of the integrand carries at least q + j factors from h
    (q = 2n - 1 from dν, j from ν⁻¹), so its coefficient has valuation
    ≥ v(q + j) + v_p(c_n); integrating a degree-j monomial over Δ^q divides by
    at most (j + q)!, and v_p(m!) ≤ (m - 1)/(p - 1).  The resulting lower bound
    is increasing in j, so it suffices to check j = K + 1.
    """
    q = 2 * n - 1
    vc = vp(padic_constant(n), p)
    for K in range(max_order + 1):
        j = K + 1
        if v * (q + j) - mpq(j + q - 1, p - 1) + vc >= M:
            return K
    raise PrecisionError(f"precision p^{M} not reachable with truncation ≤ {max_order}")


def padic_cocycle_truncated(gs, n: int, K: int) -> mpq:
    """(-1)^{n-1}(n-1)!/(2n-1)! Tr ∫ (dν ν⁻¹)^{2n-1} with ν⁻¹ = Σ_{k≤K} h^k."""
    gs = list(gs)
    q = 2 * n - 1
    if len(gs) != q:
        raise ValueError(f"need {q} group elements, got {len(gs)}")
    chart = Chart(q)
    nu = nu_matrix([g.as_matrix(chart) for g in gs], chart)
    h = form_identity(chart, gs[0].r) - nu
    w = matrix_d(nu) * neumann_partial(h, K)
    return _integrate_trace_power(w, q) * padic_constant(n)


def _integrate_trace_power(w: Matrix, q: int) -> mpq:
    acc = w
    for _ in range(q - 1):
        acc = acc * w
    res = integrate_simplex(acc.trace())
    return res.to_poly().constant_term() if res else mpq(0)


@dataclass
class PAdicValue:
    value: mpq  # canonical representative mod p^M
    exact_truncation: mpq
    p: int
    M: int
    order: int
    recheck_order: int
    certificate: NuCertificate = field(repr=False, default=None)

    def __str__(self):
        return f"{self.value} + O({self.p}^{self.M})"


def padic_cocycle(gs, n: int, M: int, rho=2, max_order: int = 60, recheck: int = 2) -> PAdicValue:
    """The explicit p-adic cocycle modulo p^M, with truncation chosen from the norm certificate."""
    gs = list(gs)
    p = gs[0].p
    if any(g.p != p for g in gs):
        raise ValueError("mixed primes")
    _, _, cert = nu_map(gs, rho)
    if cert.min_valuation is None:
        return PAdicValue(mpq(0), mpq(0), p, M, 0, 0, cert)
    K = truncation_order(n, p, M, cert.min_valuation, max_order)
    val = padic_cocycle_truncated(gs, n, K)
    again = padic_cocycle_truncated(gs, n, K + recheck)
    if not congruent(val, again, p, M):
        raise PrecisionError(f"truncation {K} and {K + recheck} disagree mod {p}^{M}")
    return PAdicValue(reduce_mod(val, p, M), val, p, M, K, K + recheck, cert)


def log_one_plus(a, p: int, M: int) -> mpq:
    """log(1 + a) mod p^M for v_p(a) ≥ 1, summing the series until terms vanish mod p^M."""
    a = to_q(a)
    va = vp(a, p)
    if va is None:
        return mpq(0)
    if va < 1:
        raise ValueError("log series needs v_p(a) ≥ 1")
    acc = mpq(0)
    k = 1
    # v_p(a^k/k) ≥ k·v_p(a) - floor(log_p k), nondecreasing in k once v_p(a) ≥ 1
    while k * va - _floor_log(k, p) < M:
        term = a ** k / k
        acc += term if k % 2 else -term
        k += 1
    return reduce_mod(acc, p, M)


def _floor_log(k: int, p: int) -> int:
    e = 0
    while p ** (e + 1) <= k:
        e += 1
    return e


# --------------------------------------------------------------------------
# Lazard map and the primitive element


def primitive_element(n: int, X) -> mpq:
    """((n-1)!)²/(2n-1)! Σ_σ sgn(σ) Tr(X_σ(1) ⋯ X_σ(2n-1))."""
    X = [_rational_matrix(a) for a in X]
    k = 2 * n - 1
    if len(X) != k:
        raise ValueError(f"p_{n} takes {k} arguments")
    r = X[0].size
    if any(a.size != r for a in X):
        raise ValueError("matrices must have equal size")
    total = mpq(0)
    for perm in itertools.permutations(range(k)):
        prod = X[perm[0]]
        for i in perm[1:]:
            prod = prod * X[i]
        total += sign_of_permutation(perm) * prod.trace()
    return total * mpq(factorial(n - 1) ** 2, factorial(k))


def _rational_matrix(a) -> Matrix:
    if isinstance(a, Matrix):
        return a.map(to_q)
    return Matrix([[to_q(x) for x in row] for row in a])


def nilpotent_chart(q: int, k: int) -> Chart:
    return Chart(q, (), (), tuple(f"t{i}" for i in range(1, k + 1)))


def exp_nilpotent(chart: Chart, X: Matrix, t: str) -> Matrix:
    """exp(tX) = 1 + tX over a ring with t² = 0."""
    tt = chart.var(t)
    return form_identity(chart, X.size) + X.map(lambda a: tt * chart.const(a))


def cocycle_on_nilpotent(n: int, Xs: list) -> Form:
    """The p-adic cocycle of (exp(t_1X_1), …) computed exactly over ℚ[t]/(t_i²), as a polynomial in t."""
    q = 2 * n - 1
    chart = nilpotent_chart(q, len(Xs))
    gs = [exp_nilpotent(chart, X, f"t{i + 1}") for i, X in enumerate(Xs)]
    nu = nu_matrix(gs, chart)
    h = form_identity(chart, nu.size) - nu
    # h lies in the ideal (t_1, …, t_k), so the Neumann series terminates
    inv = neumann_partial(h, len(Xs))
    if not (nu * inv == form_identity(chart, nu.size)):
        raise CertificateError("nilpotent Neumann inverse failed")
    w = matrix_d(nu) * inv
    acc = w
    for _ in range(q - 1):
        acc = acc * w
    res = integrate_simplex(acc.trace(), warn=False)
    return res * padic_constant(n)


def multilinear_coefficient(f: Form, k: int) -> mpq:
    """Coefficient of t_1 ⋯ t_k."""
    poly = f.to_poly()
    ring = poly.ring
    e = tuple(1 if ring.names[i] in {f"t{j}" for j in range(1, k + 1)} else 0 for i in range(ring.nvars))
    return poly.terms.get(e, mpq(0))


def lazard_delta(f, k: int, X) -> mpq:
    """Δf(X_1..X_k) = Σ_σ sgn(σ) ∂^k/∂t_1⋯∂t_k f(exp(t_1X_σ1), …)|_0.

    ``f`` maps a list of k matrices (X_σ1, …) to a form polynomial in t_1..t_k
    computed over ℚ[t]/(t_i²); the mixed derivative at 0 is the t_1⋯t_k coefficient.
    """
    X = [_rational_matrix(a) for a in X]
    if len(X) != k:
        raise ValueError(f"Δ of a {k}-cochain takes {k} arguments")
    total = mpq(0)
    for perm in itertools.permutations(range(k)):
        total += sign_of_permutation(perm) * multilinear_coefficient(f([X[i] for i in perm]), k)
    return total


def padic_cocycle_evaluator(n: int):
    return lambda Xs: cocycle_on_nilpotent(n, Xs)


def linear_part_check(Xs: list) -> bool:
    """∂_j(dν·ν⁻¹)|_{t=0} = (Σ_{i<j} dx_i)·X_j for every j (x_0 included)."""
    q = len(Xs)
    Xs = [_rational_matrix(a) for a in Xs]
    chart = nilpotent_chart(q, q)
    gs = [exp_nilpotent(chart, X, f"t{i + 1}") for i, X in enumerate(Xs)]
    nu = nu_matrix(gs, chart)
    h = form_identity(chart, nu.size) - nu
    w = matrix_d(nu) * neumann_partial(h, q)
    ring = chart.ring
    tidx = [ring.index(f"t{j}") for j in range(1, q + 1)]
    for j in range(1, q + 1):
        e_lin = tuple(1 if i == tidx[j - 1] else 0 for i in range(ring.nvars))
        dxs = None
        for i in range(j):
            dxs = chart.dx(i) if dxs is None else dxs + chart.dx(i)
        for a in range(nu.size):
            for b in range(nu.size):
                got = _coefficient_form(w[a, b], e_lin)
                want = dxs * Xs[j - 1][a, b]
                if got != want:
                    return False
    return True


def _coefficient_form(w: Form, e: tuple) -> Form:
    """The coefficient of the monomial e (in all variables) as a form with constant coefficients."""
    comps = {}
    zero = (0,) * len(e)
    for gens, poly in w.comps.items():
        c = poly.get(e)
        if c:
            comps[gens] = {zero: c}
    return Form(w.chart, comps)


def random_integral_matrix(rng, r: int, lo: int = -3, hi: int = 3) -> Matrix:
    return Matrix([[mpq(rng.randint(lo, hi)) for _ in range(r)] for _ in range(r)])


def random_unit_tuple(rng, q: int, r: int, p: int) -> list:
    """q elements of 1 + p·Mat_r(Z) with small entries."""
    out = []
    for _ in range(q):
        A = random_integral_matrix(rng, r)
        out.append(UnitGroupElement.from_rows(
            [[(1 if i == j else 0) + p * A[i, j] for j in range(r)] for i in range(r)], p))
    return out


@dataclass
class LazardTrial:
    index: int
    X: list
    delta: mpq
    expected: mpq

    @property
    def ok(self) -> bool:
        return self.delta == self.expected


def verify_lazard_theorem(n: int, r: int, p: int, trials: int, seed: int) -> list:
    """Δ(p-adic cocycle)(X) against (-1)^n/(n-1)!·p_n(X) for seeded tuples X ∈ p·Mat_r(Z).

    The tangent vectors are taken in p·gl_r, the Lie algebra of 1 + p·Mat_r;
    both sides are multilinear so the scaling only multiplies them by p^{2n-1}.
    """
    from .corpus import rng_for

    k = 2 * n - 1
    ev = padic_cocycle_evaluator(n)
    out = []
    for i in range(trials):
        rng = rng_for("lazard", seed, n, r, p, i)
        X = [random_integral_matrix(rng, r).map(lambda a: a * p) for _ in range(k)]
        delta = lazard_delta(ev, k, X)
        expected = mpq((-1) ** n, factorial(n - 1)) * primitive_element(n, X)
        out.append(LazardTrial(i, X, delta, expected))
    return out
