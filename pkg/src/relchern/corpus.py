"""Seeded random generators for forms, cochains and simplicial forms."""

from __future__ import annotations

import hashlib
import itertools
import random

from .dupont import CosimplicialElement, SimplicialForm, dupont_E, product_function
from .forms import Chart, Form


def derive_seed(*keys) -> int:
    """Deterministic 64-bit seed from a tuple of keys."""
    h = hashlib.sha256(repr(keys).encode()).digest()
    return int.from_bytes(h[:8], "little")


def rng_for(*keys) -> random.Random:
    return random.Random(derive_seed(*keys))


def random_coeff(rng: random.Random, lo: int = -3, hi: int = 3, den: int = 1):
    from gmpy2 import mpq
    c = 0
    while c == 0:
        c = rng.randint(lo, hi)
    return mpq(c, rng.randint(1, den))


def random_poly_raw(rng, ring, nterms: int, max_deg: int, vars_=None) -> dict:
    vars_ = list(range(ring.nvars)) if vars_ is None else list(vars_)
    nil = set(ring.nil)
    out = {}
    for _ in range(nterms):
        e = [0] * ring.nvars
        deg = rng.randint(0, max_deg)
        for _ in range(deg):
            if not vars_:
                break
            v = rng.choice(vars_)
            if v in nil and e[v] >= 1:
                continue
            e[v] += 1
        out[tuple(e)] = random_coeff(rng, den=2)
    return out


def random_form(rng, chart: Chart, degree: int | None = None, delta_degree: int | None = None,
                fiber_degree: int | None = None, nterms: int = 3, max_deg: int = 2) -> Form:
    """Random form; generator subsets drawn with the requested (Δ, fiber) degrees."""
    p = chart.p
    dgens = list(range(p))
    fgens = list(range(p, chart.ngens))
    comps: dict = {}
    for _ in range(nterms):
        if delta_degree is None and fiber_degree is None:
            deg = rng.randint(0, min(3, chart.ngens)) if degree is None else degree
            if deg > chart.ngens:
                continue
            g = tuple(sorted(rng.sample(range(chart.ngens), deg)))
        else:
            k = delta_degree if delta_degree is not None else rng.randint(0, min(3, p))
            l = fiber_degree if fiber_degree is not None else rng.randint(0, min(2, len(fgens)))
            if k > len(dgens) or l > len(fgens):
                continue
            g = tuple(sorted(rng.sample(dgens, k) + rng.sample(fgens, l)))
        raw = random_poly_raw(rng, chart.ring, 2, max_deg)
        tgt = comps.setdefault(g, {})
        for e, c in raw.items():
            tgt[e] = tgt.get(e, 0) + c
    return Form(chart, {g: {e: c for e, c in r.items() if c} for g, r in comps.items()})


def random_fiber_form(rng, fiber: Chart, l: int, nterms: int = 2, max_deg: int = 2) -> Form:
    if l > fiber.ngens:
        return fiber.zero()
    return random_form(rng, fiber, delta_degree=0, fiber_degree=l, nterms=nterms, max_deg=max_deg)


def random_cochain(rng, X, fiber: Chart, k: int, l: int, density: float = 1.0) -> CosimplicialElement:
    vals = {}
    for x in X.nondegenerate[k]:
        if rng.random() <= density:
            vals[(k, x)] = random_fiber_form(rng, fiber, l)
    return CosimplicialElement(X, fiber, vals)


def _splits(total: int, parts: int):
    return [c for c in itertools.product(range(total + 1), repeat=parts) if sum(c) == total]


def random_simplicial_form(rng, X, fiber: Chart, max_delta: int = 3, max_fiber: int = 2,
                           N: int | None = None) -> SimplicialForm:
    """Compatible form built as a sum of wedge products of E(a_i) and product functions.

    Normalized cochains only exist in degrees with nondegenerate simplices, so the
    Δ-degree of each factor is drawn from those.  A product-function factor
    (Δ-degree 0, polynomial in x) is mixed in half of the time.
    """
    N = X.N if N is None else N
    avail = [k for k in range(min(N, max_delta) + 1) if X.nondegenerate[k]]
    total = None
    for _ in range(rng.randint(1, 2)):
        nf = rng.randint(1, 3)
        ks, budget = [], max_delta
        for _ in range(nf):
            choices = [k for k in avail if k <= budget]
            k = rng.choice(choices)
            ks.append(k)
            budget -= k
        ls = rng.choice(_splits(rng.randint(0, min(max_fiber, fiber.ngens)), nf))
        term = None
        for k, l in zip(ks, ls):
            f = dupont_E(random_cochain(rng, X, fiber, k, l), N)
            term = f if term is None else term.wedge(f)
        if rng.random() < 0.5:
            k = rng.choice([k for k in range(1, N + 1) if X.nondegenerate[k]] or [0])
            term = term.wedge(product_function(random_cochain(rng, X, fiber, k, 0), N))
        total = term if total is None else total + term
    return total


# --------------------------------------------------------------------------
# matrices and cocycles


def random_fiber_poly_form(rng, fiber: Chart, max_deg: int = 1, nterms: int = 2) -> Form:
    """Random 0-form on the fiber, polynomial in the parameters."""
    raw = random_poly_raw(rng, fiber.ring, nterms, max_deg)
    return Form(fiber, {(): {e: c for e, c in raw.items() if c}} if raw else {})


def random_elementary_factors(rng, fiber: Chart, r: int, nfactors: int, blocks=None, max_deg: int = 1) -> list:
    """Elementary factors (i, j, f); with ``blocks`` only block upper-triangular positions are used."""
    pairs = [(i, j) for i in range(r) for j in range(r) if i != j]
    if blocks is not None:
        owner = [b for b, size in enumerate(blocks) for _ in range(size)]
        pairs = [(i, j) for i, j in pairs if owner[i] <= owner[j]]
    out = []
    for _ in range(nfactors):
        i, j = rng.choice(pairs)
        out.append((i, j, random_fiber_poly_form(rng, fiber, max_deg)))
    return out


def random_certified(rng, fiber: Chart, r: int, blocks=None, nfactors: int | None = None, max_deg: int = 1):
    from .chern_weil import certify_elementary

    if r == 1:
        # units of the polynomial ring are constants; use ±1 times a nonzero rational
        c = random_coeff(rng)
        return certify_elementary_scalar(fiber, c)
    k = rng.randint(1, 3) if nfactors is None else nfactors
    return certify_elementary(fiber, r, random_elementary_factors(rng, fiber, r, k, blocks, max_deg))


def certify_elementary_scalar(fiber: Chart, c):
    from .chern_weil import certify_explicit
    return certify_explicit(fiber, [[c]], [[1 / c]])


def random_involution(rng, fiber: Chart, r: int, blocks=None):
    """M = P D P⁻¹ with D = diag(±1), so M² = 1."""
    from .chern_weil import CertifiedMatrix
    from .forms import form_identity

    P = random_certified(rng, fiber, r, blocks)
    signs = [rng.choice([1, -1]) for _ in range(r)]
    if all(s == 1 for s in signs):
        signs[-1] = -1
    D = form_identity(fiber, r)
    D = type(D)([[fiber.const(signs[i]) if i == j else fiber.zero() for j in range(r)] for i in range(r)])
    M = P.matrix * D * P.inverse
    return CertifiedMatrix(M, M, "explicit")


def random_cocycle(rng, X, fiber: Chart, r: int, blocks=None):
    """Random GL_r cocycle on X.

    Bases whose nondegenerate 2-simplices impose conditions are handled by
    construction: a vertex gauge g(u→v) = G_u G_v⁻¹ for sets where every
    triangle is determined by its vertices (Δ-type sets), an involution for the
    nerve of Z/2, and arbitrary edges when there are no nondegenerate triangles.
    """
    from .chern_weil import GLCocycle, vertex_gauge_cocycle

    edges1 = X.nondegenerate[1]
    two = X.nondegenerate[2] if X.N >= 2 else []
    if not two:
        return GLCocycle(X, r, fiber, {x: random_certified(rng, fiber, r, blocks) for x in edges1})
    if X.name == "BZ/2":
        return GLCocycle(X, r, fiber, {"[a]": random_involution(rng, fiber, r, blocks)})
    gauges = {v: random_certified(rng, fiber, r, blocks) for v in X.simplices[0]}
    return vertex_gauge_cocycle(X, r, fiber, gauges)


def random_potential(rng, X, fiber: Chart, r: int, blocks=None) -> dict:
    """Vertex potentials B_v: matrices of fiber 1-forms (block upper triangular if requested)."""
    from .exact import Matrix

    owner = None
    if blocks is not None:
        owner = [b for b, size in enumerate(blocks) for _ in range(size)]
    out = {}
    for v in X.simplices[0]:
        rows = []
        for i in range(r):
            row = []
            for j in range(r):
                if owner is not None and owner[i] > owner[j]:
                    row.append(fiber.zero())
                else:
                    row.append(random_fiber_form(rng, fiber, 1, nterms=1, max_deg=1) if fiber.ngens else fiber.zero())
            rows.append(row)
        out[v] = Matrix(rows)
    return out


def random_matrix_path(rng, q: int, r: int, nfactors: int | None = None, quadratic: float = 0.25):
    """σ: Δ^q → GL_r as a word in elementary matrices e_ij(c·m) with m a monomial in x1..xq.

    Every coordinate occurs in some factor.  One monomial per factor keeps the
    Chern pipeline small while long enough words give nonzero integrands.
    """
    from .chern_weil import MatrixPath, certify_elementary

    chart = Chart(q)
    k = rng.randint(q + 1, q + 3) if nfactors is None else nfactors
    k = max(k, q)
    pairs = [(i, j) for i in range(r) for j in range(r) if i != j]
    vs = list(range(q)) + [rng.randrange(q) for _ in range(k - q)]
    rng.shuffle(vs)
    factors = []
    last = None
    for m in range(k):
        i, j = rng.choice([pq for pq in pairs if pq != last])
        last = (i, j)
        e = [0] * q
        e[vs[m]] += 1
        if rng.random() < quadratic:
            e[rng.randrange(q)] += 1
        factors.append((i, j, Form(chart, {(): {tuple(e): random_coeff(rng, -2, 2)}})))
    return MatrixPath(q, certify_elementary(chart, r, factors))
