"""Verification suites: each one yields a list of :class:`Check` records.

Every suite is deterministic in its configuration; randomness comes only from
seeds derived from ``config.seed`` and the check coordinates.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from math import factorial

from gmpy2 import mpq

from . import chern_weil as cw
from . import padic as pa
from .corpus import (random_certified, random_cochain, random_cocycle, random_matrix_path,
                     random_potential, random_simplicial_form, rng_for)
from .dupont import (cosimplicial_delta, dupont_E, dupont_I, dupont_s, product_function)
from .exact import Matrix, reduce_mod
from .forms import Chart, integrate_simplex_scalar
from .simplicial import boundary_simplex, nerve_z2, standard_simplex, vertex_map

SUITES = ("dupont", "beta", "simplex", "chern_weil", "relative", "explicit", "line_bundle",
          "lazard", "nu", "padic_log", "factor2")


@dataclass(frozen=True)
class SuiteConfig:
    suite: str
    seed: int = 0
    max_level: int = 4
    n: int | None = None
    r: int | None = None
    p: int | None = None
    prec: int = 4
    rho: str = "2"
    trials: int | None = None
    out: str | None = None
    format: str = "json"
    timing: bool = False

    def __post_init__(self):
        if self.suite not in SUITES + ("all",):
            raise ValueError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES + ('all',))}")
        if self.format not in ("json", "csv"):
            raise ValueError("format must be json or csv")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def limits(self) -> dict:
        d = asdict(self)
        for k in ("out", "format", "timing"):
            d.pop(k)
        return d


@dataclass
class Check:
    id: str
    inputs_digest: str
    expected: str
    actual: str
    verdict: str
    wall_time: float | None = field(default=None, compare=False)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def digest(obj) -> str:
    text = json.dumps(obj, sort_keys=True, default=str, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def equality_check(cid: str, inputs, lhs, rhs) -> Check:
    """Exact comparison; the report carries short digests of both sides."""
    ok = lhs == rhs
    return Check(cid, digest(inputs), _show(rhs), _show(lhs), "pass" if ok else "fail")


def value_check(cid: str, inputs, expected, actual) -> Check:
    ok = expected == actual
    return Check(cid, digest(inputs), str(expected), str(actual), "pass" if ok else "fail")


def predicate_check(cid: str, inputs, ok: bool, detail: str = "") -> Check:
    return Check(cid, digest(inputs), "true", "true" if ok else f"false {detail}".strip(), "pass" if ok else "fail")


def _show(v) -> str:
    s = str(v)
    if len(s) <= 60:
        return s
    return "sha256:" + hashlib.sha256(s.encode()).hexdigest()[:16]


# --------------------------------------------------------------------------
# dupont


DUPONT_FIBER = Chart(0, (), ("y1", "y2"))


def dupont_bases(N: int) -> list:
    return [standard_simplex(1, N), standard_simplex(2, N), standard_simplex(3, N),
            boundary_simplex(2, N), nerve_z2(N)]


def dupont_case(X, seed: int, index: int, fiber: Chart = DUPONT_FIBER, prefix: str = "dupont") -> list:
    rng = rng_for("dupont", seed, X.name, index)
    w = random_simplicial_form(rng, X, fiber)
    tag = {"base": X.name, "N": X.N, "seed": seed, "index": index}
    cid = f"{prefix}/{X.name}/{index}"
    out = []
    Iw = dupont_I(w, method="both")
    a = Iw
    Ea = dupont_E(a, X.N)
    out.append(equality_check(f"{cid}/I_dDelta", tag, dupont_I(w.d_delta()).restrict(X.N), cosimplicial_delta(Iw)))
    out.append(equality_check(f"{cid}/dDelta_E", tag, Ea.d_delta(), dupont_E(cosimplicial_delta(a), X.N)))
    out.append(equality_check(f"{cid}/IE", tag, dupont_I(Ea), a))
    s = dupont_s(w)
    lhs = Ea - w
    rhs = dupont_s(w.d_delta()) + s.d_delta()
    out.append(equality_check(f"{cid}/EI_homotopy", tag, lhs, rhs))
    # the same operators against the fiber differential
    dw = w.d_fiber_signed()
    out.append(equality_check(f"{cid}/I_dX", tag, dupont_I(dw), Iw.d_fiber()))
    out.append(equality_check(f"{cid}/E_dX", tag, dupont_E(a.d_fiber(), X.N), Ea.d_fiber_signed()))
    out.append(equality_check(f"{cid}/s_dX", tag, dupont_s(dw), s.d_fiber_signed()))
    if index % 10 == 0:
        # compatibility over every (degenerate) simplex is the costly part; sample it
        out.append(predicate_check(f"{cid}/compatible", tag,
                                   w.is_compatible() and s.is_compatible() and Ea.is_compatible()))
    return out


def suite_dupont(cfg: SuiteConfig) -> list:
    per_base = 60 if cfg.trials is None else cfg.trials
    out = []
    for X in dupont_bases(cfg.max_level):
        for i in range(per_base):
            out.extend(dupont_case(X, cfg.seed, i))
    return out


# --------------------------------------------------------------------------
# tables


def suite_beta(cfg: SuiteConfig) -> list:
    top = cfg.n or 5
    return [value_check(f"beta/n={n}", {"n": n}, cw.beta_closed_form(n), cw.beta_integral(n))
            for n in range(1, top + 1)]


def simplex_volume_forms(n: int):
    q = 2 * n - 1
    ch = Chart(q)
    top = ch.const(1)
    for i in range(1, q + 1):
        top = top * ch.dx(i)
    with_x0 = ch.const(1)
    for i in range(0, q):
        with_x0 = with_x0 * ch.dx(i)
    return top, with_x0


def suite_simplex(cfg: SuiteConfig) -> list:
    out = []
    for n in range(1, (cfg.n or 3) + 1):
        top, with_x0 = simplex_volume_forms(n)
        vol = mpq(1, factorial(2 * n - 1))
        out.append(value_check(f"simplex/n={n}/dx1..dx{2 * n - 1}", {"n": n}, vol, integrate_simplex_scalar(top)))
        out.append(value_check(f"simplex/n={n}/dx0..dx{2 * n - 2}", {"n": n}, -vol, integrate_simplex_scalar(with_x0)))
    return out


# --------------------------------------------------------------------------
# chern-weil


CW_FIBER = Chart(0, (), ("y1", "y2"))
CW_WIDE_FIBER = Chart(0, (), ("y1", "y2", "y3", "y4"))


def cw_bundle(seed: int, i: int):
    """The i-th seeded block upper-triangular bundle with vertex potentials."""
    rng = rng_for("chern_weil", seed, i)
    if i % 10 == 9:
        X, fiber, r = standard_simplex(2, 2), CW_WIDE_FIBER, 2
    else:
        X = [standard_simplex(1, 2), standard_simplex(2, 2), boundary_simplex(2, 2), nerve_z2(2)][i % 4]
        fiber, r = CW_FIBER, 1 + (i // 4) % 4
    blocks = None if r == 1 else ((1, r - 1) if i % 2 else (r // 2, r - r // 2))
    E = random_cocycle(rng, X, fiber, r, blocks)
    B = random_potential(rng, X, fiber, r, blocks) if rng.random() < 0.7 else None
    twist = product_function(random_cochain(rng, X, fiber, 1, 0), X.N)
    nil = Matrix([[fiber.const(1) if (a == 0 and b == r - 1 and r > 1) else fiber.zero() for b in range(r)]
                  for a in range(r)])
    A = {v: random_certified(rng, fiber, r) for v in X.simplices[0]}
    # the coordinate twist is drawn for every bundle (same stream) but applied on
    # the narrow fiber only; on four parameters Ch_3(α^*Γ) grows to ~10^5 terms
    twisted = r > 1 and fiber is CW_FIBER
    alpha = cw.vertexwise_trivialization(X, r, fiber, A, twist if twisted else None, nil if twisted else None)
    return X, fiber, r, blocks, E, B, alpha


def suite_chern_weil(cfg: SuiteConfig) -> list:
    count = 50 if cfg.trials is None else cfg.trials
    nmax = cfg.n or 3
    out = []
    for i in range(count):
        X, fiber, r, blocks, E, B, alpha = cw_bundle(cfg.seed, i)
        if cfg.r is not None and r > cfg.r:
            continue
        G = cw.standard_connection(E, B)
        tag = {"seed": cfg.seed, "bundle": i, "base": X.name, "r": r, "blocks": blocks}
        cid = f"chern_weil/{i}/{X.name}/r={r}"
        out.append(predicate_check(f"{cid}/gauge_law", tag, not G.gauge_defects()))
        out.append(predicate_check(f"{cid}/connection_compatible", tag, not G.compatibility_defects()))
        out.append(predicate_check(f"{cid}/conjugation", tag, not cw.conjugation_defects(G)))
        for n in range(1, nmax + 1):
            ch = cw.chern_character_form(G, n)
            out.append(predicate_check(f"{cid}/n={n}/closed", tag, ch.d().is_zero()))
            out.append(predicate_check(f"{cid}/n={n}/compatible", tag, ch.is_compatible()))
            out.append(predicate_check(f"{cid}/n={n}/index_independent", tag, not cw.index_independence_defects(G, n)))
            if blocks is not None:
                out.append(predicate_check(f"{cid}/n={n}/whitney", tag, not cw.whitney_defects(E, blocks, n, B)))
            out.append(predicate_check(f"{cid}/n={n}/gauge_invariant", tag, not cw.gauge_invariance_defects(G, alpha, n, ch)))
    return out


# --------------------------------------------------------------------------
# relative classes


REL_FIBER = Chart(0, (), ("y1", "y2"))


def rel_bundle(seed: int, i: int):
    rng = rng_for("relative", seed, i)
    X = [standard_simplex(1, 2), standard_simplex(2, 2), boundary_simplex(2, 2), nerve_z2(2)][i % 4]
    r = 1 + (i // 4) % 2
    fiber = REL_FIBER
    E = random_cocycle(rng, X, fiber, r)
    A = {v: random_certified(rng, fiber, r) for v in X.simplices[0]}
    alpha = cw.vertexwise_trivialization(X, r, fiber, A)
    F = alpha.act(E)
    BE, BF, BF2 = (random_potential(rng, X, fiber, r) for _ in range(3))
    return X, fiber, r, E, F, alpha, BE, BF, BF2


def naturality_maps(X):
    """Corpus simplicial maps into X (source sets built at the same truncation)."""
    N = X.N
    if X.name == "Delta[2]":
        return [("d1", vertex_map(standard_simplex(1, N), X, lambda v: 2 * v)),
                ("boundary", vertex_map(boundary_simplex(2, N), X, lambda v: v)),
                ("s0s1", vertex_map(standard_simplex(2, N), X, lambda v: min(v, 1)))]
    if X.name == "Delta[1]":
        return [("s", vertex_map(standard_simplex(2, N), X, lambda v: 0 if v == 0 else 1))]
    return []


def pullback_potential(B: dict, f) -> dict:
    return {v: B[f(v, 0)] for v in f.source.simplices[0]}


def suite_relative(cfg: SuiteConfig) -> list:
    count = 8 if cfg.trials is None else cfg.trials
    nmax = cfg.n or 2
    out = []
    for i in range(count):
        X, fiber, r, E, F, alpha, BE, BF, BF2 = rel_bundle(cfg.seed, i)
        GE, GF = cw.standard_connection(E, BE), cw.standard_connection(F, BF)
        GE2, GF2 = cw.standard_connection(E), cw.standard_connection(F, BF2)
        tag = {"seed": cfg.seed, "bundle": i, "base": X.name, "r": r}
        cid = f"relative/{i}/{X.name}/r={r}"
        for n in range(1, nmax + 1):
            rel = cw.relative_chern_form(GE, GF, alpha, n)
            diff = cw.chern_character_form(GE, n) - cw.chern_character_form(GF, n)
            out.append(equality_check(f"{cid}/n={n}/boundary", tag, rel.d(), diff))
            out.append(predicate_check(f"{cid}/n={n}/compatible", tag, rel.is_compatible()))
            ok, nonzero, flipped_holds = True, False, True
            for p in range(X.N + 1):
                for x in X.nondegenerate[p]:
                    res = cw.two_parameter_check(GE, GF, GE2, GF2, alpha, n, p, x)
                    ok = ok and res["lhs"] == res["rhs"]
                    nonzero = nonzero or bool(res["lhs"])
                    flipped_holds = flipped_holds and res["lhs"] == res["flipped"]
            out.append(predicate_check(f"{cid}/n={n}/two_parameter", tag, ok))
            if nonzero:
                # the opposite overall sign is genuinely wrong wherever the form is nonzero
                out.append(predicate_check(f"{cid}/n={n}/two_parameter_opposite_sign_fails", tag, not flipped_holds))
            for name, f in naturality_maps(X):
                Ef, Ff = E.pullback(f), F.pullback(f)
                af = alpha.pullback(f)
                relf = cw.relative_chern_form(cw.standard_connection(Ef, pullback_potential(BE, f)),
                                              cw.standard_connection(Ff, pullback_potential(BF, f)), af, n)
                good = all(relf.value(p, x) == rel.value(p, f(x, p))
                           for p in range(f.source.N + 1) for x in f.source.simplices[p])
                out.append(predicate_check(f"{cid}/n={n}/naturality/{name}", tag, good))
    return out


# --------------------------------------------------------------------------
# explicit cocycles


EXPLICIT_SHAPES = {1: (2, 3), 2: (2, 3), 3: (3, 4)}


def golden_path() -> cw.MatrixPath:
    """σ = e12(x1)·e21(x2)·e12(x3) on Δ³."""
    return cw.MatrixPath.elementary(3, 2, [(0, 1, "x1"), (1, 0, "x2"), (0, 1, "x3")])


def explicit_corpus(seed: int, trials: int, ns=(1, 2, 3)):
    for n in ns:
        for r in EXPLICIT_SHAPES[n]:
            for i in range(trials):
                yield n, r, i, random_matrix_path(rng_for("explicit", seed, n, r, i), 2 * n - 1, r)


def suite_explicit(cfg: SuiteConfig) -> list:
    trials = 6 if cfg.trials is None else cfg.trials
    ns = (cfg.n,) if cfg.n else (1, 2, 3)
    out = []
    cases = list(explicit_corpus(cfg.seed, trials, ns))
    if 2 in ns:
        cases.append((2, 2, "golden", golden_path()))
    for n, r, i, sigma in cases:
        tag = {"seed": cfg.seed, "n": n, "r": r, "index": i}
        cid = f"explicit/n={n}/r={r}/{i}"
        a, b = cw.explicit_cocycle_forms(sigma, n)
        out.append(equality_check(f"{cid}/forms", tag, a, b))
        out.append(value_check(f"{cid}/value", tag, cw.explicit_cocycle(sigma, n), cw.explicit_cocycle_via_chern(sigma, n)))
        R, formula = cw.explicit_curvature(sigma)
        out.append(equality_check(f"{cid}/curvature", tag, R, formula))
    return out


def suite_factor2(cfg: SuiteConfig) -> list:
    trials = 6 if cfg.trials is None else cfg.trials
    ns = (cfg.n,) if cfg.n else (1, 2)
    out = []
    cases = list(explicit_corpus(cfg.seed, trials, ns))
    if 2 in ns:
        cases.append((2, 2, "golden", golden_path()))
    for n, r, i, sigma in cases:
        lhs = cw.evaluate_invariant_cocycle(cw.borel_constant(n), 2 * n - 1, sigma) / 2
        rhs = (-1) ** (n - 1) * cw.explicit_cocycle(sigma, n)
        out.append(value_check(f"factor2/n={n}/r={r}/{i}", {"seed": cfg.seed, "n": n, "r": r, "index": i}, rhs, lhs))
    return out


def suite_line_bundle(cfg: SuiteConfig) -> list:
    E, G = cw.line_bundle_fixture()
    got, want = cw.line_bundle_check(E, G)
    return [equality_check("line_bundle/int_Ch1", {"g": "1+eps*y"}, got, want),
            value_check("line_bundle/Gamma0", {"g": "1+eps*y"}, "-x1*eps*dy", str(G.gamma(1, "[0,1]", 0)[0, 0]))]


# --------------------------------------------------------------------------
# p-adic


LAZARD_GRID = [(n, r, p) for n in (1, 2) for r in (2, 3) for p in (3, 5)]


def suite_lazard(cfg: SuiteConfig) -> list:
    trials = 20 if cfg.trials is None else cfg.trials
    grid = [(n, r, p) for n, r, p in LAZARD_GRID
            if (cfg.n is None or n == cfg.n) and (cfg.r is None or r == cfg.r) and (cfg.p is None or p == cfg.p)]
    if not grid:
        grid = [(cfg.n or 1, cfg.r or 2, cfg.p or 5)]
    out = []
    for n, r, p in grid:
        for t in pa.verify_lazard_theorem(n, r, p, trials, cfg.seed):
            X = [[[str(a) for a in row] for row in m.rows] for m in t.X]
            out.append(value_check(f"lazard/n={n}/r={r}/p={p}/{t.index}", {"X": X, "n": n}, t.expected, t.delta))
        if n == 2:
            rng = rng_for("lazard-linear", cfg.seed, r, p)
            Xs = [pa.random_integral_matrix(rng, r) for _ in range(3)]
            out.append(predicate_check(f"lazard/n=2/r={r}/p={p}/linear_part", {"seed": cfg.seed}, pa.linear_part_check(Xs)))
    return out


def suite_nu(cfg: SuiteConfig) -> list:
    trials = 50 if cfg.trials is None else cfg.trials
    primes = (cfg.p,) if cfg.p else (3, 5)
    rho = mpq(cfg.rho)
    out = []
    for i in range(trials):
        p = primes[i % len(primes)]
        rng = rng_for("nu", cfg.seed, i)
        q, r = rng.randint(1, 3), rng.randint(1, 3)
        gs = pa.random_unit_tuple(rng, q, r, p)
        nu, inv, K = pa.nu_inverse(gs, cfg.prec, rho)
        _, _, cert = pa.nu_map(gs, rho)
        tag = {"seed": cfg.seed, "index": i, "p": p, "q": q, "r": r}
        out.append(Check(f"nu/{i}/p={p}/norm", digest(tag), f"<= {cert.bound}", str(cert.norm_h),
                         "pass" if cert.ok else "fail"))
        out.append(predicate_check(f"nu/{i}/p={p}/inverse_mod_p^{cfg.prec}", tag,
                                   pa.matrix_congruent_identity(nu * inv, p, cfg.prec)))
    return out


def suite_padic_log(cfg: SuiteConfig) -> list:
    primes = (cfg.p,) if cfg.p else (5, 7)
    M = cfg.prec
    out = []
    for p in primes:
        g = pa.UnitGroupElement.from_rows([[1 + p]], p)
        val = pa.padic_cocycle([g], 1, M, mpq(cfg.rho))
        oracle = reduce_mod(-pa.log_one_plus(p, p, M), p, M)
        out.append(value_check(f"padic_log/p={p}/M={M}", {"p": p, "M": M}, oracle, val.value))
    return out


# --------------------------------------------------------------------------


RUNNERS = {
    "dupont": suite_dupont, "beta": suite_beta, "simplex": suite_simplex, "chern_weil": suite_chern_weil,
    "relative": suite_relative, "explicit": suite_explicit, "line_bundle": suite_line_bundle,
    "lazard": suite_lazard, "nu": suite_nu, "padic_log": suite_padic_log, "factor2": suite_factor2,
}


def run_checks(cfg: SuiteConfig) -> list:
    import time

    names = SUITES if cfg.suite == "all" else (cfg.suite,)
    out = []
    for name in names:
        t0 = time.perf_counter()
        checks = RUNNERS[name](cfg)
        if cfg.timing:
            per = (time.perf_counter() - t0) / max(1, len(checks))
            for c in checks:
                c.wall_time = round(per, 6)
        out.extend(checks)
    return out
