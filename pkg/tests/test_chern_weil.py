import itertools

import pytest
import sympy as sp
from gmpy2 import mpq

from relchern import chern_weil as cw
from relchern.corpus import random_cocycle, random_matrix_path, random_potential, rng_for
from relchern.exact import CertificateError, Matrix
from relchern.forms import Chart, homotopy_K, matrix_d, wedge
from relchern.serialize import parse_form
from relchern.simplicial import boundary_simplex, nerve_z2, standard_simplex
from relchern.suites import golden_path, rel_bundle

FIBER = Chart(0, (), ("y",), ())


def elementary_cocycle(X, fiber=FIBER):
    v0, v1, v2 = X.simplices[0]
    gauges = {
        v0: cw.certify_elementary(fiber, 2, [(0, 1, "y")]),
        v1: cw.certify_elementary(fiber, 2, [(1, 0, "2*y"), (0, 1, "-1")]),
        v2: cw.certify_elementary(fiber, 2, [(0, 1, "y**2")]),
    }
    return cw.vertex_gauge_cocycle(X, 2, fiber, gauges)


# ---------------------------------------------------------------- certificates


def test_certify_unipotent_and_refusal():
    ch = Chart(1)
    m = cw.certify_unipotent(ch, [["1", "x1"], ["0", "1"]])
    assert m.matrix * m.inverse == Matrix.identity(2, ch.const(1), ch.zero())
    with pytest.raises(CertificateError):
        cw.certify_unipotent(ch, [["1 - x1", "0"], ["0", "1"]])


def test_elementary_product_inverse():
    ch = Chart(2)
    m = cw.certify_elementary(ch, 3, [(0, 1, "x1"), (2, 0, "x2**2"), (1, 2, "3")])
    assert m.matrix * m.inverse == Matrix.identity(3, ch.const(1), ch.zero())
    assert m.inverse * m.matrix == Matrix.identity(3, ch.const(1), ch.zero())


def test_cocycle_condition_enforced():
    X = standard_simplex(2, 2)
    E = elementary_cocycle(X)
    assert E.cocycle_defects() == []
    edges = dict(E.edges)
    edges["[0,2]"] = cw.certify_elementary(FIBER, 2, [(0, 1, "5")])
    with pytest.raises(cw.CocycleError):
        cw.GLCocycle(X, 2, FIBER, edges)


# ---------------------------------------------------------------- connections


def test_trivial_cocycle_is_flat():
    X = standard_simplex(2, 3)
    G = cw.standard_connection(cw.trivial_cocycle(X, 2, FIBER))
    for p in range(4):
        for x in X.simplices[p]:
            for i in range(p + 1):
                assert G.gamma(p, x, i) == Matrix.identity(2, G.chart(p).zero(), G.chart(p).zero())
                assert all(not a for row in G.curvature(p, x, i).rows for a in row)
    assert cw.chern_character_form(G, 1).is_zero()
    assert cw.chern_character_form(G, 2).is_zero()


def test_line_bundle_connection():
    E, G = cw.line_bundle_fixture()
    ch = G.chart(1)
    assert G.gamma(1, "[0,1]", 0)[0, 0] == parse_form("-x1*eps*dy", ch)
    assert G.gamma(1, "[0,1]", 1)[0, 0] == parse_form("(1 - x1)*eps*dy", ch)
    lhs, rhs = cw.line_bundle_check(E, G)
    assert lhs == rhs
    assert rhs == parse_form("-eps*dy", E.fiber)


@pytest.mark.parametrize("X", [standard_simplex(2, 3), boundary_simplex(2, 3)], ids=["Delta2", "dDelta2"])
def test_gauge_law(X):
    E = elementary_cocycle(X)
    G = cw.standard_connection(E)
    assert G.gauge_defects() == []
    assert G.compatibility_defects() == []
    # the law written out by hand on the top simplex
    p, x = 2, X.simplices[2][-1]
    ch = G.chart(p)
    for i, j in itertools.permutations(range(3), 2):
        g = E.transition(p, x, j, i).lift(ch)
        assert G.gamma(p, x, i) == g.inverse * matrix_d(g.matrix) + g.inverse * G.gamma(p, x, j) * g.matrix


def test_gauge_law_with_potential():
    X = standard_simplex(2, 2)
    rng = rng_for("test", "potential")
    E = elementary_cocycle(X)
    G = cw.standard_connection(E, random_potential(rng, X, FIBER, 2))
    assert G.gauge_defects() == []
    assert cw.conjugation_defects(G, everywhere=True) == []


def test_conjugation_and_index_independence():
    X = nerve_z2(2)
    rng = rng_for("test", "z2")
    fiber = Chart(0, (), ("y", "z"), ())
    E = random_cocycle(rng, X, fiber, 2)
    G = cw.standard_connection(E, random_potential(rng, X, fiber, 2))
    assert cw.conjugation_defects(G, everywhere=True) == []
    for n in (1, 2):
        assert cw.index_independence_defects(G, n, everywhere=True) == []
        Ch = cw.chern_character_form(G, n)
        assert Ch.d().is_zero()
        assert Ch.is_compatible()


def test_whitney_sum_blocks():
    X = standard_simplex(2, 2)
    rng = rng_for("test", "whitney")
    fiber = Chart(0, (), ("y", "z"), ())
    E = random_cocycle(rng, X, fiber, 3, blocks=(1, 2))
    B = random_potential(rng, X, fiber, 3, blocks=(1, 2))
    for n in (1, 2):
        assert cw.whitney_defects(E, (1, 2), n, B) == []


def test_identity_trivialization_leaves_gamma():
    X = standard_simplex(2, 2)
    E = elementary_cocycle(X)
    G = cw.standard_connection(E)
    P = cw.pullback_connection(cw.identity_trivialization(X, 2, FIBER), G)
    for p in range(3):
        for x in X.simplices[p]:
            assert P.gammas(p, x) == G.gammas(p, x)


def test_unipotent_gauge_of_zero_is_flat():
    X = standard_simplex(1, 2)
    triv = cw.trivial_cocycle(X, 2, FIBER)
    G = cw.standard_connection(triv)
    v0, v1 = X.simplices[0]
    data = {v0: cw.certify_unipotent(FIBER, [["1", "y"], ["0", "1"]]),
            v1: cw.certify_unipotent(FIBER, [["1", "y**2"], ["0", "1"]])}
    alpha = cw.vertexwise_trivialization(X, 2, FIBER, data)
    # α^*Γ is a connection on the cocycle A_u⁻¹ A_v
    target = cw.vertex_gauge_cocycle(X, 2, FIBER, {v: a.inv() for v, a in data.items()})
    P = cw.pullback_connection(alpha, G, target)
    for p in range(3):
        for x in X.simplices[p]:
            R = P.curvature(p, x)
            assert all(not a for row in R.rows for a in row)
    assert P.gauge_defects() == []


def test_gauge_invariance_of_ch():
    X = standard_simplex(2, 2)
    rng = rng_for("test", "gauge-inv")
    E = elementary_cocycle(X)
    G = cw.standard_connection(E, random_potential(rng, X, FIBER, 2))
    data = {v: cw.certify_elementary(FIBER, 2, [(0, 1, f"{k + 1}*y"), (1, 0, "1")])
            for k, v in enumerate(X.simplices[0])}
    alpha = cw.vertexwise_trivialization(X, 2, FIBER, data)
    for n in (1, 2):
        assert cw.gauge_invariance_defects(G, alpha, n) == []


# ---------------------------------------------------------------- relative forms


def test_relative_of_equal_connections_vanishes():
    X = standard_simplex(2, 2)
    G = cw.standard_connection(elementary_cocycle(X))
    for n in (1, 2):
        rel = cw.relative_chern_form(G, G, None, n)
        assert rel.is_zero()
        assert rel.d().is_zero()


def test_relative_n1_is_trace_difference():
    # Tr of a square of matrix 1-forms vanishes, so K Ch_1(tA + (1-t)B) = Tr(A - B)
    X, fiber, r, E, F, alpha, BE, BF, _ = rel_bundle(0, 1)
    GE, GF = cw.standard_connection(E, BE), cw.standard_connection(F, BF)
    pulled = cw.pullback_connection(alpha, GF, E)
    rel = cw.relative_chern_form(GE, GF, alpha, 1)
    for p in range(X.N + 1):
        for x in X.nondegenerate[p]:
            assert rel.value(p, x) == GE.gamma(p, x).trace() - pulled.gamma(p, x).trace()


@pytest.mark.parametrize("i", [0, 3])
def test_relative_boundary_identity(i):
    X, fiber, r, E, F, alpha, BE, BF, _ = rel_bundle(0, i)
    GE, GF = cw.standard_connection(E, BE), cw.standard_connection(F, BF)
    for n in (1, 2):
        rel = cw.relative_chern_form(GE, GF, alpha, n)
        assert rel.d() == cw.chern_character_form(GE, n) - cw.chern_character_form(GF, n)


def test_two_parameter_relation():
    X, fiber, r, E, F, alpha, BE, BF, BF2 = rel_bundle(0, 2)
    GE, GF = cw.standard_connection(E, BE), cw.standard_connection(F, BF)
    GE2, GF2 = cw.standard_connection(E), cw.standard_connection(F, BF2)
    nonzero = False
    for p in range(X.N + 1):
        for x in X.nondegenerate[p]:
            res = cw.two_parameter_check(GE, GF, GE2, GF2, alpha, 2, p, x)
            assert res["lhs"] == res["rhs"]
            if res["lhs"]:
                nonzero = True
                assert res["lhs"] != res["flipped"]
    assert nonzero


# ---------------------------------------------------------------- explicit cocycles


def sympy_trace_integral(factors, q):
    """∫_{Δ^q} Tr((σ⁻¹dσ)^q) for σ a product of elementary 2×2 matrices, computed in sympy."""
    xs = sp.symbols(f"x1:{q + 1}")
    sigma = sp.eye(2)
    for i, j, k in factors:
        e = sp.eye(2)
        e[i, j] = xs[k]
        sigma = sigma * e
    inv = sigma.inv()
    A = [sp.simplify(inv * sigma.diff(v)) for v in xs]
    top = 0
    for perm in itertools.permutations(range(q)):
        sign = sp.combinatorics.Permutation(list(perm)).signature()
        prod = sp.eye(2)
        for k in perm:
            prod = prod * A[k]
        top += sign * prod.trace()
    top = sp.expand(top)
    # iterated integral over x_k >= 0, x_1 + ... + x_q <= 1
    res = top
    for k in reversed(range(q)):
        bound = 1 - sum(xs[:k])
        res = sp.integrate(res, (xs[k], 0, bound))
    return sp.Rational(res)


def test_golden_explicit_cocycle():
    sigma = golden_path()
    integral = sympy_trace_integral([(0, 1, 0), (1, 0, 1), (0, 1, 2)], 3)
    assert integral == sp.Rational(-1, 4)
    expected = sp.Rational(1, 6) * integral  # (-1)^2 1!/3!
    assert cw.trace_word_integral(sigma, 3) == mpq(-1, 4)
    assert cw.explicit_cocycle(sigma, 2) == mpq(expected.p, expected.q) == mpq(-1, 24)
    assert cw.explicit_cocycle_via_chern(sigma, 2) == mpq(-1, 24)


def test_explicit_pipelines_agree_pointwise():
    for n, r in [(1, 2), (2, 2), (2, 3)]:
        for i in range(2):
            sigma = random_matrix_path(rng_for("test", "explicit", n, r, i), 2 * n - 1, r)
            a, b = cw.explicit_cocycle_forms(sigma, n)
            assert a == b
            R, formula = cw.explicit_curvature(sigma)
            assert R == formula


def test_explicit_degenerate_paths():
    diag = cw.MatrixPath(3, cw.certify_explicit(Chart(3), [["2", "0"], ["0", "1"]], [["1/2", "0"], ["0", "1"]]))
    assert cw.explicit_cocycle(diag, 2) == 0
    one = cw.MatrixPath.elementary(1, 2, [(0, 1, "x1")])
    assert cw.explicit_cocycle(one, 1) == 0
    assert cw.explicit_cocycle_via_chern(one, 1) == 0
    with pytest.raises(ValueError):
        cw.explicit_cocycle(one, 2)


@pytest.mark.parametrize("n,value", [(1, mpq(1)), (2, mpq(-1, 6)), (3, mpq(1, 30)), (4, mpq(-1, 140)), (5, mpq(1, 630))])
def test_beta_table(n, value):
    assert cw.beta_integral(n) == value
    assert cw.beta_closed_form(n) == value


def test_factor_two_and_linearity():
    for n in (1, 2):
        sigma = golden_path() if n == 2 else cw.MatrixPath.elementary(1, 2, [(0, 1, "x1"), (1, 0, "x1")])
        bo = cw.evaluate_invariant_cocycle(cw.borel_constant(n), 2 * n - 1, sigma)
        assert bo / 2 == (-1) ** (n - 1) * cw.explicit_cocycle(sigma, n)
    sigma = golden_path()
    for c in (mpq(1), mpq(-3, 7), mpq(5)):
        assert cw.evaluate_invariant_cocycle(2 * c, 3, sigma) == 2 * cw.evaluate_invariant_cocycle(c, 3, sigma)


def test_constants():
    assert cw.explicit_constant(1) == -1
    assert cw.explicit_constant(2) == mpq(1, 6)
    assert cw.borel_constant(2) == mpq(-1, 3)


def test_homotopy_operator_on_t_forms():
    ch = Chart(0, ("t",))
    t = ch.var("t")
    assert homotopy_K(wedge(t * t, ch.d("t")), "t") == Chart(0).const(mpq(1, 3))
    assert homotopy_K(wedge(t ** 3 + t, ch.d("t")), "t") == Chart(0).const(mpq(3, 4))
