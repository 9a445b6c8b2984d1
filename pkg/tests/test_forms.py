import random
import warnings

import pytest
import sympy as sp
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from relchern.corpus import random_form
from relchern.exact import Matrix
from relchern.forms import (Chart, ChartError, IntegrationDegreeWarning, coface, d, endpoint, exterior_d,
                            homotopy_K, integrate_simplex, integrate_simplex_scalar,
                            integrate_simplex_via_cube, interior_product, pullback, pullback_coface,
                            pullback_simplex, wedge)
from relchern.serialize import parse_form

C1 = Chart(1)
C2 = Chart(2)
C3 = Chart(3)
CT = Chart(2, ("t",), ("y",))


def F(text, chart):
    return parse_form(text, chart)


# -- d and wedge ----------------------------------------------------------

def test_d_examples():
    assert d(F("x1", C1)) == F("dx1", C1)
    assert d(F("x1*dx1", C1)).is_zero()
    assert d(F("x1*x2*dx1", C2)) == F("-x1*dx1*dx2", C2)


def test_d_leibniz_against_sympy():
    """d(f dx1) = Σ_j ∂_j f dx_j ∧ dx1, with ∂_j f from sympy."""
    x1, x2 = sp.symbols("x1 x2")
    f = 3 * x1 ** 2 * x2 - x2 ** 3 + sp.Rational(1, 2) * x1 * x2
    w = F("(3*x1**2*x2 - x2**3 + 1/2*x1*x2)*dx1", C2)
    # dx2∧dx1 = -dx1∧dx2
    coeff = -sp.diff(f, x2)
    expected = F(f"({sp.sstr(sp.expand(coeff))})*dx1*dx2", C2)
    assert d(w) == expected


def test_wedge_examples():
    assert wedge(F("dx1", C2), F("dx2", C2)) == -wedge(F("dx2", C2), F("dx1", C2))
    assert wedge(F("x1*dx1", C2), F("x2*dx2", C2)) == F("x1*x2*dx1*dx2", C2)


def test_dx0_elimination():
    assert F("dx0", C2) == F("-dx1 - dx2", C2)


def test_odd_matrix_form_cube_of_diagonal():
    a, b = F("x1*dx1", C2), F("dx2 + x2*dx1", C2)
    z = C2.zero()
    D = Matrix([[a, z], [z, b]])
    assert (D * D * D).is_zero()


def test_chart_mismatch():
    with pytest.raises(ChartError):
        wedge(F("dx1", C1), F("dx1", C2))


@st.composite
def corpus_forms(draw):
    seed = draw(st.integers(0, 10 ** 6))
    p = draw(st.integers(1, 4))
    rng = random.Random(seed)
    chart = Chart(p, ("t",) if rng.random() < 0.5 else (), ("y",), ("eps",))
    return random_form(rng, chart, delta_degree=rng.randint(0, min(3, p)))


@given(corpus_forms())
def test_dd_zero(w):
    assert d(d(w)).is_zero()


def test_dd_zero_seeded_corpus():
    rng = random.Random(11)
    for _ in range(500):
        p = rng.randint(1, 4)
        chart = Chart(p, (), ("y1", "y2"), ("eps",))
        w = random_form(rng, chart, delta_degree=rng.randint(0, min(3, p)))
        assert d(d(w)).is_zero()


@given(corpus_forms(), corpus_forms())
def test_graded_commutativity(a, b):
    if a.chart != b.chart:
        b = random_form(random.Random(0), a.chart)
    for da in a.degrees():
        for db in b.degrees():
            x, y = a.degree_part(da), b.degree_part(db)
            assert wedge(x, y) == wedge(y, x) * (-1) ** (da * db)


# -- integration ----------------------------------------------------------

def test_simplex_integrals():
    assert integrate_simplex_scalar(F("dx1*dx2*dx3", C3)) == mpq(1, 6)
    assert integrate_simplex_scalar(F("dx0*dx1*dx2", C3)) == mpq(-1, 6)


def test_monomial_integral_iterated_oracle():
    x1, x2 = sp.symbols("x1 x2")
    oracle = sp.integrate(sp.integrate(x1 * x2, (x2, 0, 1 - x1)), (x1, 0, 1))
    assert oracle == sp.Rational(1, 24)
    assert integrate_simplex_scalar(F("x1*x2*dx1*dx2", C2)) == mpq(1, 24)


def test_lower_degree_integrates_to_zero_with_warning():
    with pytest.warns(IntegrationDegreeWarning):
        assert integrate_simplex(F("x1*dx1", C2)).is_zero()


def test_integral_agrees_with_cube_on_monomials():
    rng = random.Random(3)
    for _ in range(100):
        p = rng.randint(1, 3)
        chart = Chart(p, (), ("y",))
        mono = "*".join(f"x{i}**{rng.randint(0, 3)}" for i in range(1, p + 1))
        top = "*".join(f"dx{i}" for i in range(1, p + 1))
        w = F(f"{rng.randint(1, 5)}*y**{rng.randint(0, 2)}*{mono}*{top}", chart)
        assert integrate_simplex(w) == integrate_simplex_via_cube(w)


def test_cube_map_on_interval():
    # on Δ¹ the cube map is the identity x1 = t1, so dx1 ↦ dt1
    cube = Chart(0, ("t1",))
    assert pullback(F("dx1", C1), cube, {"x1": cube.var("t1")}) == cube.d("t1")


# -- K, endpoints, interior products -------------------------------------

def test_K_examples():
    ct = Chart(1, ("t",))
    assert homotopy_K(F("t*dt", ct)) == Chart(1).const(mpq(1, 2))
    assert homotopy_K(F("x1*dx1", ct)).is_zero()
    with pytest.raises(ChartError):
        homotopy_K(F("dx1", C1))


def test_K_stokes_example():
    ct = Chart(1, ("t",))
    w = F("t**2*x1*dx1", ct)
    lhs = d(homotopy_K(w)) + homotopy_K(d(w))
    # by hand: d(t²x1dx1) = 2t dt x1 dx1, K of it = 2·(1/2)·x1dx1
    assert lhs == F("x1*dx1", C1)
    assert lhs == endpoint(w, "t", 1) - endpoint(w, "t", 0)


@given(corpus_forms())
def test_K_stokes(w):
    if "t" not in w.chart.intervals:
        w = random_form(random.Random(w.nterms()), w.chart.with_interval("t"))
    assert d(homotopy_K(w)) + homotopy_K(d(w)) == endpoint(w, "t", 1) - endpoint(w, "t", 0)


def test_endpoint_example():
    ct = Chart(1, ("t",))
    assert endpoint(F("t*dx1 + dt", ct), "t", 0).is_zero()


def test_interior_product_examples():
    ct = Chart(1, ("t",))
    assert interior_product(F("dt", ct), "t") == ct.const(1)
    assert interior_product(F("dx1", ct), "t").is_zero()
    assert interior_product(F("dx1*dt", ct), "t") == F("-dx1", ct)


# -- pullbacks ------------------------------------------------------------

def test_coface_kills_delta_generators_in_dim_zero():
    assert pullback_coface(F("dx1", C1), 0).is_zero()


@given(corpus_forms())
def test_pullback_commutes_with_d(w):
    for i in range(w.chart.p + 1):
        assert pullback_coface(d(w), i) == d(pullback_coface(w, i))


@pytest.mark.parametrize("p", [2, 3, 4])
def test_cosimplicial_identities(p):
    rng = random.Random(p)
    w = random_form(rng, Chart(p, (), ("y",)), nterms=4)
    for j in range(p + 1):
        for i in range(j):
            # δ^j δ^i = δ^i δ^{j-1} as maps [p-2] → [p]; pullbacks compose contravariantly
            lhs = pullback_coface(pullback_coface(w, j), i)
            rhs = pullback_coface(pullback_coface(w, i), j - 1)
            assert lhs == rhs


def test_pullback_rejects_nonincreasing():
    with pytest.raises(ValueError):
        pullback_simplex(F("dx1", C2), (1, 0))
