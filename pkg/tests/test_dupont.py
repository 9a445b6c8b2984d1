import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from relchern.corpus import random_cochain, random_form, random_simplicial_form
from relchern.dupont import (CosimplicialElement, SimplicialForm, TruncationError, cosimplicial_delta,
                             dupont_E, dupont_I, dupont_s, h_operator, h_operator_via_pullback)
from relchern.forms import Chart, exterior_d, vertex_pullback
from relchern.serialize import parse_form
from relchern.simplicial import boundary_simplex, nerve_z2, standard_simplex, vertex_map

FIBER = Chart(0, (), ("y1", "y2"))
BASES = {
    "Delta1": lambda: standard_simplex(1, 3),
    "Delta2": lambda: standard_simplex(2, 3),
    "dDelta2": lambda: boundary_simplex(2, 3),
    "BZ2": lambda: nerve_z2(3),
}
_BASE_CACHE = {k: f() for k, f in BASES.items()}


@st.composite
def simplicial_forms(draw):
    X = _BASE_CACHE[draw(st.sampled_from(sorted(BASES)))]
    rng = random.Random(draw(st.integers(0, 10 ** 6)))
    return random_simplicial_form(rng, X, FIBER)


# -- h_(j) ------------------------------------------------------------------

def test_h0_example():
    C1 = Chart(1)
    assert h_operator(0, parse_form("dx1", C1)) == parse_form("-x1", C1)


def test_h_of_function_is_zero():
    C2 = Chart(2, (), ("y",))
    for j in range(3):
        assert h_operator(j, parse_form("x1*x2 + y", C2)).is_zero()


def test_h_vertex_out_of_range():
    with pytest.raises(ValueError):
        h_operator(3, Chart(2).dx(1))


@given(st.integers(0, 10 ** 6), st.integers(1, 3))
def test_h_matches_literal_pullback(seed, p):
    rng = random.Random(seed)
    w = random_form(rng, Chart(p, (), ("y",)), nterms=3)
    for j in range(p + 1):
        assert h_operator(j, w) == h_operator_via_pullback(j, w)


@given(st.integers(0, 10 ** 6), st.integers(1, 3))
def test_h_homotopy_formula(seed, p):
    rng = random.Random(seed)
    w = random_form(rng, Chart(p, (), ("y",)), nterms=3)
    for j in range(p + 1):
        lhs = h_operator(j, exterior_d(w, "delta")) + exterior_d(h_operator(j, w), "delta")
        assert lhs == vertex_pullback(w, j) - w


# -- I, E, s examples ---------------------------------------------------------

def test_I_of_dx1_times_constant():
    X = standard_simplex(1, 1)
    c = parse_form("3*y1 + 2", FIBER)
    w = SimplicialForm(X, FIBER, {(1, "[0,1]"): parse_form("(3*y1 + 2)*dx1", FIBER.with_p(1))})
    assert w.is_compatible()
    assert dupont_I(w).value(1, "[0,1]") == c


def test_E_degree_zero_is_constant_extension():
    X = standard_simplex(2, 2)
    c = parse_form("y1 - 1/2", FIBER)
    a = CosimplicialElement(X, FIBER, {(0, x): c for x in X.nondegenerate[0]})
    Ea = dupont_E(a)
    for p, x, v in Ea.items():
        assert v == parse_form("y1 - 1/2", FIBER.with_p(p))


def test_E_degree_one_on_interval():
    X = standard_simplex(1, 1)
    om = parse_form("y2*dy1", FIBER)
    a = CosimplicialElement(X, FIBER, {(1, "[0,1]"): om})
    assert dupont_E(a).value(1, "[0,1]") == parse_form("dx1*y2*dy1", FIBER.with_p(1))


def test_s_of_delta_degree_zero_vanishes():
    X = standard_simplex(2, 2)
    a = random_cochain(random.Random(1), X, FIBER, 0, 1)
    w = dupont_E(a)
    assert w.bidegrees() <= {(0, 1)}
    assert dupont_s(w).is_zero()


def test_delta_of_constant_telescopes():
    X = standard_simplex(1, 2)
    c = FIBER.const(5)
    a = CosimplicialElement(X, FIBER, {(0, "[0]"): c, (0, "[1]"): c})
    assert not cosimplicial_delta(a).values


def test_normalized_cochains_reject_degenerate_values():
    X = standard_simplex(1, 2)
    with pytest.raises(ValueError):
        CosimplicialElement(X, FIBER, {(1, "[0,0]"): FIBER.const(1)})


def test_truncation_guard():
    X = standard_simplex(1, 2)
    with pytest.raises(TruncationError):
        CosimplicialElement(X, FIBER, {(3, "[0,0,0,1]"): FIBER.const(1)})


@pytest.mark.parametrize("name", sorted(BASES))
def test_delta_squared_zero(name):
    X = _BASE_CACHE[name]
    rng = random.Random(5)
    for k in range(X.N - 1):
        if X.nondegenerate[k]:
            a = random_cochain(rng, X, FIBER, k, 1)
            assert not cosimplicial_delta(cosimplicial_delta(a)).values


def test_two_I_formulas_agree_on_corpus():
    rng = random.Random(99)
    names = sorted(BASES)
    for i in range(100):
        X = _BASE_CACHE[names[i % len(names)]]
        w = random_simplicial_form(rng, X, FIBER)
        # raises if the integral and the h-chain formula disagree
        dupont_I(w, method="both")


# -- the Dupont identities, property-based -----------------------------------

@given(simplicial_forms())
def test_corpus_forms_are_compatible(w):
    assert w.is_compatible()


@given(simplicial_forms())
def test_I_intertwines_differentials(w):
    assert dupont_I(w.d_delta()).restrict(w.N) == cosimplicial_delta(dupont_I(w))
    assert dupont_I(w.d_fiber_signed()) == dupont_I(w).d_fiber()


@given(simplicial_forms())
def test_E_intertwines_and_inverts_I(w):
    a = dupont_I(w)
    Ea = dupont_E(a)
    assert Ea.d_delta() == dupont_E(cosimplicial_delta(a))
    assert dupont_I(Ea) == a
    assert dupont_E(a.d_fiber()) == Ea.d_fiber_signed()


@given(simplicial_forms())
def test_s_is_a_homotopy(w):
    s = dupont_s(w)
    assert dupont_E(dupont_I(w)) - w == dupont_s(w.d_delta()) + s.d_delta()
    assert dupont_s(w.d_fiber_signed()) == s.d_fiber_signed()


# -- naturality along vertex maps ---------------------------------------------

NATURALITY_MAPS = [
    ("coface", standard_simplex(1, 3), lambda v: 2 * v),
    ("boundary", boundary_simplex(2, 3), lambda v: v),
    ("degeneracy", standard_simplex(2, 3), lambda v: min(v, 1)),
]


@pytest.mark.parametrize("name,src,fv", NATURALITY_MAPS, ids=[m[0] for m in NATURALITY_MAPS])
def test_naturality(name, src, fv):
    target = _BASE_CACHE["Delta2"] if name != "degeneracy" else _BASE_CACHE["Delta1"]
    f = vertex_map(src, target, fv)
    rng = random.Random(len(name))
    for _ in range(3):
        w = random_simplicial_form(rng, target, FIBER)
        fw = w.pullback(f)
        assert fw.is_compatible()
        assert dupont_I(fw) == dupont_I(w).pullback(f)
        assert dupont_E(dupont_I(w).pullback(f)) == dupont_E(dupont_I(w)).pullback(f)
        assert dupont_s(fw) == dupont_s(w).pullback(f)


def test_text_form_is_canonical():
    X = standard_simplex(2, 2)
    rng = random.Random(5)
    w = random_simplicial_form(rng, X, FIBER)
    a = dupont_I(w)
    w2 = SimplicialForm(X, FIBER, dict(reversed(list(w.values.items()))))
    assert str(w) == str(w2) and "0x" not in str(w)
    assert str(dupont_I(w2)) == str(a) and "0x" not in str(a)
