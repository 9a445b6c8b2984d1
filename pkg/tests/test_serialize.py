import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from relchern.corpus import random_form
from relchern.exact import Ring
from relchern.forms import Chart
from relchern.serialize import ParseError, parse_form, parse_poly, poly_to_str


def test_poly_round_trip_example():
    R = Ring.make(2, (), ("y",), ("eps",))
    f = parse_poly("3/4*x1**2*y - eps*x2 + 5", R)
    assert parse_poly(poly_to_str(f), R) == f


def test_form_text():
    C = Chart(2, (), ("y",))
    w = parse_form("x1*dx1*dy - 2*dx2", C)
    assert str(w) in {"-2*dx2 + x1*dx1*dy", "x1*dx1*dy - 2*dx2"}
    assert parse_form(str(w), C) == w


@given(st.integers(0, 10 ** 6), st.integers(0, 3))
def test_form_round_trip(seed, p):
    rng = random.Random(seed)
    chart = Chart(p, ("t",), ("y1", "y2"), ("eps",))
    w = random_form(rng, chart, nterms=4)
    assert parse_form(str(w), chart) == w


@pytest.mark.parametrize("text", ["x1 +", "z", "x1/x2", "x1**-1", "x1**(1/2)", "import os", "dq"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_form(text, Chart(2))
