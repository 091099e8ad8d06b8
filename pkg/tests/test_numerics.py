import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from frolov.numerics import (
    NeumaierSum,
    compensated_product,
    row_products_compensated,
    two_prod,
    two_sum,
    vandermonde_det,
)

finite = st.floats(allow_nan=False, allow_infinity=False, min_value=-1e30, max_value=1e30)
factors = st.floats(min_value=2.0**-30, max_value=2.0**30).map(lambda x: x)


@given(finite, finite)
def test_two_sum_is_error_free(a, b):
    s, e = two_sum(a, b)
    assert Fraction(s) + Fraction(e) == Fraction(a) + Fraction(b)


@given(
    st.floats(min_value=1e-60, max_value=1e60),
    st.floats(min_value=1e-60, max_value=1e60),
    st.booleans(),
    st.booleans(),
)
def test_two_prod_is_error_free(a, b, neg_a, neg_b):
    if neg_a:
        a = -a
    if neg_b:
        b = -b
    p, e = two_prod(a, b)
    assert Fraction(p) + Fraction(e) == Fraction(a) * Fraction(b)


@given(st.lists(factors, min_size=1, max_size=12))
def test_compensated_product_keeps_thirteen_digits(xs):
    got = compensated_product(xs)
    exact = math.prod([Fraction(x) for x in xs])
    assert abs(Fraction(got) - exact) <= abs(exact) * Fraction(1, 10**13)


def test_row_products_match_scalar_path():
    rng = np.random.default_rng(7)
    x = np.exp(rng.uniform(-20, 20, size=(50, 5))) * rng.choice([-1.0, 1.0], size=(50, 5))
    got = row_products_compensated(x)
    want = np.array([compensated_product(row) for row in x])
    assert np.array_equal(got, want)


def test_neumaier_sum_matches_fsum():
    rng = np.random.default_rng(11)
    xs = list(rng.normal(scale=1e8, size=2000)) + [1e-8, -1e8, 1e8]
    acc = NeumaierSum()
    for x in xs:
        acc.add(x)
    assert acc.value == pytest.approx(math.fsum(xs), abs=1e-12)


def test_vandermonde_det_small_cases():
    assert vandermonde_det([3.0]) == 1.0
    assert vandermonde_det([1.0, 4.0]) == 3.0
    # prod of pairwise differences of (0, 1, 3): 1 * 3 * 2
    assert vandermonde_det([0.0, 1.0, 3.0]) == 6.0
