import math
from fractions import Fraction

import hypothesis.strategies as st
import pytest
import sympy
from hypothesis import given

from harness_lab.models.errors import ModeMismatch, ZeroDenominator
from harness_lab.models.model import Mode
from harness_lab.services.scalar import (
    RatioProduct,
    as_mode,
    eval_ratio_product,
    exact,
    exact_equal,
    parse_scalar,
    pochhammer,
    rational_sqrt,
    same_mode,
    scalar_sqrt,
)

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=50)
positive = st.fractions(min_value=Fraction(1, 50), max_value=20, max_denominator=50)
factors = st.lists(st.tuples(positive, st.integers(min_value=0, max_value=25)), max_size=4)


def test_parse_scalar_modes():
    assert parse_scalar("1/2", Mode.EXACT) == Fraction(1, 2)
    assert parse_scalar("-17/4", Mode.FLOAT) == -4.25
    assert isinstance(parse_scalar(3, Mode.FLOAT), float)


def test_parse_scalar_rejects_garbage():
    with pytest.raises(ModeMismatch):
        parse_scalar("one half", Mode.EXACT)


def test_modes_never_mix():
    assert same_mode(Fraction(1, 3), 2) is Mode.EXACT
    assert same_mode(1, 2) is None
    with pytest.raises(ModeMismatch):
        same_mode(Fraction(1, 3), 0.5)
    with pytest.raises(ModeMismatch):
        as_mode(0.5, Mode.EXACT)
    assert same_mode(scalar_sqrt(2), Fraction(1, 2)) is Mode.EXACT


def test_pochhammer_basics():
    assert pochhammer(Fraction(1, 2), 0) == 1
    assert pochhammer(Fraction(1, 2), 3) == Fraction(15, 8)
    assert pochhammer(-3, 4) == 0
    assert pochhammer(-3, 3) == -6


@given(rationals, st.integers(min_value=0, max_value=6), st.integers(min_value=0, max_value=6))
def test_pochhammer_splits(a, j, k):
    assert pochhammer(a, j + k) == pochhammer(a, j) * pochhammer(a + j, k)


def test_ratio_product_zero_denominator():
    rp = RatioProduct.of([(Fraction(1), 2)], [(Fraction(-1), 2)])
    with pytest.raises(ZeroDenominator):
        eval_ratio_product(rp)


def test_ratio_product_float_matches_exact():
    rp = RatioProduct.of([(Fraction(3, 2), 5), (Fraction(7, 3), 4)], [(Fraction(1), 5), (Fraction(9, 4), 4)], sign=-1)
    rp_float = RatioProduct.of([(1.5, 5), (7 / 3, 4)], [(1.0, 5), (2.25, 4)], sign=-1)
    assert math.isclose(float(eval_ratio_product(rp)), eval_ratio_product(rp_float), rel_tol=1e-12)


def test_rational_sqrt():
    assert rational_sqrt(Fraction(9, 4)) == Fraction(3, 2)
    assert rational_sqrt(2) is None
    assert rational_sqrt(-1) is None


def test_exact_square_roots():
    root2 = scalar_sqrt(2)
    assert isinstance(root2, sympy.Expr)
    assert exact(root2 * root2) == 2
    assert scalar_sqrt(Fraction(49, 4)) == Fraction(7, 2)
    assert isinstance(scalar_sqrt(Fraction(49, 4)), Fraction)
    assert -28 / scalar_sqrt(1274) < 0
    assert math.isclose(float(3 * scalar_sqrt(5)), 3 * math.sqrt(5))


def test_unlike_radicals_add():
    total = scalar_sqrt(2) + scalar_sqrt(3)
    assert math.isclose(float(total), math.sqrt(2) + math.sqrt(3))
    assert exact_equal(total**2, 5 + 2 * scalar_sqrt(6))
    assert not exact_equal(total, scalar_sqrt(5))


@given(st.fractions(min_value=0, max_value=100, max_denominator=30))
def test_scalar_sqrt_squares_back(value):
    assert exact(scalar_sqrt(value) ** 2) == value
    assert math.isclose(scalar_sqrt(float(value)) ** 2, float(value), rel_tol=1e-12, abs_tol=1e-12)


@given(positive, st.integers(min_value=0, max_value=50))
def test_pochhammer_float_agrees_with_exact(a, k):
    assert math.isclose(pochhammer(float(a), k), float(pochhammer(a, k)), rel_tol=1e-13)


@given(factors, factors, st.sampled_from([1, -1]))
def test_ratio_product_float_agrees_with_exact(numerator, denominator, sign):
    rp = RatioProduct.of(numerator, denominator, sign)
    rp_float = RatioProduct.of([(float(b), n) for b, n in numerator], [(float(b), n) for b, n in denominator], sign)
    assert rp.factor_count() <= 200
    assert math.isclose(eval_ratio_product(rp_float, Mode.FLOAT), float(eval_ratio_product(rp, Mode.EXACT)), rel_tol=1e-13)
