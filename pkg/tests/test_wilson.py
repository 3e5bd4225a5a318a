import math
from fractions import Fraction

import pytest

from harness_lab.models.errors import InvalidParams
from harness_lab.models.model import Branch6j
from harness_lab.services.wilson import (
    LawParams6j,
    big_pi_law,
    big_pi_weight,
    limit_pi_from_p,
    pi_law,
    pi_weight,
    pi_weight_alternating,
    u_moments,
    validate_6j,
    wilson_law,
    wilson_weight,
    x_moments_pi,
    y_moments_6j,
)

F = Fraction


def test_two_point_wilson_law():
    law = wilson_law(LawParams6j(F(0), F(1, 2), F(-4), 1))
    assert law.as_dict() == {0: F(5, 9), 1: F(4, 9)}


@pytest.mark.parametrize(
    "a, b, c, N",
    [
        (F(0), F(1, 2), F(-4), 4),
        (F(1), F(1, 4), F(-9), 6),
        (F(3, 2), F(-1), F(9), 5),
        (F(1, 4), F(1, 2), F(31, 4), 3),
    ],
)
def test_wilson_law_sums_to_one_with_closed_form_moments(a, b, c, N):
    p = LawParams6j(a, b, c, N)
    law = wilson_law(p)
    assert law.total() == 1
    assert law.is_nonnegative()
    assert law.moments(lambda k: k * (2 * a + k)) == y_moments_6j(p)


def test_wilson_branches():
    assert validate_6j(LawParams6j(F(0), F(1, 2), F(-4), 4)) is Branch6j.CASE_LOW
    assert validate_6j(LawParams6j(F(0), F(1, 2), F(5), 4)) is Branch6j.CASE_HIGH


@pytest.mark.parametrize(
    "a, b, c, constraint",
    [
        (F(-1), F(1, 2), F(-9), "a > -1/2"),
        (F(0), F(2), F(-9), "b in (-a, a+1)"),
        (F(0), F(1, 2), F(1), "c > a+N or c < -a-N+1"),
    ],
)
def test_wilson_rejects_invalid_points(a, b, c, constraint):
    with pytest.raises(InvalidParams) as info:
        wilson_weight(0, LawParams6j(a, b, c, 4))
    assert info.value.constraint == constraint


def test_wilson_float_mode_agrees():
    exact = wilson_law(LawParams6j(F(1, 4), F(1, 2), F(-5), 3))
    approx = wilson_law(LawParams6j(0.25, 0.5, -5.0, 3))
    for (_, x), (_, y) in zip(exact, approx):
        assert math.isclose(float(x), y, rel_tol=1e-12)


def test_pi_law_and_moments():
    a, b = F(1), F(1, 2)
    for K in range(5):
        law = pi_law(K, a, b)
        assert law.total() == 1
        assert law.moments(lambda j: j * (a + j)) == x_moments_pi(K, a, b)


def test_pi_alternating_form_agrees():
    a, b = F(2), F(1, 4)
    for K in range(4):
        for j in range(K + 1):
            assert pi_weight_alternating(j, K, a, b) == pi_weight(j, K, a, b)


def test_pi_rejects_b_outside_range():
    with pytest.raises(InvalidParams):
        pi_weight(0, 2, F(1), F(3))


def test_big_pi_law():
    a, c, N = F(-4), F(1, 2), 4
    law = big_pi_law(a, c, N)
    assert law.total() == 1
    assert big_pi_weight(0, a, c, N) == F(7, 1287)
    assert law.moments(lambda k: k) == u_moments(a, c, N)
    assert u_moments(a, c, N)[0] == F(32, 15)


def test_big_pi_requires_a_below_one_minus_n():
    with pytest.raises(InvalidParams):
        big_pi_law(F(-2), F(1, 2), 4)


def test_pi_is_limit_of_wilson_weights():
    for K in range(3):
        for j in range(K + 1):
            assert abs(limit_pi_from_p(j, K, 1.0, 0.5, -1e6) - float(pi_weight(j, K, F(1), F(1, 2)))) < 1e-6
