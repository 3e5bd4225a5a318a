from fractions import Fraction

import numpy as np
import pytest

from harness_lab.models.errors import EmptyConditioning, TimeOutOfDomain, WrongCase
from harness_lab.services.harness import harness_residuals
from harness_lab.services.markov import MainChain, joint_law_on_grid, y_value
from harness_lab.services.stitching import (
    dual_y_moments,
    extension_check,
    limit_growth,
    mean_square_gap,
    mixture_joint_law,
    sample_stitched_paths,
    stitch_constants,
    stitched_joint_law,
    stitched_z_matrix,
    theta_conditional_law,
    theta_conditional_moments,
    theta_law,
    theta_moments,
)
from harness_lab.services.wilson import big_pi_law

F = Fraction


def test_theta_law(case1):
    law = theta_law(case1)
    assert law.total() == 1
    assert law.weight(0) == F(7, 1287)
    assert theta_moments(case1) == (F(32, 15), F(1568, 2925))
    assert law.moments(lambda k: k) == theta_moments(case1)


def test_theta_needs_case1(case2):
    with pytest.raises(WrongCase):
        theta_law(case2)
    with pytest.raises(WrongCase):
        stitch_constants(case2)


def test_mixture_equals_main_chain(small_case1):
    times = [F(0), F(1), F(3)]
    direct = joint_law_on_grid(MainChain(small_case1), times)
    assert mixture_joint_law(small_case1, times).total_variation(direct) == 0


def test_theta_conditional_law_is_a_law(case1):
    sc = stitch_constants(case1)
    s, u = sc.phi(F(1, 2)), sc.phi_prime(F(2))
    law = theta_conditional_law(case1, s, u, 1, 3)
    assert law.total() == 1
    assert law.support == (1, 2, 3)


def test_theta_conditional_moments_when_s_plus_u_is_one():
    s, u = F(-9, 2), F(11, 2)
    y_left, y_right = y_value(2, 0, s), y_value(3, 0, u, dual=True)
    assert (y_left, y_right) == (-5, F(15, 2))
    assert theta_conditional_moments(0, s, u, y_left, y_right) == (F(5, 2), F(1, 4))
    assert big_pi_law(F(-1, 2), F(1, 2), 1).moments(lambda k: k) == (F(1, 2), F(1, 4))
    # equal endpoints pin Theta
    assert theta_conditional_moments(0, F(-5), F(6), y_value(3, 0, F(-5)), y_value(3, 0, F(6), dual=True)) == (3, 0)
    with pytest.raises(EmptyConditioning):
        theta_conditional_moments(0, s, u, y_value(3, 0, s), y_value(2, 0, u, dual=True))


def test_theta_conditional_moments_against_law(case1):
    sc = stitch_constants(case1)
    s, u = sc.phi(F(1, 2)), sc.phi_prime(F(2))
    law = theta_conditional_law(case1, s, u, 1, 3)
    expected = theta_conditional_moments(case1.A, s, u, y_value(1, case1.A, s), y_value(3, case1.A, u, dual=True))
    assert law.moments(lambda k: k) == expected


def test_reductions_vanish(case1):
    sc = stitch_constants(case1)
    for s in (F(1, 4), F(1, 2), F(3, 4)):
        for u in (F(3, 2), F(2), F(4)):
            assert sc.reductions(s, u) == (0, 0)


def test_phi_prime_decreases_into_the_dual_domain(case1):
    sc = stitch_constants(case1)
    assert [sc.phi_prime(t) for t in (F(3, 2), F(2), F(4))] == [23, F(31, 2), F(21, 2)]


def test_stitched_law_is_a_harness(small_case1):
    law = stitched_joint_law(small_case1, [F(1, 2), F(1), F(2)])
    assert law.total_mass() == 1
    sp = stitch_constants(small_case1).standardization.scaled()
    assert all(r.residual == 0 for r in harness_residuals(law.grid_law(), sp))


def test_extension_check(small_case1):
    sp = stitch_constants(small_case1).standardization.scaled()
    outcome = extension_check(small_case1, [F(1, 4), F(1), F(3, 2)], sp)
    assert outcome.full_ok and outcome.consistent


def test_mean_square_gap(small_case1):
    for s in (F(1, 2), F(9, 10)):
        assert mean_square_gap(small_case1, s) == 1 - s


def test_stitched_grid_must_be_positive(small_case1):
    with pytest.raises(TimeOutOfDomain):
        stitched_joint_law(small_case1, [F(0), F(1)])
    with pytest.raises(TimeOutOfDomain):
        stitched_joint_law(small_case1, [F(2), F(1)])


def test_dual_y_moments_shapes(case1):
    mean, cov = dual_y_moments(case1, F(10), F(12))
    assert mean == 12 * F(32, 15) - F(16, 15)
    assert cov == F(1568, 2925) * (F(1, 2) - 12) * (8 - 10)


def test_limit_growth_is_small():
    for K in range(3):
        mean_gap, scaled_variance = limit_growth(K, F(0), F(1, 2), 1e6)
        assert abs(mean_gap) < 1e-4
        assert abs(scaled_variance) < 1e-4


def test_stitched_sampling(case1):
    grid = [F(1, 2), F(1), F(2)]
    paths = sample_stitched_paths(case1, grid, seed=11, n_paths=30)
    assert paths == sample_stitched_paths(case1, grid, seed=11, n_paths=30)
    for path in paths:
        assert path.states[1] == path.theta
        assert path.y_values[1] is None
        # left state <= Theta <= right state
        assert path.states[0] <= path.theta <= path.states[2]
    values = stitched_z_matrix(paths, stitch_constants(case1))
    assert values.shape == (30, 3)
    assert np.all(np.isfinite(values))
