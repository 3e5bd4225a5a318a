import math
from fractions import Fraction

import pytest

from harness_lab.models.errors import DegenerateChain, InvalidState, WrongCase
from harness_lab.models.model import Branch
from harness_lab.services.harness import (
    case_harness_params,
    dual_standardization,
    harness_residuals,
    k_chain_harness_params,
    k_chain_standardization,
    main_descriptor,
    main_standardization,
    reverse_moments,
    standardized_grid_law,
    y_conditional_moments,
    y_cov,
    y_from_z,
    y_moments,
    z_from_y,
)
from harness_lab.services.markov import ChainParams, KChain, MainChain, joint_law_on_grid, y_value
from harness_lab.services.scalar import exact, exact_equal, scalar_sqrt

F = Fraction


def test_case1_closed_form(case1):
    params = case_harness_params(case1)
    assert params.sigma == params.tau == F(2, 13)
    assert params.gamma == F(17, 13)
    assert params.eta < 0 and exact(params.eta**2) == F(784, 1274)
    assert params.theta > 0 and exact(params.theta**2) == F(113, 4) ** 2 / 1274
    assert math.isclose(float(params.eta), -28 / math.sqrt(1274))
    assert params.gamma_identity() == "gamma = 1 + 2 sqrt(sigma tau) (exact)"
    assert exact_equal(params.eta, -28 / scalar_sqrt(1274))
    assert exact_equal(params.theta, F(113, 4) / scalar_sqrt(1274))


def test_case2_gamma_identity(case2):
    params = case_harness_params(case2)
    assert params.sigma == params.tau == F(2, 5)
    assert params.gamma == F(1, 5)
    assert params.gamma_identity() == "gamma = 1 - 2 sqrt(sigma tau) (exact)"


def test_descriptor_constants(case1):
    md = main_descriptor(case1)
    assert (md.alpha, md.beta) == (F(16, 15), F(32, 15))
    assert md.M2 == F(1568, 2925)
    assert md.chi == F(784, 225)


def test_standardization_matches_closed_form(case1, case2):
    for p in (case1, case2):
        st = main_standardization(p)
        assert st.params.matches(case_harness_params(p))
    assert main_standardization(case1).domain.lower == 0
    assert main_standardization(case1).domain.upper == 1
    assert main_standardization(case2).domain.upper is None


def test_degenerate_chain():
    with pytest.raises(DegenerateChain):
        main_standardization(ChainParams.create("0", "1/2", "-4", 0))
    with pytest.raises(DegenerateChain):
        k_chain_harness_params(0, F(0), F(1, 2))


def test_k_chain_params():
    params = k_chain_harness_params(1, F(0), F(1, 2))
    assert params.eta < 0 and exact(params.eta**2) == 2
    assert exact(params.theta**2) == F(9, 2)
    assert (params.sigma, params.tau, params.gamma) == (0, 1, 1)
    assert k_chain_standardization(1, F(0), F(1, 2)).params.matches(params)


def test_dual_standardization_recovers_case1(case1, case2):
    assert dual_standardization(case1).params.matches(case_harness_params(case1))
    assert dual_standardization(case1).domain.lower == 1
    with pytest.raises(WrongCase):
        dual_standardization(case2)


def test_y_moments_against_joint_law(case1):
    chain = MainChain(case1)
    s, t = F(1, 2), F(2)
    joint = joint_law_on_grid(chain, [s, t])
    mean_s = joint.expectation(lambda key: chain.y_value(key[0], s))
    mean_t = joint.expectation(lambda key: chain.y_value(key[1], t))
    assert mean_s == y_moments(case1, s)[0]
    second = joint.expectation(lambda key: chain.y_value(key[0], s) * chain.y_value(key[1], t))
    assert second - mean_s * mean_t == y_cov(case1, s, t)


def test_conditional_moments_against_transitions(case2):
    chain = MainChain(case2)
    s, t = F(-1, 8), F(5, 8)
    P = chain.transition(s, t)
    for k in chain.states:
        law = P.row(k)
        mean = sum(w * chain.y_value(n, t) for n, w in law.items())
        second = sum(w * chain.y_value(n, t) ** 2 for n, w in law.items())
        expected = y_conditional_moments(case2, s, t, chain.y_value(k, s))
        assert (mean, second - mean * mean) == expected


def test_reverse_moments_need_a_line(case1):
    with pytest.raises(InvalidState):
        reverse_moments(case1, F(0), F(1), F(1, 3))


def test_reverse_moments_values(case1):
    assert reverse_moments(case1, F(0), F(1), F(2)) == (F(2, 3), F(2, 9))
    mean, variance = reverse_moments(case1, 1 - F(1, 10**6), F(1), F(2))
    assert abs(mean - 2) < F(1, 10**5) and 0 <= variance < F(1, 10**5)


def test_reverse_moments_against_joint_law(case1):
    chain = MainChain(case1)
    t, u = F(1, 2), F(2)
    joint = joint_law_on_grid(chain, [t, u])
    for n in chain.states:
        masses = {key[0]: mass for key, mass in joint.atoms.items() if key[1] == n}
        total = sum(masses.values())
        mean = sum(mass * chain.y_value(k, t) for k, mass in masses.items()) / total
        second = sum(mass * chain.y_value(k, t) ** 2 for k, mass in masses.items()) / total
        assert reverse_moments(case1, t, u, chain.y_value(n, u)) == (mean, second - mean * mean)


def test_y_from_z_needs_a_rational_y(case1):
    with pytest.raises(InvalidState):
        y_from_z(case1, Branch.MAIN, F(1, 3), scalar_sqrt(3))


@pytest.mark.parametrize("branch, t", [(Branch.MAIN, F(1, 3)), (Branch.DUAL, F(3, 2))])
def test_z_round_trip(case1, branch, t):
    st = main_standardization(case1) if branch is Branch.MAIN else dual_standardization(case1)
    for state in range(case1.N + 1):
        y = y_value(state, case1.A, st.chain_time(t), dual=branch is Branch.DUAL)
        assert y_from_z(case1, branch, t, z_from_y(case1, branch, t, y)) == y


def test_main_chain_is_a_quadratic_harness(small_case1):
    st = main_standardization(small_case1)
    law = standardized_grid_law(MainChain(small_case1), st, [F(1, 4), F(1, 2), F(3, 4)])
    residuals = harness_residuals(law, st.scaled())
    assert {r.family for r in residuals} >= {"covariance-min", "two-sided-variance"}
    assert all(r.residual == 0 for r in residuals)


def test_k_chain_is_a_quadratic_harness():
    st = k_chain_standardization(2, F(0), F(1, 2))
    law = standardized_grid_law(KChain(2, F(0), F(1, 2)), st, [F(1, 2), F(1), F(2)])
    assert all(r.residual == 0 for r in harness_residuals(law, st.scaled()))


def test_perturbed_gamma_breaks_two_sided_variance(small_case1):
    st = main_standardization(small_case1)
    law = standardized_grid_law(MainChain(small_case1), st, [F(1, 4), F(1, 2), F(3, 4)])
    residuals = harness_residuals(law, st.scaled().with_gamma_offset(F(1, 10)))
    broken = {r.family for r in residuals if r.residual != 0}
    assert "two-sided-variance" in broken
    assert "mean-zero" not in broken
