from fractions import Fraction

import numpy as np
import pytest

from harness_lab.models.errors import EmptyConditioning, InvalidParams, TimeOutOfDomain, WrongCase
from harness_lab.models.model import Case, Mode
from harness_lab.services.markov import (
    ChainParams,
    DualChain,
    KChain,
    MainChain,
    joint_law_on_grid,
    line_intersections,
    reverse_law,
    sample_paths,
    sample_trajectory,
    time_domain,
    transition_matrix,
    two_sided_law,
    univariate_law,
)
from harness_lab.services.wilson import DiscreteLaw

F = Fraction


def test_case_inference(case1, case2):
    assert case1.case is Case.CASE1
    assert case2.case is Case.CASE2
    with pytest.raises(InvalidParams):
        ChainParams.create("0", "1/2", "0", 4)


def test_time_domains(case1, case2):
    assert time_domain(case1).lower == F(-1, 2)
    assert time_domain(case1).upper is None
    assert str(time_domain(case2)) == "(-1/2, 1)"


def test_transition_rows_are_stochastic(case1):
    P = transition_matrix(case1, F(0), F(1))
    assert all(total == 1 for total in P.row_sums())
    # the chain only moves up
    assert P.entry(2, 1) == 0


def test_chapman_kolmogorov(case1, case2):
    for p, (s, t, u) in ((case1, (F(0), F(1, 2), F(2))), (case2, (F(-1, 8), F(1, 4), F(5, 8)))):
        assert transition_matrix(p, s, t) @ transition_matrix(p, t, u) == transition_matrix(p, s, u)


def test_transition_entries_keep_their_mode(case1):
    P = transition_matrix(case1, F(0), F(1))
    assert isinstance(P.entries, np.ndarray) and P.entries.dtype == object
    assert P.dims == (5, 5)
    assert isinstance(P.entry(0, 1), Fraction)
    pf = ChainParams.create("0", "1/2", "-4", 4, mode=Mode.FLOAT)
    Pf = transition_matrix(pf, 0.0, 1.0)
    assert Pf.entries.dtype == np.float64
    assert np.allclose(Pf.entries, P.entries.astype(np.float64), rtol=1e-12)
    assert float((Pf @ transition_matrix(pf, 1.0, 2.0)).max_abs_diff(transition_matrix(pf, 0.0, 2.0))) < 1e-12


def test_univariate_law_is_propagated(case1):
    chain = MainChain(case1)
    law = chain.univariate_law(F(0))
    P = chain.transition(F(0), F(2))
    propagated = {n: sum(law.weight(k) * P.entry(k, n) for k in chain.states) for n in chain.states}
    assert propagated == chain.univariate_law(F(2)).as_dict()


def test_law_collapses_at_the_left_endpoint():
    p = ChainParams.create("0", "1/2", "-4", 4, mode=Mode.FLOAT)
    law = univariate_law(p, -0.5 + 1e-8)
    assert law.total_variation(DiscreteLaw.point_mass(0, Mode.FLOAT)) <= 1e-6


def test_times_outside_domain(case1, case2):
    with pytest.raises(TimeOutOfDomain):
        MainChain(case1).univariate_law(F(-1))
    with pytest.raises(TimeOutOfDomain):
        MainChain(case2).univariate_law(F(1))
    with pytest.raises(TimeOutOfDomain):
        transition_matrix(case1, F(1), F(1))


def test_two_sided_law_matches_joint_law(case1):
    chain = MainChain(case1)
    s, t, u = F(0), F(1), F(2)
    joint = joint_law_on_grid(chain, [s, t, u])
    for k in chain.states:
        for m in chain.states:
            masses = {key[1]: mass for key, mass in joint.atoms.items() if key[0] == k and key[2] == m}
            total = sum(masses.values())
            if total == 0:
                with pytest.raises(EmptyConditioning):
                    two_sided_law(case1, s, t, u, k, m)
                continue
            law = two_sided_law(case1, s, t, u, k, m)
            assert {j: mass / total for j, mass in masses.items() if mass != 0} == {
                j: w for j, w in law if w != 0
            }


def test_reverse_law_matches_joint_law(case1):
    chain = MainChain(case1)
    t, u = F(1, 2), F(2)
    joint = joint_law_on_grid(chain, [t, u])
    for n in chain.states:
        masses = {key[0]: mass for key, mass in joint.atoms.items() if key[1] == n}
        total = sum(masses.values())
        expected = {j: w for j, w in reverse_law(case1.A, case1.B, t, u, n) if w != 0}
        assert {j: mass / total for j, mass in masses.items() if mass != 0} == expected


def test_k_chain_laws():
    chain = KChain(2, F(0), F(1, 2))
    assert chain.univariate_law(F(1)).total() == 1
    assert chain.transition(F(0), F(1)) @ chain.transition(F(1), F(3)) == chain.transition(F(0), F(3))


def test_dual_chain_moves_down(case1):
    chain = DualChain(1, case1)
    assert chain.states == (1, 2, 3, 4)
    assert chain.domain.lower == 8
    law = chain.univariate_law(F(10))
    assert law.total() == 1
    P = chain.transition(F(10), F(12))
    assert P.entry(2, 3) == 0
    assert all(total == 1 for total in P.row_sums())


def test_dual_chain_needs_case1(case2):
    with pytest.raises(WrongCase):
        DualChain(0, case2)


def test_lines_meet_outside_domain(case1):
    lower = time_domain(case1).lower
    assert all(t <= lower for _, _, t in line_intersections(case1))


def test_float_mode_chain():
    p = ChainParams.create("0", "1/2", "-4", 4, mode=Mode.FLOAT)
    total = sum(w for _, w in MainChain(p).univariate_law(0.5))
    assert abs(total - 1) < 1e-12


def test_sampling_is_deterministic(case1):
    chain = MainChain(case1)
    grid = [F(0), F(1, 2), F(2)]
    first = sample_paths(chain, grid, seed=7, n_paths=20)
    assert np.array_equal(first, sample_paths(chain, grid, seed=7, n_paths=20))
    # path i depends only on (seed, i)
    assert np.array_equal(first[:5], sample_paths(chain, grid, seed=7, n_paths=5))
    trajectory = sample_trajectory(chain, grid, seed=7, index=3)
    assert trajectory.states == tuple(first[3])
    assert all(a <= b for a, b in zip(trajectory.states, trajectory.states[1:]))
