from fractions import Fraction

import pytest

from harness_lab.models.model import ParamPoint, VerificationConfig
from harness_lab.services.markov import ChainParams


@pytest.fixture
def case1():
    """Case 1 point with closed-form values sigma = tau = 2/13, gamma = 17/13."""
    return ChainParams.create("0", "1/2", "-4", 4)


@pytest.fixture
def case2():
    return ChainParams.create("0", "1/2", "5", 4)


@pytest.fixture
def small_case1():
    return ChainParams.create("0", "1/2", "-4", 2)


@pytest.fixture
def half():
    return Fraction(1, 2)


@pytest.fixture
def small_config():
    """A parameter matrix small enough for exact suites to finish in seconds."""
    return VerificationConfig(
        case1_points=[ParamPoint(A="0", B="1/2", C="-4", N=2)],
        case2_points=[ParamPoint(A="0", B="1/2", C="3", N=2)],
        k_values=[0, 1, 2],
        identity_n_max=3,
        identity_a=["1"],
        identity_b_offsets=["3/4"],
        identity_c=["-3", "9"],
        identity_delta=["1/2"],
        pi_a=["1"],
        pi_b=["1/2"],
        pi_delta=["1"],
        stitched_grids=[["1/2", "1", "2"]],
        mc_paths=2000,
    )
