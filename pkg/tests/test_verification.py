from fractions import Fraction

import pytest

from harness_lab.models.errors import ConfigError, ZeroDenominator
from harness_lab.models.model import CheckMode, ParamPoint, Suite
from harness_lab.services.markov import TimeDomain
from harness_lab.services.verification import (
    VerificationService,
    chain_grid,
    check_pi_limit,
    check_product_rule,
    check_wilson_normalization,
)

F = Fraction


def _failed(report):
    return [(r.check_id, r.parameter_point, r.residual, r.detail) for r in report.results if not r.passed and not r.skipped]


def test_chain_grid():
    assert chain_grid(TimeDomain(F(-1, 2), F(1))) == [F(-1, 8), F(1, 4), F(5, 8)]
    assert chain_grid(TimeDomain(F(-1, 2), None)) == [F(0), F(1, 2), F(1), F(2)]


def test_single_identity_checks():
    assert check_wilson_normalization(F(1), F(-1, 4), F(9), 3) == 0
    assert check_product_rule(F(1), F(-1, 4), F(9), F(1, 2), 3) == 0
    assert abs(check_pi_limit(-1e6)) < 1e-6


def test_identity_suite(small_config):
    report = VerificationService(small_config).run(Suite.IDENTITIES)
    assert report.ok, _failed(report)
    ids = {r.check_id for r in report.results}
    assert {"identities.product-rule", "identities.pi-product-rule", "identities.dual-product-rule"} <= ids
    assert report.summary.total == report.summary.passed + report.summary.skipped


def test_moment_suite(small_config):
    report = VerificationService(small_config).run(Suite.MOMENTS)
    assert report.ok, _failed(report)
    modes = {r.mode for r in report.results}
    assert modes == {CheckMode.EXACT, CheckMode.FLOAT}


def test_harness_suite(small_config):
    report = VerificationService(small_config).run(Suite.HARNESS)
    assert report.ok, _failed(report)
    tags = {entry.tag for entry in report.coverage}
    assert {"two-sided-variance", "k-params", "dual-swap"} <= tags


def test_stitch_suite(small_config):
    report = VerificationService(small_config).run(Suite.STITCH)
    assert report.ok, _failed(report)
    assert any(r.check_id == "stitch.extension" for r in report.results)


def test_monte_carlo_suite(small_config):
    report = VerificationService(small_config).run(Suite.MONTECARLO, seed=5)
    assert report.ok, _failed(report)
    assert report.seed == 5
    assert "Bonferroni" in report.notes[0]
    assert all(r.mode is CheckMode.MONTE_CARLO for r in report.results)


def test_perturbed_gamma_fails_the_harness_suite(small_config):
    config = small_config.model_copy(update={"gamma_perturbation": "1/10"})
    report = VerificationService(config).run(Suite.HARNESS)
    assert not report.ok
    failed = {r.check_id for r in report.results if not r.passed and not r.skipped}
    assert "harness.main.two-sided-variance" in failed
    assert "harness.params" not in failed
    assert any("perturbed" in note for note in report.notes)


def test_workers_do_not_change_results(small_config):
    serial = VerificationService(small_config).run(Suite.IDENTITIES)
    parallel = VerificationService(small_config.model_copy(update={"workers": 3})).run(Suite.IDENTITIES)
    assert [(r.check_id, r.parameter_point, r.residual) for r in serial.results] == [
        (r.check_id, r.parameter_point, r.residual) for r in parallel.results
    ]


def test_case_mismatch_is_a_config_error(small_config):
    config = small_config.model_copy(update={"case1_points": [ParamPoint(A="0", B="1/2", C="5", N=4)]})
    with pytest.raises(ConfigError):
        VerificationService(config).run(Suite.STITCH)


def test_report_counts(small_config):
    report = VerificationService(small_config).run(Suite.IDENTITIES)
    summary = report.summary
    assert summary.total == len(report.results)
    assert sum(entry.checks for entry in report.coverage) == summary.total
    assert all(r.runtime_ms == 0 for r in report.results)


def _raise(error):
    def check(*args):
        raise error

    return check


def test_crashing_check_is_a_failure(small_config, monkeypatch):
    monkeypatch.setattr(
        "harness_lab.services.verification.check_wilson_normalization", _raise(ZeroDivisionError("boom"))
    )
    report = VerificationService(small_config).run(Suite.IDENTITIES)
    crashed = [r for r in report.results if r.check_id == "identities.wilson-normalization"]
    assert crashed and all(not r.passed and not r.skipped for r in crashed)
    assert all(r.detail == "ZeroDivisionError: boom" for r in crashed)
    assert report.summary.failed == len(crashed)
    assert not report.ok


def test_skipped_checks_are_not_ok(small_config, monkeypatch):
    monkeypatch.setattr(
        "harness_lab.services.verification.check_wilson_normalization", _raise(ZeroDenominator("(0)_1"))
    )
    report = VerificationService(small_config).run(Suite.IDENTITIES)
    assert report.summary.skipped > 0
    assert report.summary.failed == 0
    assert not report.ok


def test_theta_limit_is_taken_far_out(small_config):
    assert small_config.limit_theta_time == 1e6
    report = VerificationService(small_config).run(Suite.STITCH)
    limit = [r for r in report.results if r.check_id == "stitch.theta-limit"]
    assert limit and all(r.passed for r in limit), _failed(report)
