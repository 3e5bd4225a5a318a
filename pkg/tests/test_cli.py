import json
from fractions import Fraction

import pytest
from click.testing import CliRunner

from harness_lab.cli import cli
from harness_lab.models.errors import ZeroDenominator

CASE1 = ["--A", "0", "--B", "1/2", "--C=-4", "--N", "4"]


@pytest.fixture
def runner():
    return CliRunner()


def _csv(output):
    lines = output.strip().splitlines()
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


def test_law_csv(runner):
    result = runner.invoke(cli, ["law", *CASE1, "--t", "0"])
    assert result.exit_code == 0, result.output
    header, rows = _csv(result.output)
    assert header == ["state", "weight", "y_value"]
    assert [int(row[0]) for row in rows] == [0, 1, 2, 3, 4]
    assert sum(Fraction(row[1]) for row in rows) == 1
    # y = state^2 at t = 0 when A = 0
    assert [Fraction(row[2]) for row in rows] == [0, 1, 4, 9, 16]


def test_law_json_float(runner):
    result = runner.invoke(cli, ["law", *CASE1, "--t", "1/2", "--mode", "float", "--format", "json"])
    assert result.exit_code == 0, result.output
    rows = json.loads(result.output)
    assert abs(sum(float(row["weight"]) for row in rows) - 1) < 1e-12


def test_law_k_chain(runner):
    result = runner.invoke(cli, ["law", *CASE1, "--k-chain", "2", "--t", "1"])
    assert result.exit_code == 0, result.output
    _, rows = _csv(result.output)
    assert len(rows) == 3


def test_invalid_parameters_exit_2(runner):
    result = runner.invoke(cli, ["law", "--A", "0", "--B", "1/2", "--C", "0", "--N", "4"])
    assert result.exit_code == 2
    assert "invalid parameters" in result.output


def test_time_outside_domain_exits_2(runner):
    result = runner.invoke(cli, ["law", *CASE1, "--t=-1"])
    assert result.exit_code == 2


def test_params_csv(runner):
    result = runner.invoke(cli, ["params", *CASE1])
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert lines[0] == "parameter,value,float"
    assert any(line.startswith("sigma,2/13,") for line in lines)
    assert any(line.startswith("gamma,17/13,") for line in lines)
    assert "case,Case1," in lines


def test_params_json(runner):
    result = runner.invoke(cli, ["params", "--A", "0", "--B", "1/2", "--C", "5", "--N", "4", "--format", "json"])
    assert result.exit_code == 0, result.output
    summary = json.loads(result.output)
    assert summary["case"] == "Case2"
    assert summary["sigma"] == "2/5"
    assert summary["gamma_identity"].startswith("gamma = 1 - 2 sqrt(sigma tau)")


def test_simulate_is_reproducible(runner):
    args = ["simulate", *CASE1, "--grid", "0,1/2,2", "--paths", "4", "--seed", "3"]
    first = runner.invoke(cli, args)
    second = runner.invoke(cli, args)
    assert first.exit_code == 0, first.output
    assert first.output == second.output
    header, rows = _csv(first.output)
    assert header == ["path_id", "time", "state", "y_value", "z_value"]
    assert len(rows) == 12


def test_simulate_stitched(runner):
    result = runner.invoke(cli, ["simulate", *CASE1, "--grid", "1/2,1,2", "--paths", "2", "--stitched"])
    assert result.exit_code == 0, result.output
    _, rows = _csv(result.output)
    at_one = [row for row in rows if row[1] == "1"]
    assert len(at_one) == 2
    assert all(row[3] == "" for row in at_one)


def test_simulate_rejects_unsorted_grid(runner):
    result = runner.invoke(cli, ["simulate", *CASE1, "--grid", "1,1/2"])
    assert result.exit_code == 2


def test_seed_from_environment(runner):
    args = ["simulate", *CASE1, "--grid", "0,2", "--paths", "3"]
    from_env = runner.invoke(cli, args, env={"HARNESS_LAB_SEED": "9"})
    explicit = runner.invoke(cli, [*args, "--seed", "9"])
    assert from_env.output == explicit.output


def test_output_file(runner, tmp_path):
    target = tmp_path / "law.csv"
    result = runner.invoke(cli, ["law", *CASE1, "--output", str(target)])
    assert result.exit_code == 0
    assert target.read_text().startswith("state,weight,y_value\n")


def test_unwritable_output_exits_3(runner, tmp_path):
    result = runner.invoke(cli, ["law", *CASE1, "--output", str(tmp_path / "missing" / "law.csv")])
    assert result.exit_code == 3


def _config_file(tmp_path, extra=""):
    path = tmp_path / "lab.env"
    path.write_text(
        "case1_points=0,1/2,-4,2\n"
        "case2_points=0,1/2,3,2\n"
        "k_values=0,1\n"
        "identity_n_max=2\n"
        "identity_a=1\n"
        "identity_b_offsets=3/4\n"
        "identity_c=-3,9\n"
        "identity_delta=1/2\n"
        "pi_a=1\n"
        "pi_b=1/2\n"
        "pi_delta=1\n"
        "stitched_grids=1/2,1,2\n" + extra
    )
    return str(path)


def test_verify_identities(runner, tmp_path):
    report_path = tmp_path / "report.json"
    result = runner.invoke(
        cli, ["--config", _config_file(tmp_path), "verify", "--suite", "identities", "--output", str(report_path)]
    )
    assert result.exit_code == 0, result.output
    assert "failed: 0" in result.output
    report = json.loads(report_path.read_text())
    assert report["suite"] == "identities"
    assert report["summary"]["failed"] == 0


def test_verify_perturbed_gamma_exits_1(runner, tmp_path):
    result = runner.invoke(
        cli, ["--config", _config_file(tmp_path), "verify", "--suite", "harness", "--perturb-gamma", "1/10"]
    )
    assert result.exit_code == 1
    assert "harness.main.two-sided-variance" in result.output


def test_verify_json_output(runner, tmp_path):
    result = runner.invoke(
        cli, ["--config", _config_file(tmp_path), "verify", "--suite", "identities", "--format", "json"]
    )
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["summary"]["total"] > 0


def test_missing_config_file_exits_2(runner, tmp_path):
    result = runner.invoke(cli, ["--config", str(tmp_path / "nope.env"), "verify"])
    assert result.exit_code == 2


def test_bad_config_value_exits_2(runner, tmp_path):
    result = runner.invoke(
        cli, ["--config", _config_file(tmp_path, "k_values=one\n"), "verify", "--suite", "identities"]
    )
    assert result.exit_code == 2


def test_suite_from_config_file(runner, tmp_path):
    result = runner.invoke(cli, ["--config", _config_file(tmp_path, "suite=identities\n"), "verify"])
    assert result.exit_code == 0, result.output
    assert "suite: identities" in result.output


def test_skipped_checks_exit_1_unless_allowed(runner, tmp_path, monkeypatch):
    def zero_denominator(*args):
        raise ZeroDenominator("(0)_1")

    monkeypatch.setattr("harness_lab.services.verification.check_wilson_normalization", zero_denominator)
    args = ["--config", _config_file(tmp_path), "verify", "--suite", "identities"]
    result = runner.invoke(cli, args)
    assert result.exit_code == 1, result.output
    result = runner.invoke(cli, [*args, "--allow-skipped"])
    assert result.exit_code == 0, result.output
