"""
Command-line interface for harness-lab.

Usage:
    harness-lab law --A 0 --B 1/2 --C -4 --N 4 --t 0
    harness-lab params --A 0 --B 1/2 --C -4 --N 4
    harness-lab simulate --grid 1/2,1,2 --paths 10 --seed 7 --stitched
    harness-lab verify --suite identities

Exit codes: 0 success, 1 failed checks, 2 invalid parameters or config, 3 I/O errors.
"""

import functools
import logging
import sys
from typing import Dict, Optional

import click

from harness_lab import __version__
from harness_lab.helpers.helper import (
    LOG_FORMAT,
    cli_config,
    env_seed,
    load_config_file,
    log_level,
    report_to_json,
    rows_to_csv,
    rows_to_json,
    summary_table,
    verification_config,
)
from harness_lab.models.errors import HarnessLabError
from harness_lab.models.model import CliConfig, LawRow, OutputFormat, Suite, TrajectoryRow
from harness_lab.services.lab import LabService

logger = logging.getLogger(__name__)

EXIT_FAILED = 1
EXIT_INVALID = 2
EXIT_IO = 3


def _fail(message: str, code: int) -> None:
    click.echo(f"Error: {message}", err=True)
    sys.exit(code)


def _emit(text: str, output: Optional[str]) -> None:
    if output is None:
        click.echo(text, nl=False)
        return
    try:
        with open(output, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as e:
        _fail(f"cannot write {output}: {e}", EXIT_IO)
    logger.info(f"wrote {output}")


def _seed(option: Optional[int], values: Dict[str, str]) -> Optional[int]:
    """--seed, then the config file, then HARNESS_LAB_SEED."""
    if option is not None:
        return option
    if "seed" in values:
        return None
    return env_seed()


def param_options(command):
    """Chain parameter options shared by law, params and simulate."""
    options = [
        click.option("--A", "A", default=None, help="Parameter A as p/q"),
        click.option("--B", "B", default=None, help="Parameter B as p/q"),
        click.option("--C", "C", default=None, help="Parameter C as p/q"),
        click.option("--N", "N", type=int, default=None, help="Number of jumps"),
        click.option("--mode", type=click.Choice(["exact", "float"]), default=None, help="Scalar mode"),
        click.option("--k-chain", "k_chain", type=int, default=None, help="Use the K-chain with this K"),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def handle_errors(command):
    """Map library errors to exit code 2."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except HarnessLabError as e:
            _fail(str(e), EXIT_INVALID)

    return wrapper


def _config(ctx: click.Context, **overrides) -> CliConfig:
    values = ctx.obj["values"]
    if "seed" in overrides:
        overrides["seed"] = _seed(overrides["seed"], values)
    return cli_config(values, overrides)


@click.group()
@click.version_option(version=__version__, prog_name="harness-lab")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="key=value file overriding defaults")
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[str], verbose: bool):
    """
    Wilson 6-j Markov chains, quadratic harnesses and their verification suites.
    """
    logging.basicConfig(level=log_level(verbose), format=LOG_FORMAT, stream=sys.stderr)
    ctx.ensure_object(dict)
    try:
        ctx.obj["values"] = load_config_file(config_path) if config_path else {}
    except HarnessLabError as e:
        _fail(str(e), EXIT_INVALID)


@cli.command()
@param_options
@click.option("--t", "t", default=None, help="Chain time as p/q")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None, help="Output format")
@click.option("--output", "-o", default=None, help="Output file, stdout when omitted")
@click.pass_context
@handle_errors
def law(ctx: click.Context, fmt: Optional[str], output: Optional[str], **options):
    """Print the univariate law (state, weight, y-value) at time t."""
    config = _config(ctx, format=fmt, output=output, **options)
    rows = LabService().law_rows(config)
    if config.format is OutputFormat.JSON:
        text = rows_to_json(rows)
    else:
        text = rows_to_csv(rows, list(LawRow.model_fields))
    _emit(text, config.output)


@cli.command()
@param_options
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None, help="Output format")
@click.option("--output", "-o", default=None, help="Output file, stdout when omitted")
@click.pass_context
@handle_errors
def params(ctx: click.Context, fmt: Optional[str], output: Optional[str], **options):
    """Print (eta, theta, sigma, tau, gamma), the case and the harness time domain."""
    config = _config(ctx, format=fmt, output=output, **options)
    summary = LabService().harness_summary(config)
    if config.format is OutputFormat.JSON:
        text = summary.model_dump_json(indent=2) + "\n"
    else:
        lines = ["parameter,value,float"]
        for name in ("eta", "theta", "sigma", "tau", "gamma"):
            lines.append(f"{name},{getattr(summary, name)},{summary.floats[name]!r}")
        lines.append(f"case,{summary.case},")
        lines.append(f"domain,\"{summary.domain}\",")
        lines.append(f"gamma_identity,{summary.gamma_identity},")
        text = "\n".join(lines) + "\n"
    _emit(text, config.output)


@cli.command()
@param_options
@click.option("--grid", default=None, help="Strictly increasing times, comma separated")
@click.option("--seed", type=int, default=None, help="RNG seed (falls back to HARNESS_LAB_SEED)")
@click.option("--paths", type=int, default=None, help="Number of paths")
@click.option("--stitched", is_flag=True, default=None, help="Simulate the stitched process on (0,inf)")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None, help="Output format")
@click.option("--output", "-o", default=None, help="Output file, stdout when omitted")
@click.pass_context
@handle_errors
def simulate(ctx: click.Context, fmt: Optional[str], output: Optional[str], **options):
    """Write trajectories as path_id,time,state,y_value,z_value."""
    options["stitched"] = options["stitched"] or None
    config = _config(ctx, format=fmt, output=output, **options)
    rows = LabService().simulate_rows(config)
    if config.format is OutputFormat.JSON:
        text = rows_to_json(rows)
    else:
        text = rows_to_csv(rows, list(TrajectoryRow.model_fields))
    _emit(text, config.output)


@cli.command()
@click.option("--suite", type=click.Choice([suite.value for suite in Suite]), default=None,
              help="Suite to run (default: all)")
@click.option("--seed", type=int, default=None, help="Monte Carlo seed (falls back to HARNESS_LAB_SEED)")
@click.option("--workers", type=int, default=None, help="Worker threads")
@click.option("--timings", is_flag=True, default=None, help="Record per-check runtimes")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text",
              help="Standard output format")
@click.option("--output", "-o", default=None, help="Write the JSON report to this file")
@click.option("--allow-skipped", "allow_skipped", is_flag=True, help="Exit 0 when checks are skipped but none fail")
@click.option("--perturb-gamma", "perturb_gamma", default=None, hidden=True)
@click.pass_context
@handle_errors
def verify(ctx: click.Context, suite: Optional[str], seed: Optional[int], workers: Optional[int],
           timings: Optional[bool], fmt: str, output: Optional[str], allow_skipped: bool,
           perturb_gamma: Optional[str]):
    """Run verification suites; exit 0 iff every check passes."""
    values = dict(ctx.obj["values"])
    overrides = {"workers": workers, "record_timings": timings or None, "gamma_perturbation": perturb_gamma,
                 "seed": _seed(seed, values)}
    values.update({key: str(value) for key, value in overrides.items() if value is not None})
    config = verification_config(values)
    suite = suite or values.get("suite", Suite.ALL.value)
    try:
        selected = Suite(suite)
    except ValueError:
        _fail(f"unknown suite {suite!r}", EXIT_INVALID)
    report = LabService().run_suites(config, selected)
    if output is not None:
        _emit(report_to_json(report), output)
    click.echo(report_to_json(report) if fmt == "json" else summary_table(report), nl=False)
    if report.summary.failed or (report.summary.skipped and not allow_skipped):
        sys.exit(EXIT_FAILED)


if __name__ == "__main__":
    cli()
