import json
import logging

import click
from flask import current_app
from flask.cli import with_appcontext

from config import FAULTS, InstanceConfig
from errors import ConfigError
from models import RunRecord, db
from steinberg import MUTATIONS
from suites import RunReport, VerificationService


class ConfigProblem(click.ClickException):
    """Bad configuration or usage; exits with status 2"""

    exit_code = 2


def _load_config(path, **overrides) -> InstanceConfig:
    try:
        config = InstanceConfig.from_file(path) if path else InstanceConfig()
        return config.with_overrides(**overrides).with_env()
    except ConfigError as e:
        raise ConfigProblem(str(e))


def _record(report: RunReport, run_dir: str):
    try:
        record = RunRecord(
            command=report.command,
            config_hash=report.config.config_hash(),
            seed=report.config.seed,
            run_dir=run_dir,
            verdict=report.verdict,
            violations=report.violations,
            elapsed=report.elapsed,
        )
        db.session.add(record)
        db.session.commit()
        logging.info(f"Run indexed as #{record.id}")
    except Exception as e:
        db.session.rollback()
        logging.error(f"Error indexing run {run_dir}: {e}")


def _execute(command: str, config: InstanceConfig, out) -> None:
    try:
        report = VerificationService(config).run(command)
    except ConfigError as e:
        raise ConfigProblem(str(e))
    run_dir = report.write(out or current_app.config["SFORGE_OUT"])
    _record(report, run_dir)
    click.echo(f"{command}: {report.verdict} ({report.violations} violations) -> {run_dir}")
    if report.verdict == "fail":
        click.get_current_context().exit(1)


def common_options(f):
    f = click.option("--out", type=click.Path(file_okay=False), default=None, help="Run directory root.")(f)
    f = click.option("--exhaustive", is_flag=True, default=None, help="Enumerate payloads or GL where feasible.")(f)
    f = click.option("--samples", type=int, default=None, help="Samples per check.")(f)
    f = click.option("--seed", type=int, default=None, help="Seed for every random draw.")(f)
    f = click.option("--config", "config_path", type=click.Path(), default=None, help="Instance config JSON.")(f)
    return f


@click.command("relations")
@common_options
@click.option("--mutate", type=click.Choice([m for m in MUTATIONS if m]), default=None,
              help="Corrupt a relation to check that the suite notices.")
@with_appcontext
def relations_command(config_path, seed, samples, exhaustive, out, mutate):
    """Steinberg relations in plain, homotope and quotient contexts"""
    config = _load_config(config_path, seed=seed, samples=samples, exhaustive=exhaustive, mutation=mutate)
    _execute("relations", config, out)


@click.command("gauss")
@common_options
@click.option("--element", default=None, help="Matrix rows as JSON, e.g. '[[1,1],[0,1]]'.")
@with_appcontext
def gauss_command(config_path, seed, samples, exhaustive, out, element):
    """Gauss decomposition of one element, of GL, or of random samples"""
    rows = None
    if element is not None:
        try:
            rows = json.loads(element)
        except json.JSONDecodeError as e:
            raise ConfigProblem(f"--element is not valid JSON: {e.msg}")
    config = _load_config(config_path, seed=seed, samples=samples, exhaustive=exhaustive, element=rows)
    _execute("gauss", config, out)


@click.command("crossed-module")
@common_options
@click.option("--inject-fault", type=click.Choice([f for f in FAULTS if f]), default=None,
              help="Break the Gauss lift to check that the verifier notices.")
@with_appcontext
def crossed_module_command(config_path, seed, samples, exhaustive, out, inject_fault):
    """Crossed-module axioms for the action of GL(R) on St(R)"""
    config = _load_config(config_path, seed=seed, samples=samples, exhaustive=exhaustive, fault=inject_fault)
    _execute("crossed-module", config, out)


@click.command("tower")
@common_options
@click.option("--mutate", type=click.Choice([m for m in MUTATIONS if m]), default=None)
@with_appcontext
def tower_command(config_path, seed, samples, exhaustive, out, mutate):
    """Homotope tower: relations per level, operators and the localized action"""
    config = _load_config(config_path, seed=seed, samples=samples, exhaustive=exhaustive, mutation=mutate)
    _execute("tower", config, out)


def register_commands(app):
    for command in (relations_command, gauss_command, crossed_module_command, tower_command):
        app.cli.add_command(command)
