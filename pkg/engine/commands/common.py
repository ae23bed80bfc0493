"""
Options and error handling shared by the subcommands
"""
import functools
import logging
from pathlib import Path

import click

from config.experiment import load_experiment
from errors import HeatPackError
from runner import ExperimentRunner
from storage.artifacts import envelope, write_report

logger = logging.getLogger(__name__)


def experiment_options(fn):
    """--config, --out and --threads"""
    @click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False),
                  default=None, help='Experiment file of key=value lines.')
    @click.option('--out', 'out', type=click.Path(file_okay=False), default=None,
                  help='Output directory.')
    @click.option('--threads', type=click.IntRange(min=0), default=None,
                  help='Worker threads; 0 uses every core.')
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        return fn(*args, **kwargs)
    return wrapper


def prepare(ctx, config_path, out, **overrides):
    """Resolved experiment, its runner and the output directory"""
    settings = ctx.obj['settings']
    experiment = load_experiment(config_path).with_overrides(**overrides)
    out = Path(out or settings.OUTPUT_DIR)
    out.mkdir(parents=True, exist_ok=True)
    logger.info('Experiment %r', experiment.get_summary())
    return experiment, ExperimentRunner(experiment, settings), out


def run_command(ctx, command, report_name, body, config_path, out, **overrides):
    """Run body(experiment, runner, out) -> (result, exit code) and write its report

    Domain errors end up in the report's error block and set the exit code.
    """
    try:
        experiment, runner, out = prepare(ctx, config_path, out, **overrides)
    except HeatPackError as e:
        logger.error('%s: %s', command, e.message)
        click.echo(f'error: {e.message}', err=True)
        ctx.exit(e.exit_code)
    try:
        result, code = body(experiment, runner, out)
        write_report(out, report_name, envelope(command, experiment, result))
    except HeatPackError as e:
        logger.error('%s failed: %s', command, e.message)
        partial = getattr(e, 'result', None)
        write_report(out, report_name, envelope(command, experiment, partial, error=e))
        click.echo(f'error: {e.message}', err=True)
        code = e.exit_code
    ctx.exit(code)
