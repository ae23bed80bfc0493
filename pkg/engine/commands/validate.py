"""
validate: invariant suites with per-suite timings
"""
import click

from errors import ExitCode
from models.report import CheckStatus
from numerics.invariants import SuiteName, run_suites
from storage.artifacts import check_payload, write_table
from .common import experiment_options, run_command


@click.command('validate')
@experiment_options
@click.option('--suite', 'suites', type=click.Choice(SuiteName.ALL), multiple=True,
              help='Run only the named suite; repeatable.')
@click.option('--inject', is_flag=True, default=False,
              help='Scale one Gramian entry to check that the bound suite fails.')
@click.option('--seed', type=click.IntRange(min=0), default=None, help='Random seed.')
@click.pass_context
def validate_cmd(ctx, config_path, out, threads, suites, inject, seed):
    """Run the invariant suites"""

    def body(experiment, runner, out):
        reports, timings = run_suites(runner, suites or None, inject)
        write_table(out / 'timings.csv', timings, columns=['suite', 'status', 'seconds'])
        failed = [report.name for report in reports if report.status == CheckStatus.FAILED]
        result = {
            'suites': {report.name: check_payload(report) for report in reports},
            'failed': failed,
            'injected': inject,
        }
        return result, ExitCode.INVARIANT if failed else ExitCode.SUCCESS

    run_command(ctx, 'validate', 'validate.json', body, config_path, out, threads=threads, seed=seed)
