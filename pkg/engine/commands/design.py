"""
design: relaxed optimal observation set and the stabilization study
"""
import click

from errors import NoConvergence
from numerics.design_solver import (energy_densities, h1_levelset_check, solve_saddle,
                                    stability_study)
from storage.artifacts import check_payload, design_payload, write_mask, write_table
from .common import experiment_options, run_command


def _parse_list(ctx, param, value):
    if value is None:
        return None
    try:
        return [int(item) for item in value.split(',') if item.strip()]
    except ValueError:
        raise click.BadParameter('expected a comma-separated list of integers')


@click.command('design')
@experiment_options
@click.option('--stability', type=str, default=None, callback=_parse_list,
              help='Comma-separated truncation radii N for the stabilization study.')
@click.pass_context
def design_cmd(ctx, config_path, out, threads, stability):
    """Solve the relaxed design problem and write the optimal mask"""

    def body(experiment, runner, out):
        e = experiment
        densities = energy_densities(runner.frame, e.T, e.N, runner.domain, runner.resolution,
                                     runner.threads, runner.settings)
        try:
            solution = solve_saddle(densities, e.M, e.iters, e.tol, e.step_constant, N=e.N,
                                    settings=runner.settings)
        except NoConvergence as error:
            if error.solution is not None:
                write_mask(out, error.solution.a)
                error.result = {'design': design_payload(error.solution),
                                'mask_hash': error.solution.a.content_hash()}
            raise
        write_mask(out, solution.a)
        result = {
            'design': design_payload(solution),
            'mask_hash': solution.a.content_hash(),
            'h1': check_payload(h1_levelset_check(solution.alpha, densities)),
        }
        if stability:
            report, _ = stability_study(runner.frame, e.M, e.T, stability, runner.domain,
                                        runner.resolution, e.iters, e.tol, e.step_constant,
                                        threads=runner.threads, settings=runner.settings)
            write_table(out / 'stability.csv', report['rows'],
                        columns=['N', 'value', 'gap', 'lambda', 'fractional_cells',
                                 'symmetric_difference', 'hausdorff'])
            result['stability'] = check_payload(report)
        return result, 0

    run_command(ctx, 'design', 'design.json', body, config_path, out, threads=threads)
