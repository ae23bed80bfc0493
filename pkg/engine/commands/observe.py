"""
observe: observability constants for an observation set
"""
import click

from numerics.heat_oracle import hypothesis_chain
from numerics.observability import observability_report
from storage.artifacts import check_payload, observability_payload, read_frame, write_pencil
from .common import experiment_options, run_command


@click.command('observe')
@experiment_options
@click.option('--mask', type=click.Path(exists=True, dir_okay=False), default=None,
              help='HPGRID mask, e.g. the mask written by design.')
@click.option('--frame', 'frame_path', type=click.Path(exists=True, dir_okay=False), default=None,
              help='frame.json written by decompose, used instead of rebuilding the frame.')
@click.option('--trials', type=click.IntRange(min=1), default=None, help='Sandwich trials.')
@click.option('--modes-cap', 'modes_cap', type=click.IntRange(min=1), default=None,
              help='Number of sine modes for the spectral constants.')
@click.option('--seed', type=click.IntRange(min=0), default=None, help='Random seed.')
@click.pass_context
def observe_cmd(ctx, config_path, out, threads, mask, frame_path, trials, modes_cap, seed):
    """Compute the approximate observability constants side by side"""

    def body(experiment, runner, out):
        e = experiment
        if frame_path:
            runner.frame = read_frame(frame_path)
        pencil = runner.pencil
        write_pencil(out / 'pencil', pencil)
        report = observability_report(runner.frame, runner.omega, e.T, pencil, e.trials, e.modes_cap,
                                      e.eta, e.seed, runner.bump, runner.eta0, e.c_sd,
                                      runner.threads, runner.settings)
        hypotheses = hypothesis_chain(runner.bump, runner.omega, e.T, e.eta, e.c_sd, runner.settings)
        result = {
            'constants': observability_payload(report),
            'mask_hash': runner.omega.content_hash(),
            'measure': runner.omega.measure,
            'hypotheses': check_payload(hypotheses),
        }
        return result, 0 if report.sandwich.passed else 4

    run_command(ctx, 'observe', 'observe.json', body, config_path, out, threads=threads, mask=mask,
                trials=trials, modes_cap=modes_cap, seed=seed)
