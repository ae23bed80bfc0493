"""
decompose: packet frame for the bump or for grid data
"""
import click

from numerics.packet_frame import decay_check, decompose_field
from storage.artifacts import frame_payload, write_report
from storage.grid_io import read_grid
from .common import experiment_options, run_command


@click.command('decompose')
@experiment_options
@click.option('--field', 'field_path', type=click.Path(exists=True, dir_okay=False), default=None,
              help='HPGRID initial data to decompose instead of the bump.')
@click.pass_context
def decompose_cmd(ctx, config_path, out, threads, field_path):
    """Build the packet frame and report its measured error"""

    def body(experiment, runner, out):
        frame = runner.frame
        if field_path:
            frame = decompose_field(read_grid(field_path), runner.bump.center, frame.params)
        write_report(out, 'frame.json', frame_payload(frame))
        decay = decay_check(frame)
        within = frame.relative_error is not None and frame.relative_error <= experiment.eta
        result = {
            'frame': frame.get_summary(),
            'eta': experiment.eta,
            'within_eta': within,
            'certified_decay': frame.certified_decay,
            'decay': decay.to_dict(),
            'source': 'field' if field_path else 'bump',
        }
        return result, 0 if within else 3

    run_command(ctx, 'decompose', 'decompose.json', body, config_path, out, threads=threads)
