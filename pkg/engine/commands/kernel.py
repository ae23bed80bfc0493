"""
kernel: free heat kernel and Kac bound tables on the experiment grid
"""
import click
import numpy as np

from numerics.heat_oracle import free_kernel, kac_bound_grid
from storage.artifacts import write_table
from .common import experiment_options, run_command


@click.command('kernel')
@experiment_options
@click.option('--time', 't', type=float, default=None, help='Evaluation time; defaults to T.')
@click.pass_context
def kernel_cmd(ctx, config_path, out, threads, t):
    """Dump free_kernel(t, x0, y) and kac_bound(t, y) at every cell centre y"""

    def body(experiment, runner, out):
        time = experiment.T if t is None else t
        domain, resolution = runner.domain, runner.resolution
        centres = np.stack([x.ravel() for x in domain.mesh(resolution)], axis=1)
        x0 = np.asarray(experiment.center, dtype=float)
        free = free_kernel(time, x0, centres)
        kac = kac_bound_grid(time, domain, resolution).ravel()
        rows = [dict({f'y{axis}': point[axis] for axis in range(domain.d)},
                     free_kernel=f, kac_bound=k) for point, f, k in zip(centres, free, kac)]
        path = write_table(out / 'kernel.csv', rows)
        return {'t': time, 'rows': len(rows), 'table': path.name,
                'max_kac_bound': float(kac.max()), 'max_free_kernel': float(free.max())}, 0

    run_command(ctx, 'kernel', 'kernel.json', body, config_path, out, threads=threads)
