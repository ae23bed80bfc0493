"""
Run artifacts: reports, frames, pencils and tables under an output directory
"""
import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd
from marshmallow import ValidationError

from errors import ConfigError
from models.pencil import GramianPencil
from storage.formats import FLOAT_FORMAT, write_json
from storage.grid_io import write_grid, write_pgm
from storage.schemas import (CheckReportSchema, DesignReportSchema, FrameSchema,
                             ObservabilityReportSchema, PencilSidecarSchema)

logger = logging.getLogger(__name__)


def envelope(command, experiment, result=None, error=None):
    """Report wrapper embedding the resolved configuration and its hash"""
    return {
        'command': command,
        'config': experiment.to_dict(),
        'config_hash': experiment.config_hash,
        'result': result,
        'error': None if error is None else error.to_dict(),
    }


def write_report(out, name, payload):
    path = write_json(Path(out) / name, payload)
    logger.info('Wrote %s', path)
    return path


def frame_payload(frame):
    return FrameSchema().dump(frame)


def read_frame(path):
    """Frame written by decompose, rebuilt bit for bit"""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding='utf-8'))
    except (OSError, ValueError) as error:
        raise ConfigError(f'Cannot read frame file {path}', path=str(path)) from error
    try:
        return FrameSchema().load(raw)
    except ValidationError as error:
        raise ConfigError(f'Invalid frame file {path}', errors=error.messages) from error


def design_payload(solution):
    return DesignReportSchema().dump(solution)


def observability_payload(report):
    return ObservabilityReportSchema().dump(report)


def check_payload(report):
    return CheckReportSchema().dump(report)


def write_mask(out, mask, stem='mask'):
    """HPGRID samples plus a PGM preview"""
    out = Path(out)
    return write_grid(out / f'{stem}.hpgrid', mask.mask), write_pgm(out / f'{stem}.pgm', mask)


def _long_format(matrix):
    rows, cols = np.indices(matrix.shape)
    return pd.DataFrame({
        'row': rows.ravel(),
        'col': cols.ravel(),
        're': matrix.real.ravel(),
        'im': matrix.imag.ravel(),
    })


def write_pencil(out, pencil):
    """G.csv and H.csv in long format with a JSON sidecar"""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    _long_format(pencil.G).to_csv(out / 'G.csv', index=False, float_format=f'%{FLOAT_FORMAT}')
    _long_format(pencil.H).to_csv(out / 'H.csv', index=False, float_format=f'%{FLOAT_FORMAT}')
    sidecar = PencilSidecarSchema().dump({
        'size': pencil.size,
        'T': pencil.T,
        'sigma': pencil.sigma,
        'L': pencil.L,
        'x0': pencil.x0.tolist(),
        'indices': pencil.indices.tolist(),
        'mask_hash': pencil.mask_hash,
    })
    write_json(out / 'pencil.json', sidecar)
    return out


def _matrix(path, size):
    frame = pd.read_csv(path)
    matrix = np.zeros((size, size), dtype=complex)
    matrix[frame['row'].to_numpy(), frame['col'].to_numpy()] = frame['re'].to_numpy() + 1j * frame['im'].to_numpy()
    return matrix


def read_pencil(directory):
    directory = Path(directory)
    try:
        raw = json.loads((directory / 'pencil.json').read_text(encoding='utf-8'))
    except (OSError, ValueError) as error:
        raise ConfigError(f'Cannot read pencil sidecar in {directory}') from error
    sidecar = PencilSidecarSchema().load(raw)
    size = sidecar['size']
    return GramianPencil(sidecar['indices'], _matrix(directory / 'G.csv', size),
                         _matrix(directory / 'H.csv', size), sidecar['T'], sidecar['sigma'],
                         sidecar['L'], sidecar['x0'], sidecar.get('mask_hash'))


def write_table(path, rows, columns=None):
    """Rows of dicts to CSV at 17 significant digits"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = pd.DataFrame(rows, columns=columns)
    table.to_csv(path, index=False, float_format=f'%{FLOAT_FORMAT}')
    return path
