"""
HPGRID text grids and PGM mask images
"""
import logging
from pathlib import Path

import numpy as np

from errors import ConfigError
from models.domain import BoxDomain, FieldKind, GridField, ObservationSet
from storage.formats import FLOAT_FORMAT

logger = logging.getLogger(__name__)

MAGIC = 'HPGRID'


def _join(values, integer=False):
    return ','.join(str(int(v)) if integer else format(float(v), FLOAT_FORMAT) for v in values)


def grid_text(field):
    """Header line then one sample per line in C order; complex samples as 're im'"""
    header = (f'{MAGIC} d={field.domain.d} res={_join(field.resolution, integer=True)} '
              f'lo={_join(field.domain.lower)} hi={_join(field.domain.upper)} kind={field.kind}')
    flat = field.values.ravel()
    if field.kind == FieldKind.COMPLEX:
        lines = [f'{format(float(v.real), FLOAT_FORMAT)} {format(float(v.imag), FLOAT_FORMAT)}'
                 for v in flat]
    else:
        lines = [format(float(v), FLOAT_FORMAT) for v in flat]
    return '\n'.join([header] + lines) + '\n'


def write_grid(path, field):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(grid_text(field), encoding='utf-8')
    return path


def _header(line):
    parts = line.split()
    if not parts or parts[0] != MAGIC:
        raise ConfigError('Not an HPGRID file', header=line[:80])
    try:
        entries = dict(part.split('=', 1) for part in parts[1:])
        d = int(entries['d'])
        resolution = [int(v) for v in entries['res'].split(',')]
        lower = [float(v) for v in entries['lo'].split(',')]
        upper = [float(v) for v in entries['hi'].split(',')]
        kind = entries.get('kind', FieldKind.REAL)
    except (KeyError, ValueError) as error:
        raise ConfigError('Malformed HPGRID header', header=line[:80]) from error
    if not len(resolution) == len(lower) == len(upper) == d or kind not in (FieldKind.REAL,
                                                                            FieldKind.COMPLEX):
        raise ConfigError('Inconsistent HPGRID header', header=line[:80])
    return resolution, lower, upper, kind


def parse_grid(text):
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ConfigError('Empty HPGRID file')
    resolution, lower, upper, kind = _header(lines[0])
    try:
        if kind == FieldKind.COMPLEX:
            pairs = [line.split() for line in lines[1:]]
            values = np.array([float(re) + 1j * float(im) for re, im in pairs])
        else:
            values = np.array([float(line) for line in lines[1:]])
    except ValueError as error:
        raise ConfigError('Malformed HPGRID samples') from error
    if values.size != int(np.prod(resolution)):
        raise ConfigError('HPGRID sample count does not match the header',
                          expected=int(np.prod(resolution)), got=int(values.size))
    return GridField(BoxDomain(lower, upper), resolution, values)


def read_grid(path):
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as error:
        raise ConfigError(f'Cannot read grid file {path}', path=str(path)) from error
    return parse_grid(text)


def read_mask(path, domain=None, resolution=None):
    """Mask grid as an ObservationSet, checked against the experiment grid when given"""
    field = read_grid(path)
    if domain is not None and field.domain != domain:
        raise ConfigError('Mask domain differs from the experiment domain', path=str(path))
    if resolution is not None and tuple(field.resolution) != tuple(resolution):
        raise ConfigError('Mask resolution differs from the experiment grid', path=str(path),
                          mask=list(field.resolution), grid=list(resolution))
    return ObservationSet(field)


def pgm_text(mask, levels=255):
    """Plain P2 image; 2-D masks put axis 1 upward, 3-D masks stack the slices vertically"""
    values = np.asarray(mask.values, dtype=float)
    if values.ndim == 1:
        image = values[None, :]
    else:
        image = np.flipud(values.reshape(values.shape[0], -1).T)
    pixels = np.rint(np.clip(image, 0.0, 1.0) * levels).astype(int)
    rows = [' '.join(str(p) for p in row) for row in pixels]
    return f'P2\n{pixels.shape[1]} {pixels.shape[0]}\n{levels}\n' + '\n'.join(rows) + '\n'


def write_pgm(path, mask):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(pgm_text(mask), encoding='ascii')
    logger.debug('Wrote mask image %s', path)
    return path
