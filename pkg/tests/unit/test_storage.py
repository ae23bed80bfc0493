import json
import math

import numpy as np
import pandas as pd
import pytest

from config.experiment import parse_experiment
from config.settings import Config
from errors import ConfigError, SupportViolation
from models.domain import BoxDomain, GridField, ObservationSet
from models.pencil import GramianPencil
from storage.artifacts import envelope, frame_payload, read_frame, read_pencil, write_pencil, \
    write_table
from storage.formats import FLOAT_FORMAT, canonical_json, write_json
from storage.grid_io import grid_text, parse_grid, pgm_text, read_grid, read_mask, write_grid


def test_canonical_json_text():
    text = canonical_json({'b': 1.0, 'a': [0.1, math.nan]})
    assert text == '{\n  "a": [0.10000000000000001, "nan"],\n  "b": 1\n}\n'


def test_canonical_json_handles_numpy_and_infinity():
    text = canonical_json({'x': np.float64(-math.inf), 'n': np.int64(3), 'empty': []})
    assert json.loads(text) == {'empty': [], 'n': 3, 'x': '-inf'}


def test_grid_text_header(unit_square):
    field = GridField(unit_square, (2, 3), np.arange(6, dtype=float))
    lines = grid_text(field).splitlines()
    assert lines[0] == 'HPGRID d=2 res=2,3 lo=0,0 hi=1,1 kind=real'
    assert lines[1:] == ['0', '1', '2', '3', '4', '5']


def test_grid_file_keeps_complex_samples(tmp_path, unit_interval):
    field = GridField(unit_interval, (3,), np.array([1 + 2j, -0.5j, 0.25]))
    path = write_grid(tmp_path / 'field.hpgrid', field)
    loaded = read_grid(path)
    assert loaded.domain == unit_interval
    np.testing.assert_array_equal(loaded.values, field.values)


@pytest.mark.parametrize('text', [
    '',
    'GRID d=1 res=2 lo=0 hi=1\n0\n1\n',
    'HPGRID d=1 res=2 lo=0\n0\n1\n',
    'HPGRID d=2 res=2 lo=0 hi=1\n0\n1\n',
    'HPGRID d=1 res=3 lo=0 hi=1\n0\n1\n',
    'HPGRID d=1 res=2 lo=0 hi=1\n0\nx\n',
])
def test_malformed_grids_are_rejected(text):
    with pytest.raises(ConfigError):
        parse_grid(text)


def test_mask_must_match_the_grid(tmp_path, unit_interval):
    path = write_grid(tmp_path / 'mask.hpgrid', GridField(unit_interval, (4,), [0, 1, 1, 0]))
    mask = read_mask(path, unit_interval, (4,))
    assert mask.measure == pytest.approx(0.5)
    with pytest.raises(ConfigError):
        read_mask(path, unit_interval, (8,))
    with pytest.raises(ConfigError):
        read_mask(path, BoxDomain([0], [2]), (4,))


def test_missing_grid_file(tmp_path):
    with pytest.raises(ConfigError):
        read_grid(tmp_path / 'absent.hpgrid')


def test_pgm_of_a_line_mask(unit_interval):
    mask = ObservationSet(GridField(unit_interval, (3,), [0.0, 0.5, 1.0]))
    assert pgm_text(mask) == 'P2\n3 1\n255\n0 128 255\n'


def test_pgm_puts_the_second_axis_upward(unit_square):
    mask = ObservationSet(GridField(unit_square, (2, 2), [[0.0, 1.0], [0.0, 0.0]]))
    assert pgm_text(mask) == 'P2\n2 2\n255\n255 0\n0 0\n'


def test_pencil_directory(tmp_path):
    G = np.array([[2.0, 0.5 - 0.25j], [0.5 + 0.25j, 1.0]])
    H = np.array([[1.0, 0.1j], [-0.1j, 1.0]])
    pencil = GramianPencil([[-1], [1]], G, H, 0.01, 0.5, 1.5, [0.5], mask_hash='abc')
    out = write_pencil(tmp_path / 'pencil', pencil)
    assert sorted(p.name for p in out.iterdir()) == ['G.csv', 'H.csv', 'pencil.json']
    assert list(pd.read_csv(out / 'G.csv').columns) == ['row', 'col', 're', 'im']
    loaded = read_pencil(out)
    np.testing.assert_array_equal(loaded.G, G)
    np.testing.assert_array_equal(loaded.H, H)
    assert loaded.indices.tolist() == [[-1], [1]]
    assert loaded.mask_hash == 'abc'
    assert loaded.T == 0.01


def test_unreadable_pencil_sidecar(tmp_path):
    with pytest.raises(ConfigError):
        read_pencil(tmp_path)


def test_envelope_embeds_config_and_error():
    experiment = parse_experiment('T=0.02\n')
    payload = envelope('design', experiment, error=SupportViolation('too close', distance=0.01))
    assert payload['config_hash'] == experiment.config_hash
    assert payload['config']['T'] == 0.02
    assert payload['result'] is None
    assert payload['error']['type'] == 'SupportViolation'
    assert payload['error']['exit_code'] == 2
    assert payload['error']['details'] == {'distance': 0.01}


def test_table_keeps_column_order(tmp_path):
    path = write_table(tmp_path / 'rows.csv', [{'b': 1.5, 'a': 2}], columns=['b', 'a'])
    assert path.read_text().splitlines() == ['b,a', '1.5,2']


def test_frame_file_round_trip_is_bit_exact(tmp_path, frame_factory):
    rng = np.random.default_rng(3)
    coefficients = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    frame = frame_factory(0.1 / 3, 1.0 / 3 + 1e-9, 3, [math.pi / 7], coefficients)
    frame.error, frame.reference_norm = 1e-3 / 3, math.sqrt(2)
    frame.decay_constant, frame.decay_small = 0.7, math.nan
    frame.ladder = [{'loglog': 1.25, 'relative_error': 0.3}]
    path = write_json(tmp_path / 'frame.json', frame_payload(frame))
    loaded = read_frame(path)
    assert canonical_json(frame_payload(loaded)) == path.read_text(encoding='utf-8')
    assert loaded.x0.tobytes() == frame.x0.tobytes()
    assert loaded.coefficients.tobytes() == frame.coefficients.tobytes()
    assert loaded.sigma == frame.sigma and loaded.L == frame.L
    np.testing.assert_array_equal(loaded.indices, frame.indices)
    assert math.isnan(loaded.decay_small)


def test_frame_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        read_frame(tmp_path / 'absent.json')
    bad = tmp_path / 'frame.json'
    bad.write_text('{"sigma": 0.1, "coefficients": [[1.0]]}')
    with pytest.raises(ConfigError):
        read_frame(bad)


def test_float_digits_setting_drives_every_writer(tmp_path, unit_interval):
    assert FLOAT_FORMAT == f'.{Config.FLOAT_DIGITS}g'
    third = 1.0 / 3.0
    digits = Config.FLOAT_DIGITS
    assert canonical_json(third).strip() == format(third, f'.{digits}g')
    assert grid_text(GridField(unit_interval, (1,), [third])).splitlines()[1] == format(third, f'.{digits}g')
    path = write_table(tmp_path / 'third.csv', [{'x': third}])
    assert path.read_text().splitlines()[1] == format(third, f'.{digits}g')
