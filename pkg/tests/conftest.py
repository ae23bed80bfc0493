"""
Shared fixtures: engine on the import path, testing settings, small boxes and frames
"""
import sys
from pathlib import Path

import numpy as np
import pytest

ENGINE = Path(__file__).resolve().parent.parent / 'engine'
if str(ENGINE) not in sys.path:
    sys.path.insert(0, str(ENGINE))

from config.settings import TestingConfig  # noqa: E402
from models.domain import BoxDomain, ObservationSet  # noqa: E402
from models.frame import Frame, FrameParams  # noqa: E402

FIXTURES = Path(__file__).resolve().parent / 'fixtures'


def pytest_addoption(parser):
    parser.addoption('--run-slow', action='store_true', default=False,
                     help='Also run the full validate acceptance runs.')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: full-size runs on the shipped default configuration')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--run-slow'):
        return
    skip = pytest.mark.skip(reason='needs --run-slow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip)


def lattice(n_max, d=1):
    return np.indices((2 * n_max + 1,) * d).reshape(d, -1).T - n_max


def make_frame(sigma, L, n_max, x0, coefficients=None):
    """Frame on the full box [-n_max, n_max]^d without a bump behind it"""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    params = FrameParams(sigma, L, epsilon=0.01, eta=0.1, indices=lattice(n_max, x0.size))
    if coefficients is None:
        coefficients = np.ones(params.size)
    return Frame(params, x0, coefficients)


@pytest.fixture
def settings():
    return TestingConfig


@pytest.fixture
def unit_interval():
    return BoxDomain([0.0], [1.0])


@pytest.fixture
def unit_square():
    return BoxDomain([0.0, 0.0], [1.0, 1.0])


@pytest.fixture
def frame_factory():
    return make_frame


@pytest.fixture
def narrow_frame():
    """σ = 0.05 packets centred in (0, 1), |n| ≤ 3 with L = 0.5"""
    return make_frame(0.05, 0.5, 3, [0.5])


@pytest.fixture
def left_half(unit_interval):
    return ObservationSet.from_predicate(unit_interval, (128,), lambda x: x <= 0.5)


@pytest.fixture
def fixtures_dir():
    return FIXTURES
