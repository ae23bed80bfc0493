import math

import numpy as np
import pytest
from scipy.integrate import quad

from models.domain import BoxDomain, GridField
from models.frame import BumpSpec
from numerics.profiles import bump, bump_constants, bump_l2_norm, psi, scaled_bump, sobolev_index


def test_bump_values():
    assert bump(np.array([0.0]))[0] == pytest.approx(math.exp(-1.0))
    assert bump(np.array([1.0, 4.0])).tolist() == [0.0, 0.0]


def test_psi_has_unit_norm_in_one_dimension():
    value, _ = quad(lambda y: psi(np.array([y * y]), 1)[0] ** 2, -1.0, 1.0, epsabs=0.0, epsrel=1e-12)
    assert value == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize('d, s', [(1, 1), (2, 2), (3, 2)])
def test_sobolev_index_exceeds_half_dimension(d, s):
    assert sobolev_index(d) == s


def test_scaled_bump_keeps_unit_norm():
    bump = BumpSpec(0.1, [0.5], 0.5)
    field = GridField.from_function(BoxDomain([0.0], [1.0]), (4096,), lambda x: scaled_bump(bump, x))
    assert field.l2_norm() == pytest.approx(1.0, rel=1e-6)


def test_norm_constants_are_ordered():
    constants = bump_constants(1)
    assert constants['M0'] == pytest.approx(math.exp(-1.0) / bump_l2_norm(1), rel=1e-6)
    assert constants['M0'] <= constants['M1'] <= constants['M2']
    assert constants['s'] == 1
