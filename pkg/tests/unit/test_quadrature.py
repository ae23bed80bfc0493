import math

import numpy as np
import pytest

from errors import QuadratureNonConvergence
from numerics.quadrature import composite_rule, graded_simpson, grading_depth, refine, time_integral


def test_composite_gauss_legendre_is_exact_for_polynomials():
    nodes, weights = composite_rule(0.0, 2.0, 3, 4)
    assert float(np.dot(weights, nodes ** 5)) == pytest.approx(2.0 ** 6 / 6.0, rel=1e-13)


def test_time_integral_of_quadratic():
    times = np.linspace(0.0, 1.0, 9)
    assert time_integral(times ** 2, times) == pytest.approx(1.0 / 3.0, rel=1e-12)


def test_graded_simpson_resolves_a_fast_transient():
    T, rate = 1.0, 1000.0
    depth = grading_depth(T, rate)
    assert depth == 10
    times, weights = graded_simpson(T, 32, depth)
    assert weights.sum() == pytest.approx(T, rel=1e-12)
    exact = -math.expm1(-rate * T) / rate
    assert float(np.dot(weights, np.exp(-rate * times))) == pytest.approx(exact, rel=1e-5)


def test_slow_decay_needs_no_grading():
    assert grading_depth(1.0, 0.5) == 0


def test_refine_stops_when_levels_agree():
    assert refine(lambda level: 1.0 + 2.0 ** (-40 * (level + 1)), 1e-10, 4) == pytest.approx(1.0)


def test_refine_raises_without_agreement():
    with pytest.raises(QuadratureNonConvergence):
        refine(lambda level: float(level), 1e-10, 3, label='diverging')
