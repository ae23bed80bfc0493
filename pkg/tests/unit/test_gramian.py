import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import erf, erfc

import runner as runner_module
from config.experiment import parse_experiment
from errors import BoundViolation, HypothesisViolation, NegativeArgument, NonpositiveTime
from models.domain import BoxDomain, ObservationSet
from models.pencil import GramianConstants
from numerics.gramian import (FULL_SPACE, LOWER_PREFACTOR, UPPER_PREFACTOR, assemble_pencil,
                              attenuation, ball_fraction, bounds_check, calibrate_constants,
                              calibration_horizons, check_hypotheses, diag_bounds,
                              diagonal_quotients, erfc_rational, full_domain, gram_matrix,
                              gramian_entry, injected, radial_diagnostic, shape_mass)
from runner import ExperimentRunner

T = 0.01


@pytest.fixture
def wide_frame(frame_factory):
    return frame_factory(1.0, 1.0, 2, [0.5])


@pytest.fixture
def left_third(unit_interval):
    return ObservationSet.from_predicate(unit_interval, (64,), lambda x: x <= 1.0 / 3.0)


@pytest.fixture
def pencil(wide_frame, left_third, settings):
    return assemble_pencil(wide_frame, left_third, T, settings=settings)


def test_attenuation_values():
    assert attenuation(1.0, [1.0], 1.0) == pytest.approx(math.exp(-1.0))
    assert attenuation(0.0, [3.0], 0.5) == 1.0
    assert attenuation(2.0, [0.0], 0.5) == 1.0
    values = attenuation(np.linspace(0.0, 1.0, 11), [2.0], 0.7)
    assert np.all(np.diff(values) < 0)


def test_erfc_rational():
    assert erfc_rational(0.0) == 1.0
    assert erfc_rational(1.0) == pytest.approx(0.15730, abs=1e-5)
    assert abs(erfc_rational(1.0) - erfc(1.0)) <= 5e-4
    assert np.all(np.diff(erfc_rational(np.linspace(0.0, 4.0, 9))) < 0)
    with pytest.raises(NegativeArgument):
        erfc_rational(-0.1)


def test_bound_prefactor_ratio():
    expected = math.exp(-1.0) * erf(1.0) / (1.0 + erfc(1.0))
    assert LOWER_PREFACTOR / UPPER_PREFACTOR == pytest.approx(expected)


def test_ball_fraction():
    box = BoxDomain([0.0], [10.0])
    x0 = [5.0]
    full = ObservationSet.full(box, (1000,))
    left = ObservationSet.from_predicate(box, (1000,), lambda x: x < 2.0)
    half = ObservationSet.from_predicate(box, (1000,), lambda x: x >= 5.0)
    assert float(ball_fraction(full, x0, 0.0, 0.1)) == pytest.approx(1.0, rel=0.03)
    assert float(ball_fraction(left, x0, 0.0, 0.1)) == 0.0
    assert float(ball_fraction(half, x0, 0.0, 0.1)) == pytest.approx(0.5, rel=0.03)
    assert float(ball_fraction(FULL_SPACE, x0, 0.3, 0.1)) == 1.0


def test_full_space_diagonal_matches_time_quadrature(settings):
    sigma, L, n = 0.5, 1.0, [2]
    xi2 = 4.0

    def integrand(t):
        s = sigma ** 2 + t
        return math.sqrt(sigma ** 2 / s) * math.exp(-2.0 * t * sigma ** 2 * xi2 / s)

    exact, _ = quad(integrand, 0.0, 0.1, epsabs=0.0, epsrel=1e-12)
    value = gramian_entry(n, n, [0.0], [0.0], FULL_SPACE, 0.1, sigma, L, settings)
    assert value.real == pytest.approx(exact, rel=1e-6)
    assert abs(value.imag) <= 1e-12


def test_entries_are_hermitian(left_third, settings):
    a = gramian_entry([1], [-2], [0.4], [0.6], left_third, T, 1.0, 1.0, settings)
    b = gramian_entry([-2], [1], [0.6], [0.4], left_third, T, 1.0, 1.0, settings)
    assert a == pytest.approx(np.conj(b), rel=1e-8)


def test_entries_vanish_linearly_in_T(left_third, settings):
    small = gramian_entry([1], [1], [0.5], [0.5], left_third, 1e-4, 1.0, 1.0, settings).real
    double = gramian_entry([1], [1], [0.5], [0.5], left_third, 2e-4, 1.0, 1.0, settings).real
    assert double / small == pytest.approx(2.0, rel=1e-3)


def test_pencil_is_hermitian_and_positive(pencil):
    assert pencil.size == 5
    assert pencil.hermitian_defect() == 0.0
    assert np.all(np.linalg.eigvalsh(pencil.H) > 0)
    assert np.all(np.linalg.eigvalsh(pencil.G) > -1e-14)


def test_single_index_pencil(wide_frame, left_third, settings):
    pencil = assemble_pencil(wide_frame, left_third, T, indices=[[0]], settings=settings)
    assert pencil.G.shape == (1, 1)
    assert pencil.G[0, 0].real > 0 and pencil.H[0, 0].real > 0


def test_quotients_match_the_pencil_diagonal(wide_frame, pencil, left_third, settings):
    quotients = diagonal_quotients(wide_frame.params.frequencies, wide_frame.x0, 1.0, left_third, T,
                                   settings)
    volume = float(shape_mass(full_domain(left_third.domain, (64,)), wide_frame.x0, 1.0, [T])[0])
    for a, xi in enumerate(wide_frame.params.frequencies):
        expected = pencil.G[a, a].real / (attenuation(T, xi, 1.0) * volume)
        assert quotients[a] == pytest.approx(expected, rel=1e-6)


def test_full_space_quotient_closed_form(settings):
    sigma = 0.3
    quotient = diagonal_quotients([[0.0]], [0.0], sigma, FULL_SPACE, 0.05, settings)[0]
    exact, _ = quad(lambda t: sigma / math.sqrt(sigma ** 2 + t), 0.0, 0.05, epsabs=0.0, epsrel=1e-12)
    assert quotient == pytest.approx(exact / (sigma / math.sqrt(sigma ** 2 + 0.05)), rel=1e-7)


def test_empty_observation_gives_zero_quotients(wide_frame, unit_interval, settings):
    empty = ObservationSet.empty(unit_interval, (32,))
    quotients = diagonal_quotients(wide_frame.params.frequencies, wide_frame.x0, 1.0, empty, T,
                                   settings)
    assert np.all(quotients == 0.0)


def test_shape_mass_of_a_contained_packet(narrow_frame, unit_interval):
    full = ObservationSet.full(unit_interval, (64,))
    times = np.array([0.0, 0.001])
    expected = 0.05 / np.sqrt(0.05 ** 2 + times)
    np.testing.assert_allclose(shape_mass(full, narrow_frame.x0, 0.05, times), expected, rtol=1e-10)


def test_calibrated_bounds_hold_and_catch_injection(wide_frame, pencil, left_third, settings):
    constants = calibrate_constants(1.0, 1.0, left_third.domain, (64,), wide_frame.indices,
                                    wide_frame.x0, extra_masks=(left_third,), extra_horizons=(T,),
                                    settings=settings)
    assert 0 < constants.lower <= constants.upper
    report = bounds_check(pencil, left_third, constants, settings=settings)
    assert report.passed, report['violations']
    assert not bounds_check(injected(pencil), left_third, constants, settings=settings).passed


def test_diagonal_bounds_reject_wrong_constants(pencil, left_third, settings):
    constants = GramianConstants(100.0, 100.0, 1.0)
    with pytest.raises(BoundViolation):
        diag_bounds([0], [0.5], left_third, T, 1.0, 1.0, constants, value=pencil.G[2, 2].real,
                    settings=settings)


def test_bound_hypotheses(unit_interval):
    check_hypotheses(unit_interval, [0.5], 1.0, 0.5)
    with pytest.raises(HypothesisViolation):
        check_hypotheses(unit_interval, [0.5], 0.1, 0.001)
    with pytest.raises(HypothesisViolation):
        check_hypotheses(unit_interval, [0.5], 1.0, 1.5)


def test_gram_matrix_needs_positive_time(left_third, settings):
    with pytest.raises(NonpositiveTime):
        gram_matrix([[0.0]], [[0.5]], 1.0, left_third, 0.0, settings=settings)


def test_radial_diagnostic_on_a_centred_ball(unit_interval, settings):
    report = radial_diagnostic([0], [0], [0.5], 0.25, T, 1.0, 1.0, unit_interval, (64,),
                               settings=settings)
    assert report['radius'] == 0.25
    assert report['value'] > 0
    assert report['leading'] > 0
    assert 0 < report['ratio'] < math.inf


def test_calibration_horizons_stop_at_epsilon1(settings):
    assert calibration_horizons(2.0, None, settings) == pytest.approx(
        [4.0 * h for h in settings.CALIBRATION_HORIZONS])
    assert calibration_horizons(2.0, 0.3, settings) == pytest.approx([0.004, 0.4, 1.2])


def test_calibration_sweep_is_bounded_by_epsilon1(wide_frame, left_third, settings):
    wide = calibrate_constants(1.0, 1.0, left_third.domain, (64,), wide_frame.indices, wide_frame.x0,
                               settings=settings)
    short = calibrate_constants(1.0, 1.0, left_third.domain, (64,), wide_frame.indices,
                                wide_frame.x0, epsilon1=0.05, settings=settings)
    assert max(short.horizons) == pytest.approx(0.05)
    assert max(wide.horizons) == pytest.approx(max(settings.CALIBRATION_HORIZONS))
    assert short.samples < wide.samples


def test_runner_calibrates_up_to_the_configured_epsilon1(monkeypatch, wide_frame, left_third,
                                                         settings):
    seen = {}

    def record(*args, **kwargs):
        seen.update(kwargs)
        return GramianConstants(1.0, 1.0, 1.0)

    monkeypatch.setattr(runner_module, 'calibrate_constants', record)
    runner = ExperimentRunner(parse_experiment('epsilon1=0.3\n'), settings)
    runner.frame, runner.omega, runner.pencil_indices = wide_frame, left_third, wide_frame.indices
    assert runner.constants.lower == 1.0
    assert seen['epsilon1'] == 0.3
    assert seen['extra_horizons'] == (runner.T,)
