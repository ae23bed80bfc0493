import math

import numpy as np
import pytest

from errors import PencilDegenerate, SandwichViolation
from models.domain import ObservationSet
from models.pencil import GramianPencil
from models.report import CheckStatus
import numerics.observability as observability
from numerics.observability import (c_det_pencil, c_det_spectral, c_rand_packets, c_rand_spectral,
                                    mode_overlaps, observability_report, pencil_minimiser,
                                    random_coefficients, rayleigh_quotient, rayleigh_samples,
                                    sandwich_check, sine_modes)


def make_pencil(G, H):
    size = len(G)
    return GramianPencil(np.arange(size).reshape(-1, 1), G, H, 1.0, 1.0, 1.0, [0.0])


@pytest.fixture
def sandwich_frame(frame_factory):
    return frame_factory(0.05, 0.25, 2, [0.5])


# Pencils
def test_two_by_two_pencil():
    assert c_det_pencil(make_pencil([[2.0, 1.0], [1.0, 2.0]], np.eye(2))) == pytest.approx(1.0)


def test_equal_matrices_give_one():
    rng = np.random.default_rng(5)
    B = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    H = B @ B.conj().T + 4.0 * np.eye(4)
    assert c_det_pencil(make_pencil(H, H)) == pytest.approx(1.0, rel=1e-10)


def test_diagonal_pencil_takes_the_smallest_ratio():
    assert c_det_pencil(make_pencil(np.diag([3.0, 5.0]), np.diag([1.0, 2.0]))) == pytest.approx(2.5)


def test_minimiser_attains_the_minimum():
    rng = np.random.default_rng(2)
    A = rng.normal(size=(5, 5))
    B = rng.normal(size=(5, 5))
    pencil = make_pencil(A @ A.T, B @ B.T + np.eye(5))
    value, vector = pencil_minimiser(pencil)
    assert rayleigh_quotient(pencil, vector) == pytest.approx(value, rel=1e-8)
    samples = rayleigh_samples(pencil, 50, np.random.default_rng(0))
    assert min(samples) >= c_det_pencil(pencil) - 1e-12


def test_indefinite_H_is_degenerate():
    with pytest.raises(PencilDegenerate):
        c_det_pencil(make_pencil(np.eye(2), np.diag([1.0, -1.0])))


def test_random_coefficients_have_unit_norm():
    c = random_coefficients(np.random.default_rng(9), 7)
    assert np.linalg.norm(c) == pytest.approx(1.0)
    np.testing.assert_allclose(np.abs(c.real), 1.0 / math.sqrt(14.0))
    np.testing.assert_allclose(np.abs(c.imag), 1.0 / math.sqrt(14.0))


# Sine spectrum
def test_lowest_sine_modes_on_the_interval(unit_interval):
    modes = sine_modes(unit_interval, 3)
    assert [orders for orders, _ in modes] == [(1,), (2,), (3,)]
    assert modes[2][1] == pytest.approx(9.0 * math.pi ** 2)


def test_square_ties_are_broken_lexicographically(unit_square):
    orders = [orders for orders, _ in sine_modes(unit_square, 3)]
    assert orders == [(1, 1), (1, 2), (2, 1)]


def test_half_interval_carries_half_of_every_mode(left_half):
    overlaps = mode_overlaps(left_half, sine_modes(left_half.domain, 6))
    np.testing.assert_allclose(np.diagonal(overlaps), 0.5, atol=1e-12)
    np.testing.assert_allclose(overlaps, overlaps.T, atol=1e-14)


def test_whole_box_overlaps_are_the_identity(unit_square):
    full = ObservationSet.full(unit_square, (16, 16))
    overlaps = mode_overlaps(full, sine_modes(unit_square, 5))
    np.testing.assert_allclose(overlaps, np.eye(5), atol=1e-12)


def test_spectral_constants_on_the_whole_box(unit_interval):
    full = ObservationSet.full(unit_interval, (64,))
    T = 0.01
    expected = math.expm1(2.0 * math.pi ** 2 * T) / (2.0 * math.pi ** 2)
    value, mode = c_rand_spectral(full, T, 4)
    assert value == pytest.approx(expected)
    assert mode == (1,)
    assert c_det_spectral(full, T, 4) == pytest.approx(expected, rel=1e-10)


def test_deterministic_spectral_constant_is_smaller(left_half):
    value, _ = c_rand_spectral(left_half, 0.01, 6)
    assert 0.0 <= c_det_spectral(left_half, 0.01, 6) <= value + 1e-15


# Packets
def test_empty_observation_has_zero_constants(narrow_frame, unit_interval, settings):
    empty = ObservationSet.empty(unit_interval, (32,))
    value, index = c_rand_packets(narrow_frame, empty, 0.001, settings)
    assert value == 0.0
    assert index == (-3,)
    assert c_rand_spectral(empty, 0.001, 4)[0] == 0.0


def test_packet_constant_grows_with_the_observation_set(narrow_frame, left_half, settings):
    full = ObservationSet.full(left_half.domain, (128,))
    part, _ = c_rand_packets(narrow_frame, left_half, 0.001, settings)
    whole, _ = c_rand_packets(narrow_frame, full, 0.001, settings)
    assert 0.0 < part < whole


def test_sandwich_holds_for_interior_packets(sandwich_frame, left_half, settings):
    report = sandwich_check(sandwich_frame, left_half, 0.002, trials=2, eta=0.5, seed=1,
                            threads=1, settings=settings)
    assert report.passed
    assert len(report['ratios']) == 2
    assert all(0.25 <= r <= 4.0 for r in report['ratios'])
    assert report['empirical_c_true'] > 0


def test_sandwich_is_skipped_without_observation(sandwich_frame, unit_interval, settings):
    empty = ObservationSet.empty(unit_interval, (32,))
    report = sandwich_check(sandwich_frame, empty, 0.002, trials=2, eta=0.5, settings=settings)
    assert report.status == CheckStatus.SKIPPED


def test_report_collects_the_constants(sandwich_frame, left_half, settings):
    report = observability_report(sandwich_frame, left_half, 0.002, trials=1, modes_cap=4, eta=0.5,
                                  seed=3, threads=1, settings=settings)
    assert report.c_det_pencil is None
    assert report.c_rand_packets > 0
    assert report.c_rand_spectral >= report.c_det_spectral
    assert report.sandwich.passed
    assert len(report.c_true_samples) == 1


@pytest.fixture
def inflated_fd_energy(monkeypatch):
    """Finite-difference masked energy scaled tenfold so every ratio drops below η/2"""
    original = observability.observation_energy

    def inflated(field, T, omega, settings):
        masked, final = original(field, T, omega, settings)
        return 10.0 * masked, final

    monkeypatch.setattr(observability, 'observation_energy', inflated)


def test_sandwich_violation_keeps_every_trial(inflated_fd_energy, sandwich_frame, left_half,
                                              settings):
    with pytest.raises(SandwichViolation) as caught:
        sandwich_check(sandwich_frame, left_half, 0.002, trials=3, eta=0.5, seed=1, threads=1,
                       settings=settings)
    details = caught.value.details
    assert details['trial'] == 0
    assert len(details['ratios']) == len(details['fd_quotients']) == 3
    assert details['empirical_c_true'] == min(details['fd_quotients'])


def test_failed_sandwich_keeps_the_true_samples(inflated_fd_energy, sandwich_frame, left_half,
                                                settings):
    report = observability_report(sandwich_frame, left_half, 0.002, trials=3, modes_cap=4, eta=0.5,
                                  seed=3, threads=1, settings=settings)
    assert report.sandwich.status == CheckStatus.FAILED
    assert len(report.c_true_samples) == 3
    assert report.c_true_samples == report.sandwich['fd_quotients']
    assert all(r < 0.25 for r in report.sandwich['ratios'])
    assert report.sandwich['packet_quotients']
