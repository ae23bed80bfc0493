import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from errors import BoundaryViolation, NonpositiveTime, PreconditionViolation
from models.domain import BoxDomain, GridField, ObservationSet
from models.frame import BumpSpec
from numerics.heat_oracle import (convergence_study, energy_check, fd_solve, first_mode,
                                  free_kernel, hypothesis_chain, kac_bound, kac_sandwich_check,
                                  observation_energy, short_time_check, short_time_limit,
                                  whole_vs_domain_check)


def test_free_kernel_hand_value():
    assert free_kernel(0.25, [0.0], [1.0]) == pytest.approx(math.exp(-1.0) / math.sqrt(math.pi))
    assert free_kernel(0.25, [0.0], [1.0]) == pytest.approx(0.207554, abs=1e-6)


def test_free_kernel_on_the_diagonal():
    assert free_kernel(0.5, [1.0, 2.0], [1.0, 2.0]) == pytest.approx(1.0 / (2.0 * math.pi))


def test_free_kernel_has_unit_mass():
    t = 0.01
    y = np.linspace(-10.0 * math.sqrt(t), 10.0 * math.sqrt(t), 20001)
    values = free_kernel(t, np.zeros((y.size, 1)), y[:, None])
    assert trapezoid(values, y) == pytest.approx(1.0, abs=1e-8)


def test_free_kernel_needs_positive_time():
    with pytest.raises(NonpositiveTime):
        free_kernel(0.0, [0.0], [0.0])


def test_kac_branches_meet_at_t0():
    box = BoxDomain([0.0], [1.0])
    y = [0.3]
    t0 = 0.3 ** 2 / 2.0
    early = (4.0 * math.pi * t0) ** -0.5 * math.exp(-0.3 ** 2 / (4.0 * t0))
    late = (4.0 * math.pi * t0) ** -0.5 * math.exp(-0.5)
    assert early == pytest.approx(late)
    assert kac_bound(t0, y, box) == pytest.approx(early)
    assert kac_bound(2.0 * t0, y, box) == pytest.approx(late)


def test_kac_bound_vanishes_far_from_the_boundary():
    box = BoxDomain([-10.0], [10.0])
    near = kac_bound(0.01, [9.5], box)
    far = kac_bound(0.01, [0.0], box)
    assert far < 1e-100 < near


def test_first_mode_decays_at_its_eigenvalue(settings):
    box = BoxDomain([0.0], [1.0])
    g, eigenvalue = first_mode(box, (256,))
    assert eigenvalue == pytest.approx(math.pi ** 2)
    solution = fd_solve(g, 0.1, settings=settings)
    expected = math.exp(-eigenvalue * 0.1) * g.l2_norm()
    assert solution.final.l2_norm() == pytest.approx(expected, rel=1e-3)


def test_zero_data_stays_zero(unit_interval, settings):
    solution = fd_solve(GridField.zeros(unit_interval, (32,)), 0.05, settings=settings)
    assert solution.final.max_abs() == 0.0
    assert energy_check(solution, settings).passed


def test_energy_identity_and_monotone_decay(settings):
    box = BoxDomain([0.0, 0.0], [1.0, 2.0])
    g, _ = first_mode(box, (24, 32))
    solution = fd_solve(g, 0.02, settings=settings)
    report = energy_check(solution, settings)
    assert report.passed
    assert report['relative_residual'] <= 1e-10
    assert np.all(np.diff(solution.norms) < 0)


def test_data_that_misses_the_boundary_condition_is_rejected(unit_interval, settings):
    with pytest.raises(BoundaryViolation):
        fd_solve(GridField(unit_interval, (32,), np.ones(32)), 0.01, settings=settings)


def test_second_order_convergence(unit_interval, settings):
    report = convergence_study(unit_interval, [(16,), (32,), (64,)], 0.05, settings)
    assert report.passed
    assert all(3.5 <= r <= 4.5 for r in report['ratios'])


def test_snapshots_are_kept_at_requested_times(unit_interval, settings):
    g, _ = first_mode(unit_interval, (32,))
    solution = fd_solve(g, 0.01, snapshot_times=[0.0, 0.005], settings=settings)
    assert min(solution.snapshots) == 0.0
    assert solution.T == pytest.approx(0.01)
    assert solution.snapshot(0.005).l2_norm() > solution.final.l2_norm()


def test_whole_space_comparison_preconditions():
    bump = BumpSpec(0.1, [0.5], 0.5)
    with pytest.raises(PreconditionViolation):
        whole_vs_domain_check(bump, BoxDomain([0.0], [1.0]), (64,), T=1.0, eta0=0.1)


def test_short_time_check_at_zero_and_past_the_limit():
    bump = BumpSpec(0.1, [0.5], 0.5)
    box = BoxDomain([0.0], [1.0])
    report = short_time_check(bump, None, box, (64,), 0.0, 0.1)
    assert report['measured'] == 0.0
    assert report.passed
    with pytest.raises(PreconditionViolation):
        short_time_check(bump, None, box, (64,), 2.0 * short_time_limit(bump, 0.1), 0.1)


def test_observation_energy_of_zero_data(unit_interval, settings):
    omega = ObservationSet.full(unit_interval, (16,))
    masked, final = observation_energy(GridField.zeros(unit_interval, (16,)), 0.01, omega, settings)
    assert masked == 0.0 and final == 0.0


@pytest.fixture
def central_bump():
    return BumpSpec(0.1, [0.5], 0.5)


def test_kac_sandwich_for_a_central_bump(central_bump, unit_interval, settings):
    report = kac_sandwich_check(central_bump, unit_interval, (128,), 0.01, settings)
    assert report.passed
    assert report['min_difference'] >= -settings.KAC_TOLERANCE
    assert report['max_difference'] <= report['bound'] + settings.KAC_TOLERANCE
    assert report['discretisation_error'] > 0


def test_kac_sandwich_near_the_boundary(unit_interval, settings):
    bump = BumpSpec(0.1, [0.15], 0.5)
    report = kac_sandwich_check(bump, unit_interval, (128,), 0.01, settings)
    assert report.passed
    assert report['max_difference'] > 1e-3


def test_whole_space_and_domain_agree_away_from_the_boundary(central_bump, unit_interval, settings):
    report = whole_vs_domain_check(central_bump, unit_interval, (256,), 0.002, 0.5, settings=settings)
    assert report.passed
    assert 0 < report['measured'] <= report['bound']


def test_short_time_deviation_grows_but_stays_below_eta0(central_bump, unit_interval, settings):
    t = 0.5 * short_time_limit(central_bump, 0.5)
    report = short_time_check(central_bump, None, unit_interval, (256,), t, 0.5, settings=settings)
    assert report.passed
    assert 0 < report['measured'] <= 0.5
    assert report['monotone']
    assert report['series'][0] == 0.0


def test_hypothesis_chain_verdicts(central_bump, left_half, settings):
    short = hypothesis_chain(central_bump, left_half, 1e-9, 0.5, settings=settings)
    assert short.passed
    assert short['T'] < min(short['smoothing_limit'], short['boundary_limit'])
    assert short['m0'] > 0
    late = hypothesis_chain(central_bump, left_half, 0.05, 0.5, settings=settings)
    assert not late.passed
    assert late['boundary_limit'] < 0.05
    assert 'not certified' in late.message


def test_observation_energy_of_the_first_mode(unit_interval, settings):
    g, eigenvalue = first_mode(unit_interval, (128,))
    T = 0.05
    masked, final = observation_energy(g, T, ObservationSet.full(unit_interval, (128,)), settings)
    initial = g.l2_norm() ** 2
    exact = initial * (1.0 - math.exp(-2.0 * eigenvalue * T)) / (2.0 * eigenvalue)
    assert masked == pytest.approx(exact, rel=1e-3)
    assert final == pytest.approx(initial * math.exp(-2.0 * eigenvalue * T), rel=1e-3)
