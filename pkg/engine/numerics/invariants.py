"""
Invariant suites run by the validate command
"""
import itertools
import logging
import math
import time

import numpy as np
from scipy.integrate import trapezoid

from errors import HeatPackError, PreconditionError
from models.frame import HeatPacket
from models.report import CheckReport, CheckStatus
from numerics.design_solver import (J_of_a, density_matrix, energy_densities, h1_refinement_study,
                                     h2_gamma_check, lp_relaxation, solve_saddle,
                                     stability_study)
from numerics.gramian import bounds_check, full_space_overlap, injected, radial_diagnostic
from numerics.heat_oracle import (bump_field, convergence_study, energy_check, fd_solve,
                                  kac_sandwich_check)
from numerics.observability import c_det_pencil, pencil_minimiser, rayleigh_quotient, \
    rayleigh_samples, sandwich_check
from numerics.packet_frame import decay_check, evolved_norm_squared, packet_modulus_squared, \
    packet_value

logger = logging.getLogger(__name__)


class SuiteName:
    """Names accepted by --suite"""
    FRAME = 'frame'
    PACKETS = 'packets'
    KAC = 'kac'
    FD = 'fd'
    ENERGY = 'energy'
    GRAMIAN = 'gramian'
    PENCIL = 'pencil'
    SANDWICH = 'sandwich'
    SADDLE = 'saddle'
    STABILITY = 'stability'
    H2 = 'h2'

    ALL = (FRAME, PACKETS, KAC, FD, ENERGY, GRAMIAN, PENCIL, SANDWICH, SADDLE, STABILITY, H2)


STABILITY_N = (4, 8, 16, 32)
RAYLEIGH_SAMPLES = 100


def frame_suite(runner, inject=False):
    frame = runner.frame
    decay = decay_check(frame)
    passed = frame.relative_error <= runner.experiment.eta and decay.passed
    return CheckReport(SuiteName.FRAME, passed, metrics={
        'relative_error': frame.relative_error,
        'eta': runner.experiment.eta,
        'modes': frame.params.size,
        'decay': decay.to_dict(),
        'ladder': frame.ladder,
    })


def _line_integral(fn, centre, width, points=20001):
    x = np.linspace(centre - width, centre + width, points)
    return trapezoid(fn(x), x)


def packets_suite(runner, inject=False):
    """Unit initial norm, evolved-norm closed form and the overlap formula in one dimension"""
    sigma = runner.frame.sigma
    x0 = 0.0
    initial = _line_integral(lambda x: packet_modulus_squared(HeatPacket([x0], [0.0], sigma), 0.0, x),
                             x0, 12.0 * sigma)
    worst_norm = 0.0
    for t, xi in itertools.product(np.linspace(0.0, 0.5, 5) * sigma ** 2,
                                   np.linspace(0.0, 2.0, 5) / sigma):
        packet = HeatPacket([x0], [xi], sigma)
        width = 12.0 * math.sqrt(sigma ** 2 + t)
        numeric = _line_integral(lambda x: packet_modulus_squared(packet, t, x), x0, width)
        exact = float(evolved_norm_squared(t, [xi], sigma, 1))
        if exact > 1e-200:
            worst_norm = max(worst_norm, abs(numeric - exact) / exact)
    worst_overlap = 0.0
    for t, (a, b), gap in itertools.product((0.0, 0.3 * sigma ** 2), ((0.0, 0.5), (0.7, -0.4)),
                                           (0.0, 0.5 * sigma)):
        p = HeatPacket([0.0], [a / sigma], sigma)
        q = HeatPacket([gap], [b / sigma], sigma)
        width = 12.0 * math.sqrt(sigma ** 2 + t) + gap
        numeric = _line_integral(lambda x: packet_value(p, t, x) * np.conj(packet_value(q, t, x)),
                                 0.5 * gap, width)
        exact = complex(full_space_overlap(t, [a / sigma], [b / sigma], [0.0], [gap], sigma))
        worst_overlap = max(worst_overlap, abs(numeric - exact))
    passed = abs(initial - 1.0) <= 1e-8 and worst_norm <= 1e-6 and worst_overlap <= 1e-8
    return CheckReport(SuiteName.PACKETS, passed, metrics={
        'initial_norm_defect': abs(initial - 1.0),
        'evolved_norm_relative_error': worst_norm,
        'overlap_error': worst_overlap,
    })


def kac_suite(runner, inject=False):
    return kac_sandwich_check(runner.bump, runner.domain, runner.resolution, runner.T,
                              runner.settings)


def fd_suite(runner, inject=False):
    base = min(runner.resolution)
    resolutions = [max(8, base // 4), max(16, base // 2), max(32, base)]
    return convergence_study(runner.domain, [(r,) * runner.domain.d for r in resolutions], runner.T,
                             runner.settings)


def energy_suite(runner, inject=False):
    g = bump_field(runner.bump, runner.domain, runner.resolution)
    return energy_check(fd_solve(g, runner.T, settings=runner.settings), runner.settings)


def gramian_suite(runner, inject=False):
    pencil = injected(runner.pencil) if inject else runner.pencil
    report = bounds_check(pencil, runner.omega, runner.constants, runner.domain, runner.settings)
    report.name = SuiteName.GRAMIAN
    report.metrics['injected'] = inject
    report.metrics['horizon_ratio'] = pencil.T / pencil.sigma ** 2
    report.metrics['calibration_horizons'] = runner.constants.horizons
    report.metrics['radial'] = _radial(runner, pencil)
    return report


def _radial(runner, pencil):
    """Lowest pencil frequency on the largest ball around x₀ inside Ω; reported only"""
    lowest = pencil.indices[int(np.argmin(np.sum(pencil.indices ** 2, axis=1)))]
    radius = runner.domain.distance_to_boundary(pencil.x0)
    return radial_diagnostic(lowest, lowest, pencil.x0, radius, pencil.T, pencil.sigma, pencil.L,
                             runner.domain, runner.resolution, runner.constants, runner.settings)


def pencil_suite(runner, inject=False):
    pencil = runner.pencil
    value = c_det_pencil(pencil)
    samples = rayleigh_samples(pencil, RAYLEIGH_SAMPLES, runner.rng())
    minimum, vector = pencil_minimiser(pencil)
    equality = abs(rayleigh_quotient(pencil, vector) - minimum)
    slack = 1e-12 * max(1.0, abs(value))
    passed = all(sample >= value - slack for sample in samples) and equality <= 1e-6
    return CheckReport(SuiteName.PENCIL, passed, metrics={
        'c_det_pencil': value,
        'min_sample': min(samples),
        'equality_gap': equality,
        'hermitian_defect': pencil.hermitian_defect(),
        'size': pencil.size,
    })


def sandwich_suite(runner, inject=False):
    e = runner.experiment
    report = sandwich_check(runner.frame, runner.omega, runner.T, e.trials, e.eta, e.seed,
                            runner.bump, runner.eta0, e.c_sd, runner.threads, runner.settings)
    if report.status == CheckStatus.SKIPPED:
        return report
    positive = report['empirical_c_packets'] > 0
    report.metrics['c_det_pencil'] = c_det_pencil(runner.pencil)
    if not positive:
        report.status = CheckStatus.FAILED
    return report


def exhaustive_value(densities, M):
    """Best J_N over characteristic masks with exactly M·cells ones"""
    R = density_matrix(densities)
    cells = R.shape[1]
    ones = int(round(M * cells))
    best = -math.inf
    for chosen in itertools.combinations(range(cells), ones):
        best = max(best, float(R[:, list(chosen)].sum(axis=1).min()))
    return best


def saddle_suite(runner, inject=False):
    """Shipped-config gap plus the exhaustive oracle on a 16-cell grid"""
    e = runner.experiment
    solution = solve_saddle(energy_densities(runner.frame, e.T, e.N, runner.domain, runner.resolution,
                                             runner.threads, runner.settings),
                            e.M, e.iters, e.tol, e.step_constant, N=e.N, settings=runner.settings)
    small_resolution = (16,) if runner.domain.d == 1 else (4, 4) + (1,) * (runner.domain.d - 2)
    densities = energy_densities(runner.frame, e.T, e.N, runner.domain, small_resolution,
                                 runner.threads, runner.settings)[:3]
    small = solve_saddle(densities, 0.5, e.iters, e.tol, e.step_constant, settings=runner.settings)
    relaxed = lp_relaxation(density_matrix(densities), 0.5)
    relaxed_value = small.value if relaxed is None else relaxed.lower
    oracle = exhaustive_value(densities, 0.5)
    value, _ = J_of_a(small.a, densities)
    passed = (solution.gap <= e.tol and small.gap <= e.tol and abs(value - relaxed_value) <= e.tol
              and value >= oracle - e.tol)
    return CheckReport(SuiteName.SADDLE, passed, metrics={
        'value': solution.value,
        'gap': solution.gap,
        'fractional_cells': solution.a.fractional_cells(),
        'small_value': value,
        'small_relaxed': relaxed_value,
        'small_characteristic': oracle,
    })


def stability_suite(runner, inject=False):
    e = runner.experiment
    report, _ = stability_study(runner.frame, e.M, e.T, STABILITY_N, runner.domain, runner.resolution,
                                e.iters, e.tol, e.step_constant, threads=runner.threads,
                                settings=runner.settings)
    coarse = tuple(max(8, n // 2) for n in runner.resolution)
    refinement = h1_refinement_study(runner.frame, e.T, e.N, runner.domain,
                                     [coarse, runner.resolution], runner.threads, runner.settings)
    report.metrics['h1_refinement'] = refinement.metrics
    return report


def h2_suite(runner, inject=False):
    return h2_gamma_check(runner.frame, runner.omega, runner.T, runner.constants, runner.settings)


SUITES = {
    SuiteName.FRAME: frame_suite,
    SuiteName.PACKETS: packets_suite,
    SuiteName.KAC: kac_suite,
    SuiteName.FD: fd_suite,
    SuiteName.ENERGY: energy_suite,
    SuiteName.GRAMIAN: gramian_suite,
    SuiteName.PENCIL: pencil_suite,
    SuiteName.SANDWICH: sandwich_suite,
    SuiteName.SADDLE: saddle_suite,
    SuiteName.STABILITY: stability_suite,
    SuiteName.H2: h2_suite,
}


def run_suites(runner, names=None, inject=False):
    """Run the selected suites in order; returns (reports, timings)"""
    names = list(names or SuiteName.ALL)
    reports, timings = [], []
    for name in names:
        started = time.perf_counter()
        try:
            report = SUITES[name](runner, inject)
        except PreconditionError as error:
            report = CheckReport(name, skipped=True, message=error.message, metrics=error.to_dict())
        except HeatPackError as error:
            report = CheckReport(name, False, message=error.message, metrics=error.to_dict())
        report.name = name
        elapsed = time.perf_counter() - started
        reports.append(report)
        timings.append({'suite': name, 'status': report.status, 'seconds': elapsed})
        logger.info('Suite %s %s in %.2fs', name, report.status, elapsed)
    return reports, timings
