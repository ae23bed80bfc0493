"""
Approximate observability constants and the packet/finite-difference sandwich
"""
import itertools
import logging
import math

import numpy as np
from scipy.linalg import LinAlgError, cholesky, eigh, solve_triangular

from config.settings import Config
from errors import PencilDegenerate, PreconditionViolation, SandwichViolation
from models.frame import Frame
from models.report import CheckReport, ObservabilityReport
from numerics.gramian import FULL_SPACE, diagonal_quotients, time_depth
from numerics.heat_oracle import observation_energy, short_time_limit
from numerics.packet_frame import apply_axes, axis_factors, dense_coefficients, superpose_grid
from numerics.parallel import ordered_map
from numerics.quadrature import graded_simpson, refine

logger = logging.getLogger(__name__)


def c_rand_packets(frame, omega, T, settings=Config):
    """min over S of d_n G_nn(x₀, x₀, ω) and the attaining index"""
    quotients = diagonal_quotients(frame.params.frequencies, frame.x0, frame.sigma, omega, T,
                                   settings)
    best = min(range(len(quotients)), key=lambda k: (quotients[k], tuple(frame.indices[k])))
    return float(quotients[best]), tuple(int(v) for v in frame.indices[best])


# Pencil
def _congruence(pencil):
    """R^{-*} G R^{-1} with H = R* R"""
    try:
        R = cholesky(pencil.H, lower=False)
    except LinAlgError as error:
        raise PencilDegenerate('H is not positive definite', size=pencil.size) from error
    left = solve_triangular(R, pencil.G, trans='C', lower=False)
    reduced = solve_triangular(R, left.conj().T, trans='C', lower=False).conj().T
    return R, 0.5 * (reduced + reduced.conj().T)


def pencil_minimiser(pencil):
    """Smallest eigenvalue of G c = λ H c with its H-normalised eigenvector"""
    R, reduced = _congruence(pencil)
    values, vectors = eigh(reduced)
    c = solve_triangular(R, vectors[:, 0], lower=False)
    return float(values[0]), c


def c_det_pencil(pencil):
    """Smallest generalised eigenvalue of the pencil, clipped at zero"""
    value, _ = pencil_minimiser(pencil)
    if value < -1e-12 * max(float(np.linalg.norm(pencil.G)), 1.0):
        logger.warning('Pencil minimum %.3e is negative beyond roundoff', value)
    return max(value, 0.0)


def rayleigh_quotient(pencil, c):
    c = np.asarray(c, dtype=complex)
    return float(np.real(np.vdot(c, pencil.G @ c)) / np.real(np.vdot(c, pencil.H @ c)))


def random_coefficients(rng, size):
    """Independent ±1 real and imaginary parts scaled to unit ℓ² norm"""
    c = rng.choice([-1.0, 1.0], size=size) + 1j * rng.choice([-1.0, 1.0], size=size)
    return c / np.linalg.norm(c)


def rayleigh_samples(pencil, count, rng):
    return [rayleigh_quotient(pencil, random_coefficients(rng, pencil.size)) for _ in range(count)]


# Sine spectrum of the box
def sine_modes(domain, count):
    """The count lowest Dirichlet modes as (multi-index, eigenvalue), ties broken lexicographically"""
    per_axis = range(1, count + 1)
    candidates = []
    for orders in itertools.product(per_axis, repeat=domain.d):
        value = float(sum((j * math.pi / length) ** 2 for j, length in zip(orders, domain.lengths)))
        candidates.append((value, orders))
    candidates.sort()
    return [(orders, value) for value, orders in candidates[:count]]


def _sine_primitive(m, theta):
    if m == 0:
        return theta
    return np.sin(m * theta) / m


def _axis_products(orders, edges, lower, length):
    """∫_cell (2/ℓ) sin(j π (x-lo)/ℓ) sin(k π (x-lo)/ℓ) dx, shaped (J, J, cells)"""
    theta = math.pi * (np.asarray(edges) - lower) / length
    out = np.empty((len(orders), len(orders), len(edges) - 1))
    for a, j in enumerate(orders):
        for b, k in enumerate(orders):
            values = (_sine_primitive(j - k, theta) - _sine_primitive(j + k, theta)) / math.pi
            out[a, b] = np.diff(values)
    return out


def mode_overlaps(omega, modes):
    """∫_ω Ψ_j Ψ_k for the given modes by exact per-cell integrals weighted by the mask"""
    domain = omega.domain
    edges = domain.cell_edges(omega.resolution)
    products = [_axis_products([orders[axis] for orders, _ in modes], edges[axis],
                               domain.lower[axis], domain.lengths[axis])
                for axis in range(domain.d)]
    out = np.einsum('jkc,c...->jk...', products[0], omega.values)
    for product in products[1:]:
        out = np.einsum('jkc,jkc...->jk...', product, out)
    return out


def _growth(total, T):
    """(e^{total·T} - 1)/total"""
    return np.where(total > 0, np.expm1(total * T) / np.where(total > 0, total, 1.0), T)


def c_rand_spectral(omega, T, count):
    """min_j ((e^{2λ_j T} - 1)/(2λ_j)) ∫_ω Ψ_j² over the first count sine modes"""
    if count < 1:
        raise PreconditionViolation('At least one mode is needed', count=count)
    modes = sine_modes(omega.domain, count)
    eigenvalues = np.array([value for _, value in modes])
    overlaps = np.diagonal(mode_overlaps(omega, modes))
    values = _growth(2.0 * eigenvalues, T) * overlaps
    best = int(np.argmin(values))
    return float(max(values[best], 0.0)), tuple(modes[best][0])


def c_det_spectral(omega, T, count):
    """Smallest eigenvalue of ((e^{(λ_j+λ_k)T} - 1)/(λ_j+λ_k)) ∫_ω Ψ_j Ψ_k"""
    modes = sine_modes(omega.domain, count)
    eigenvalues = np.array([value for _, value in modes])
    total = eigenvalues[:, None] + eigenvalues[None, :]
    matrix = _growth(total, T) * mode_overlaps(omega, modes)
    return float(max(np.linalg.eigvalsh(0.5 * (matrix + matrix.T))[0], 0.0))


# Sandwich
def packet_energies(frame, draws, omega, T, settings=Config):
    """∫₀ᵀ∫_ω |Σ c_n φ_n|² and ∫_Ω |Σ c_n φ_n(T)|² on the mask grid, one entry per coefficient draw"""
    domain, resolution = omega.domain, omega.resolution
    centres = domain.cell_centers(resolution)
    vol = domain.cell_volume(resolution)
    # coefficient tensors stacked on a trailing axis; apply_axes moves it to the front
    tensors = np.stack([dense_coefficients(Frame(frame.params, frame.x0, c))[0] for c in draws],
                       axis=-1)
    n_max = (tensors.shape[0] - 1) // 2
    depth = time_depth(frame.params.frequencies, frame.sigma, T)
    max_level = max(0, int(math.log2(settings.TIME_MAX_INTERVALS / settings.TIME_INTERVALS)))
    space = tuple(range(1, frame.d + 1))

    def values(t):
        return apply_axes(tensors, axis_factors(t, centres, frame.x0, frame.L, n_max, frame.sigma))

    def masked(t):
        return np.sum(omega.values * np.abs(values(t)) ** 2, axis=space) * vol

    def evaluate(level):
        times, weights = graded_simpson(T, settings.TIME_INTERVALS * 2 ** level, depth)
        return np.tensordot(weights, np.stack([masked(t) for t in times]), axes=1)

    numerators = refine(evaluate, settings.GRAMIAN_RTOL, max_level, label='packet energy')
    finals = np.sum(np.abs(values(T)) ** 2, axis=space) * vol
    return numerators, finals


def sandwich_check(frame, omega, T, trials, eta, seed=0, bump=None, eta0=None, c_sd=1.0,
                   threads=None, settings=Config):
    """Packet and finite-difference quotients for random data must agree within [η/2, 2/η]"""
    if omega is FULL_SPACE or omega.is_empty():
        return CheckReport('sandwich', skipped=True, message='observation set is empty',
                           metrics={'packet_quotients': [], 'fd_quotients': []})
    rng = np.random.default_rng(seed)
    draws = [random_coefficients(rng, frame.params.size) for _ in range(trials)]
    lower, upper = eta / 2.0, 2.0 / eta

    def fd_quotient(c):
        initial = superpose_grid(Frame(frame.params, frame.x0, c), 0.0, omega.domain, omega.resolution)
        masked, final = observation_energy(initial, T, omega, settings)
        return masked / final

    numerators, finals = packet_energies(frame, draws, omega, T, settings)
    packet = [float(v) for v in numerators / finals]
    fd = ordered_map(fd_quotient, draws, threads)
    ratios = [p / q if q > 0 else math.inf for p, q in zip(packet, fd)]
    metrics = {
        'packet_quotients': packet,
        'fd_quotients': fd,
        'ratios': ratios,
        'bounds': [lower, upper],
        'seed': seed,
        'empirical_c_packets': min(packet),
        'empirical_c_true': min(fd),
    }
    if bump is not None and eta0 is not None:
        limit = short_time_limit(bump, eta0, c_sd)
        metrics['short_time_limit'] = limit
        metrics['short_time'] = T < limit
    for position, ratio in enumerate(ratios):
        if not lower <= ratio <= upper:
            raise SandwichViolation('Packet and finite-difference quotients leave the sandwich',
                                    trial=position, ratio=ratio, **metrics)
    logger.info('Sandwich held over %d trials (ratios %.3g..%.3g)', trials, min(ratios), max(ratios))
    return CheckReport('sandwich', True, metrics=metrics)


def observability_report(frame, omega, T, pencil=None, trials=20, modes_cap=64, eta=0.1, seed=0,
                         bump=None, eta0=None, c_sd=1.0, threads=None, settings=Config):
    """All constants side by side; the sandwich failure is recorded rather than raised"""
    packets, index = c_rand_packets(frame, omega, T, settings)
    spectral, mode = c_rand_spectral(omega, T, modes_cap)
    det_pencil = None if pencil is None else c_det_pencil(pencil)
    try:
        sandwich = sandwich_check(frame, omega, T, trials, eta, seed, bump, eta0, c_sd, threads,
                                  settings)
    except SandwichViolation as error:
        sandwich = CheckReport('sandwich', False, metrics=error.details, message=error.message)
    return ObservabilityReport(
        c_rand_packets=packets,
        c_det_pencil=det_pencil,
        c_rand_spectral=spectral,
        c_true_samples=sandwich.get('fd_quotients', []),
        sandwich=sandwich,
        c_rand_packets_index=list(index),
        c_rand_spectral_mode=list(mode),
        c_det_spectral=c_det_spectral(omega, T, modes_cap),
    )
