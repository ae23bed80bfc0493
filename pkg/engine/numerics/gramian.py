"""
Space-time Gramians of evolved heat packets and their calibrated bounds
"""
import logging
import math
from functools import lru_cache

import numpy as np
from scipy.linalg import LinAlgError, cholesky
from scipy.special import erf, erfc, gamma

from config.settings import Config
from errors import (BoundViolation, HypothesisViolation, NegativeArgument, NonpositiveTime,
                    PencilDegenerate, PreconditionViolation)
from models.domain import GridField, ObservationSet
from models.pencil import GramianConstants, GramianPencil
from models.report import CheckReport
from numerics.packet_frame import packet_axis
from numerics.parallel import ordered_map
from numerics.quadrature import cell_rule, graded_simpson, grading_depth, refine

logger = logging.getLogger(__name__)

# Observation on all of ℝ^d
FULL_SPACE = None

ERFC_COEFFICIENTS = (0.278393, 0.230389, 0.000972, 0.078108)
TIME_CHUNK = 64


def log_attenuation(t, xi, sigma):
    """log A(t, ξ) = -2tσ²|ξ|²/(σ²+t)"""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise NonpositiveTime('Attenuation needs t >= 0')
    xi2 = float(np.sum(np.square(xi)))
    return -2.0 * t * sigma * sigma * xi2 / (sigma * sigma + t)


def attenuation(t, xi, sigma):
    """A(t, ξ) = exp(-2tσ²|ξ|²/(σ²+t))"""
    return np.exp(log_attenuation(t, xi, sigma))


def ball_radius(t, sigma):
    return 2.0 * np.sqrt(sigma * sigma + np.asarray(t, dtype=float))


def ball_volume(radius, d):
    return math.pi ** (d / 2.0) * radius ** d / gamma(d / 2.0 + 1.0)


def ball_fraction(omega, x0, t, sigma):
    """|ω ∩ B(x₀, 2√(σ²+t))| / |B| by cell-centre quadrature of the mask"""
    if omega is FULL_SPACE:
        return np.ones_like(np.asarray(t, dtype=float))
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    mesh = omega.domain.mesh(omega.resolution)
    r2 = sum((x - c) ** 2 for x, c in zip(mesh, x0))
    vol = omega.domain.cell_volume(omega.resolution)
    d = omega.domain.d
    radii = np.atleast_1d(ball_radius(t, sigma))
    fractions = np.array([np.sum(omega.values[r2 <= r * r]) * vol / ball_volume(r, d) for r in radii])
    return fractions.reshape(np.shape(t))


def full_space_overlap(t, xi_n, xi_m, x0, y0, sigma):
    """∫_{ℝ^d} φ_n(t, ·; x₀) conj(φ_m(t, ·; y₀)) in closed form"""
    t = np.asarray(t, dtype=float)
    s = sigma * sigma + t
    value = np.ones_like(t, dtype=complex)
    for a, b, p, q in zip(np.atleast_1d(xi_n), np.atleast_1d(xi_m), np.atleast_1d(x0),
                          np.atleast_1d(y0)):
        gap = p - q
        value = value * (np.sqrt(sigma * sigma / s)
                         * np.exp(-t * sigma * sigma * (a * a + b * b) / s - gap * gap / (8.0 * s)
                                  - sigma ** 4 * (a - b) ** 2 / (2.0 * s)
                                  - 1j * sigma * sigma * (a + b) * gap / (2.0 * s)))
    return value


def time_depth(frequencies, sigma, T):
    rate = max(2.0 * float(np.max(np.sum(np.square(frequencies), axis=1), initial=0.0)),
               1.0 / (sigma * sigma))
    return grading_depth(T, rate)


def _space_matrix(frequencies, centres, sigma, omega, times, settings=Config):
    """S[t, a, b] = ∫ a(x) φ_a(t, x) conj φ_b(t, x) dx for all index pairs"""
    edges = omega.domain.cell_edges(omega.resolution)
    cells = []
    for axis, e in enumerate(edges):
        nodes, weights = cell_rule(e, settings.GL_ORDER)
        # values[a, t, c, o]
        values = np.stack([
            packet_axis(times[:, None, None], nodes[None, :, :] - centres[k, axis],
                        frequencies[k, axis], sigma)
            for k in range(len(frequencies))
        ])
        cells.append(np.einsum('atco,btco,co->tabc', values, values.conj(), weights))
    mask = omega.values.astype(complex)
    out = np.empty((len(times), len(frequencies), len(frequencies)), dtype=complex)
    for ti in range(len(times)):
        partial = np.tensordot(cells[0][ti], mask, axes=([2], [0]))
        for axis in range(1, len(cells)):
            partial = np.einsum('abc,abc...->ab...', cells[axis][ti], partial)
        out[ti] = partial
    return out


def _chunked_space(frequencies, centres, sigma, omega, times, weights, threads=None,
                   settings=Config):
    chunks = [slice(i, i + TIME_CHUNK) for i in range(0, len(times), TIME_CHUNK)]

    def partial(chunk):
        block = _space_matrix(frequencies, centres, sigma, omega, times[chunk], settings)
        return np.tensordot(weights[chunk], block, axes=(0, 0))

    return sum(ordered_map(partial, chunks, threads))


def gram_matrix(frequencies, centres, sigma, omega, T, threads=None, settings=Config):
    """G_ab = ∫₀ᵀ∫_ω φ_a conj φ_b with graded Simpson refinement in time"""
    if T <= 0:
        raise NonpositiveTime('Gramians need T > 0', T=T)
    frequencies = np.atleast_2d(np.asarray(frequencies, dtype=float))
    centres = np.atleast_2d(np.asarray(centres, dtype=float))
    depth = time_depth(frequencies, sigma, T)
    max_level = max(0, int(math.log2(settings.TIME_MAX_INTERVALS / settings.TIME_INTERVALS)))

    def evaluate(level):
        times, weights = graded_simpson(T, settings.TIME_INTERVALS * 2 ** level, depth)
        if omega is FULL_SPACE:
            block = np.stack([
                np.stack([full_space_overlap(times, fa, fb, ca, cb, sigma)
                          for fb, cb in zip(frequencies, centres)], axis=-1)
                for fa, ca in zip(frequencies, centres)], axis=-2)
            return np.tensordot(weights, block, axes=(0, 0))
        return _chunked_space(frequencies, centres, sigma, omega, times, weights, threads, settings)

    return refine(evaluate, settings.GRAMIAN_RTOL, max_level, label='gramian')


def space_gram(frequencies, centres, sigma, omega, t, settings=Config):
    """∫_ω φ_a(t) conj φ_b(t) at a single time"""
    frequencies = np.atleast_2d(np.asarray(frequencies, dtype=float))
    centres = np.atleast_2d(np.asarray(centres, dtype=float))
    if omega is FULL_SPACE:
        return np.array([[complex(full_space_overlap(t, fa, fb, ca, cb, sigma))
                          for fb, cb in zip(frequencies, centres)]
                         for fa, ca in zip(frequencies, centres)])
    return _space_matrix(frequencies, centres, sigma, omega, np.array([float(t)]), settings)[0]


def gramian_entry(n, m, x0, y0, omega, T, sigma, L, settings=Config):
    """G_nm(x₀, y₀, ω) = ∫₀ᵀ∫_ω φ_{n,x₀} conj φ_{m,y₀}"""
    frequencies = np.vstack([np.atleast_1d(n), np.atleast_1d(m)]).astype(float) / L
    centres = np.vstack([np.atleast_1d(x0), np.atleast_1d(y0)]).astype(float)
    return complex(gram_matrix(frequencies, centres, sigma, omega, T, threads=1,
                               settings=settings)[0, 1])


def full_domain(domain, resolution):
    return ObservationSet(GridField(domain, resolution, np.ones(tuple(resolution))))


def pencil_indices(frame, domain, radius, stride=0):
    """S_N ∩ stride·ℤ^d with the automatic stride ⌈πL/diam Ω⌉ when stride is 0"""
    if not stride:
        stride = max(1, int(math.ceil(math.pi * frame.L / domain.diameter)))
    positions = frame.select(radius, stride)
    return frame.indices[positions], stride


def assemble_pencil(frame, omega, T, indices=None, threads=None, settings=Config):
    """G over ω×[0,T] and H over Ω at time T, symmetrised, with H checked by Cholesky"""
    if omega is FULL_SPACE:
        raise PreconditionViolation('Pencils need a finite observation set on the grid of Ω')
    domain = omega.domain
    indices = frame.indices if indices is None else np.atleast_2d(indices)
    frequencies = indices / frame.L
    centres = np.tile(frame.x0, (len(indices), 1))
    G = gram_matrix(frequencies, centres, frame.sigma, omega, T, threads, settings)
    H = space_gram(frequencies, centres, frame.sigma, full_domain(domain, omega.resolution), T,
                   settings)
    G = 0.5 * (G + G.conj().T)
    H = 0.5 * (H + H.conj().T)
    try:
        cholesky(H, lower=False)
    except LinAlgError as error:
        raise PencilDegenerate('H is not positive definite', size=len(indices), T=T) from error
    mask_hash = omega.content_hash()
    logger.info('Pencil assembled: %d indices, T=%g', len(indices), T)
    return GramianPencil(indices, G, H, T, frame.sigma, frame.L, frame.x0, mask_hash)


# Bounds
def erfc_rational(b):
    """(1 + a₁b + a₂b² + a₃b³ + a₄b⁴)^{-4}"""
    b = np.asarray(b, dtype=float)
    if np.any(b < 0):
        raise NegativeArgument('erfc_rational needs b >= 0')
    a1, a2, a3, a4 = ERFC_COEFFICIENTS
    return (1.0 + a1 * b + a2 * b ** 2 + a3 * b ** 3 + a4 * b ** 4) ** (-4)


def check_hypotheses(domain, x0, sigma, T):
    """Ω - x₀ ⊂ [-σ², σ²]^d and T < σ²"""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    reach = float(np.max(np.maximum(np.abs(domain.lower - x0), np.abs(domain.upper - x0))))
    if reach > sigma * sigma:
        raise HypothesisViolation('Ω - x0 is not inside [-σ², σ²]^d', reach=reach, sigma=sigma)
    if not 0 < T < sigma * sigma:
        raise HypothesisViolation('T must lie in (0, σ²)', T=T, sigma=sigma)


def _bound_times(T, xi, sigma, settings):
    depth = time_depth(np.atleast_2d(xi), sigma, T)
    return graded_simpson(T, settings.TIME_INTERVALS * 4, depth)


def diagonal_base(xi, x0, omega, T, sigma, d, settings=Config):
    """σ^d ∫₀ᵀ ball_fraction(t) A(t, ξ) dt"""
    times, weights = _bound_times(T, xi, sigma, settings)
    fraction = ball_fraction(omega, x0, times, sigma)
    return sigma ** d * float(np.dot(weights, fraction * attenuation(times, xi, sigma)))


def offdiag_base(xi_n, xi_m, x0, y0, omega, T, sigma, d, settings=Config):
    """|ω| ∫₀ᵀ (σ²/(σ²+t))^{d/2} A_n^{1/2} A_m^{1/2} exp(-|x₀-y₀|²/(4(σ²+t))) dt"""
    times, weights = _bound_times(T, np.vstack([xi_n, xi_m]), sigma, settings)
    s = sigma * sigma + times
    gap2 = float(np.sum((np.atleast_1d(x0) - np.atleast_1d(y0)) ** 2))
    integrand = ((sigma * sigma / s) ** (d / 2.0) * np.sqrt(attenuation(times, xi_n, sigma)
                                                           * attenuation(times, xi_m, sigma))
                 * np.exp(-gap2 / (4.0 * s)))
    measure = omega.measure if omega is not FULL_SPACE else math.inf
    return measure * float(np.dot(weights, integrand))


LOWER_PREFACTOR = math.exp(-1.0)
UPPER_PREFACTOR = (1.0 + erfc(1.0)) / erf(1.0)


def diag_bounds(n, x0, omega, T, sigma, L, constants, domain=None, value=None, settings=Config):
    """(lower, upper, value) for G_nn with the calibrated constants"""
    domain = domain or omega.domain
    check_hypotheses(domain, x0, sigma, T)
    xi = np.atleast_1d(n) / L
    base = diagonal_base(xi, x0, omega, T, sigma, len(xi), settings)
    lower = constants.lower * LOWER_PREFACTOR * base
    upper = constants.upper * UPPER_PREFACTOR * base
    if value is None:
        value = gramian_entry(n, n, x0, x0, omega, T, sigma, L, settings).real
    if not lower <= value <= upper:
        raise BoundViolation('Diagonal Gramian entry escapes its bounds', index=list(np.atleast_1d(n)),
                             lower=lower, upper=upper, value=value)
    return lower, upper, value


def offdiag_bound(n, m, x0, y0, omega, T, sigma, L, constants, domain=None, value=None,
                  settings=Config):
    """(bound, value) for |G_nm|"""
    domain = domain or omega.domain
    check_hypotheses(domain, x0, sigma, T)
    xi_n = np.atleast_1d(n) / L
    xi_m = np.atleast_1d(m) / L
    bound = constants.offdiag * offdiag_base(xi_n, xi_m, x0, y0, omega, T, sigma, len(xi_n), settings)
    if value is None:
        value = gramian_entry(n, m, x0, y0, omega, T, sigma, L, settings)
    if abs(value) > bound:
        raise BoundViolation('Off-diagonal Gramian entry exceeds its bound',
                             pair=[list(np.atleast_1d(n)), list(np.atleast_1d(m))],
                             bound=bound, value=abs(value))
    return bound, value


def calibration_masks(domain, resolution, x0):
    """Full space, Ω, the half-space through x₀ and a centred ball of half measure"""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    masks = {'full_space': FULL_SPACE, 'domain': full_domain(domain, resolution)}
    masks['half_space'] = ObservationSet.from_predicate(domain, resolution,
                                                        lambda *xs: xs[0] >= x0[0])
    radius = (0.5 * domain.volume / ball_volume(1.0, domain.d)) ** (1.0 / domain.d)
    centre = domain.centroid
    masks['half_ball'] = ObservationSet.from_predicate(
        domain, resolution, lambda *xs: sum((x - c) ** 2 for x, c in zip(xs, centre)) <= radius ** 2)
    return masks


def calibration_horizons(sigma, epsilon1=None, settings=Config):
    """Sweep horizons h·σ² for the configured ratios below ε₁, then ε₁σ² itself"""
    ratios = [h for h in settings.CALIBRATION_HORIZONS if epsilon1 is None or h < epsilon1]
    if epsilon1 is not None:
        ratios.append(float(epsilon1))
    return [h * sigma * sigma for h in ratios]


def calibrate_constants(sigma, L, domain, resolution, indices, x0, extra_masks=(), extra_horizons=(),
                        epsilon1=None, settings=Config):
    """Frozen constants making the bounds hold over the canonical sweep, widened by the margin"""
    horizons = tuple(calibration_horizons(sigma, epsilon1, settings)) + \
        tuple(float(t) for t in extra_horizons)
    key = (float(sigma), float(L), domain, tuple(resolution),
           tuple(map(tuple, np.atleast_2d(indices).tolist())), tuple(np.atleast_1d(x0).tolist()),
           tuple(extra_masks), horizons, settings)
    return _calibrate(*key)


@lru_cache(maxsize=32)
def _calibrate(sigma, L, domain, resolution, indices, x0, extra_masks, horizons, settings):
    indices = np.array(indices, dtype=float)
    x0 = np.array(x0)
    d = domain.d
    masks = calibration_masks(domain, resolution, x0)
    for position, mask in enumerate(extra_masks):
        masks[f'extra_{position}'] = mask
    frequencies = indices / L
    centres = np.tile(x0, (len(indices), 1))
    lower, upper, offdiag = math.inf, 0.0, 0.0
    samples = 0
    for name, omega in masks.items():
        for T in horizons:
            G = gram_matrix(frequencies, centres, sigma, omega, T, settings=settings)
            for a, xi_a in enumerate(frequencies):
                base = diagonal_base(xi_a, x0, omega, T, sigma, d, settings)
                value = G[a, a].real
                if base <= 0 or value <= 0:
                    continue
                lower = min(lower, value / (LOWER_PREFACTOR * base))
                upper = max(upper, value / (UPPER_PREFACTOR * base))
                samples += 1
                if omega is FULL_SPACE:
                    continue
                for b in range(a + 1, len(frequencies)):
                    off = offdiag_base(xi_a, frequencies[b], x0, x0, omega, T, sigma, d, settings)
                    if off > 0:
                        offdiag = max(offdiag, abs(G[a, b]) / off)
            logger.debug('calibration sweep %s T=%g done', name, T)
    margin = settings.CALIBRATION_MARGIN
    constants = GramianConstants(lower * (1.0 - margin), upper * (1.0 + margin),
                                 offdiag * (1.0 + margin), samples, margin, horizons)
    logger.info('Gramian constants calibrated: lower=%.4g upper=%.4g offdiag=%.4g (%d samples)',
                constants.lower, constants.upper, constants.offdiag, samples)
    return constants


def bounds_check(pencil, omega, constants, domain=None, settings=Config):
    """Diagonal sandwich and off-diagonal bound for every entry of a pencil"""
    domain = domain or omega.domain
    violations = []
    worst_ratio = 0.0
    for a, n in enumerate(pencil.indices):
        try:
            diag_bounds(n, pencil.x0, omega, pencil.T, pencil.sigma, pencil.L, constants, domain,
                        value=pencil.G[a, a].real, settings=settings)
        except BoundViolation as error:
            violations.append(error.details)
        for b in range(a + 1, pencil.size):
            try:
                bound, value = offdiag_bound(n, pencil.indices[b], pencil.x0, pencil.x0, omega,
                                             pencil.T, pencil.sigma, pencil.L, constants, domain,
                                             value=pencil.G[a, b], settings=settings)
                if bound > 0:
                    worst_ratio = max(worst_ratio, abs(value) / bound)
            except BoundViolation as error:
                violations.append(error.details)
    return CheckReport('gramian', not violations, metrics={
        'constants': constants.to_dict(),
        'violations': violations,
        'worst_offdiag_ratio': worst_ratio,
        'entries': pencil.size,
    })


def radial_diagnostic(n, m, x0, radius, T, sigma, L, domain, resolution, constants=None,
                      settings=Config):
    """|G_nm| over C|ω| erf(R) ∫(σ²/(σ²+t))^{d/2} A_n^{1/2} A_m^{1/2} for a centred ball ω"""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    omega = ObservationSet.from_predicate(
        domain, resolution, lambda *xs: sum((x - c) ** 2 for x, c in zip(xs, x0)) <= radius ** 2)
    value = gramian_entry(n, m, x0, x0, omega, T, sigma, L, settings)
    constant = 1.0 if constants is None else constants.offdiag
    leading = (constant * erf(radius)
               * offdiag_base(np.atleast_1d(n) / L, np.atleast_1d(m) / L, x0, x0, omega, T, sigma,
                              len(x0), settings))
    ratio = abs(value) / leading if leading > 0 else math.inf
    logger.info('radial diagnostic R=%g: |G|/leading = %.4g', radius, ratio)
    return {'radius': radius, 'value': abs(value), 'leading': leading, 'ratio': ratio}


def injected(pencil, factor=10.0, position=(0, 0)):
    """Copy of a pencil with one Gramian entry scaled, for fault injection"""
    G = pencil.G.copy()
    a, b = position
    G[a, b] *= factor
    if a != b:
        G[b, a] = np.conj(G[a, b])
    return GramianPencil(pencil.indices, G, pencil.H, pencil.T, pencil.sigma, pencil.L, pencil.x0,
                         pencil.mask_hash)



def shape_mass(omega, x0, sigma, times):
    """W(t) = ∫ a(x) (σ/(√(2π)(σ²+t)))^d exp(-|x-x₀|²/(2(σ²+t))) dx by erf cell integrals

    |φ_n(t, x)|² is this ξ-independent shape times A(t, ξ_n).
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    s = sigma * sigma + times
    out = omega.values.astype(float)
    for axis, edges in enumerate(omega.domain.cell_edges(omega.resolution)):
        scaled = (edges[None, :] - x0[axis]) / np.sqrt(2.0 * s)[:, None]
        cell = sigma / (2.0 * np.sqrt(s))[:, None] * np.diff(erf(scaled), axis=1)
        if axis == 0:
            out = np.einsum('tc,c...->t...', cell, out)
        else:
            out = np.einsum('tc,tc...->t...', cell, out)
    return out


def diagonal_quotients(frequencies, x0, sigma, omega, T, settings=Config):
    """d_n G_nn = ∫₀ᵀ W_ω(t) A_n(t)/A_n(T) dt / W_Ω(T) for each frequency row

    Uses log-attenuation differences so large |ξ_n| never underflow.
    """
    if T <= 0:
        raise NonpositiveTime('Quotients need T > 0', T=T)
    frequencies = np.atleast_2d(np.asarray(frequencies, dtype=float))
    xi2 = np.sum(frequencies ** 2, axis=1)
    if omega is not FULL_SPACE and omega.is_empty():
        return np.zeros(len(frequencies))
    d = frequencies.shape[1]
    depth = time_depth(frequencies, sigma, T)
    max_level = max(0, int(math.log2(settings.TIME_MAX_INTERVALS / settings.TIME_INTERVALS)))

    def mass(times):
        if omega is FULL_SPACE:
            return (sigma / np.sqrt(sigma * sigma + times)) ** d
        return shape_mass(omega, x0, sigma, times)

    final = (sigma / math.sqrt(sigma * sigma + T)) ** d if omega is FULL_SPACE else float(
        shape_mass(full_domain(omega.domain, omega.resolution), x0, sigma, [T])[0])
    ratio_T = T / (sigma * sigma + T)

    def evaluate(level):
        times, weights = graded_simpson(T, settings.TIME_INTERVALS * 2 ** level, depth)
        growth = 2.0 * sigma * sigma * np.outer(xi2, ratio_T - times / (sigma * sigma + times))
        return np.exp(growth) @ (weights * mass(times)) / final

    return refine(evaluate, settings.GRAMIAN_RTOL, max_level, label='diagonal quotients')
