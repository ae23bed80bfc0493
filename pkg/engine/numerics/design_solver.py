"""
Relaxed optimal design: packet energy densities, bathtub fill and the minimax over simplex weights
"""
import logging
import math

import numpy as np
from scipy.ndimage import binary_dilation
from scipy.optimize import linprog
from scipy.spatial.distance import directed_hausdorff

from config.settings import Config
from errors import (AssertionFailure, EmptySet, InfeasibleMeasure, NoConvergence, NonpositiveTime,
                    PreconditionViolation)
from models.design import DesignSolution, PacketEnergyDensity, SimplexWeights
from models.domain import GridField, ObservationSet
from models.report import CheckReport
from numerics.gramian import (ball_fraction, ball_radius, ball_volume, diagonal_quotients,
                              full_domain, shape_mass, time_depth)
from numerics.parallel import ordered_map
from numerics.quadrature import graded_simpson, refine

logger = logging.getLogger(__name__)

BALL_CONSTANT = math.exp(-1.0) * math.erf(1.0)
TIE_RTOL = 1e-12


# Densities
def _shape_grid(domain, resolution, x0, sigma, times):
    """Π_j σ/(√(2π)(σ²+t)) exp(-(x_j - x₀_j)²/(2(σ²+t))) at cell centres, shaped (t, *resolution)"""
    s = sigma * sigma + times
    out = None
    for axis, centres in enumerate(domain.cell_centers(resolution)):
        delta = centres[None, :] - x0[axis]
        factor = sigma / (math.sqrt(2.0 * math.pi) * s[:, None]) * np.exp(-delta ** 2 / (2.0 * s[:, None]))
        out = factor if out is None else np.einsum('t...,tc->t...c', out, factor)
    return out


def _density_rows(frame, positions, T, domain, resolution, threads, settings):
    frequencies = frame.indices[positions] / frame.L
    xi2 = np.sum(frequencies ** 2, axis=1)
    sigma = frame.sigma
    final = float(shape_mass(full_domain(domain, resolution), frame.x0, sigma, [T])[0])
    depth = time_depth(frequencies, sigma, T)
    max_level = max(0, int(math.log2(settings.TIME_MAX_INTERVALS / settings.TIME_INTERVALS)))
    ratio_T = T / (sigma * sigma + T)
    chunks = [slice(i, i + 16) for i in range(0, len(positions), 16)]

    def evaluate(level):
        times, weights = graded_simpson(T, settings.TIME_INTERVALS * 2 ** level, depth)
        shape = _shape_grid(domain, resolution, frame.x0, sigma, times).reshape(len(times), -1)
        weighted = weights[:, None] * shape

        def block(chunk):
            growth = 2.0 * sigma * sigma * np.outer(xi2[chunk], ratio_T - times / (sigma * sigma + times))
            return np.exp(growth) @ weighted

        return np.vstack(ordered_map(block, chunks, threads)) / final

    rows = refine(evaluate, settings.GRAMIAN_RTOL, max_level, label='energy densities')
    log_norms = -2.0 * sigma * sigma * xi2 * ratio_T + math.log(final)
    return rows, np.exp(-log_norms)


def energy_densities(frame, T, N, domain, resolution, threads=None, settings=Config):
    """ρ_n for every n ∈ S_N = {n ∈ S : |n| ≤ N}, in frame order"""
    if T <= 0:
        raise NonpositiveTime('Energy densities need T > 0', T=T)
    positions = frame.select(N)
    if positions.size == 0:
        raise EmptySet('No retained index satisfies |n| <= N', N=N)
    resolution = tuple(resolution)
    rows, norms = _density_rows(frame, positions, T, domain, resolution, threads, settings)
    densities = [
        PacketEnergyDensity(frame.indices[p], d_n, GridField(domain, resolution, row.reshape(resolution)))
        for p, d_n, row in zip(positions, norms, rows)
    ]
    logger.debug('%d packet densities on %s', len(densities), resolution)
    return densities


def energy_density(frame, n, T, domain, resolution, settings=Config):
    n = np.atleast_1d(np.asarray(n, dtype=np.int64))
    hits = np.flatnonzero(np.all(frame.indices == n, axis=1))
    if hits.size == 0:
        raise PreconditionViolation('Index is not retained by the frame', index=n.tolist())
    if T <= 0:
        raise NonpositiveTime('Energy densities need T > 0', T=T)
    rows, norms = _density_rows(frame, hits[:1], T, domain, tuple(resolution), 1, settings)
    return PacketEnergyDensity(n, norms[0], GridField(domain, resolution, rows[0].reshape(tuple(resolution))))


def density_matrix(densities):
    """R with R[n] · a = ∫ a ρ_n"""
    vol = densities[0].rho.cell_volume
    return np.stack([rho.rho.values.ravel() for rho in densities]) * vol


def weighted_density(weights, densities):
    """φ_N = Σ α_n ρ_n"""
    values = np.tensordot(weights.alpha, np.stack([rho.rho.values for rho in densities]), axes=1)
    return densities[0].rho.with_values(values)


def J_of_a(a, densities):
    """min_n ∫ a ρ_n and the attaining index, lexicographically smallest on ties"""
    values = density_matrix(densities) @ a.values.ravel()
    best = min(range(len(densities)), key=lambda k: (values[k], densities[k].index))
    return float(values[best]), densities[best].index


# Bathtub
def _check_budget(M):
    if not 0 < M <= 1:
        raise InfeasibleMeasure('The measure budget M|Ω| must lie in (0, |Ω|]', M=M)


def _fill(phi, M):
    """Cells sorted by φ descending (stable) filled up to M·cells; returns a and the marginal cell"""
    cells = phi.size
    budget = M * cells
    if abs(budget - round(budget)) < 1e-9:
        budget = float(round(budget))
    full = int(math.floor(budget))
    fraction = budget - full
    order = np.argsort(-phi, kind='stable')
    a = np.zeros(cells)
    a[order[:full]] = 1.0
    if fraction > 0 and full < cells:
        a[order[full]] = fraction
        return a, order[full]
    return a, order[max(full - 1, 0)]


def _degenerate(phi, a, lam):
    tied = np.abs(phi - lam) <= TIE_RTOL * max(float(np.max(np.abs(phi))), np.finfo(float).tiny)
    return bool(np.count_nonzero(tied) > 1 and np.ptp(a[tied]) > 0)


def bathtub_max(weights, densities, M):
    """Exact maximiser of ∫ a φ_N over masks with ∫a = M|Ω|, and the threshold λ"""
    _check_budget(M)
    field = weighted_density(weights, densities)
    phi = field.values.ravel()
    a, marginal = _fill(phi, M)
    mask = ObservationSet(field.with_values(a.reshape(field.resolution)))
    return mask, float(phi[marginal])


def is_degenerate(weights, densities, a, lam):
    """Tied cells at the threshold received unequal mass"""
    phi = weighted_density(weights, densities).values.ravel()
    return _degenerate(phi, a.values.ravel(), lam)


# Saddle
class _Candidate:
    __slots__ = ('alpha', 'a', 'lam', 'phi', 'lower', 'upper')

    def __init__(self, alpha, a, lam, phi, lower, upper):
        self.alpha = alpha
        self.a = a
        self.lam = lam
        self.phi = phi
        self.lower = lower
        self.upper = upper


def _evaluate(R, alpha, M):
    phi = alpha @ R
    a, marginal = _fill(phi, M)
    g = R @ a
    return _Candidate(alpha.copy(), a, float(phi[marginal]), phi, float(g.min()), float(alpha @ g)), g


def lp_relaxation(R, M):
    """Discrete relaxed problem as an LP; α from the duals of the ∫aρ_n ≥ z rows"""
    count, cells = R.shape
    scale = float(R.max()) or 1.0
    objective = np.zeros(cells + 1)
    objective[-1] = -1.0
    A_ub = np.hstack([-R / scale, np.ones((count, 1))])
    A_eq = np.append(np.ones(cells), 0.0)[None, :]
    bounds = [(0.0, 1.0)] * cells + [(None, None)]
    result = linprog(objective, A_ub=A_ub, b_ub=np.zeros(count), A_eq=A_eq, b_eq=[M * cells],
                     bounds=bounds, method='highs')
    if result.status != 0:
        logger.warning('LP polish failed: %s', result.message)
        return None
    a = np.clip(result.x[:cells], 0.0, 1.0)
    alpha = np.clip(-np.asarray(result.ineqlin.marginals), 0.0, None)
    alpha = alpha / alpha.sum() if alpha.sum() > 0 else np.full(count, 1.0 / count)
    phi = alpha @ R
    _, marginal = _fill(phi, M)
    upper = _evaluate(R, alpha, M)[0].upper
    return _Candidate(alpha, a, float(phi[marginal]), phi, float((R @ a).min()), upper)


def _solution(densities, best_lower, best_upper, N, iterations, converged, polished):
    field = densities[0].rho
    indices = [rho.index for rho in densities]
    a = ObservationSet(field.with_values(best_lower.a.reshape(field.resolution)))
    value, argmin = J_of_a(a, densities)
    return DesignSolution(
        a=a,
        alpha=SimplexWeights(best_upper.alpha, indices),
        lam=best_lower.lam,
        value=value,
        gap=max(0.0, best_upper.upper - best_lower.lower),
        N=N,
        iterations=iterations,
        converged=converged,
        polished=polished,
        degenerate=_degenerate(best_lower.phi, best_lower.a, best_lower.lam),
        lower=best_lower.lower,
        upper=best_upper.upper,
        argmin=argmin,
    )


def solve_saddle(densities, M, iters=2000, tol=1e-6, step_constant=None, polish=None, N=None,
                 settings=Config):
    """min over α ∈ simplex of max over a of Σ α_n ∫ a ρ_n by multiplicative weights

    The gap is the best bathtub upper bound minus the best J_N over the primal candidates.
    """
    _check_budget(M)
    if not densities:
        raise EmptySet('The design needs at least one packet density')
    step_constant = settings.SADDLE_STEP_CONSTANT if step_constant is None else step_constant
    polish = settings.SADDLE_POLISH if polish is None else polish
    R = density_matrix(densities)
    count = len(densities)
    alpha = np.full(count, 1.0 / count)
    average = np.zeros(count)
    best_lower = best_upper = None
    iteration = 0
    for iteration in range(1, iters + 1):
        current, g = _evaluate(R, alpha, M)
        average += (alpha - average) / iteration
        candidates = [current]
        if iteration > 1:
            candidates.append(_evaluate(R, average, M)[0])
        for candidate in candidates:
            if best_lower is None or candidate.lower > best_lower.lower:
                best_lower = candidate
            if best_upper is None or candidate.upper < best_upper.upper:
                best_upper = candidate
        gap = best_upper.upper - best_lower.lower
        if iteration % 100 == 0:
            logger.debug('saddle iteration %d: gap %.3e', iteration, gap)
        if gap <= tol:
            logger.info('Saddle converged after %d iterations, gap %.3e', iteration, gap)
            return _solution(densities, best_lower, best_upper, N, iteration, True, False)
        scale = float(np.max(np.abs(g))) or 1.0
        alpha = alpha * np.exp(-step_constant / math.sqrt(iteration) * g / scale)
        alpha /= alpha.sum()

    polished = False
    if polish:
        candidate = lp_relaxation(R, M)
        if candidate is not None:
            polished = True
            if candidate.lower > best_lower.lower:
                best_lower = candidate
            if candidate.upper < best_upper.upper:
                best_upper = candidate
    solution = _solution(densities, best_lower, best_upper, N, iteration, False, polished)
    if solution.gap <= tol:
        solution.converged = True
        logger.info('Saddle certified by LP polish, gap %.3e', solution.gap)
        return solution
    raise NoConvergence('Saddle iteration reached its cap', solution=solution, gap=solution.gap,
                        iterations=iteration)


def saddle_solve(frame, M, T, N, domain, resolution, iters=2000, tol=1e-6, step_constant=None,
                 polish=None, threads=None, settings=Config):
    """Relaxed design on the packet densities of S_N"""
    densities = energy_densities(frame, T, N, domain, resolution, threads, settings)
    return solve_saddle(densities, M, iters, tol, step_constant, polish, N=N, settings=settings)


# Hypothesis checks
def _slope(field):
    values = field.values.astype(float)
    spacing = field.spacing
    gradients = np.gradient(values, *spacing) if values.ndim > 1 else [np.gradient(values, spacing[0])]
    floor = TIE_RTOL * max(float(np.max(np.abs(values))), np.finfo(float).tiny)
    return values, float(np.max(spacing)), np.sqrt(sum(g ** 2 for g in gradients)), floor


def _neighbours(mask):
    """Pairs of axis-adjacent cells as (lower, upper) index tuples"""
    for axis in range(mask.ndim):
        if mask.shape[axis] < 2:
            continue
        lower = [slice(None)] * mask.ndim
        upper = [slice(None)] * mask.ndim
        lower[axis], upper[axis] = slice(0, -1), slice(1, None)
        yield tuple(lower), tuple(upper)


def two_cell_layer(values, level):
    """Cells within two cells of a sign change of φ - c along any axis"""
    above = values > level
    crossing = np.zeros(values.shape, dtype=bool)
    for lower, upper in _neighbours(above):
        change = above[lower] != above[upper]
        crossing[lower] |= change
        crossing[upper] |= change
    return binary_dilation(crossing) if np.any(crossing) else crossing


def _plateau_levels(values, h, slope, low, floor):
    """Values of flat runs of at least two cells above the floor"""
    flat = h * slope <= floor
    paired = np.zeros(values.shape, dtype=bool)
    for lower, upper in _neighbours(values):
        same = flat[lower] & flat[upper] & (np.abs(values[lower] - values[upper]) <= floor)
        paired[lower] |= same
        paired[upper] |= same
    return np.unique(values[paired & (values > low + floor)])


def flagged_measure(field, levels=64):
    """Largest grid measure of {|φ - c| ≤ h|∇φ|} over interior levels c"""
    values, h, slope, floor = _slope(field)
    low, high = float(values.min()), float(values.max())
    if high - low <= floor:
        return field.domain.volume, low
    worst, worst_level = 0.0, low
    for level in np.linspace(low, high, levels + 2)[1:-1]:
        band = np.abs(values - level) <= h * slope + floor
        measure = float(np.count_nonzero(band)) * field.cell_volume
        if measure > worst:
            worst, worst_level = measure, float(level)
    return worst, worst_level


def h1_levelset_check(weights, densities, levels=64):
    """No level set of φ_N flags cells outside the two-cell layer around it"""
    if not np.any(weights.alpha > 0):
        raise PreconditionViolation('Weights must not all vanish')
    field = weighted_density(weights, densities)
    values, h, slope, floor = _slope(field)
    measure, _ = flagged_measure(field, levels)
    vol = field.cell_volume
    low, high = float(values.min()), float(values.max())
    if high - low <= floor:
        excess, level, layer = field.domain.volume, low, 0.0
    else:
        candidates = np.concatenate([np.linspace(low, high, levels + 2)[1:-1],
                                     _plateau_levels(values, h, slope, low, floor)])
        rows = []
        for c in candidates:
            band = np.abs(values - c) <= h * slope + floor
            shell = two_cell_layer(values, c)
            rows.append((float(np.count_nonzero(band & ~shell)) * vol, float(c),
                         float(np.count_nonzero(shell)) * vol))
        excess, level, layer = max(rows, key=lambda row: row[0])
    passed = excess <= 0.0
    if not passed:
        logger.warning('φ_N is flat on a set of measure %.3g beyond the two-cell layer', excess)
    return CheckReport('h1', passed, metrics={
        'flagged_measure': measure,
        'excess_measure': excess,
        'layer_measure': layer,
        'level': level,
        'h': h,
    }, message='' if passed else 'density is constant on a set of positive measure')


def h1_refinement_study(frame, T, N, domain, resolutions, threads=None, settings=Config):
    """Flagged level-set measure of the uniform-weight φ_N per grid resolution"""
    rows = []
    for resolution in resolutions:
        densities = energy_densities(frame, T, N, domain, resolution, threads, settings)
        report = h1_levelset_check(SimplexWeights.uniform([rho.index for rho in densities]), densities)
        rows.append({'resolution': list(resolution), 'h': report['h'],
                     'flagged_measure': report['flagged_measure'], 'passed': report.passed})
    measures = [row['flagged_measure'] for row in rows]
    shrinking = all(b <= a for a, b in zip(measures, measures[1:]))
    return CheckReport('h1_refinement', all(row['passed'] for row in rows) and shrinking,
                       metrics={'rows': rows, 'shrinking': shrinking})


def _u1(xi2, T):
    if xi2 == 0:
        return T
    return math.expm1(2.0 * xi2 * T) / (2.0 * xi2)


def _u2(xi2, T):
    if xi2 == 0:
        return T / 3.0
    x = xi2 * T
    return math.exp(1.5 * x) * math.expm1(0.5 * x) / (1.5 * xi2)


def h2_gamma_check(frame, omega, T, constants=None, settings=Config):
    """Top-frequency quotient against γ₁(T) of the lowest retained frequency

    With calibrated constants the upper bound on γ₁ and the lower bound on the top quotient
    are reported too.
    """
    norms = np.linalg.norm(frame.indices, axis=1)
    first = int(np.lexsort((np.arange(len(norms)), norms))[0])
    top = int(np.argmax(norms))
    frequencies = frame.indices[[first, top]] / frame.L
    gamma_first, quotient_top = diagonal_quotients(frequencies, frame.x0, frame.sigma, omega, T,
                                                   settings)
    metrics = {
        'first_index': frame.indices[first].tolist(),
        'top_index': frame.indices[top].tolist(),
        'gamma_first': float(gamma_first),
        'quotient_top': float(quotient_top),
        'factor': float(quotient_top / gamma_first) if gamma_first > 0 else math.inf,
        'u1': None,
        'u2': None,
    }
    if constants is not None:
        domain = omega.domain
        d = domain.d
        xi2_first, xi2_top = np.sum(frequencies ** 2, axis=1)
        fraction = float(ball_fraction(full_domain(domain, omega.resolution), frame.x0, T, frame.sigma))
        ball = ball_volume(ball_radius(T, frame.sigma), d)
        metrics['u1'] = (constants.upper / (fraction * BALL_CONSTANT) * omega.measure
                         * _u1(xi2_first, T))
        metrics['u2'] = (constants.lower * BALL_CONSTANT / fraction * omega.measure / ball
                         * _u2(xi2_top, T))
    if not quotient_top > gamma_first:
        raise AssertionFailure('Top-frequency quotient does not exceed γ₁(T)', **metrics)
    return CheckReport('h2', True, metrics=metrics)


# Stabilization
def _occupied(a):
    centres = np.stack([x.ravel() for x in a.domain.mesh(a.resolution)], axis=1)
    return centres[a.values.ravel() >= 0.5]


def hausdorff(a, b):
    """Discrete Hausdorff distance between the cell centres with a ≥ 1/2"""
    u, v = _occupied(a), _occupied(b)
    if len(u) == 0 and len(v) == 0:
        return 0.0
    if len(u) == 0 or len(v) == 0:
        return math.inf
    return max(directed_hausdorff(u, v)[0], directed_hausdorff(v, u)[0])


def symmetric_difference(a, b):
    return float(np.sum(np.abs(a.values - b.values)) * a.mask.cell_volume)


def settled_agree(a, b, tolerance=1e-12):
    """Masks agree wherever neither has a fractional cell"""
    settled = ((a.values <= tolerance) | (a.values >= 1 - tolerance)) & \
              ((b.values <= tolerance) | (b.values >= 1 - tolerance))
    return bool(np.all(np.abs(a.values - b.values)[settled] <= tolerance))


def stability_study(frame, M, T, N_list, domain, resolution, iters=2000, tol=1e-6, step_constant=None,
                    polish=None, threads=None, settings=Config):
    """Optimal masks for increasing N with distances between consecutive ones"""
    N_list = [int(N) for N in N_list]
    if not N_list or any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise PreconditionViolation('N values must be strictly increasing', N_list=N_list)
    rows, solutions = [], []
    for N in N_list:
        solution = saddle_solve(frame, M, T, N, domain, resolution, iters, tol, step_constant, polish,
                                threads, settings)
        row = {'N': N, 'value': solution.value, 'gap': solution.gap, 'lambda': solution.lam,
               'fractional_cells': solution.a.fractional_cells(),
               'symmetric_difference': None, 'hausdorff': None}
        if solutions:
            previous = solutions[-1].a
            row['symmetric_difference'] = symmetric_difference(previous, solution.a)
            row['hausdorff'] = hausdorff(previous, solution.a)
        rows.append(row)
        solutions.append(solution)
    stable = len(solutions) < 2 or settled_agree(solutions[-2].a, solutions[-1].a)
    differences = [row['symmetric_difference'] for row in rows[1:]]
    tail = all(b <= a + 1e-12 for a, b in zip(differences, differences[1:]))
    logger.info('Stability study over N=%s: %s', N_list, 'stable' if stable else 'not stable')
    return CheckReport('stability', stable, metrics={
        'rows': rows,
        'stable': stable,
        'tail_nonincreasing': tail,
    }), solutions
