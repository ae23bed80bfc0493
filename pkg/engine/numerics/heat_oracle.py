"""
Heat kernels, Kac bounds and the Dirichlet finite-difference oracle on boxes
"""
import logging
import math

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from config.settings import Config
from errors import BoundaryViolation, NonpositiveTime, PreconditionViolation
from models.domain import GridField, ObservationSet
from models.evolution import FdSolution
from models.report import CheckReport
from numerics.packet_frame import apply_axes, superpose_grid
from numerics.profiles import bump_constants, scaled_bump, sobolev_index
from numerics.quadrature import time_integral

logger = logging.getLogger(__name__)


def free_kernel(t, x, y):
    """(4πt)^{-d/2} exp(-|x-y|²/(4t)) for points with a trailing axis of length d"""
    if t <= 0:
        raise NonpositiveTime('The heat kernel needs t > 0', t=t)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    d = x.shape[-1]
    r2 = np.sum((x - y) ** 2, axis=-1)
    return (4.0 * math.pi * t) ** (-d / 2.0) * np.exp(-r2 / (4.0 * t))


def _kac_formula(t, distance, d):
    t0 = distance * distance / (2.0 * d)
    early = (4.0 * math.pi * t) ** (-d / 2.0) * np.exp(-distance * distance / (4.0 * t))
    with np.errstate(divide='ignore'):
        late = (4.0 * math.pi * t0) ** (-d / 2.0) * math.exp(-d / 2.0)
    return np.where(t <= t0, early, late)


def kac_bound(t, y, domain):
    """Upper bound on k_free(t, x, y) - k_Ω(t, x, y) uniform in x"""
    if t <= 0:
        raise NonpositiveTime('The Kac bound needs t > 0', t=t)
    distance = domain.distance_to_boundary(y)
    return float(_kac_formula(t, distance, domain.d))


def kac_bound_grid(t, domain, resolution):
    """kac_bound at every cell centre"""
    if t <= 0:
        raise NonpositiveTime('The Kac bound needs t > 0', t=t)
    mesh = domain.mesh(resolution)
    distance = np.full(mesh[0].shape, np.inf)
    for axis, x in enumerate(mesh):
        distance = np.minimum(distance, np.minimum(x - domain.lower[axis], domain.upper[axis] - x))
    return _kac_formula(t, distance, domain.d)


def free_evolve(field, t):
    """exp(tΔ_{ℝ^d}) applied to grid data, sampled back on the same cells"""
    if t == 0:
        return field
    if t < 0:
        raise NonpositiveTime('Evolution time must be nonnegative', t=t)
    kernels = []
    for c, h in zip(field.centers(), field.spacing):
        offsets = c[:, None] - c[None, :]
        kernels.append(h * np.exp(-offsets ** 2 / (4.0 * t)) / math.sqrt(4.0 * math.pi * t))
    return field.with_values(apply_axes(field.values, kernels))


# Finite differences
def dirichlet_laplacian(domain, resolution):
    """Cell-centred Laplacian with antisymmetric ghost cells, Kronecker assembled"""
    operators = []
    for n, h in zip(resolution, domain.spacing(resolution)):
        main = np.full(n, -2.0)
        main[0] = main[-1] = -3.0
        off = np.ones(n - 1)
        operators.append(sparse.diags([off, main, off], [-1, 0, 1]) / (h * h))
    total = None
    for axis, op in enumerate(operators):
        term = op
        for other in range(axis):
            term = sparse.kron(sparse.identity(resolution[other]), term)
        for other in range(axis + 1, len(operators)):
            term = sparse.kron(term, sparse.identity(resolution[other]))
        total = term if total is None else total + term
    return sparse.csc_matrix(total)


def boundary_excess(values):
    """Largest amount by which the linear boundary trace exceeds its allowance"""
    scale = float(np.max(np.abs(values), initial=0.0))
    worst = 0.0
    for axis in range(values.ndim):
        if values.shape[axis] < 3:
            continue
        moved = np.moveaxis(values, axis, 0)
        for u0, u1, u2 in ((moved[0], moved[1], moved[2]), (moved[-1], moved[-2], moved[-3])):
            trace = np.abs(1.5 * u0 - 0.5 * u1)
            allowance = Config.BOUNDARY_RTOL * scale + np.abs(u0 - 2.0 * u1 + u2)
            worst = max(worst, float(np.max(trace - allowance)))
    return worst


def step_count(T, domain, resolution, settings=Config):
    h_min = float(np.min(domain.spacing(resolution)))
    return max(settings.FD_MIN_STEPS, int(math.ceil(T / (0.5 * h_min * h_min))))


def fd_solve(g, T, snapshot_times=None, mask=None, require_compatible=True, settings=Config):
    """Crank-Nicolson evolution of g under homogeneous Dirichlet conditions on ∂Ω

    Snapshots are kept at the step nearest each requested time and at T.
    With a mask a, ∫ a|u|² is recorded at every step.
    """
    if T <= 0:
        raise NonpositiveTime('fd_solve needs T > 0', T=T)
    if require_compatible:
        excess = boundary_excess(g.values)
        if excess > 0:
            raise BoundaryViolation('Initial data does not vanish on ∂Ω', excess=excess)
    domain, resolution = g.domain, g.resolution
    steps = step_count(T, domain, resolution, settings)
    dt = T / steps
    laplacian = dirichlet_laplacian(domain, resolution)
    identity = sparse.identity(laplacian.shape[0], format='csc')
    solver = splu(sparse.csc_matrix(identity - 0.5 * dt * laplacian))
    explicit = sparse.csr_matrix(identity + 0.5 * dt * laplacian)
    vol = g.cell_volume
    weights = None if mask is None else mask.values.ravel()

    # real and imaginary parts are stepped as two columns
    state = np.column_stack([g.values.real.ravel(), np.imag(g.values).ravel()])
    wanted = {int(round(t / dt)): t for t in (snapshot_times or []) if 0 <= t <= T}
    wanted[steps] = T

    def energy(u):
        return -float(np.sum(u * (laplacian @ u))) * vol

    def record(u):
        return g.with_values((u[:, 0] + 1j * u[:, 1]).reshape(resolution)
                             if np.iscomplexobj(g.values) else u[:, 0].reshape(resolution))

    snapshots = {}
    if 0 in wanted:
        snapshots[0.0] = g
    norms = [float(np.sum(state ** 2)) * vol]
    energies = [energy(state)]
    dissipation = []
    masked = None if weights is None else [float(np.sum(weights[:, None] * state ** 2)) * vol]
    for k in range(1, steps + 1):
        following = solver.solve(explicit @ state)
        dissipation.append(0.25 * dt * energy(following + state))
        state = following
        norms.append(float(np.sum(state ** 2)) * vol)
        energies.append(energy(state))
        if masked is not None:
            masked.append(float(np.sum(weights[:, None] * state ** 2)) * vol)
        if k in wanted:
            snapshots[k * dt] = record(state)
    logger.debug('fd_solve: %d steps of dt=%.3e on %s', steps, dt, resolution)
    return FdSolution(g, dt, steps, snapshots, np.arange(steps + 1) * dt, norms, energies,
                      dissipation, masked)


def energy_check(solution, settings=Config):
    """Discrete energy balance and monotone decay of ‖u(t)‖"""
    half_initial = 0.5 * solution.norms[0]
    dissipated = np.concatenate([[0.0], np.cumsum(solution.dissipation)])
    balance = 0.5 * solution.norms + dissipated
    residual = float(np.max(np.abs(balance - half_initial)))
    trapezoid = np.concatenate([[0.0], np.cumsum(0.5 * solution.dt
                                                 * (solution.energies[1:] + solution.energies[:-1]))])
    trapezoid_residual = float(np.max(np.abs(0.5 * solution.norms + trapezoid - half_initial)))
    scale = max(half_initial, np.finfo(float).tiny)
    monotone = bool(np.all(np.diff(solution.norms) <= 1e-14 * solution.norms[:-1]))
    relative = residual / scale if half_initial > 0 else residual
    passed = relative <= settings.ENERGY_RTOL and monotone
    return CheckReport('energy', passed, metrics={
        'half_initial_energy': half_initial,
        'relative_residual': relative,
        'trapezoid_relative_residual': trapezoid_residual / scale if half_initial > 0 else trapezoid_residual,
        'monotone': monotone,
        'final_norm': float(math.sqrt(solution.norms[-1])),
    })


def first_mode(domain, resolution):
    """Product of first Dirichlet sines and its eigenvalue Σ π²/ℓ_j²"""
    field = GridField.from_function(domain, resolution, lambda *xs: np.prod(
        [np.sin(math.pi * (x - lo) / ell) for x, lo, ell in zip(xs, domain.lower, domain.lengths)],
        axis=0))
    return field, float(np.sum((math.pi / domain.lengths) ** 2))


def convergence_study(domain, resolutions, T, settings=Config):
    """Max-norm error against the exact first-mode solution and successive ratios"""
    errors = []
    for resolution in resolutions:
        resolution = tuple(resolution) if np.iterable(resolution) else (int(resolution),) * domain.d
        g, eigenvalue = first_mode(domain, resolution)
        solution = fd_solve(g, T, settings=settings)
        exact = math.exp(-eigenvalue * T) * g.values
        errors.append(float(np.max(np.abs(solution.final.values - exact))))
    ratios = [errors[i] / errors[i + 1] for i in range(len(errors) - 1)]
    return CheckReport('convergence', bool(all(3.5 <= r <= 4.5 for r in ratios)), metrics={
        'resolutions': [list(np.atleast_1d(r)) for r in resolutions],
        'errors': errors,
        'ratios': ratios,
    })


# Bump based checks
def bump_field(bump, domain, resolution):
    return GridField.from_function(domain, resolution, lambda *xs: scaled_bump(bump, *xs))


def bump_sup(bump):
    """‖ψ_{ε₀}‖_{C⁰}"""
    return bump.epsilon0 ** (-bump.d / 2.0) * bump_constants(bump.d)['M0']


def bullet_condition(bump, omega, T, eta, snapshots=16, settings=Config):
    """m₀ = max |u| over snapshot times and ω, with η₀ = η m₀/‖ψ_{ε₀}‖_{C⁰}"""
    g = bump_field(bump, omega.domain, omega.resolution)
    times = list(np.linspace(0.0, T, snapshots + 1))
    solution = fd_solve(g, T, snapshot_times=times, settings=settings)
    inside = omega.values > 0
    m0 = 0.0
    for snap in solution.snapshots.values():
        if np.any(inside):
            m0 = max(m0, float(np.max(np.abs(snap.values[inside]))))
    scale = bump_sup(bump)
    return {
        'm0': m0,
        'eta0': eta * m0 / scale,
        'm1': m0 * eta / scale,
        'psi_sup': scale,
        'holds': m0 > 0,
    }


def resolve_eta0(eta0, bump, omega, T, eta, settings=Config):
    """Configured η₀, or the condition (•) value for 'auto'"""
    if eta0 != 'auto':
        return float(eta0)
    value = bullet_condition(bump, omega, T, eta, settings=settings)['eta0']
    if value <= 0:
        logger.warning('Observation set misses the evolved bump; falling back to eta0 = eta')
        return float(eta)
    return value


def hypothesis_chain(bump, omega, T, eta, c_sd=1.0, settings=Config):
    """A posteriori check of T < min{ε₀^{2+s} m₁/(C_{s,d} M₂), m₁ δ⁴}"""
    constants = bump_constants(bump.d)
    s = constants['s']
    condition = bullet_condition(bump, omega, T, eta, settings=settings)
    smoothing = bump.epsilon0 ** (2 + s) * condition['m1'] / (c_sd * constants['M2'])
    boundary = condition['m1'] * bump.delta ** 4
    limit = min(smoothing, boundary)
    return CheckReport('hypothesis_chain', T < limit, metrics={
        'T': T,
        'smoothing_limit': smoothing,
        'boundary_limit': boundary,
        'm0': condition['m0'],
        'm1': condition['m1'],
        's': s,
    }, message='' if T < limit else 'T exceeds the hypothesis limit; results are reported, not certified')


def whole_vs_domain_check(bump, domain, resolution, T, eta0, snapshots=8, settings=Config):
    """sup |exp(tΔ_{ℝ^d})ψ_{ε₀} - exp(tΔ_Ω)ψ_{ε₀}| against (η₀/2)·M₀"""
    failed = []
    if not bump.epsilon0 < bump.delta ** 2:
        failed.append('epsilon0 < delta^2')
    if not bump.delta ** 2 < 1:
        failed.append('delta^2 < 1')
    if not T < eta0 * bump.delta ** 4:
        failed.append('T < eta0 * delta^4')
    if failed:
        raise PreconditionViolation('Whole-space comparison preconditions fail', failed=failed,
                                    T=T, eta0=eta0)
    g = bump_field(bump, domain, resolution)
    solution = fd_solve(g, T, snapshot_times=list(np.linspace(0.0, T, snapshots + 1)),
                        settings=settings)
    measured = 0.0
    for t, snap in solution.snapshots.items():
        free = free_evolve(g, t)
        measured = max(measured, float(np.max(np.abs(free.values - snap.values))))
    bound = 0.5 * eta0 * bump_constants(bump.d)['M0']
    return CheckReport('whole_vs_domain', measured <= bound, metrics={
        'measured': measured,
        'bound': bound,
        'T': T,
        'eta0': eta0,
    })


def short_time_limit(bump, eta0, c_sd=1.0):
    """C_{s,d}^{-1} M₂^{-1} η₀ ε₀^{2+s}"""
    constants = bump_constants(bump.d)
    return eta0 * bump.epsilon0 ** (2 + sobolev_index(bump.d)) / (c_sd * constants['M2'])


def short_time_check(bump, frame, domain, resolution, t, eta0, c_sd=1.0, snapshots=8,
                     settings=Config):
    """sup_x |u(t, x) - ψ_{ε₀}(x)| ≤ η₀ inside the short-time regime"""
    limit = short_time_limit(bump, eta0, c_sd)
    if not t < limit:
        raise PreconditionViolation('t is outside the short-time regime', t=t, limit=limit)
    g = bump_field(bump, domain, resolution)
    if t == 0:
        return CheckReport('short_time', True, metrics={
            'measured': 0.0, 'bound': eta0, 'limit': limit, 'monotone': True, 'packet_measured': 0.0})
    solution = fd_solve(g, t, snapshot_times=list(np.linspace(0.0, t, snapshots + 1)),
                        settings=settings)
    series = [float(np.max(np.abs(solution.snapshots[s].values - g.values)))
              for s in sorted(solution.snapshots)]
    measured = series[-1]
    packet = None
    if frame is not None:
        evolved = superpose_grid(frame, t, domain, resolution)
        packet = float(np.max(np.abs(evolved.values - g.values)))
    monotone = bool(np.all(np.diff(series) >= -1e-15))
    if not monotone:
        logger.warning('short_time_check: deviation is not monotone over snapshots')
    return CheckReport('short_time', measured <= eta0, metrics={
        'measured': measured,
        'bound': eta0,
        'limit': limit,
        'series': series,
        'monotone': monotone,
        'packet_measured': packet,
    })


def _kac_difference(bump, domain, resolution, T, settings):
    g = bump_field(bump, domain, resolution)
    solution = fd_solve(g, T, settings=settings)
    return g, free_evolve(g, T).values - solution.final.values


def kac_sandwich_check(bump, domain, resolution, T, settings=Config):
    """0 ≤ free - Dirichlet ≤ Σ_y kac_bound(T, y) g(y) vol pointwise for g ≥ 0

    The extremes of the difference are Richardson extrapolated from the grid and its
    refinement; their change under refinement is reported as the discretisation error.
    """
    resolution = tuple(resolution)
    g, coarse = _kac_difference(bump, domain, resolution, T, settings)
    _, fine = _kac_difference(bump, domain, tuple(2 * n for n in resolution), T, settings)
    bound = float(np.sum(kac_bound_grid(T, domain, resolution) * g.values) * g.cell_volume)
    lowest = (4.0 * float(fine.min()) - float(coarse.min())) / 3.0
    highest = (4.0 * float(fine.max()) - float(coarse.max())) / 3.0
    discretisation = max(abs(float(fine.min() - coarse.min())), abs(float(fine.max() - coarse.max())))
    tolerance = settings.KAC_TOLERANCE
    return CheckReport('kac', lowest >= -tolerance and highest <= bound + tolerance, metrics={
        'min_difference': lowest,
        'max_difference': highest,
        'grid_min_difference': float(coarse.min()),
        'grid_max_difference': float(coarse.max()),
        'discretisation_error': 4.0 * discretisation / 3.0,
        'bound': bound,
        'tolerance': tolerance,
        'T': T,
    })


def observation_energy(field, T, omega, settings=Config):
    """FD space-time mass ∫₀ᵀ∫_ω |u|² and final ‖u(T)‖² for data without boundary compatibility"""
    solution = fd_solve(field, T, mask=omega.mask if isinstance(omega, ObservationSet) else omega,
                        require_compatible=False, settings=settings)
    return float(time_integral(solution.masked, solution.times)), float(solution.norms[-1])
