"""
Gaussian heat-packet frames for bump initial data
"""
import logging
import math

import numpy as np

from config.settings import Config
from errors import (EmptySet, FrameErrorExceeded, NoFeasibleEpsilon, NonpositiveTime,
                    PreconditionViolation, SupportViolation)
from models.domain import GridField
from models.frame import EpsilonPolicy, Frame, FrameParams, TruncationMode
from models.report import CheckReport
from numerics.profiles import bump_constants, psi, scaled_bump
from numerics.quadrature import composite_rule, refine

logger = logging.getLogger(__name__)

# Largest admissible ε is e^{-e}, i.e. log log(1/ε) = 1
LOGLOG_FLOOR = 1.0


def loglog_ceiling():
    """log log(1/ε) at the smallest positive double"""
    return math.log(-math.log(np.finfo(float).tiny))


def epsilon_from_loglog(u):
    return math.exp(-math.exp(u))


def sigma_and_L(epsilon0, delta, epsilon):
    """σ = √(ε₀δ)·log(1/ε) and L = σ·log log(1/ε), natural logarithms"""
    if not 0 < epsilon < 1:
        raise PreconditionViolation('epsilon must lie in (0, 1)', epsilon=epsilon)
    log_inv = -math.log(epsilon)
    if log_inv <= 1:
        raise PreconditionViolation('log log(1/epsilon) must be positive', epsilon=epsilon)
    sigma = math.sqrt(epsilon0 * delta) * log_inv
    return sigma, sigma * math.log(log_inv)


def packet_axis(t, delta, xi, sigma):
    """One-axis factor of φ_{n,x₀}(t, x) with delta = x_j - x₀_j

    Real and imaginary parts of the analytic-extension exponent
    -(Δ + 2iξt)²/(4s) - tξ² + iξΔ, s = σ² + t, are collected before
    exponentiating so large tξ² does not overflow.
    """
    t = np.asarray(t, dtype=float)
    s = sigma * sigma + t
    exponent = (-(delta * delta) / (4.0 * s) - t * sigma * sigma * xi * xi / s
                + 1j * xi * sigma * sigma * delta / s)
    return np.sqrt(sigma / (math.sqrt(2.0 * math.pi) * s)) * np.exp(exponent)


def packet_value(packet, t, x):
    """φ_{n,x₀}(t, x) for points x with a trailing axis of length d"""
    if np.any(np.asarray(t) < 0):
        raise NonpositiveTime('Packets are evaluated for t >= 0 only')
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != packet.x0.size:
        x = x[..., None]
    value = 1.0 + 0j
    for axis in range(packet.x0.size):
        value = value * packet_axis(t, x[..., axis] - packet.x0[axis], packet.xi[axis], packet.sigma)
    return value


def packet_modulus_squared(packet, t, x):
    """Real form of |φ_{n,x₀}(t, x)|²"""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != packet.x0.size:
        x = x[..., None]
    d = packet.x0.size
    s = packet.sigma ** 2 + t
    r2 = np.sum((x - packet.x0) ** 2, axis=-1)
    xi2 = float(np.dot(packet.xi, packet.xi))
    return ((packet.sigma / (math.sqrt(2.0 * math.pi) * s)) ** d
            * np.exp(-(r2 - 4.0 * xi2 * t * t) / (2.0 * s)) * np.exp(-2.0 * xi2 * t))


def evolved_norm_squared(t, xi, sigma, d):
    """∫_{ℝ^d} |φ_{n,x₀}(t, ·)|² = (σ²/(σ²+t))^{d/2} A(t, ξ)"""
    t = np.asarray(t, dtype=float)
    s = sigma * sigma + t
    xi2 = float(np.sum(np.square(xi)))
    return (sigma * sigma / s) ** (d / 2.0) * np.exp(-2.0 * t * sigma * sigma * xi2 / s)


def axis_factors(t, coords, x0, L, n_max, sigma):
    """Per-axis matrices E_j[p, a] = φ-factor at coords[j][p] for n_j = a - n_max"""
    lattice = np.arange(-n_max, n_max + 1) / L
    return [packet_axis(t, np.asarray(c, dtype=float)[:, None] - x0[j], lattice[None, :], sigma)
            for j, c in enumerate(coords)]


def apply_axes(tensor, matrices):
    """Contract axis j of tensor with the second axis of matrices[j]"""
    out = tensor
    for matrix in matrices:
        out = np.tensordot(out, matrix, axes=([0], [1]))
    return out


# Truncation
def lattice_indices(L, loglog, epsilon0, d, mode=TruncationMode.BOX):
    """Retained lattice vectors in lexicographic order"""
    upper = L * loglog / epsilon0
    n_max = int(math.floor(upper * (1.0 + 1e-12)))
    grid = np.indices((2 * n_max + 1,) * d).reshape(d, -1).T - n_max
    radius = np.linalg.norm(grid, axis=1)
    keep = radius <= upper * (1.0 + 1e-12)
    if mode == TruncationMode.BAND:
        keep &= radius >= L / (epsilon0 * loglog) * (1.0 - 1e-12)
    elif mode != TruncationMode.BOX:
        raise PreconditionViolation(f'Unknown truncation mode {mode!r}')
    indices = grid[keep]
    if indices.shape[0] == 0:
        raise EmptySet('Truncation cutoffs leave no lattice points', L=L, upper=upper, mode=mode)
    return indices


def truncation_set(params, bump):
    """Lattice vectors retained for the given parameters and bump scale"""
    return lattice_indices(params.L, params.loglog, bump.epsilon0, params.d, params.mode)


def box_size(L, loglog, epsilon0, d):
    n_max = int(math.floor(L * loglog / epsilon0 * (1.0 + 1e-12)))
    return (2 * n_max + 1) ** d


# Choice of ε
def ob1_holds(u, m1, eta, d):
    return m1 * u ** (-d) < eta / 10.0


def ob1_epsilon(m1, eta, d, iterations=200):
    """Largest ε ≤ e^{-e} with (log log 1/ε)^{-d} M₁ < η/10, by bisection in log log 1/ε"""
    low, high = LOGLOG_FLOOR, loglog_ceiling()
    if ob1_holds(low, m1, eta, d):
        return epsilon_from_loglog(low)
    if not ob1_holds(high, m1, eta, d):
        raise NoFeasibleEpsilon('Condition (ob1) fails even at the smallest representable epsilon',
                                m1=m1, eta=eta, d=d, required_loglog=(10.0 * m1 / eta) ** (1.0 / d),
                                available_loglog=high)
    for _ in range(iterations):
        mid = 0.5 * (low + high)
        if ob1_holds(mid, m1, eta, d):
            high = mid
        else:
            low = mid
        if high - low <= 1e-15 * high:
            break
    return epsilon_from_loglog(high)


def params_for_epsilon(bump, epsilon, eta, mode=TruncationMode.BOX, k=1,
                       policy=EpsilonPolicy.FIXED, m1=None, max_modes=None):
    """FrameParams and truncation set for an explicit ε"""
    sigma, L = sigma_and_L(bump.epsilon0, bump.delta, epsilon)
    loglog = math.log(-math.log(epsilon))
    max_modes = max_modes or Config.FRAME_MAX_MODES
    if box_size(L, loglog, bump.epsilon0, bump.d) > max_modes:
        raise PreconditionViolation('Lattice exceeds the mode budget', epsilon=epsilon,
                                    modes=box_size(L, loglog, bump.epsilon0, bump.d), limit=max_modes)
    indices = lattice_indices(L, loglog, bump.epsilon0, bump.d, mode)
    return FrameParams(sigma, L, epsilon, eta, indices, k=k, mode=mode, policy=policy,
                       epsilon0=bump.epsilon0, delta=bump.delta, m1=m1)


def frame_params(bump, eta, eta_search=EpsilonPolicy.CERTIFIED, epsilon=None,
                 mode=TruncationMode.BOX, k=1):
    """Frame parameters for the selected ε policy

    ob1 bisects condition (ob1); fixed takes epsilon as given; certified
    returns the first rung of the ladder that build_frame climbs.
    """
    if not 0 < eta < 1:
        raise PreconditionViolation('eta must lie in (0, 1)', eta=eta)
    m1 = bump_constants(bump.d)['M1']
    if eta_search == EpsilonPolicy.OB1:
        epsilon = ob1_epsilon(m1, eta, bump.d)
    elif eta_search == EpsilonPolicy.FIXED:
        if epsilon is None:
            raise PreconditionViolation('The fixed policy needs an epsilon')
    elif eta_search == EpsilonPolicy.CERTIFIED:
        epsilon = epsilon_from_loglog(LOGLOG_FLOOR)
    else:
        raise PreconditionViolation(f'Unknown epsilon policy {eta_search!r}')
    return params_for_epsilon(bump, epsilon, eta, mode, k, eta_search, m1)


# Coefficients
def check_support(epsilon0, L):
    if epsilon0 > math.pi * L / 2.0:
        raise SupportViolation('Bump support leaves [-πL/2, πL/2]^d', epsilon0=epsilon0,
                               half_period=math.pi * L / 2.0)


def coefficient_tensor(bump, sigma, L, n_max, settings=Config):
    """c_n on the box [-n_max, n_max]^d, indexed by n + n_max

    c_n = (2πL)^{-d} (2πσ²)^{d/4} ∫ ψ_{ε₀}(y) exp(|y|²/(4σ²) - i n·y/L) dy
    over supp ψ_{ε₀}, tensor Gauss-Legendre with panel doubling.
    """
    check_support(bump.epsilon0, L)
    d = bump.d
    prefactor = (2.0 * math.pi * L) ** (-d) * (2.0 * math.pi * sigma * sigma) ** (d / 4.0)
    lattice = np.arange(-n_max, n_max + 1) / L

    def evaluate(level):
        nodes, weights = composite_rule(-bump.epsilon0, bump.epsilon0, 2 ** level, settings.GL_ORDER)
        grids = np.meshgrid(*([nodes] * d), indexing='ij')
        y2 = sum(g * g for g in grids)
        gaussian = np.exp(nodes * nodes / (4.0 * sigma * sigma)) * weights
        values = bump.epsilon0 ** (-d / 2.0) * psi(y2 / bump.epsilon0 ** 2, d)
        for axis in range(d):
            shape = [1] * d
            shape[axis] = nodes.size
            values = values * gaussian.reshape(shape)
        waves = np.exp(-1j * lattice[:, None] * nodes[None, :])
        return prefactor * apply_axes(values.astype(complex), [waves] * d)

    return refine(evaluate, settings.QUAD_RTOL, settings.QUAD_MAX_LEVEL, label='frame coefficients')


def coefficient(n, bump, params, settings=Config):
    """Single coefficient c_n"""
    n = np.atleast_1d(np.asarray(n, dtype=np.int64))
    n_max = int(np.max(np.abs(n)))
    tensor = coefficient_tensor(bump, params.sigma, params.L, n_max, settings)
    return complex(tensor[tuple(n + n_max)])


def dense_coefficients(frame):
    """Coefficient tensor on the enclosing box, zero off S"""
    n_max = int(np.abs(frame.indices).max()) if frame.params.size else 0
    tensor = np.zeros((2 * n_max + 1,) * frame.d, dtype=complex)
    tensor[tuple((frame.indices + n_max).T)] = frame.coefficients
    return tensor, n_max


# Evaluation
def superpose(frame, t, x):
    """Σ_{n∈S} c_n φ_n(t, x) at points with a trailing axis of length d"""
    if np.any(np.asarray(t) < 0):
        raise NonpositiveTime('Packets are evaluated for t >= 0 only')
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != frame.d:
        x = x[..., None]
    batch = x.shape[:-1]
    points = x.reshape(-1, frame.d)
    tensor, n_max = dense_coefficients(frame)
    factors = axis_factors(t, points.T, frame.x0, frame.L, n_max, frame.sigma)
    out = np.einsum('pa,a...->p...', factors[0], tensor)
    for factor in factors[1:]:
        out = np.einsum('pa,pa...->p...', factor, out)
    return out.reshape(batch)


def superpose_grid(frame, t, domain, resolution):
    """Σ c_n φ_n(t, ·) sampled at the cell centres as a GridField"""
    tensor, n_max = dense_coefficients(frame)
    factors = axis_factors(t, domain.cell_centers(resolution), frame.x0, frame.L, n_max, frame.sigma)
    return GridField(domain, resolution, apply_axes(tensor, factors))


def frame_error(frame, reference):
    """‖reference - Σ c_n φ_n(0, ·)‖ on the reference grid and ‖reference‖"""
    approx = superpose_grid(frame, 0.0, reference.domain, reference.resolution)
    residual = reference.with_values(reference.values - approx.values)
    return residual.l2_norm(), reference.l2_norm()


def decay_shape(params, epsilon0):
    """(σε₀/L²)^{d/2} min(1, (ε₀|ξ_n|)^{-k})"""
    scale = (params.sigma * epsilon0 / params.L ** 2) ** (params.d / 2.0)
    q = epsilon0 * np.linalg.norm(params.frequencies, axis=1)
    return scale * np.minimum(1.0, np.where(q > 0, q, 1.0) ** (-params.k)), q


def fit_decay(params, coefficients, epsilon0):
    """Decay constants fitted over S and over ε₀|ξ_n| ≤ 1"""
    shape, q = decay_shape(params, epsilon0)
    ratios = np.abs(coefficients) / shape
    small = q <= 1.0
    return float(ratios.max()), float(ratios[small].max()) if np.any(small) else None


def decay_check(frame, constant=None):
    """|c_n| ≤ C (σε₀/L²)^{d/2} min(1, (ε₀|ξ_n|)^{-k}) for every n ∈ S"""
    constant = frame.decay_constant if constant is None else constant
    if constant is None or frame.params.epsilon0 is None:
        return CheckReport('decay', skipped=True, message='No decay constant for uncertified data')
    shape, _ = decay_shape(frame.params, frame.params.epsilon0)
    excess = np.abs(frame.coefficients) - constant * shape * (1.0 + 1e-12)
    worst = int(np.argmax(excess))
    return CheckReport('decay', bool(excess[worst] <= 0), metrics={
        'constant': constant,
        'small_frequency_constant': frame.decay_small,
        'k': frame.params.k,
        'violations': int(np.count_nonzero(excess > 0)),
        'worst_index': frame.indices[worst].tolist(),
    })


# Construction
def _reference(bump, domain, resolution):
    return GridField.from_function(domain, resolution, lambda *xs: scaled_bump(bump, *xs))


def _assemble(bump, params, reference, settings):
    n_max = int(np.abs(params.indices).max())
    tensor = coefficient_tensor(bump, params.sigma, params.L, n_max, settings)
    coefficients = tensor[tuple((params.indices + n_max).T)]
    decay_constant, decay_small = fit_decay(params, coefficients, bump.epsilon0)
    frame = Frame(params, bump.center, coefficients, decay_constant=decay_constant,
                  decay_small=decay_small)
    frame.error, frame.reference_norm = frame_error(frame, reference)
    return frame


def _ladder(bump, eta, mode, k, reference, settings):
    m1 = bump_constants(bump.d)['M1']
    u = LOGLOG_FLOOR
    ceiling = math.log(settings.MAX_LOG_INV_EPSILON)
    trace = []
    frame = None
    while u <= ceiling + 1e-12:
        sigma, L = sigma_and_L(bump.epsilon0, bump.delta, epsilon_from_loglog(u))
        if box_size(L, u, bump.epsilon0, bump.d) > settings.FRAME_MAX_MODES:
            logger.warning('Frame ladder stopped at loglog=%.2f: lattice exceeds %d modes',
                           u, settings.FRAME_MAX_MODES)
            break
        params = params_for_epsilon(bump, epsilon_from_loglog(u), eta, mode, k,
                                    EpsilonPolicy.CERTIFIED, m1)
        frame = _assemble(bump, params, reference, settings)
        trace.append({'loglog': u, 'epsilon': params.epsilon, 'modes': params.size,
                      'relative_error': frame.relative_error})
        logger.debug('Frame rung loglog=%.2f modes=%d relative error %.3e',
                     u, params.size, frame.relative_error)
        if frame.relative_error <= eta:
            frame.ladder = trace
            logger.info('Frame accepted at loglog=%.2f with %d modes (relative error %.3e)',
                        u, params.size, frame.relative_error)
            return frame
        u += settings.FRAME_LADDER_STEP
    raise FrameErrorExceeded('Frame error stays above eta on the whole ladder', eta=eta,
                             relative_error=frame.relative_error if frame else None, ladder=trace)


def build_frame(bump, eta, domain, resolution, eta_search=EpsilonPolicy.CERTIFIED, epsilon=None,
                mode=TruncationMode.BOX, k=1, settings=Config):
    """Frame for the bump with certified relative L²(Ω) error ≤ η"""
    bump.validate(domain)
    reference = _reference(bump, domain, resolution)
    if eta_search == EpsilonPolicy.CERTIFIED:
        if not 0 < eta < 1:
            raise PreconditionViolation('eta must lie in (0, 1)', eta=eta)
        return _ladder(bump, eta, mode, k, reference, settings)
    params = frame_params(bump, eta, eta_search, epsilon, mode, k)
    frame = _assemble(bump, params, reference, settings)
    logger.info('Frame built with %d modes (relative error %.3e)', params.size, frame.relative_error)
    if frame.relative_error > eta:
        raise FrameErrorExceeded('Measured frame error exceeds eta', eta=eta,
                                 relative_error=frame.relative_error, error=frame.error)
    return frame


def decompose_field(field, x0, params):
    """Frame for arbitrary grid data by midpoint-rule coefficients"""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    half_period = math.pi * params.L / 2.0
    centers = field.centers()
    occupied = np.abs(field.values) > 0
    for axis, c in enumerate(centers):
        shape = [1] * field.domain.d
        shape[axis] = c.size
        offsets = np.broadcast_to(np.abs(c - x0[axis]).reshape(shape), field.values.shape)
        if np.any(offsets[occupied] > half_period):
            raise SupportViolation('Field support leaves [-πL/2, πL/2]^d around x0',
                                   axis=axis, half_period=half_period)
    d = field.domain.d
    n_max = int(np.abs(params.indices).max())
    lattice = np.arange(-n_max, n_max + 1) / params.L
    values = field.values.astype(complex) * field.cell_volume
    waves = []
    for axis, c in enumerate(centers):
        y = c - x0[axis]
        waves.append(np.exp(y * y / (4.0 * params.sigma ** 2))[None, :]
                     * np.exp(-1j * lattice[:, None] * y[None, :]))
    prefactor = (2.0 * math.pi * params.L) ** (-d) * (2.0 * math.pi * params.sigma ** 2) ** (d / 4.0)
    tensor = prefactor * apply_axes(values, waves)
    coefficients = tensor[tuple((params.indices + n_max).T)]
    frame = Frame(params, x0, coefficients, certified_decay=False)
    if params.epsilon0:
        frame.decay_constant, frame.decay_small = fit_decay(params, coefficients, params.epsilon0)
    frame.error, frame.reference_norm = frame_error(frame, field)
    return frame
