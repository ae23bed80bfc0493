"""
Base bump profile ψ, its scaled form and finite-difference C^k norms
"""
import itertools
import math
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma

from config.settings import Config


def bump(r2):
    """exp(-1/(1-|y|²)) on |y| < 1, zero outside"""
    r2 = np.asarray(r2, dtype=float)
    inside = r2 < 1.0
    out = np.zeros_like(r2)
    out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return out


@lru_cache(maxsize=8)
def bump_l2_norm(d):
    """‖exp(-1/(1-|y|²))‖ on ℝ^d"""
    sphere = 2.0 * math.pi ** (d / 2) / gamma(d / 2)
    radial, _ = quad(lambda r: r ** (d - 1) * math.exp(-2.0 / (1.0 - r * r)) if r < 1 else 0.0,
                     0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)
    return math.sqrt(sphere * radial)


def psi(y2, d):
    """Unit L² bump as a function of |y|²"""
    return bump(y2) / bump_l2_norm(d)


def scaled_bump(bump, *coords):
    """ψ_{ε₀}(x) = ε₀^{-d/2} ψ((x - x₀)/ε₀) on broadcast coordinate arrays"""
    y2 = 0.0
    for axis, x in enumerate(coords):
        y2 = y2 + ((np.asarray(x, dtype=float) - bump.center[axis]) / bump.epsilon0) ** 2
    return bump.epsilon0 ** (-bump.d / 2) * psi(y2, bump.d)


def sobolev_index(d):
    """Smallest integer s > d/2"""
    return d // 2 + 1


@lru_cache(maxsize=16)
def profile_norms(d, max_order, points=None):
    """Finite-difference C^j norms of ψ for j = 0..max_order"""
    points = points or Config.NORM_POINTS.get(d, 81)
    axis = np.linspace(-1.0, 1.0, points)
    h = axis[1] - axis[0]
    grids = np.meshgrid(*([axis] * d), indexing='ij')
    values = psi(sum(g * g for g in grids), d)
    norms = []
    running = 0.0
    for order in range(max_order + 1):
        for combo in itertools.combinations_with_replacement(range(d), order):
            derivative = values
            for ax in combo:
                derivative = np.gradient(derivative, h, axis=ax, edge_order=2)
            running = max(running, float(np.max(np.abs(derivative))))
        norms.append(running)
    return tuple(norms)


def bump_constants(d):
    """M₀ = ‖ψ‖_{C⁰}, M₁ = ‖ψ‖_{C^d}, M₂ = ‖ψ‖_{C^{2+s}}"""
    s = sobolev_index(d)
    norms = profile_norms(d, max(d, 2 + s))
    return {
        'M0': norms[0],
        'M1': norms[d],
        'M2': norms[2 + s],
        's': s,
    }
