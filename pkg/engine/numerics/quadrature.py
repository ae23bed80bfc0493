"""
Quadrature helpers: Gauss-Legendre panels, Simpson in time, refinement loops
"""
import logging
import math
from functools import lru_cache

import numpy as np
from scipy.integrate import simpson
from scipy.special import roots_legendre

from errors import QuadratureNonConvergence

logger = logging.getLogger(__name__)


@lru_cache(maxsize=64)
def gauss_legendre(order):
    """Nodes and weights on [-1, 1]"""
    nodes, weights = roots_legendre(order)
    return nodes, weights


def composite_rule(a, b, panels, order):
    """Composite Gauss-Legendre rule on [a, b]"""
    ref_nodes, ref_weights = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * ref_nodes[None, :]).ravel()
    weights = (half[:, None] * ref_weights[None, :]).ravel()
    return nodes, weights


def cell_rule(edges, order):
    """Per-cell Gauss-Legendre nodes and weights, shaped (cells, order)"""
    ref_nodes, ref_weights = gauss_legendre(order)
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    return mid[:, None] + half[:, None] * ref_nodes[None, :], half[:, None] * ref_weights[None, :]


def time_integral(values, times, axis=0):
    """Composite Simpson along the time axis"""
    return simpson(values, x=times, axis=axis)


def converged(new, old, rtol):
    new = np.asarray(new)
    old = np.asarray(old)
    scale = max(float(np.max(np.abs(new), initial=0.0)), np.finfo(float).tiny)
    return float(np.max(np.abs(new - old), initial=0.0)) <= rtol * scale


def refine(evaluate, rtol, max_level, label='quadrature'):
    """Evaluate at increasing levels until successive results agree to rtol"""
    previous = evaluate(0)
    for level in range(1, max_level + 1):
        current = evaluate(level)
        if converged(current, previous, rtol):
            logger.debug('%s converged at level %d', label, level)
            return current
        previous = current
    raise QuadratureNonConvergence(f'{label} did not reach rtol={rtol:g}', levels=max_level, rtol=rtol)


def simpson_weights(a, b, intervals):
    """Nodes and composite Simpson weights on [a, b]"""
    intervals = int(intervals) + (int(intervals) % 2)
    nodes = np.linspace(a, b, intervals + 1)
    weights = np.full(intervals + 1, 2.0)
    weights[1::2] = 4.0
    weights[0] = weights[-1] = 1.0
    return nodes, weights * (b - a) / (3.0 * intervals)


def grading_depth(T, rate, max_depth=40):
    """Number of dyadic panels needed to resolve exp(-rate·t) near t = 0"""
    if T <= 0 or rate * T <= 1.0:
        return 0
    return int(min(max_depth, math.ceil(math.log2(rate * T))))


def graded_simpson(T, intervals, depth=0):
    """Simpson on the dyadic panels [0, T/2^depth], ..., [T/2, T]"""
    edges = [0.0] + [T * 2.0 ** (-k) for k in range(depth, -1, -1)]
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        panel_nodes, panel_weights = simpson_weights(a, b, intervals)
        nodes.append(panel_nodes)
        weights.append(panel_weights)
    return np.concatenate(nodes), np.concatenate(weights)
