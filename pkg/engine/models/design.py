"""
Design problem models: packet densities, simplex weights, solutions
"""
import numpy as np

from .base import BaseModel

class PacketEnergyDensity(BaseModel):
    """ρ_n = d_n ∫₀ᵀ |φ_n(t, ·)|² dt sampled on the grid"""
    __fields__ = ('index', 'd_n')

    def __init__(self, index, d_n, rho):
        self.index = tuple(int(v) for v in np.atleast_1d(index))
        self.d_n = float(d_n)
        self.rho = rho

    @property
    def mass(self):
        return float(self.rho.integrate())

class SimplexWeights(BaseModel):
    """Weights α on the truncated index set, summing to one"""
    __fields__ = ('alpha',)

    def __init__(self, alpha, indices):
        self.alpha = np.asarray(alpha, dtype=float)
        self.indices = [tuple(i) for i in np.asarray(indices).reshape(len(self.alpha), -1)]

    @classmethod
    def uniform(cls, indices):
        count = len(indices)
        return cls(np.full(count, 1.0 / count), indices)

    @property
    def total(self):
        return float(self.alpha.sum())


class DesignSolution(BaseModel):
    """Relaxed optimiser a^N with weights α^N, threshold λ^N and its certificate"""
    __fields__ = ('lam', 'value', 'gap', 'N', 'iterations', 'converged', 'polished',
                  'degenerate', 'lower', 'upper')

    def __init__(self, a, alpha, lam, value, gap, N, iterations=0, converged=True,
                 polished=False, degenerate=False, lower=None, upper=None, argmin=None):
        self.a = a
        self.alpha = alpha
        self.lam = float(lam)
        self.value = float(value)
        self.gap = float(gap)
        self.N = N
        self.iterations = int(iterations)
        self.converged = bool(converged)
        self.polished = bool(polished)
        self.degenerate = bool(degenerate)
        self.lower = value if lower is None else float(lower)
        self.upper = value if upper is None else float(upper)
        self.argmin = argmin

    def get_summary(self):
        """Get summary of the design"""
        return {
            'value': self.value,
            'gap': self.gap,
            'lambda': self.lam,
            'N': self.N,
            'iterations': self.iterations,
            'converged': self.converged,
            'fractional_cells': self.a.fractional_cells(),
            'measure': self.a.measure,
        }
