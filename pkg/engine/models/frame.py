"""
Bump data, frame parameters and heat packets
"""
import math

import numpy as np

from errors import PreconditionViolation, SupportViolation
from .base import BaseModel


class ProfileName:
    """Built-in base profiles ψ"""
    BUMP = 'bump'
    GRID = 'grid'


class EpsilonPolicy:
    """How the smallness parameter ε is chosen"""
    CERTIFIED = 'certified'
    OB1 = 'ob1'
    FIXED = 'fixed'


class TruncationMode:
    """Which lattice vectors a frame retains"""
    BOX = 'box'
    BAND = 'band'


class BumpSpec(BaseModel):
    """Initial data ε₀^{-d/2} ψ((x - x₀)/ε₀)"""
    __fields__ = ('epsilon0', 'center', 'delta', 'profile')

    def __init__(self, epsilon0, center, delta, profile=ProfileName.BUMP):
        self.epsilon0 = float(epsilon0)
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.delta = float(delta)
        self.profile = profile

    @property
    def d(self):
        return self.center.size

    @property
    def support_radius(self):
        return self.epsilon0

    def validate(self, domain):
        """Check the admissible ranges against the box Ω"""
        if domain.d != self.d:
            raise PreconditionViolation('Bump centre and domain disagree on dimension')
        if not 0 < self.epsilon0 < domain.diameter / 2:
            raise PreconditionViolation('epsilon0 must lie in (0, diam(Ω)/2)',
                                        epsilon0=self.epsilon0, diameter=domain.diameter)
        if not math.sqrt(self.epsilon0) < self.delta < 1:
            raise PreconditionViolation('delta must lie in (sqrt(epsilon0), 1)',
                                        epsilon0=self.epsilon0, delta=self.delta)
        radius = self.support_radius
        if np.any(self.center - radius <= domain.lower) or np.any(self.center + radius >= domain.upper):
            raise SupportViolation('Scaled bump support leaves Ω', center=self.center.tolist(),
                                   radius=radius)
        return self


class HeatPacket(BaseModel):
    """Gaussian packet φ_{n,x₀} of width σ at frequency ξ_n = n/L"""
    __fields__ = ('x0', 'xi', 'sigma')

    def __init__(self, x0, xi, sigma):
        self.x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        self.xi = np.atleast_1d(np.asarray(xi, dtype=float))
        self.sigma = float(sigma)

    @classmethod
    def from_index(cls, n, L, x0, sigma):
        return cls(x0, np.asarray(n, dtype=float) / L, sigma)


class FrameParams(BaseModel):
    """Lattice parameters σ, L, ε, η and the retained index set S"""
    __fields__ = ('sigma', 'L', 'epsilon', 'eta', 'k', 'mode', 'policy', 'epsilon0', 'delta')

    def __init__(self, sigma, L, epsilon, eta, indices, k=1, mode=TruncationMode.BOX,
                 policy=EpsilonPolicy.FIXED, epsilon0=None, delta=None, m1=None):
        self.sigma = float(sigma)
        self.L = float(L)
        self.epsilon = float(epsilon)
        self.eta = float(eta)
        self.indices = np.asarray(indices, dtype=np.int64)
        if self.indices.ndim == 1:
            self.indices = self.indices.reshape(-1, 1)
        self.k = int(k)
        self.mode = mode
        self.policy = policy
        self.epsilon0 = epsilon0
        self.delta = delta
        self.m1 = m1

    @property
    def d(self):
        return self.indices.shape[1]

    @property
    def size(self):
        return self.indices.shape[0]

    @property
    def loglog(self):
        return math.log(math.log(1.0 / self.epsilon))

    @property
    def frequencies(self):
        return self.indices / self.L

    def get_summary(self):
        """Get summary of the lattice"""
        return {
            'sigma': self.sigma,
            'L': self.L,
            'epsilon': self.epsilon,
            'modes': self.size,
            'max_index': int(np.abs(self.indices).max()) if self.size else 0,
            'mode': self.mode,
            'policy': self.policy,
        }


class Frame(BaseModel):
    """Packet frame with coefficients c_n for n ∈ S"""
    __fields__ = ('params', 'error', 'relative_error')

    def __init__(self, params, x0, coefficients, error=None, reference_norm=None,
                 ladder=None, certified_decay=True, decay_constant=None, decay_small=None):
        self.params = params
        self.x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        self.coefficients = np.asarray(coefficients, dtype=complex)
        if self.coefficients.shape != (params.size,):
            raise PreconditionViolation('One coefficient per retained index is required')
        self.error = error
        self.reference_norm = reference_norm
        self.ladder = ladder or []
        self.certified_decay = certified_decay
        self.decay_constant = decay_constant
        self.decay_small = decay_small

    @property
    def d(self):
        return self.params.d

    @property
    def sigma(self):
        return self.params.sigma

    @property
    def L(self):
        return self.params.L

    @property
    def indices(self):
        return self.params.indices

    @property
    def relative_error(self):
        if self.error is None or not self.reference_norm:
            return None
        return self.error / self.reference_norm

    def coefficient(self, n):
        n = np.atleast_1d(np.asarray(n, dtype=np.int64))
        hits = np.flatnonzero(np.all(self.indices == n, axis=1))
        return complex(self.coefficients[hits[0]]) if hits.size else 0j

    def packet(self, n):
        return HeatPacket.from_index(n, self.L, self.x0, self.sigma)

    def select(self, radius=None, stride=1):
        """Positions of retained indices with |n| ≤ radius·stride on the stride sublattice"""
        keep = np.ones(self.params.size, dtype=bool)
        stride = max(int(stride), 1)
        if stride > 1:
            keep &= np.all(self.indices % stride == 0, axis=1)
        if radius is not None:
            keep &= np.linalg.norm(self.indices, axis=1) <= radius * stride + 1e-9
        return np.flatnonzero(keep)

    def get_summary(self):
        """Get summary of the frame"""
        summary = self.params.get_summary()
        summary.update({
            'error': self.error,
            'relative_error': self.relative_error,
            'certified_decay': self.certified_decay,
            'decay_constant': self.decay_constant,
            'ladder_rungs': len(self.ladder),
        })
        return summary
