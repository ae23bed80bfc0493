"""
Gramian pencil model
"""
import numpy as np

from .base import BaseModel


class GramianPencil(BaseModel):
    """Hermitian pair (G, H) indexed by packet lattice vectors"""
    __fields__ = ('T', 'sigma', 'L', 'mask_hash')

    def __init__(self, indices, G, H, T, sigma, L, x0, mask_hash=None):
        self.indices = np.asarray(indices, dtype=np.int64)
        self.G = np.asarray(G, dtype=complex)
        self.H = np.asarray(H, dtype=complex)
        self.T = float(T)
        self.sigma = float(sigma)
        self.L = float(L)
        self.x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        self.mask_hash = mask_hash

    @property
    def size(self):
        return self.indices.shape[0]

    def hermitian_defect(self):
        """Largest |A - A*| over G and H"""
        return max(float(np.max(np.abs(self.G - self.G.conj().T), initial=0.0)),
                   float(np.max(np.abs(self.H - self.H.conj().T), initial=0.0)))

    def get_summary(self):
        """Get summary of the pencil"""
        return {
            'size': self.size,
            'T': self.T,
            'trace_G': float(np.real(np.trace(self.G))),
            'trace_H': float(np.real(np.trace(self.H))),
            'mask_hash': self.mask_hash,
        }


class GramianConstants(BaseModel):
    """Calibrated dimensional constants for the diagonal and off-diagonal bounds"""
    __fields__ = ('lower', 'upper', 'offdiag', 'samples', 'margin', 'horizons')

    def __init__(self, lower, upper, offdiag, samples=0, margin=0.0, horizons=()):
        self.lower = float(lower)
        self.upper = float(upper)
        self.offdiag = float(offdiag)
        self.samples = int(samples)
        self.margin = float(margin)
        self.horizons = [float(t) for t in horizons]
