"""
Finite-difference evolution results
"""
import numpy as np

from .base import BaseModel


class FdScheme:
    """Time stepping schemes"""
    CRANK_NICOLSON = 'crank-nicolson'


class FdSolution(BaseModel):
    """Dirichlet heat evolution on the grid with per-step diagnostics"""
    __fields__ = ('dt', 'steps', 'T', 'scheme')

    def __init__(self, initial, dt, steps, snapshots, times, norms, energies, dissipation,
                 masked=None, scheme=FdScheme.CRANK_NICOLSON):
        self.initial = initial
        self.dt = float(dt)
        self.steps = int(steps)
        self.snapshots = snapshots
        self.times = np.asarray(times, dtype=float)
        # ‖u^k‖², ⟨-A u^k, u^k⟩ and the per-step Crank-Nicolson dissipation
        self.norms = np.asarray(norms, dtype=float)
        self.energies = np.asarray(energies, dtype=float)
        self.dissipation = np.asarray(dissipation, dtype=float)
        self.masked = None if masked is None else np.asarray(masked, dtype=float)
        self.scheme = scheme

    @property
    def T(self):
        return float(self.times[-1])

    @property
    def final(self):
        return self.snapshots[max(self.snapshots)]

    def snapshot(self, t):
        """Snapshot recorded closest to time t"""
        key = min(self.snapshots, key=lambda s: abs(s - t))
        return self.snapshots[key]

    def get_summary(self):
        """Get summary of the run"""
        return {
            'dt': self.dt,
            'steps': self.steps,
            'T': self.T,
            'snapshots': len(self.snapshots),
            'final_norm': float(np.sqrt(self.norms[-1])),
        }
