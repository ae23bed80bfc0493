"""
Box domains and sampled grid fields
"""
import hashlib
import math

import numpy as np

from config.settings import Config
from errors import PointOutsideDomain, PreconditionViolation
from .base import BaseModel


class FieldKind:
    """Sample type of a grid field"""
    REAL = 'real'
    COMPLEX = 'complex'


class BoxDomain(BaseModel):
    """Axis-aligned box Ω with Dirichlet boundary Γ = ∂Ω"""
    __fields__ = ('lower', 'upper')

    def __init__(self, lower, upper):
        self.lower = np.atleast_1d(np.asarray(lower, dtype=float))
        self.upper = np.atleast_1d(np.asarray(upper, dtype=float))
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise PreconditionViolation('Box corners must be vectors of equal length')
        if np.any(self.upper <= self.lower):
            raise PreconditionViolation('Box must be nonempty', lower=self.lower.tolist(),
                                        upper=self.upper.tolist())

    @property
    def d(self):
        return self.lower.size

    @property
    def lengths(self):
        return self.upper - self.lower

    @property
    def volume(self):
        return float(np.prod(self.lengths))

    @property
    def diameter(self):
        return float(np.linalg.norm(self.lengths))

    @property
    def centroid(self):
        return 0.5 * (self.lower + self.upper)

    @property
    def perimeter(self):
        """Surface measure |∂Ω|"""
        if self.d == 1:
            return 2.0
        total = 0.0
        for axis in range(self.d):
            total += 2.0 * float(np.prod(np.delete(self.lengths, axis)))
        return total

    def contains(self, y, strict=True):
        y = np.asarray(y, dtype=float)
        if strict:
            return bool(np.all(y > self.lower) and np.all(y < self.upper))
        return bool(np.all(y >= self.lower) and np.all(y <= self.upper))

    def distance_to_boundary(self, y):
        """Exact distance d(y, Γ) for a point inside the box"""
        y = np.asarray(y, dtype=float)
        if not self.contains(y):
            raise PointOutsideDomain('Point is not inside Ω', point=y.tolist())
        return float(np.min(np.minimum(y - self.lower, self.upper - y)))

    def spacing(self, resolution):
        return self.lengths / np.asarray(resolution, dtype=float)

    def cell_volume(self, resolution):
        return float(np.prod(self.spacing(resolution)))

    def cell_edges(self, resolution):
        """Per-axis cell edges"""
        return [np.linspace(lo, hi, n + 1) for lo, hi, n in zip(self.lower, self.upper, resolution)]

    def cell_centers(self, resolution):
        """Per-axis cell centres"""
        h = self.spacing(resolution)
        return [lo + (np.arange(n) + 0.5) * step for lo, n, step in zip(self.lower, resolution, h)]

    def mesh(self, resolution):
        return np.meshgrid(*self.cell_centers(resolution), indexing='ij')

    def __eq__(self, other):
        return (isinstance(other, BoxDomain) and np.array_equal(self.lower, other.lower)
                and np.array_equal(self.upper, other.upper))

    def __hash__(self):
        return hash((tuple(self.lower), tuple(self.upper)))


class GridField(BaseModel):
    """Real or complex samples at the cell centres of a uniform grid over Ω"""
    __fields__ = ('domain', 'resolution', 'kind')

    def __init__(self, domain, resolution, values):
        self.domain = domain
        self.resolution = tuple(int(n) for n in resolution)
        values = np.asarray(values)
        if len(self.resolution) != domain.d:
            raise PreconditionViolation('Resolution needs one entry per axis')
        if values.size != math.prod(self.resolution):
            raise PreconditionViolation('Value count does not match the grid',
                                        expected=math.prod(self.resolution), got=int(values.size))
        self.values = values.reshape(self.resolution)

    @classmethod
    def zeros(cls, domain, resolution, kind=FieldKind.REAL):
        dtype = complex if kind == FieldKind.COMPLEX else float
        return cls(domain, resolution, np.zeros(tuple(resolution), dtype=dtype))

    @classmethod
    def from_function(cls, domain, resolution, fn):
        """Sample fn(*coords) at the cell centres"""
        return cls(domain, resolution, fn(*domain.mesh(resolution)))

    @property
    def kind(self):
        return FieldKind.COMPLEX if np.iscomplexobj(self.values) else FieldKind.REAL

    @property
    def cell_volume(self):
        return self.domain.cell_volume(self.resolution)

    @property
    def spacing(self):
        return self.domain.spacing(self.resolution)

    def centers(self):
        return self.domain.cell_centers(self.resolution)

    def integrate(self):
        return self.values.sum() * self.cell_volume

    def inner(self, other):
        """L² inner product ⟨self, other⟩ with the second argument conjugated"""
        return np.vdot(other.values, self.values) * self.cell_volume

    def l2_norm(self):
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.cell_volume))

    def max_abs(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def with_values(self, values):
        return GridField(self.domain, self.resolution, values)

    def content_hash(self):
        """Digest of the samples at 17 significant digits"""
        digest = hashlib.sha256()
        digest.update(repr(self.resolution).encode())
        flat = np.asarray(self.values).ravel()
        if np.iscomplexobj(flat):
            flat = np.column_stack([flat.real, flat.imag]).ravel()
        for value in flat:
            digest.update(format(float(value), Config.FLOAT_FORMAT).encode())
            digest.update(b';')
        return digest.hexdigest()


class ObservationSet(BaseModel):
    """Observation region ω given by a mask in [0, 1]"""
    __fields__ = ('measure', 'fraction')

    def __init__(self, mask, tolerance=1e-12):
        values = np.real_if_close(np.asarray(mask.values))
        if np.iscomplexobj(values):
            raise PreconditionViolation('Masks must be real')
        if values.size and (values.min() < -tolerance or values.max() > 1 + tolerance):
            raise PreconditionViolation('Mask values must lie in [0, 1]',
                                        minimum=float(values.min()), maximum=float(values.max()))
        self.mask = mask.with_values(np.clip(values.astype(float), 0.0, 1.0))

    @classmethod
    def full(cls, domain, resolution):
        return cls(GridField(domain, resolution, np.ones(tuple(resolution))))

    @classmethod
    def empty(cls, domain, resolution):
        return cls(GridField.zeros(domain, resolution))

    @classmethod
    def from_predicate(cls, domain, resolution, predicate):
        """Characteristic mask of {x : predicate(*coords)} sampled at cell centres"""
        inside = predicate(*domain.mesh(resolution))
        return cls(GridField(domain, resolution, np.asarray(inside, dtype=float)))

    @property
    def domain(self):
        return self.mask.domain

    @property
    def resolution(self):
        return self.mask.resolution

    @property
    def values(self):
        return self.mask.values

    @property
    def measure(self):
        return float(self.mask.integrate())

    @property
    def fraction(self):
        return self.measure / self.domain.volume

    def fractional_cells(self, tolerance=1e-12):
        v = self.values
        return int(np.count_nonzero((v > tolerance) & (v < 1 - tolerance)))

    def is_empty(self):
        return not np.any(self.values > 0)

    def content_hash(self):
        return self.mask.content_hash()

    def get_summary(self):
        """Get summary of the observation set"""
        return {
            'measure': self.measure,
            'fraction': self.fraction,
            'fractional_cells': self.fractional_cells(),
            'resolution': list(self.resolution),
        }
