"""
Experiment runner: builds and caches the objects every command needs
"""
import logging
from functools import cached_property

import numpy as np

from config.settings import Config
from models.domain import ObservationSet
from numerics.gramian import assemble_pencil, calibrate_constants, pencil_indices
from numerics.heat_oracle import resolve_eta0
from numerics.packet_frame import build_frame
from storage.grid_io import read_mask

logger = logging.getLogger(__name__)


def default_observation(domain, resolution, M):
    """Slab {x₁ ≤ lo₁ + M ℓ₁} of measure M|Ω|"""
    edge = domain.lower[0] + M * domain.lengths[0]
    return ObservationSet.from_predicate(domain, resolution, lambda *xs: xs[0] <= edge)


class ExperimentRunner:
    """Lazily built domain, frame, observation set and pencil for one experiment"""

    def __init__(self, experiment, settings=Config, threads=None, mask_path=None):
        self.experiment = experiment
        self.settings = settings
        self.threads = experiment.threads if threads is None else threads
        self.mask_path = mask_path or experiment.mask

    @property
    def T(self):
        return self.experiment.T

    @cached_property
    def domain(self):
        return self.experiment.domain()

    @property
    def resolution(self):
        return self.experiment.resolution_tuple

    @cached_property
    def bump(self):
        return self.experiment.bump().validate(self.domain)

    @cached_property
    def frame(self):
        e = self.experiment
        return build_frame(self.bump, e.eta, self.domain, self.resolution, e.eta_search, e.epsilon,
                           e.mode, e.k, self.settings)

    @cached_property
    def omega(self):
        if self.mask_path:
            logger.info('Observation set read from %s', self.mask_path)
            return read_mask(self.mask_path, self.domain, self.resolution)
        return default_observation(self.domain, self.resolution, self.experiment.M)

    @cached_property
    def eta0(self):
        e = self.experiment
        return resolve_eta0(e.eta0, self.bump, self.omega, e.T, e.eta, self.settings)

    @cached_property
    def pencil_indices(self):
        indices, stride = pencil_indices(self.frame, self.domain, self.experiment.pencil_radius,
                                         self.experiment.pencil_stride)
        logger.debug('Pencil uses %d indices with stride %d', len(indices), stride)
        return indices

    @cached_property
    def pencil(self):
        return assemble_pencil(self.frame, self.omega, self.T, self.pencil_indices, self.threads,
                               self.settings)

    @cached_property
    def constants(self):
        frame = self.frame
        return calibrate_constants(frame.sigma, frame.L, self.domain, self.resolution,
                                   self.pencil_indices, frame.x0, extra_masks=(self.omega,),
                                   extra_horizons=(self.T,), epsilon1=self.experiment.epsilon1,
                                   settings=self.settings)

    def rng(self, offset=0):
        return np.random.default_rng(self.experiment.seed + offset)
