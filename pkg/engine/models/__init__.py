"""
Domain models for heatpack
"""

from .base import BaseModel, to_plain
from .domain import BoxDomain, FieldKind, GridField, ObservationSet
from .frame import BumpSpec, EpsilonPolicy, Frame, FrameParams, HeatPacket, ProfileName, TruncationMode
from .pencil import GramianConstants, GramianPencil
from .evolution import FdScheme, FdSolution
from .design import DesignSolution, PacketEnergyDensity, SimplexWeights
from .report import CheckReport, CheckStatus, ObservabilityReport

__all__ = [
    'BaseModel',
    'to_plain',
    'BoxDomain',
    'FieldKind',
    'GridField',
    'ObservationSet',
    'BumpSpec',
    'EpsilonPolicy',
    'Frame',
    'FrameParams',
    'HeatPacket',
    'ProfileName',
    'TruncationMode',
    'FdScheme',
    'FdSolution',
    'GramianConstants',
    'GramianPencil',
    'DesignSolution',
    'PacketEnergyDensity',
    'SimplexWeights',
    'CheckReport',
    'CheckStatus',
    'ObservabilityReport'
]
