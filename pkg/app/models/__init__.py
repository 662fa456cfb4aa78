"""Data models for the PT-SUSY toolkit."""

from .superpotential import Superpotential, TanhPiece, SampledPiece
from .trap import (
    DeltaWell,
    TrapSpec,
    ConstantSmooth,
    SuperpotentialSmooth,
    SampledRegion,
    SampledSmooth,
    PotentialField,
    PartnerPotential,
)
from .solution import StatePair, JumpEvent, Trajectory, ShootingUnknowns, EigenSolution, OracleRoots
from .reports import (
    Wavefunction,
    PotentialSamples,
    SpectrumRow,
    SpectrumTable,
    RemovalReport,
    NonlinearRow,
    NonlinearTable,
    EPReport,
)
from .run_config import RunConfig

__all__ = [
    "Superpotential",
    "TanhPiece",
    "SampledPiece",
    "DeltaWell",
    "TrapSpec",
    "ConstantSmooth",
    "SuperpotentialSmooth",
    "SampledRegion",
    "SampledSmooth",
    "PotentialField",
    "PartnerPotential",
    "StatePair",
    "JumpEvent",
    "Trajectory",
    "ShootingUnknowns",
    "EigenSolution",
    "OracleRoots",
    "Wavefunction",
    "PotentialSamples",
    "SpectrumRow",
    "SpectrumTable",
    "RemovalReport",
    "NonlinearRow",
    "NonlinearTable",
    "EPReport",
    "RunConfig",
]
