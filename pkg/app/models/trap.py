"""Trap and potential-field models."""

import math
from pydantic import BaseModel, Field, model_validator
from typing import List, Literal, Union

import numpy as np

from app.models.superpotential import Superpotential


class DeltaWell(BaseModel):
    """A point interaction of complex strength at a fixed position."""

    position: float
    strength: complex

    @model_validator(mode="after")
    def _finite_nonzero(self) -> "DeltaWell":
        if not math.isfinite(self.position):
            raise ValueError("delta position must be finite")
        if not (math.isfinite(self.strength.real) and math.isfinite(self.strength.imag)):
            raise ValueError("delta strength must be finite")
        if self.strength == 0:
            raise ValueError("delta strength must be nonzero")
        return self

    class Config:
        frozen = True


class TrapSpec(BaseModel):
    """The physical problem: delta wells, separation, gain/loss and interaction."""

    separation: float = Field(gt=0)
    gamma: float = Field(ge=0)
    nonlinearity: float = Field(0.0, ge=0)
    energy_shift: complex = 0j
    deltas: List[DeltaWell] = []

    @model_validator(mode="after")
    def _sorted_deltas(self) -> "TrapSpec":
        positions = [d.position for d in self.deltas]
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise ValueError("deltas must be sorted by strictly increasing position")
        return self

    @property
    def nu(self) -> complex:
        """Strength of the gain/loss well at +a/2 of a PT trap."""
        return complex(-1.0, self.gamma)

    @property
    def delta_positions(self) -> List[float]:
        return [d.position for d in self.deltas]

    @property
    def is_pt_paired(self) -> bool:
        """strength(-x) == conj(strength(+x)) for every delta."""
        by_position = {d.position: d.strength for d in self.deltas}
        return all(
            -p in by_position and by_position[-p] == s.conjugate()
            for p, s in by_position.items()
        )

    def region_of(self, x: float) -> int:
        """Index of the region containing x (number of deltas to its left)."""
        for d in self.deltas:
            if x == d.position:
                raise ValueError(f"x={x} lies exactly on a delta")
        return sum(1 for d in self.deltas if d.position < x)

    class Config:
        frozen = True


class ConstantSmooth(BaseModel):
    """Smooth part that is constant on each region between deltas."""

    kind: Literal["constant"] = "constant"
    values: List[complex]

    class Config:
        frozen = True


class SuperpotentialSmooth(BaseModel):
    """Smooth part W^2 + W' of a partner potential with an analytic W."""

    kind: Literal["superpotential"] = "superpotential"
    superpotential: Superpotential

    class Config:
        frozen = True
        arbitrary_types_allowed = True


class SampledRegion(BaseModel):
    """Samples of a smooth part on one region, endpoints as one-sided limits."""

    x: np.ndarray
    values: np.ndarray

    class Config:
        frozen = True
        arbitrary_types_allowed = True


class SampledSmooth(BaseModel):
    """Smooth part known only on a grid, one sample block per region."""

    kind: Literal["sampled"] = "sampled"
    regions: List[SampledRegion]

    @property
    def extent(self) -> float:
        """Half-width of the sampled window."""
        return float(min(-self.regions[0].x[0], self.regions[-1].x[-1]))

    class Config:
        frozen = True
        arbitrary_types_allowed = True


SmoothPart = Union[ConstantSmooth, SuperpotentialSmooth, SampledSmooth]


class PotentialField(BaseModel):
    """A trap plus its smooth background, ready for evaluation and propagation."""

    trap: TrapSpec
    smooth: SmoothPart = Field(discriminator="kind")
    kind: Literal["original", "partner"] = "original"
    asymptote: complex = 0j
    pole_markers: List[float] = []

    @property
    def is_linear(self) -> bool:
        return self.trap.nonlinearity == 0

    class Config:
        frozen = True
        arbitrary_types_allowed = True


class PartnerPotential(BaseModel):
    """SUSY partner of an original field: V2 = W^2 + W' with negated deltas."""

    field: PotentialField
    superpotential: Superpotential
    source_kappa: complex
    pole_markers: List[float] = []

    @property
    def trap(self) -> TrapSpec:
        return self.field.trap

    class Config:
        frozen = True
        arbitrary_types_allowed = True
