"""Result models produced by the experiment pipeline."""

from pydantic import BaseModel, Field
from typing import List, Optional

import numpy as np

from app.models.solution import EigenSolution
from app.models.superpotential import Superpotential
from app.models.trap import PartnerPotential


class Wavefunction(BaseModel):
    """Wavefunction samples on a display grid."""

    x: np.ndarray
    phi: np.ndarray

    @property
    def abs_phi(self) -> np.ndarray:
        return np.abs(self.phi)

    class Config:
        frozen = True
        arbitrary_types_allowed = True


class PotentialSamples(BaseModel):
    """Samples of a smooth potential (or superpotential) on a display grid."""

    x: np.ndarray
    values: np.ndarray

    class Config:
        frozen = True
        arbitrary_types_allowed = True


class SpectrumRow(BaseModel):
    """Original and partner energies at one gamma."""

    gamma: float
    E0_1: complex
    E1_1: complex
    E0_2: complex
    gamma_crit_flag: bool = False

    class Config:
        frozen = True


class SpectrumTable(BaseModel):
    """Gamma sweep of both sectors, sorted by gamma."""

    a: float
    removed_index: int = Field(ge=0, le=1)
    gamma_crit: Optional[float] = None
    rows: List[SpectrumRow] = []

    class Config:
        frozen = True


class RemovalReport(BaseModel):
    """Everything produced by removing one state from the original spectrum."""

    removed_index: int = Field(ge=0, le=1)
    gamma: float
    a: float
    g: float = 0.0
    xi_left: Optional[complex] = None  # None selects the standard superpotential
    xi_mid: Optional[complex] = None
    xi_right: Optional[complex] = None
    xi_mid_reduced: Optional[complex] = None
    xi_right_reduced: Optional[complex] = None
    originals: List[EigenSolution]
    superpotential: Superpotential
    partner: PartnerPotential
    partner_solution: EigenSolution
    ideal_energy: complex
    w_samples: PotentialSamples
    v2_samples: PotentialSamples
    partner_wavefunction: Wavefunction
    factorization_residual: float
    v2_asymmetry: float
    pole_markers: List[float] = []

    @property
    def partner_energy(self) -> complex:
        return self.partner_solution.energy

    @property
    def deviation(self) -> float:
        return abs(self.partner_energy - self.ideal_energy)

    class Config:
        frozen = True
        arbitrary_types_allowed = True


class NonlinearRow(BaseModel):
    """Partner energy against the ideal value for one (g, gamma) point."""

    g: float
    gamma: float
    E0_2: complex = complex("nan+nanj")
    E_id: complex = complex("nan+nanj")
    deviation: float = float("nan")
    error: Optional[str] = None

    class Config:
        frozen = True


class NonlinearTable(BaseModel):
    a: float
    rows: List[NonlinearRow] = []

    class Config:
        frozen = True


class EPReport(BaseModel):
    """Two independent estimates of the exceptional point and its survivor."""

    a: float
    gamma_crit_oracle: float
    kappa_ep: complex
    gamma_crit_shooting: float
    survivor: EigenSolution
    survivor_wavefunction: Wavefunction
    survivor_asymmetry: float

    @property
    def difference(self) -> float:
        return abs(self.gamma_crit_oracle - self.gamma_crit_shooting)

    @property
    def survivor_energy(self) -> complex:
        return self.survivor.energy

    class Config:
        frozen = True
        arbitrary_types_allowed = True
