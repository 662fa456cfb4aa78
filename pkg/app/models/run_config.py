"""Validated command-line run configuration."""

import math
from pathlib import Path
from pydantic import BaseModel, Field, field_validator
from typing import List, Literal, Optional

Command = Literal["solve", "oracle", "ep", "partner", "scan", "nonlinear", "calibrate"]


class RunConfig(BaseModel):
    """One CLI invocation after defaults, config file and flags are merged."""

    command: Command
    a: float = Field(2.2, gt=0)
    gamma: float = Field(0.0, ge=0)
    gamma_from: float = Field(0.0, ge=0)
    gamma_to: float = Field(0.6, ge=0)
    gamma_step: float = Field(0.005, gt=0)
    g: List[float] = [0.0]
    state: int = Field(0, ge=0, le=1)
    xi_re: Optional[float] = None
    xi_im: Optional[float] = None
    target: float = Field(0.3920, gt=0)
    step: float = Field(1e-3, gt=0)
    tol: float = Field(1e-10, gt=0)
    out: Optional[Path] = None
    format: Literal["csv", "json"] = "csv"
    emit_plot: bool = False
    jobs: int = Field(1, ge=1)
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "WARNING"

    @field_validator("a", "gamma", "gamma_from", "gamma_to", "gamma_step", "target", "step", "tol")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value

    @field_validator("g")
    @classmethod
    def _non_negative_g(cls, values: List[float]) -> List[float]:
        if not values:
            raise ValueError("at least one g value is required")
        for value in values:
            if not math.isfinite(value) or value < 0:
                raise ValueError("g must be finite and non-negative")
        return values

    @property
    def xi_left(self) -> Optional[complex]:
        """Left integration constant, or None for the standard superpotential."""
        if self.xi_re is None and self.xi_im is None:
            return None
        return complex(self.xi_re or 0.0, self.xi_im or 0.0)

    @property
    def gamma_grid(self) -> List[float]:
        """Inclusive gamma range; empty when gamma_to < gamma_from."""
        if self.gamma_to < self.gamma_from:
            return []
        count = int(math.floor((self.gamma_to - self.gamma_from) / self.gamma_step + 1e-9))
        return [round(self.gamma_from + i * self.gamma_step, 12) for i in range(count + 1)]

    class Config:
        frozen = True
