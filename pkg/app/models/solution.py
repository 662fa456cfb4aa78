"""Propagation and eigen-solution models."""

from pydantic import BaseModel, Field
from typing import List, Literal, Tuple

import numpy as np

from app.models.trap import PotentialField


class StatePair(BaseModel):
    """Wavefunction value and derivative at one point."""

    phi: complex
    dphi: complex

    class Config:
        frozen = True


class JumpEvent(BaseModel):
    """A delta crossed during propagation, with both one-sided derivatives."""

    position: float
    strength: complex
    phi: complex
    dphi_minus: complex  # derivative just left of the delta
    dphi_plus: complex  # derivative just right of the delta

    class Config:
        frozen = True


class Trajectory(BaseModel):
    """Samples of one shot, stored in propagation order.

    At a delta node `dphi` holds the derivative on the far side of the
    delta; the near-side value is kept in the matching jump event.
    """

    grid: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    jump_events: List[JumpEvent] = []

    @property
    def step(self) -> float:
        return float(abs(self.grid[1] - self.grid[0])) if len(self.grid) > 1 else 0.0

    @property
    def direction(self) -> int:
        return 1 if self.grid[-1] >= self.grid[0] else -1

    @property
    def end(self) -> StatePair:
        return StatePair(phi=complex(self.phi[-1]), dphi=complex(self.dphi[-1]))

    @property
    def states(self) -> List[StatePair]:
        return [StatePair(phi=complex(p), dphi=complex(d)) for p, d in zip(self.phi, self.dphi)]

    def scaled(self, factor: complex) -> "Trajectory":
        """Same trajectory multiplied by a constant (linear fields only)."""
        events = [
            JumpEvent(
                position=e.position,
                strength=e.strength,
                phi=e.phi * factor,
                dphi_minus=e.dphi_minus * factor,
                dphi_plus=e.dphi_plus * factor,
            )
            for e in self.jump_events
        ]
        return Trajectory(
            grid=self.grid,
            phi=self.phi * factor,
            dphi=self.dphi * factor,
            jump_events=events,
        )

    class Config:
        frozen = True
        arbitrary_types_allowed = True


class ShootingUnknowns(BaseModel):
    """Initial data at x=0 plus the complex decay constant.

    With gauge "value" the free reals are (Re phi0, Re dphi0, Im dphi0,
    Re kappa, Im kappa) and Im phi0 stays fixed. Gauge "slope" frees Im phi0
    and fixes Im dphi0 instead, for seeds with phi(0) = 0.
    """

    re_phi0: float
    re_dphi0: float
    im_dphi0: float
    re_kappa: float
    im_kappa: float
    im_phi0: float = 0.0
    gauge: Literal["value", "slope"] = "value"

    @property
    def phi0(self) -> complex:
        return complex(self.re_phi0, self.im_phi0)

    @property
    def dphi0(self) -> complex:
        return complex(self.re_dphi0, self.im_dphi0)

    @property
    def kappa(self) -> complex:
        return complex(self.re_kappa, self.im_kappa)

    @classmethod
    def from_state(
        cls, phi0: complex, dphi0: complex, kappa: complex, gauge: str = "value"
    ) -> "ShootingUnknowns":
        """Build unknowns, rotating the phase so the gauge condition holds."""
        if gauge == "value":
            rotation = abs(phi0) / phi0 if phi0 != 0 else 1.0
        else:
            rotation = abs(dphi0) / dphi0 if dphi0 != 0 else 1.0
        phi0, dphi0 = phi0 * rotation, dphi0 * rotation
        return cls(
            re_phi0=phi0.real,
            im_phi0=0.0 if gauge == "value" else phi0.imag,
            re_dphi0=dphi0.real,
            im_dphi0=dphi0.imag if gauge == "value" else 0.0,
            re_kappa=kappa.real,
            im_kappa=kappa.imag,
            gauge=gauge,
        )

    def to_vector(self) -> np.ndarray:
        second = self.im_dphi0 if self.gauge == "value" else self.im_phi0
        return np.array([self.re_phi0, self.re_dphi0, second, self.re_kappa, self.im_kappa])

    def with_vector(self, u: np.ndarray) -> "ShootingUnknowns":
        values = dict(
            re_phi0=float(u[0]),
            re_dphi0=float(u[1]),
            re_kappa=float(u[3]),
            im_kappa=float(u[4]),
            gauge=self.gauge,
        )
        if self.gauge == "value":
            values.update(im_dphi0=float(u[2]), im_phi0=0.0)
        else:
            values.update(im_phi0=float(u[2]), im_dphi0=0.0)
        return ShootingUnknowns(**values)

    def conjugate(self) -> "ShootingUnknowns":
        """Seed for the complex-conjugate partner state: the PT image conj(phi(-x))."""
        return ShootingUnknowns.from_state(
            self.phi0.conjugate(), -self.dphi0.conjugate(), self.kappa.conjugate(), self.gauge
        )

    class Config:
        frozen = True


class EigenSolution(BaseModel):
    """A converged bound state of a potential field."""

    field: PotentialField
    kappa: complex
    left: Trajectory
    right: Trajectory
    norm: float
    residual_norm: float
    iterations: int = Field(ge=0)
    unknowns: ShootingUnknowns

    @property
    def energy(self) -> complex:
        return self.field.asymptote - self.kappa**2

    @property
    def grid(self) -> np.ndarray:
        return np.concatenate([self.left.grid[::-1], self.right.grid[1:]])

    @property
    def wavefunction(self) -> np.ndarray:
        return np.concatenate([self.left.phi[::-1], self.right.phi[1:]])

    @property
    def derivative(self) -> np.ndarray:
        """phi' on the combined grid, outer-side limits at delta nodes."""
        return np.concatenate([self.left.dphi[::-1], self.right.dphi[1:]])

    @property
    def jump_events(self) -> List[JumpEvent]:
        return sorted(self.left.jump_events + self.right.jump_events, key=lambda e: e.position)

    def region_samples(self) -> List[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """(x, phi, phi') per region between deltas, with one-sided end values."""
        x, phi, dphi = self.grid, self.wavefunction, self.derivative
        events = self.jump_events
        edges = [x[0]] + [e.position for e in events] + [x[-1]]
        blocks = []
        for index in range(len(edges) - 1):
            lo, hi = edges[index], edges[index + 1]
            mask = (x >= lo - 1e-12) & (x <= hi + 1e-12)
            xs, ps, ds = x[mask], phi[mask].copy(), dphi[mask].copy()
            if index > 0:
                ds[0] = events[index - 1].dphi_plus
            if index < len(events):
                ds[-1] = events[index].dphi_minus
            blocks.append((xs, ps, ds))
        return blocks

    class Config:
        frozen = True
        arbitrary_types_allowed = True


class OracleRoots(BaseModel):
    """The two bound-state decay constants of the linear PT double-delta trap."""

    kappa0: complex
    kappa1: complex
    gamma: float
    a: float
    degenerate: bool = False

    @property
    def energies(self) -> Tuple[complex, complex]:
        return -self.kappa0**2, -self.kappa1**2

    @property
    def is_broken(self) -> bool:
        return abs(self.kappa0.imag) > 1e-10 or abs(self.kappa1.imag) > 1e-10

    class Config:
        frozen = True
