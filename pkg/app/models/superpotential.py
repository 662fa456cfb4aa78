"""Superpotential models: analytic tanh pieces and sampled pieces."""

from pydantic import BaseModel, Field
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from scipy.interpolate import CubicSpline


def stable_tanh(z: np.ndarray) -> np.ndarray:
    """Complex tanh that saturates instead of overflowing for large |Re z|."""
    z = np.asarray(z, dtype=complex)
    positive = z.real >= 0
    t = np.exp(np.where(positive, -2.0 * z, 2.0 * z))
    return np.where(positive, (1.0 - t) / (1.0 + t), (t - 1.0) / (t + 1.0))


class TanhPiece(BaseModel):
    """W(x) = -kappa*tanh(kappa*(x - xi)) on [x_lo, x_hi].

    The branches "plus" and "minus" are the xi -> +inf / -inf limits,
    W = +kappa and W = -kappa.
    """

    kind: Literal["tanh"] = "tanh"
    x_lo: float
    x_hi: float
    kappa: complex
    xi: Optional[complex] = None
    branch: Literal["tanh", "plus", "minus"] = "tanh"
    poles: List[float] = []

    def values(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.branch == "plus":
            return np.full(x.shape, self.kappa, dtype=complex)
        if self.branch == "minus":
            return np.full(x.shape, -self.kappa, dtype=complex)
        return -self.kappa * stable_tanh(self.kappa * (x - self.xi))

    def derivative(self, x) -> np.ndarray:
        w = self.values(x)
        return w * w - self.kappa**2

    class Config:
        frozen = True


class SampledPiece(BaseModel):
    """Samples of W (and W') on one region; endpoints are one-sided limits."""

    kind: Literal["sampled"] = "sampled"
    x: np.ndarray
    w: np.ndarray
    dw: np.ndarray
    background: Optional[np.ndarray] = None  # smooth V1 the samples factorize

    @property
    def x_lo(self) -> float:
        return float(self.x[0])

    @property
    def x_hi(self) -> float:
        return float(self.x[-1])

    def values(self, x) -> np.ndarray:
        return CubicSpline(self.x, self.w)(np.asarray(x, dtype=float))

    def derivative(self, x) -> np.ndarray:
        return CubicSpline(self.x, self.dw)(np.asarray(x, dtype=float))

    class Config:
        frozen = True
        arbitrary_types_allowed = True


Piece = Union[TanhPiece, SampledPiece]


class Superpotential(BaseModel):
    """Piecewise superpotential with one piece per region between deltas."""

    pieces: List[Annotated[Piece, Field(discriminator="kind")]]
    delta_positions: List[float]
    source_kappa: complex
    pole_markers: List[float] = []

    @property
    def is_sampled(self) -> bool:
        return any(isinstance(p, SampledPiece) for p in self.pieces)

    @property
    def xis(self) -> List[Optional[complex]]:
        """Integration constant per tanh piece (None for constant branches)."""
        return [getattr(p, "xi", None) for p in self.pieces]

    def region_of(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.searchsorted(np.asarray(self.delta_positions), x, side="left")

    def _evaluate(self, x, region, attr: str) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        region = self.region_of(x) if region is None else np.broadcast_to(region, x.shape)
        out = np.empty(x.shape, dtype=complex)
        for index, piece in enumerate(self.pieces):
            mask = region == index
            if mask.any():
                out[mask] = getattr(piece, attr)(x[mask])
        return out

    def values(self, x, region=None) -> np.ndarray:
        """W at x; `region` picks the one-sided limit at delta positions."""
        return self._evaluate(x, region, "values")

    def derivative(self, x, region=None) -> np.ndarray:
        return self._evaluate(x, region, "derivative")

    @property
    def jumps(self) -> List[Tuple[float, complex]]:
        """(position, W(p+) - W(p-)) for every delta."""
        result = []
        for index, position in enumerate(self.delta_positions):
            before = self.pieces[index].values([position])[0]
            after = self.pieces[index + 1].values([position])[0]
            result.append((position, complex(after - before)))
        return result

    class Config:
        frozen = True
        arbitrary_types_allowed = True
