"""Trap construction and potential evaluation."""

import logging
import math
from typing import Optional, Union

import numpy as np
from scipy.interpolate import CubicSpline

from app.models.trap import (
    ConstantSmooth,
    DeltaWell,
    PotentialField,
    SampledSmooth,
    SmoothPart,
    SuperpotentialSmooth,
    TrapSpec,
)

logger = logging.getLogger(__name__)

# Returned by evaluate_smooth at a declared pole marker.
POLE_SIGNAL = complex(math.inf, 0.0)


def make_pt_trap(gamma: float, a: float, g: float = 0.0, shift: complex = 0j) -> TrapSpec:
    """Two delta wells at -a/2 and +a/2 with strengths nu* and nu, nu = -1 + i*gamma."""
    if not a > 0:
        raise ValueError(f"separation must be positive, got {a}")
    if g < 0:
        raise ValueError(f"nonlinearity must be non-negative, got {g}")
    if gamma < 0:
        raise ValueError(f"gamma must be non-negative, got {gamma}")
    nu = complex(-1.0, gamma)
    return TrapSpec(
        separation=a,
        gamma=gamma,
        nonlinearity=g,
        energy_shift=complex(shift),
        deltas=[
            DeltaWell(position=-a / 2, strength=nu.conjugate()),
            DeltaWell(position=a / 2, strength=nu),
        ],
    )


def original_field(trap: TrapSpec) -> PotentialField:
    """Pure-delta field: zero smooth part, energies measured from the shift."""
    return PotentialField(
        trap=trap,
        smooth=ConstantSmooth(values=[0j] * (len(trap.deltas) + 1)),
        kind="original",
        asymptote=trap.energy_shift,
    )


def pt_field(gamma: float, a: float, g: float = 0.0, shift: complex = 0j) -> PotentialField:
    return original_field(make_pt_trap(gamma, a, g, shift))


def regions_for(trap: TrapSpec, x: np.ndarray) -> np.ndarray:
    """Region index for points strictly between deltas."""
    return np.searchsorted(np.asarray(trap.delta_positions, dtype=float), x, side="left")


def display_regions(trap: TrapSpec, x: np.ndarray) -> np.ndarray:
    """Region index for display grids: a point on a delta takes its outer side."""
    positions = np.asarray(trap.delta_positions, dtype=float)
    x = np.asarray(x, dtype=float)
    inner_left = np.searchsorted(positions, x, side="left")
    inner_right = np.searchsorted(positions, x, side="right")
    return np.where(x < 0, inner_left, inner_right)


def smooth_values(
    smooth: SmoothPart, x: np.ndarray, region: Union[int, np.ndarray]
) -> np.ndarray:
    """Vectorised smooth part at x; `region` selects one-sided limits."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    region = np.broadcast_to(np.asarray(region), x.shape)

    if isinstance(smooth, ConstantSmooth):
        return np.asarray(smooth.values, dtype=complex)[region]

    if isinstance(smooth, SuperpotentialSmooth):
        w = smooth.superpotential.values(x, region)
        dw = smooth.superpotential.derivative(x, region)
        with np.errstate(over="ignore", invalid="ignore"):
            return w * w + dw

    if isinstance(smooth, SampledSmooth):
        out = np.empty(x.shape, dtype=complex)
        for index, block in enumerate(smooth.regions):
            mask = region == index
            if mask.any():
                out[mask] = CubicSpline(block.x, block.values)(x[mask])
        return out

    raise TypeError(f"unknown smooth part {type(smooth).__name__}")


def field_values(
    field: PotentialField,
    x: np.ndarray,
    region: Optional[Union[int, np.ndarray]] = None,
    density: Union[float, np.ndarray] = 0.0,
) -> np.ndarray:
    """Smooth part plus g*density plus the trap's energy shift, vectorised."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if region is None:
        region = regions_for(field.trap, x)
    values = smooth_values(field.smooth, x, region)
    return values + field.trap.nonlinearity * np.asarray(density) + field.trap.energy_shift


def is_pole(field: PotentialField, x: float, tolerance: float = 1e-9) -> bool:
    return any(abs(x - marker) <= tolerance for marker in field.pole_markers)


def evaluate_smooth(field: PotentialField, x: float, density: float = 0.0) -> complex:
    """Smooth potential at an off-delta point x.

    Deltas are never evaluated pointwise; x on a delta raises ValueError.
    At a pole marker (or wherever the value is not finite) POLE_SIGNAL is
    returned.
    """
    region = field.trap.region_of(x)
    if is_pole(field, x):
        return POLE_SIGNAL
    value = complex(field_values(field, np.array([x]), region, density)[0])
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        return POLE_SIGNAL
    return value


def sample_potential(field: PotentialField, x: np.ndarray) -> np.ndarray:
    """Smooth part on a display grid; delta nodes report their outer-side limit."""
    x = np.asarray(x, dtype=float)
    return field_values(field, x, display_regions(field.trap, x))


def pt_asymmetry(x: np.ndarray, values: np.ndarray) -> float:
    """max |f(-x) - conj f(x)| on a grid symmetric about the origin."""
    x = np.asarray(x, dtype=float)
    if not np.allclose(x, -x[::-1], atol=1e-9):
        raise ValueError("pt_asymmetry needs a grid symmetric about x=0")
    values = np.asarray(values, dtype=complex)
    return float(np.max(np.abs(values[::-1] - np.conj(values))))


def negated_trap(trap: TrapSpec) -> TrapSpec:
    """Trap with every delta strength negated, no interaction and no shift."""
    return TrapSpec(
        separation=trap.separation,
        gamma=trap.gamma,
        nonlinearity=0.0,
        energy_shift=0j,
        deltas=[DeltaWell(position=d.position, strength=-d.strength) for d in trap.deltas],
    )


def symmetric_grid(extent: float, h: float) -> np.ndarray:
    count = int(math.ceil(extent / h - 1e-9))
    return h * np.arange(-count, count + 1)
