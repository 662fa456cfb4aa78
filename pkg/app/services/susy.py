"""Superpotentials, partner potentials and the SUSY intertwining map."""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

from app.config import get_settings
from app.errors import NodalStateError, PoleError, SuperpotentialError
from app.models.reports import Wavefunction
from app.models.solution import EigenSolution, ShootingUnknowns
from app.models.superpotential import SampledPiece, Superpotential, TanhPiece
from app.models.trap import (
    PartnerPotential,
    PotentialField,
    SampledRegion,
    SampledSmooth,
    SuperpotentialSmooth,
    TrapSpec,
)
from app.services.oracle import char_fn
from app.services.potentials import field_values, negated_trap

logger = logging.getLogger(__name__)

BRANCH_TOLERANCE = 1e-8
POLE_TOLERANCE = 1e-9


def reduce_xi(xi: Optional[complex], kappa: complex) -> Optional[complex]:
    """Representative of xi (mod i*pi/kappa) with 0 <= Im(kappa*xi) < pi."""
    if xi is None:
        return None
    shift = -math.floor((kappa * xi).imag / math.pi)
    return xi + 1j * math.pi * shift / kappa


def tanh_poles(kappa: complex, xi: complex, x_lo: float, x_hi: float) -> List[float]:
    """Real zeros of cosh(kappa*(x - xi)) inside [x_lo, x_hi]."""
    if kappa.real == 0:
        return []
    # at most one pole of the tanh can be real
    per_k = math.pi * kappa.real / abs(kappa) ** 2
    k = round(-xi.imag / per_k - 0.5)
    poles = []
    for candidate in (k - 1, k, k + 1):
        x = xi + 1j * math.pi * (candidate + 0.5) / kappa
        if abs(x.imag) < POLE_TOLERANCE and x_lo <= x.real <= x_hi:
            poles.append(float(x.real))
    return poles


def _tanh_piece(
    x_lo: float, x_hi: float, kappa: complex, xi: Optional[complex] = None, branch: str = "tanh"
) -> TanhPiece:
    poles = tanh_poles(kappa, xi, x_lo, x_hi) if branch == "tanh" else []
    return TanhPiece(x_lo=x_lo, x_hi=x_hi, kappa=kappa, xi=xi, branch=branch, poles=poles)


def _matched_piece(w: complex, kappa: complex, anchor: float, x_lo: float, x_hi: float) -> TanhPiece:
    """Tanh piece taking the value w at x=anchor."""
    ratio = w / kappa
    if abs(ratio - 1) < BRANCH_TOLERANCE:
        return _tanh_piece(x_lo, x_hi, kappa, branch="plus")
    if abs(ratio + 1) < BRANCH_TOLERANCE:
        return _tanh_piece(x_lo, x_hi, kappa, branch="minus")
    xi = anchor + complex(np.arctanh(ratio)) / kappa
    return _tanh_piece(x_lo, x_hi, kappa, xi)


def _assemble(pieces: List[TanhPiece], a: float, kappa: complex) -> Superpotential:
    markers = sorted(p for piece in pieces for p in piece.poles)
    if markers:
        logger.warning("superpotential has poles at %s", markers)
    return Superpotential(
        pieces=pieces, delta_positions=[-a / 2, a / 2], source_kappa=kappa, pole_markers=markers
    )


def superpotential_standard(
    kappa: complex, gamma: float, a: float, residual_threshold: float = 1e-6
) -> Superpotential:
    """W = -kappa | -kappa*(1+q)/(1-q) | +kappa with q = (1 + 2kappa/nu) exp(-kappa(2x - a))."""
    kappa = complex(kappa)
    residual = abs(char_fn(kappa, gamma, a))
    if residual > residual_threshold:
        raise SuperpotentialError(f"kappa={kappa} is not an eigenvalue (|char_fn|={residual:.3g})")
    nu = complex(-1.0, gamma)
    xi_mid = (complex(np.log(-(1 + 2 * kappa / nu))) + kappa * a) / (2 * kappa)
    pieces = [
        _tanh_piece(-math.inf, -a / 2, kappa, branch="minus"),
        _tanh_piece(-a / 2, a / 2, kappa, xi_mid),
        _tanh_piece(a / 2, math.inf, kappa, branch="plus"),
    ]
    return _assemble(pieces, a, kappa)


def superpotential_family(
    kappa: complex, gamma: float, a: float, xi_left: Optional[complex]
) -> Superpotential:
    """One-parameter family fixed by the left integration constant.

    xi_left=None is the xi -> -inf limit (W = -kappa on the left). The
    middle and right constants follow from the jumps -nu* at -a/2 and -nu at
    +a/2. Raises PoleError if any piece has a pole on its region.
    """
    kappa = complex(kappa)
    nu = complex(-1.0, gamma)
    if xi_left is None:
        left = _tanh_piece(-math.inf, -a / 2, kappa, branch="minus")
    else:
        left = _tanh_piece(-math.inf, -a / 2, kappa, complex(xi_left))
    w_left = complex(left.values(np.array([-a / 2]))[0])
    middle = _matched_piece(w_left - nu.conjugate(), kappa, -a / 2, -a / 2, a / 2)
    w_mid = complex(middle.values(np.array([a / 2]))[0])
    right = _matched_piece(w_mid - nu, kappa, a / 2, a / 2, math.inf)

    pieces = [left, middle, right]
    markers = sorted(p for piece in pieces for p in piece.poles)
    if markers:
        raise PoleError(f"superpotential with xi_left={xi_left} has poles at {markers}", markers)
    return _assemble(pieces, a, kappa)


def fourth_order_gradient(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """dy/dx on a uniform grid: centred 5-point stencil, one-sided at the ends."""
    if len(x) < 5:
        raise SuperpotentialError("need at least five samples per region")
    h = (x[-1] - x[0]) / (len(x) - 1)
    y = np.asarray(y)
    d = np.empty_like(y)
    d[2:-2] = (-y[4:] + 8 * y[3:-1] - 8 * y[1:-3] + y[:-4]) / (12 * h)
    d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * h)
    d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * h)
    d[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12 * h)
    d[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12 * h)
    return d


def superpotential_from_state(
    solution: EigenSolution, node_threshold: Optional[float] = None
) -> Superpotential:
    """Sampled W = -phi'/phi of a nodeless state.

    W' comes from the Schroedinger equation, W' = W^2 - (V1 - E), and the
    shifted V1 (including g|phi|^2) is kept as the pieces' background.
    """
    threshold = get_settings().node_threshold if node_threshold is None else node_threshold
    field = solution.field
    positions = field.trap.delta_positions
    pieces = []
    for index, (x, phi, dphi) in enumerate(solution.region_samples()):
        smallest = int(np.argmin(np.abs(phi)))
        if abs(phi[smallest]) < threshold:
            raise NodalStateError(float(x[smallest]))
        region = np.full(x.shape, index)
        background = (
            field_values(field, x, region, np.abs(phi) ** 2)
            - field.asymptote
            + solution.kappa**2
        )
        w = -dphi / phi
        pieces.append(SampledPiece(x=x, w=w, dw=w * w - background, background=background))
    return Superpotential(pieces=pieces, delta_positions=positions, source_kappa=solution.kappa)


def background_field(superpotential: Superpotential) -> SampledSmooth:
    """Shifted V1 samples carried by a state-derived superpotential."""
    regions = []
    for piece in superpotential.pieces:
        if not isinstance(piece, SampledPiece) or piece.background is None:
            raise SuperpotentialError("superpotential carries no V1 samples")
        regions.append(SampledRegion(x=piece.x, values=piece.background))
    return SampledSmooth(regions=regions)


def _rk4_step(f, y: complex, v_lo: complex, v_mid: complex, v_hi: complex, h: float) -> complex:
    k1 = f(y, v_lo)
    k2 = f(y + h / 2 * k1, v_mid)
    k3 = f(y + h / 2 * k2, v_mid)
    k4 = f(y + h * k3, v_hi)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _closest_approach(u0: complex, u1: complex) -> Tuple[float, float]:
    """(t, |u|) at the point of the segment u0 -> u1 nearest the origin."""
    du = u1 - u0
    if du == 0:
        return 0.0, abs(u0)
    t = min(1.0, max(0.0, -(u0.conjugate() * du).real / abs(du) ** 2))
    return t, abs(u0 + t * du)


def riccati_superpotential(
    v1: SampledSmooth,
    start_w: complex,
    trap: TrapSpec,
    source_kappa: complex,
    allow_poles: bool = False,
    pole_threshold: Optional[float] = None,
) -> Superpotential:
    """Integrate W' = W^2 - V1 left to right with W -> W - s at each delta.

    Where |W| grows past 10 the reciprocal u = 1/W (u' = -1 + V1 u^2) is
    integrated instead, until |W| drops below 5 again, so poles are crossed
    rather than overflowed. Every step whose u passes within
    1/pole_threshold of zero is recorded as a pole marker.
    """
    threshold = get_settings().pole_threshold if pole_threshold is None else pole_threshold
    switch_on, switch_back = 10.0, 5.0

    def forward(w: complex, v: complex) -> complex:
        return w * w - v

    def reciprocal(u: complex, v: complex) -> complex:
        return -1.0 + v * u * u

    pieces, markers = [], []
    w = complex(start_w)
    for index, block in enumerate(v1.regions):
        x, v = block.x, np.asarray(block.values, dtype=complex)
        if index > 0:
            w = w - trap.deltas[index - 1].strength
        v_mid = CubicSpline(x, v)((x[:-1] + x[1:]) / 2).tolist()
        v_list = v.tolist()
        values = np.empty(len(x), dtype=complex)
        values[0] = w
        inverted = abs(w) > switch_on
        y = 1 / w if inverted else w
        for k in range(len(x) - 1):
            h = x[k + 1] - x[k]
            if inverted:
                u_new = _rk4_step(reciprocal, y, v_list[k], v_mid[k], v_list[k + 1], h)
                t, closest = _closest_approach(y, u_new)
                if closest < 1 / threshold:
                    markers.append(float(x[k] + t * h))
                y = u_new
                if abs(y) > 1 / switch_back:
                    inverted, y = False, 1 / y
            else:
                y = _rk4_step(forward, y, v_list[k], v_mid[k], v_list[k + 1], h)
                if abs(y) > switch_on:
                    inverted, y = True, 1 / y
            if inverted:
                values[k + 1] = 1 / y if y != 0 else complex(math.inf, 0.0)
            else:
                values[k + 1] = y
        w = complex(values[-1])
        with np.errstate(over="ignore", invalid="ignore"):
            pieces.append(SampledPiece(x=x, w=values, dw=values * values - v, background=v))

    if markers:
        logger.warning("riccati superpotential crossed poles at %s", markers)
        if not allow_poles:
            raise PoleError(f"superpotential has poles at {markers}", markers)
    return Superpotential(
        pieces=pieces,
        delta_positions=trap.delta_positions,
        source_kappa=source_kappa,
        pole_markers=markers,
    )


def partner_potential(superpotential: Superpotential, trap: TrapSpec) -> PartnerPotential:
    """V2 = W^2 + W' with every delta strength negated and asymptote kappa^2."""
    if superpotential.is_sampled:
        regions = []
        for piece in superpotential.pieces:
            if not isinstance(piece, SampledPiece):
                raise SuperpotentialError("cannot mix sampled and analytic pieces")
            regions.append(SampledRegion(x=piece.x, values=piece.w**2 + piece.dw))
        smooth = SampledSmooth(regions=regions)
    else:
        smooth = SuperpotentialSmooth(superpotential=superpotential)
    markers = list(superpotential.pole_markers)
    field = PotentialField(
        trap=negated_trap(trap),
        smooth=smooth,
        kind="partner",
        asymptote=superpotential.source_kappa**2,
        pole_markers=markers,
    )
    return PartnerPotential(
        field=field,
        superpotential=superpotential,
        source_kappa=superpotential.source_kappa,
        pole_markers=markers,
    )


def _superpotential_on(
    superpotential: Superpotential, index: int, x: np.ndarray
) -> np.ndarray:
    piece = superpotential.pieces[index]
    if isinstance(piece, SampledPiece):
        if len(piece.x) != len(x) or not np.allclose(piece.x, x, atol=1e-9):
            raise SuperpotentialError("superpotential and wavefunction grids differ")
        return piece.w
    return piece.values(x)


def apply_annihilator(superpotential: Superpotential, solution: EigenSolution) -> Wavefunction:
    """B- phi = (W + d/dx) phi on the solution grid (continuous across deltas)."""
    blocks = solution.region_samples()
    if len(blocks) != len(superpotential.pieces):
        raise SuperpotentialError(
            f"{len(superpotential.pieces)} superpotential pieces for {len(blocks)} regions"
        )
    xs, values = [], []
    for index, (x, phi, dphi) in enumerate(blocks):
        result = _superpotential_on(superpotential, index, x) * phi + dphi
        start = 0 if index == 0 else 1
        xs.append(x[start:])
        values.append(result[start:])
    return Wavefunction(x=np.concatenate(xs), phi=np.concatenate(values))


def verify_factorization(
    superpotential: Superpotential, trap: TrapSpec, h: Optional[float] = None
) -> float:
    """max |W^2 - W' - V1| off the deltas, and max |dW - (-s)| at them.

    W' is taken by fourth-order differences so the check is independent of
    how the superpotential was built. V1 is the exact-SUSY shifted smooth
    part: kappa^2 for analytic W, the carried samples for sampled W.
    """
    h = h or get_settings().step
    extent = trap.separation / 2 + 2.0
    residual = 0.0
    edges = [-extent] + trap.delta_positions + [extent]
    for index, piece in enumerate(superpotential.pieces):
        if isinstance(piece, SampledPiece):
            x, w = piece.x, piece.w
            v1 = piece.background if piece.background is not None else superpotential.source_kappa**2
        else:
            lo, hi = edges[index], edges[index + 1]
            count = max(int(math.ceil((hi - lo) / h)), 8)
            x = np.linspace(lo, hi, count + 1)
            w = piece.values(x)
            v1 = superpotential.source_kappa**2
        dw = fourth_order_gradient(x, w)
        with np.errstate(over="ignore", invalid="ignore"):
            mismatch = np.abs(w * w - dw - v1)
        mismatch = mismatch[np.isfinite(mismatch)]
        if mismatch.size:
            residual = max(residual, float(mismatch.max()))

    for (position, jump), delta in zip(superpotential.jumps, trap.deltas):
        residual = max(residual, abs(jump + delta.strength))
    return residual


def _left_integral_of_square(solution: EigenSolution) -> complex:
    """c-product integral of phi^2 from -inf to 0 (analytic exponential tail)."""
    left = solution.left
    x, phi = left.grid[::-1], left.phi[::-1]
    cuts = sorted(int(np.argmin(np.abs(x - e.position))) for e in left.jump_events)
    bounds = [0] + cuts + [len(x) - 1]
    total = complex(phi[0] ** 2 / (2 * solution.kappa))
    for lo, hi in zip(bounds, bounds[1:]):
        if hi > lo:
            total += complex(simpson(phi[lo : hi + 1] ** 2, x=x[lo : hi + 1]))
    return total


def partner_seed(
    partner: PartnerPotential,
    removed: EigenSolution,
    other: EigenSolution,
    coalescence: float = 1e-3,
) -> ShootingUnknowns:
    """Seed for the partner ground state.

    Away from the exceptional point the intertwined state B- phi_other is
    used. When the two states have (nearly) coalesced it vanishes, and the
    zero-energy partner solution phi0^-1 * integral(phi0^2) is used instead.
    """
    w = partner.superpotential
    origin = np.array([0.0])
    w0 = complex(w.values(origin)[0])
    dw0 = complex(w.derivative(origin)[0])

    if abs(removed.kappa - other.kappa) < coalescence:
        phi0 = removed.unknowns.phi0
        psi = _left_integral_of_square(removed) / phi0
        dpsi = phi0 + w0 * psi
        kappa = removed.kappa
    else:
        phi, dphi = other.unknowns.phi0, other.unknowns.dphi0
        field = other.field
        region = field.trap.region_of(0.0)
        q = (
            field_values(field, origin, region, abs(phi) ** 2)[0]
            - field.asymptote
            + other.kappa**2
        )
        psi = w0 * phi + dphi
        dpsi = dw0 * phi + w0 * dphi + q * phi
        kappa = other.kappa

    gauge = "slope" if abs(psi) < 1e-8 * max(1.0, abs(dpsi)) else "value"
    return ShootingUnknowns.from_state(psi, dpsi, kappa, gauge)
