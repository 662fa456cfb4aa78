"""Fixed-step propagation with exact delta jumps, quadrature and Newton root search."""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import lu_factor, lu_solve

from app.config import get_settings
from app.errors import (
    ConvergenceError,
    DivergenceError,
    GridAlignmentError,
    PTSusyError,
    SingularJacobianError,
)
from app.models.solution import JumpEvent, StatePair, Trajectory
from app.models.trap import PotentialField
from app.services.potentials import field_values

logger = logging.getLogger(__name__)


def aligned_step(a: float, h: float) -> float:
    """Largest step <= h that puts both +a/2 and -a/2 on grid nodes."""
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    half = a / 2
    return half / math.ceil(half / h - 1e-9)


def _node_index(x: float, origin: float, h: float, what: str) -> int:
    steps = (x - origin) / h
    index = round(steps)
    if abs(steps - index) > 1e-6:
        raise GridAlignmentError(f"{what} at x={x:.12g} is not on the grid of step {h:.6g}")
    return int(index)


def propagate(
    field: PotentialField,
    kappa: complex,
    start: StatePair,
    x_from: float,
    x_to: float,
    h: float,
    overflow_guard: Optional[float] = None,
) -> Trajectory:
    """RK4 for phi'' = (V + g|phi|^2 - V_inf + kappa^2) phi from x_from to x_to.

    Each delta of strength s passed on the way applies the exact jump
    phi' -> phi' + s*phi (phi' -> phi' - s*phi when moving left); a delta
    at x_from is not applied.
    """
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    guard = overflow_guard or get_settings().overflow_guard
    sign = 1.0 if x_to >= x_from else -1.0
    n = abs(_node_index(x_to, x_from, h, "path end"))

    grid = x_from + sign * h * np.arange(n + 1)
    if n:
        grid[-1] = x_to

    jumps = {}
    for delta in field.trap.deltas:
        beyond = (delta.position - x_from) * sign
        if 0 < beyond <= abs(x_to - x_from) + 1e-12:
            index = abs(_node_index(delta.position, x_from, h, "delta"))
            jumps[index] = delta
            grid[index] = delta.position

    phi = np.empty(n + 1, dtype=complex)
    dphi = np.empty(n + 1, dtype=complex)
    p, d = complex(start.phi), complex(start.dphi)
    phi[0], dphi[0] = p, d
    events: List[JumpEvent] = []
    if n == 0:
        return Trajectory(grid=grid, phi=phi, dphi=dphi, jump_events=events)

    lo, hi = grid[:-1], grid[1:]
    mid = lo + sign * h / 2
    region = np.searchsorted(np.asarray(field.trap.delta_positions, dtype=float), mid)
    offset = kappa**2 - field.asymptote
    q_lo = (field_values(field, lo, region) + offset).tolist()
    q_mid = (field_values(field, mid, region) + offset).tolist()
    q_hi = (field_values(field, hi, region) + offset).tolist()
    g = field.trap.nonlinearity
    hs = sign * h
    half = hs / 2

    for k in range(n):
        qa, qm, qb = q_lo[k], q_mid[k], q_hi[k]
        try:
            if g:
                k1p, k1d = d, (qa + g * abs(p) ** 2) * p
                p2, d2 = p + half * k1p, d + half * k1d
                k2p, k2d = d2, (qm + g * abs(p2) ** 2) * p2
                p3, d3 = p + half * k2p, d + half * k2d
                k3p, k3d = d3, (qm + g * abs(p3) ** 2) * p3
                p4, d4 = p + hs * k3p, d + hs * k3d
                k4p, k4d = d4, (qb + g * abs(p4) ** 2) * p4
            else:
                k1p, k1d = d, qa * p
                p2, d2 = p + half * k1p, d + half * k1d
                k2p, k2d = d2, qm * p2
                p3, d3 = p + half * k2p, d + half * k2d
                k3p, k3d = d3, qm * p3
                p4, d4 = p + hs * k3p, d + hs * k3d
                k4p, k4d = d4, qb * p4
            p = p + hs / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
            d = d + hs / 6 * (k1d + 2 * k2d + 2 * k3d + k4d)
        except (OverflowError, FloatingPointError) as exc:
            # g|phi|^2 phi can leave the float range inside a single stage
            raise DivergenceError(float(grid[k + 1]), math.inf) from exc
        magnitude = abs(p)
        if not magnitude <= guard:
            raise DivergenceError(float(grid[k + 1]), magnitude)

        delta = jumps.get(k + 1)
        if delta is not None:
            s = delta.strength
            if sign > 0:
                minus, d = d, d + s * p
                plus = d
            else:
                plus, d = d, d - s * p
                minus = d
            events.append(
                JumpEvent(position=delta.position, strength=s, phi=p, dphi_minus=minus, dphi_plus=plus)
            )
            logger.debug("jump at x=%.6g: strength=%s", delta.position, s)

        phi[k + 1], dphi[k + 1] = p, d

    return Trajectory(grid=grid, phi=phi, dphi=dphi, jump_events=events)


def _ascending(trajectory: Trajectory) -> Tuple[np.ndarray, np.ndarray]:
    x, density = trajectory.grid, np.abs(trajectory.phi) ** 2
    if trajectory.direction < 0:
        x, density = x[::-1], density[::-1]
    return x, density


def interior_norm(left: Trajectory, right: Trajectory) -> float:
    """Composite Simpson of |phi|^2 over both trajectories, split at delta nodes."""
    if abs(left.grid[0] - right.grid[0]) > 1e-12:
        raise ValueError("trajectories must start from the same origin")
    total = 0.0
    for trajectory in (left, right):
        x, density = _ascending(trajectory)
        cuts = sorted(
            int(np.argmin(np.abs(x - event.position))) for event in trajectory.jump_events
        )
        bounds = [0] + cuts + [len(x) - 1]
        for lo, hi in zip(bounds, bounds[1:]):
            if hi > lo:
                total += float(simpson(density[lo : hi + 1], x=x[lo : hi + 1]))
    return total


def exponential_tail(phi_end: complex, decay_rate: complex) -> float:
    """Integral of |phi_end * exp(-lambda*t)|^2 over t in [0, inf)."""
    if not decay_rate.real > 0:
        raise ValueError(f"decay rate must have a positive real part, got {decay_rate}")
    return abs(phi_end) ** 2 / (2 * decay_rate.real)


def norm_with_tails(
    traj_left: Trajectory,
    traj_right: Trajectory,
    decay_rate: complex,
    left_decay_rate: Optional[complex] = None,
) -> float:
    """Sampled norm plus analytic exponential tails beyond both ends."""
    decay_rate = complex(decay_rate)
    left_rate = decay_rate if left_decay_rate is None else complex(left_decay_rate)
    return (
        interior_norm(traj_left, traj_right)
        + exponential_tail(complex(traj_left.phi[-1]), left_rate)
        + exponential_tail(complex(traj_right.phi[-1]), decay_rate)
    )


@dataclass
class NewtonResult:
    """Converged root and solver diagnostics."""

    root: np.ndarray
    residual_norm: float
    iterations: int


def _safe_residual(residual_fn: Callable[[np.ndarray], np.ndarray], u: np.ndarray) -> np.ndarray:
    try:
        values = np.asarray(residual_fn(u), dtype=float)
    except PTSusyError as exc:
        logger.debug("trial point rejected: %s", exc)
        return np.full(len(u), np.inf)
    if not np.all(np.isfinite(values)):
        return np.full(len(u), np.inf)
    return values


def finite_difference_jacobian(
    residual_fn: Callable[[np.ndarray], np.ndarray],
    u: np.ndarray,
    f0: np.ndarray,
    relative_step: float,
    floor: float,
) -> np.ndarray:
    """Forward differences; a column whose trial point fails is retried backwards."""
    jacobian = np.empty((len(f0), len(u)))
    for j in range(len(u)):
        du = max(relative_step * abs(u[j]), floor)
        trial = u.copy()
        trial[j] += du
        column = _safe_residual(residual_fn, trial)
        if not np.all(np.isfinite(column)):
            trial[j] = u[j] - du
            column = _safe_residual(residual_fn, trial)
            du = -du
            if not np.all(np.isfinite(column)):
                raise ConvergenceError(f"residual undefined on both sides of u[{j}]={u[j]:.6g}")
        jacobian[:, j] = (column - f0) / du
    return jacobian


def newton_root(
    residual_fn: Callable[[np.ndarray], np.ndarray],
    u0,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    relative_step: Optional[float] = None,
    floor: Optional[float] = None,
) -> NewtonResult:
    """Damped Newton iteration with a finite-difference Jacobian.

    Steps are halved until the max-norm of the residual decreases. Raises
    SingularJacobianError when the smallest LU pivot is negligible against
    the largest and ConvergenceError when the budget runs out.
    """
    settings = get_settings()
    tol = settings.tolerance if tol is None else tol
    max_iter = settings.max_iterations if max_iter is None else max_iter
    relative_step = settings.fd_relative_step if relative_step is None else relative_step
    floor = settings.fd_floor if floor is None else floor

    u = np.array(u0, dtype=float)
    f = np.asarray(residual_fn(u), dtype=float)
    norm = float(np.max(np.abs(f)))

    for iteration in range(max_iter + 1):
        if norm < tol:
            logger.debug("newton converged in %d iterations (|F|=%.3e)", iteration, norm)
            return NewtonResult(root=u, residual_norm=norm, iterations=iteration)
        if iteration == max_iter:
            break

        jacobian = finite_difference_jacobian(residual_fn, u, f, relative_step, floor)
        lu, piv = lu_factor(jacobian, check_finite=False)
        pivots = np.abs(np.diag(lu))
        if pivots.max() == 0 or pivots.min() <= 1e-14 * pivots.max():
            raise SingularJacobianError(f"singular Jacobian at iteration {iteration}")
        step = lu_solve((lu, piv), -f)

        damping = 1.0
        for _ in range(40):
            trial = u + damping * step
            f_trial = _safe_residual(residual_fn, trial)
            trial_norm = float(np.max(np.abs(f_trial)))
            if trial_norm < norm:
                break
            damping /= 2
        else:
            raise ConvergenceError(
                f"line search failed at iteration {iteration} (|F|={norm:.3e})"
            )

        if damping < 1.0:
            logger.debug("newton step damped by %g", damping)
        u, f, norm = trial, f_trial, trial_norm
        logger.debug("newton iteration %d: |F|=%.3e", iteration + 1, norm)

    raise ConvergenceError(f"no convergence after {max_iter} iterations (|F|={norm:.3e})")
