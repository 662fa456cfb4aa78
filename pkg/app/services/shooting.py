"""Shooting eigen-solver: outward integration from x=0 plus a 5-D Newton search."""

import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad

from app.config import get_settings
from app.errors import ContinuationGapError, ConvergenceError, PTSusyError
from app.models.reports import Wavefunction
from app.models.solution import EigenSolution, ShootingUnknowns, StatePair, Trajectory
from app.models.superpotential import TanhPiece
from app.models.trap import PotentialField, SampledSmooth, SuperpotentialSmooth
from app.services.integrator import (
    NewtonResult,
    aligned_step,
    exponential_tail,
    interior_norm,
    newton_root,
    norm_with_tails,
    propagate,
)

logger = logging.getLogger(__name__)

Family = Callable[[float], PotentialField]
Guard = Callable[[float, EigenSolution], Optional[ShootingUnknowns]]


def default_step(field: PotentialField) -> float:
    settings = get_settings()
    return settings.step if field.is_linear else settings.nonlinear_step


def matching_point(field: PotentialField, h: float) -> float:
    """Where the decay condition is imposed: just outside the deltas when exact."""
    half = field.trap.separation / 2
    if isinstance(field.smooth, SampledSmooth):
        return math.floor(field.smooth.extent / h + 1e-6) * h
    if not field.is_linear:
        return half + math.ceil(get_settings().nonlinear_tail / h - 1e-9) * h
    return half + h


def decay_constant(field: PotentialField, kappa: complex, phi_end: complex) -> complex:
    """sqrt(kappa^2 + g|phi|^2/2): exact for a stationary nonlinear tail, kappa when g=0."""
    if field.is_linear:
        return complex(kappa)
    return complex(np.sqrt(complex(kappa**2 + field.trap.nonlinearity * abs(phi_end) ** 2 / 2)))


def _outer_tanh(field: PotentialField, side: int) -> Optional[TanhPiece]:
    if not isinstance(field.smooth, SuperpotentialSmooth):
        return None
    piece = field.smooth.superpotential.pieces[-1 if side > 0 else 0]
    if isinstance(piece, TanhPiece) and piece.branch == "tanh":
        return piece
    return None


def boundary_log_derivative(
    field: PotentialField, kappa: complex, x_b: float, side: int, phi_end: complex
) -> complex:
    """phi'/phi of the decaying solution at side*x_b.

    Constant outer potentials give -/+lambda. A partner field whose outer
    superpotential is a finite-xi tanh has the decaying solution
    (W -/+ lambda) exp(-/+ lambda x), with log-derivative W'/(W -/+ lambda) -/+ lambda.
    """
    lam = decay_constant(field, kappa, phi_end)
    piece = _outer_tanh(field, side)
    if piece is None:
        return -side * lam
    x = np.array([side * x_b])
    w, dw = complex(piece.values(x)[0]), complex(piece.derivative(x)[0])
    return dw / (w - side * lam) - side * lam


def outer_profile(
    field: PotentialField, kappa: complex, side: int, x_b: float, phi_end: complex, x
) -> np.ndarray:
    """Continuation of a matched solution beyond side*x_b."""
    lam = decay_constant(field, kappa, phi_end)
    x = np.asarray(x, dtype=float)
    base = phi_end * np.exp(-lam * (side * x - x_b))
    piece = _outer_tanh(field, side)
    if piece is None:
        return base
    w_end = complex(piece.values(np.array([side * x_b]))[0])
    return base * (piece.values(x) - side * lam) / (w_end - side * lam)


def nonlinear_tail_norm(g: float, kappa: complex, phi_end: complex) -> float:
    """Integral of |phi|^2 past the matching point for phi'' = (kappa^2 + g|phi|^2) phi.

    With constant phase, |phi|' = -|phi| sqrt(k^2 + g|phi|^2/2) and the
    integral is |phi_end|^2 / (sqrt(k^2 + g|phi_end|^2/2) + k), k = Re kappa.
    """
    k = kappa.real
    if not k > 0:
        raise ValueError(f"decay rate must have a positive real part, got {kappa}")
    density = abs(phi_end) ** 2
    return density / (math.sqrt(k * k + g * density / 2) + k)


def tail_norm(field: PotentialField, kappa: complex, side: int, x_b: float, phi_end: complex) -> float:
    if not field.is_linear:
        return nonlinear_tail_norm(field.trap.nonlinearity, complex(kappa), phi_end)
    lam = decay_constant(field, kappa, phi_end)
    if _outer_tanh(field, side) is None:
        return exponential_tail(phi_end, lam)
    if not lam.real > 0:
        raise ValueError(f"decay rate must have a positive real part, got {lam}")

    def density(t: float) -> float:
        return float(abs(outer_profile(field, kappa, side, x_b, phi_end, [side * (x_b + t)])[0]) ** 2)

    value, _ = quad(density, 0.0, np.inf, limit=200)
    return value


class _Shooter:
    """Shots and residuals for one field on one grid."""

    def __init__(self, field: PotentialField, h: Optional[float] = None):
        self.field = field
        self.h = aligned_step(field.trap.separation, h or default_step(field))
        self.x_b = matching_point(field, self.h)

    def shoot(self, unknowns: ShootingUnknowns) -> Tuple[Trajectory, Trajectory]:
        start = StatePair(phi=unknowns.phi0, dphi=unknowns.dphi0)
        kappa = unknowns.kappa
        left = propagate(self.field, kappa, start, 0.0, -self.x_b, self.h)
        right = propagate(self.field, kappa, start, 0.0, self.x_b, self.h)
        return left, right

    def norm(self, left: Trajectory, right: Trajectory, kappa: complex) -> float:
        exponential = self.field.is_linear and all(
            _outer_tanh(self.field, side) is None for side in (-1, 1)
        )
        if exponential:
            return norm_with_tails(left, right, complex(kappa))
        return (
            interior_norm(left, right)
            + tail_norm(self.field, kappa, -1, self.x_b, complex(left.phi[-1]))
            + tail_norm(self.field, kappa, 1, self.x_b, complex(right.phi[-1]))
        )

    def residual(self, unknowns: ShootingUnknowns) -> np.ndarray:
        kappa = unknowns.kappa
        if not kappa.real > 0:
            raise ConvergenceError(f"trial kappa={kappa} does not decay")
        left, right = self.shoot(unknowns)
        ends = []
        for side, trajectory in ((-1, left), (1, right)):
            phi_end, dphi_end = complex(trajectory.phi[-1]), complex(trajectory.dphi[-1])
            rho = boundary_log_derivative(self.field, kappa, self.x_b, side, phi_end)
            ends.append(dphi_end - rho * phi_end)
        norm = self.norm(left, right, kappa)
        return np.array([ends[0].real, ends[0].imag, ends[1].real, ends[1].imag, norm - 1.0])

    def normalized(self, unknowns: ShootingUnknowns) -> ShootingUnknowns:
        left, right = self.shoot(unknowns)
        norm = self.norm(left, right, unknowns.kappa)
        if not norm > 0 or not math.isfinite(norm):
            raise ConvergenceError("seed wavefunction cannot be normalised")
        scale = 1.0 / math.sqrt(norm)
        return ShootingUnknowns.from_state(
            unknowns.phi0 * scale, unknowns.dphi0 * scale, unknowns.kappa, unknowns.gauge
        )

    def finish(self, unknowns: ShootingUnknowns, result: NewtonResult) -> EigenSolution:
        """Gauge-rotate (and for linear fields renormalise) a converged shot."""
        kappa = unknowns.kappa
        left, right = self.shoot(unknowns)
        phi0, dphi0 = unknowns.phi0, unknowns.dphi0
        reference = phi0 if abs(phi0) > 1e-12 else dphi0
        scale = abs(reference) / reference
        if self.field.is_linear:
            scale /= math.sqrt(self.norm(left, right, kappa))
        left, right = left.scaled(scale), right.scaled(scale)
        gauge = "value" if abs(phi0) > 1e-12 else "slope"
        return EigenSolution(
            field=self.field,
            kappa=kappa,
            left=left,
            right=right,
            norm=self.norm(left, right, kappa),
            residual_norm=result.residual_norm,
            iterations=result.iterations,
            unknowns=ShootingUnknowns.from_state(phi0 * scale, dphi0 * scale, kappa, gauge),
        )


def residuals(u: ShootingUnknowns, field: PotentialField, h: Optional[float] = None) -> np.ndarray:
    """(Re r-, Im r-, Re r+, Im r+, norm - 1) for the shot defined by u."""
    return _Shooter(field, h).residual(u)


def _solve(
    field: PotentialField,
    guess: ShootingUnknowns,
    tol: Optional[float],
    h: Optional[float],
    max_iter: Optional[int],
) -> EigenSolution:
    if guess.phi0 == 0 and guess.dphi0 == 0:
        raise ConvergenceError("seed wavefunction vanishes identically")
    if not guess.kappa.real > 0:
        raise ConvergenceError(f"seed kappa={guess.kappa} does not decay")
    shooter = _Shooter(field, h)
    if field.is_linear:
        guess = shooter.normalized(guess)
    result = newton_root(
        lambda u: shooter.residual(guess.with_vector(u)), guess.to_vector(), tol, max_iter
    )
    solution = shooter.finish(guess.with_vector(result.root), result)
    logger.debug(
        "%s state: kappa=%s after %d iterations", field.kind, solution.kappa, result.iterations
    )
    return solution


def solve_state(
    field: PotentialField,
    guess: ShootingUnknowns,
    tol: Optional[float] = None,
    h: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> EigenSolution:
    """Bound state of a linear field; phi(0) is real positive in the result."""
    if not field.is_linear:
        raise ValueError("field is nonlinear; use solve_nonlinear_state")
    return _solve(field, guess, tol, h, max_iter)


def solve_nonlinear_state(
    field: PotentialField,
    guess: ShootingUnknowns,
    tol: Optional[float] = None,
    h: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> EigenSolution:
    """Stationary Gross-Pitaevskii state; g|phi|^2 is integrated along each shot."""
    if field.is_linear:
        return solve_state(field, guess, tol, h, max_iter)
    return _solve(field, guess, tol, h, max_iter)


def assemble_solution(
    field: PotentialField, unknowns: ShootingUnknowns, h: Optional[float] = None
) -> EigenSolution:
    """Solution from known-good initial data without a root search (linear fields)."""
    shooter = _Shooter(field, h)
    unknowns = shooter.normalized(unknowns)
    residual_norm = float(np.max(np.abs(shooter.residual(unknowns))))
    return shooter.finish(unknowns, NewtonResult(unknowns.to_vector(), residual_norm, 0))


def measure_norm(solution: EigenSolution) -> float:
    x_b = float(solution.right.grid[-1])
    return (
        interior_norm(solution.left, solution.right)
        + tail_norm(solution.field, solution.kappa, -1, x_b, complex(solution.left.phi[-1]))
        + tail_norm(solution.field, solution.kappa, 1, x_b, complex(solution.right.phi[-1]))
    )


def sample_wavefunction(solution: EigenSolution, extent: Optional[float] = None) -> Wavefunction:
    """Solution on [-extent, extent], continued analytically past the matching points."""
    extent = extent or get_settings().display_extent
    x, phi = solution.grid, solution.wavefunction
    h, x_b = solution.right.step, float(solution.right.grid[-1])
    if extent <= x_b + 1e-12:
        mask = np.abs(x) <= extent + 1e-9
        return Wavefunction(x=x[mask], phi=phi[mask])

    count = int(math.ceil((extent - x_b) / h - 1e-9))
    outer = x_b + h * np.arange(1, count + 1)
    right = outer_profile(solution.field, solution.kappa, 1, x_b, complex(phi[-1]), outer)
    # ascending x, like `right`
    left = outer_profile(solution.field, solution.kappa, -1, x_b, complex(phi[0]), -outer[::-1])
    return Wavefunction(
        x=np.concatenate([-outer[::-1], x, outer]),
        phi=np.concatenate([left, phi, right]),
    )


def _carry(solution: EigenSolution, gauge: str) -> ShootingUnknowns:
    u = solution.unknowns
    return ShootingUnknowns.from_state(u.phi0, u.dphi0, solution.kappa, gauge)


def continue_in_parameter(
    family: Family,
    grid: Sequence[float],
    seed: ShootingUnknowns,
    tol: Optional[float] = None,
    h: Optional[float] = None,
    max_bisections: Optional[int] = None,
    guard: Optional[Guard] = None,
) -> List[EigenSolution]:
    """Track one state along a monotone parameter grid.

    Each solution seeds the next point; a failed step is bisected up to
    max_bisections times before ContinuationGapError names the parameter.
    `guard` may return a replacement seed when a solution drifted onto
    another branch.
    """
    grid = [float(value) for value in grid]
    if not grid:
        return []
    steps = np.diff(grid)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise ValueError("continuation grid must be strictly monotone")
    max_bisections = (
        get_settings().continuation_bisections if max_bisections is None else max_bisections
    )

    def solve_at(value: float, start: ShootingUnknowns) -> EigenSolution:
        field = family(value)
        solution = solve_nonlinear_state(field, start, tol, h)
        if guard is not None:
            replacement = guard(value, solution)
            if replacement is not None:
                logger.warning("re-seeding at parameter %.6g", value)
                solution = solve_nonlinear_state(field, replacement, tol, h)
        return solution

    def bridge(lo: float, hi: float, start: ShootingUnknowns, depth: int) -> EigenSolution:
        try:
            return solve_at(hi, start)
        except PTSusyError as exc:
            if depth >= max_bisections:
                raise ContinuationGapError(hi, str(exc)) from exc
            mid = (lo + hi) / 2
            logger.warning("bisecting continuation step %.6g -> %.6g", lo, hi)
            halfway = bridge(lo, mid, start, depth + 1)
            return bridge(mid, hi, _carry(halfway, seed.gauge), depth + 1)

    try:
        solutions = [solve_at(grid[0], seed)]
    except PTSusyError as exc:
        raise ContinuationGapError(grid[0], str(exc)) from exc
    for lo, hi in zip(grid, grid[1:]):
        solutions.append(bridge(lo, hi, _carry(solutions[-1], seed.gauge), 0))
        logger.info("parameter %.6g: kappa=%s", hi, solutions[-1].kappa)
    return solutions


def continue_in_gamma(
    field_family: Family,
    gamma_grid: Sequence[float],
    seed: ShootingUnknowns,
    **kwargs,
) -> List[EigenSolution]:
    return continue_in_parameter(field_family, gamma_grid, seed, **kwargs)
