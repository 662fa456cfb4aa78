"""Experiments: spectrum sweeps, state removal, exceptional point, nonlinear comparison."""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.config import get_settings
from app.errors import ContinuationGapError, EPStudyError, PTSusyError
from app.models.reports import (
    EPReport,
    NonlinearRow,
    NonlinearTable,
    PotentialSamples,
    RemovalReport,
    SpectrumRow,
    SpectrumTable,
)
from app.models.solution import EigenSolution, ShootingUnknowns
from app.services.oracle import (
    find_exceptional_point,
    hermitian_seed,
    oracle_eigenvalues,
    oracle_seed,
)
from app.services.potentials import (
    display_regions,
    make_pt_trap,
    pt_asymmetry,
    pt_field,
    sample_potential,
    symmetric_grid,
)
from app.services.shooting import (
    assemble_solution,
    continue_in_gamma,
    continue_in_parameter,
    sample_wavefunction,
    solve_state,
)
from app.services.susy import (
    background_field,
    partner_potential,
    partner_seed,
    reduce_xi,
    riccati_superpotential,
    superpotential_family,
    superpotential_from_state,
    superpotential_standard,
    verify_factorization,
)

logger = logging.getLogger(__name__)

# Below this |kappa0 - kappa1| the states are treated as coalesced.
COALESCENCE = 1e-3


def original_states(
    gamma: float, a: float, h: Optional[float] = None, tol: Optional[float] = None
) -> List[EigenSolution]:
    """Both linear bound states at gamma, seeded from the closed-form states.

    At (or extremely near) the exceptional point the shooting problem has a
    double root, so the closed-form initial data are propagated as they are.
    """
    field = pt_field(gamma, a)
    coalesced = _is_coalesced(gamma, a)
    states = []
    for index in (0, 1):
        seed = oracle_seed(gamma, a, index)
        if coalesced:
            states.append(assemble_solution(field, seed, h))
        else:
            states.append(solve_state(field, seed, tol, h))
    return states


def nonlinear_states(
    gamma: float, a: float, g: float, h: Optional[float], tol: Optional[float]
) -> List[EigenSolution]:
    """Both states at interaction g, continued from the linear solutions."""
    step = h or get_settings().nonlinear_step
    linear = original_states(gamma, a, step, tol)
    grid = [0.0, g] if g <= 0.05 else list(np.linspace(0.0, g, int(math.ceil(g / 0.05)) + 1))
    states = []
    for solution in linear:
        path = continue_in_parameter(
            lambda value: pt_field(gamma, a, value),
            grid,
            solution.unknowns,
            tol=tol,
            h=step,
        )
        states.append(path[-1])
    return states


def _window(solution: EigenSolution, extent: Optional[float] = None) -> np.ndarray:
    """Display grid on the solution's own step."""
    extent = extent or get_settings().display_extent
    return symmetric_grid(extent, solution.right.step)


def remove_state(
    gamma: float,
    a: float,
    removed_index: int,
    xi_left: Optional[complex] = None,
    g: float = 0.0,
    h: Optional[float] = None,
    tol: Optional[float] = None,
) -> RemovalReport:
    """Remove one original state and solve the partner system.

    Linear traps use the analytic superpotential (standard, or the xi family
    when xi_left is given). For g > 0 the states are continued in g and the
    superpotential is integrated from the Riccati equation; xi_left then
    fixes its starting value instead of the state's own -phi'/phi.
    """
    if removed_index not in (0, 1):
        raise ValueError(f"removed_index must be 0 or 1, got {removed_index}")
    trap = make_pt_trap(gamma, a, g)

    if g > 0:
        originals = nonlinear_states(gamma, a, g, h, tol)
    else:
        originals = original_states(gamma, a, h, tol)
    removed, other = originals[removed_index], originals[1 - removed_index]

    state_w = superpotential_from_state(removed)
    kappa = removed.kappa
    if g > 0:
        start = complex(state_w.pieces[0].w[0])
        if xi_left is not None:
            x_start = float(state_w.pieces[0].x[0])
            start = complex(-kappa * np.tanh(kappa * (x_start - xi_left)))
        superpotential = riccati_superpotential(background_field(state_w), start, trap, kappa)
    elif xi_left is None:
        superpotential = superpotential_standard(kappa, gamma, a)
    else:
        superpotential = superpotential_family(kappa, gamma, a, xi_left)

    partner = partner_potential(superpotential, trap)
    seed = partner_seed(partner, removed, other, COALESCENCE)
    partner_solution = solve_state(partner.field, seed, tol, removed.right.step)

    x = _window(removed)
    if superpotential.is_sampled:
        x_b = float(removed.right.grid[-1])
        x = x[np.abs(x) <= x_b + 1e-9]
    w_values = superpotential.values(x, display_regions(trap, x))
    v2_values = sample_potential(partner.field, x)

    pieces = superpotential.pieces
    xi_mid = getattr(pieces[1], "xi", None)
    xi_right = getattr(pieces[-1], "xi", None)
    report = RemovalReport(
        removed_index=removed_index,
        gamma=gamma,
        a=a,
        g=g,
        xi_left=xi_left,
        xi_mid=xi_mid,
        xi_right=xi_right,
        xi_mid_reduced=reduce_xi(xi_mid, kappa),
        xi_right_reduced=reduce_xi(xi_right, kappa),
        originals=originals,
        superpotential=superpotential,
        partner=partner,
        partner_solution=partner_solution,
        ideal_energy=other.energy - removed.energy,
        w_samples=PotentialSamples(x=x, values=w_values),
        v2_samples=PotentialSamples(x=x, values=v2_values),
        partner_wavefunction=sample_wavefunction(partner_solution, float(np.max(x))),
        factorization_residual=verify_factorization(superpotential, trap, removed.right.step),
        v2_asymmetry=pt_asymmetry(x, v2_values),
        pole_markers=superpotential.pole_markers,
    )
    logger.info(
        "removed state %d at gamma=%g: E0_2=%s (ideal %s)",
        removed_index,
        gamma,
        report.partner_energy,
        report.ideal_energy,
    )
    return report


def refined_grid(gamma_grid: Sequence[float], gamma_crit: float) -> List[float]:
    """Add points at the refinement step within the refinement width of gamma_crit."""
    settings = get_settings()
    grid = sorted(set(round(value, 12) for value in gamma_grid))
    if not grid:
        return []
    lo = max(grid[0], gamma_crit - settings.ep_refine_width)
    hi = min(grid[-1], gamma_crit + settings.ep_refine_width)
    step = settings.ep_refine_step
    if hi > lo:
        start = math.ceil(lo / step - 1e-9)
        stop = math.floor(hi / step + 1e-9)
        grid = sorted(set(grid) | {round(k * step, 12) for k in range(start, stop + 1)})
    return grid


def _partner_energy(
    gamma: float,
    a: float,
    removed: EigenSolution,
    other: EigenSolution,
    h: Optional[float],
    tol: Optional[float],
) -> complex:
    """Partner ground energy for one sweep point (runs in worker processes)."""
    try:
        superpotential = superpotential_standard(removed.kappa, gamma, a)
        partner = partner_potential(superpotential, make_pt_trap(gamma, a))
        seed = partner_seed(partner, removed, other, COALESCENCE)
        return solve_state(partner.field, seed, tol, h).energy
    except PTSusyError as exc:
        raise ContinuationGapError(gamma, f"partner solve failed: {exc}") from exc


def _is_coalesced(gamma: float, a: float) -> bool:
    roots = oracle_eigenvalues(gamma, a)
    return roots.degenerate or abs(roots.kappa0 - roots.kappa1) < COALESCENCE


def _track_branch(
    grid: List[float],
    a: float,
    index: int,
    h: Optional[float],
    tol: Optional[float],
) -> List[EigenSolution]:
    if not grid:
        return []
    if grid[0] == 0:
        seed = hermitian_seed(a, index)
    else:
        seed = oracle_seed(grid[0], a, index)

    def guard(gamma: float, solution: EigenSolution) -> Optional[ShootingUnknowns]:
        roots = oracle_eigenvalues(gamma, a)
        expected = roots.kappa0 if index == 0 else roots.kappa1
        if abs(solution.kappa - expected) > 1e-6:
            return oracle_seed(gamma, a, index)
        return None

    def family(gamma: float):
        return pt_field(gamma, a)

    return continue_in_gamma(family, grid, seed, tol=tol, h=h, guard=guard)


def sweep_spectrum(
    a: float,
    gamma_grid: Sequence[float],
    removed_index: int,
    h: Optional[float] = None,
    tol: Optional[float] = None,
    jobs: Optional[int] = None,
    refine: bool = True,
) -> SpectrumTable:
    """Both original states and the partner ground state across a gamma grid.

    The grid is split at the exceptional point; each side is tracked by
    continuation, the unbroken side from the Hermitian seeds when it starts
    at gamma=0. Partner solves are independent and run on `jobs` processes.
    """
    jobs = jobs or get_settings().jobs
    if not list(gamma_grid):
        return SpectrumTable(a=a, removed_index=removed_index, rows=[])
    gamma_crit, _ = find_exceptional_point(a)
    grid = refined_grid(gamma_grid, gamma_crit) if refine else sorted(set(gamma_grid))

    coalesced = [gamma for gamma in grid if _is_coalesced(gamma, a)]
    below = [gamma for gamma in grid if gamma < gamma_crit and gamma not in coalesced]
    above = [gamma for gamma in grid if gamma >= gamma_crit and gamma not in coalesced]
    tracked = {}
    for segment in (below, above):
        branch0 = _track_branch(segment, a, 0, h, tol)
        branch1 = _track_branch(segment, a, 1, h, tol)
        tracked.update(zip(segment, zip(branch0, branch1)))
    for gamma in coalesced:
        logger.info("gamma=%g is at the exceptional point; using closed-form states", gamma)
        tracked[gamma] = tuple(original_states(gamma, a, h, tol))
    pairs: List[Tuple[EigenSolution, EigenSolution]] = [tracked[gamma] for gamma in grid]

    work = []
    for gamma, (state0, state1) in zip(grid, pairs):
        removed, other = (state0, state1) if removed_index == 0 else (state1, state0)
        work.append((gamma, a, removed, other, h, tol))

    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_partner_energy, *item) for item in work]
            partner_energies = [future.result() for future in futures]
    else:
        partner_energies = [_partner_energy(*item) for item in work]

    rows = []
    flagged = False
    for gamma, (state0, state1), energy in zip(grid, pairs, partner_energies):
        crossing = not flagged and gamma >= gamma_crit
        flagged = flagged or crossing
        rows.append(
            SpectrumRow(
                gamma=gamma,
                E0_1=state0.energy,
                E1_1=state1.energy,
                E0_2=energy,
                gamma_crit_flag=crossing,
            )
        )
        logger.info("gamma=%g: E0_1=%s E1_1=%s E0_2=%s", gamma, state0.energy, state1.energy, energy)
    return SpectrumTable(a=a, removed_index=removed_index, gamma_crit=gamma_crit, rows=rows)


def nonlinear_comparison(
    g_values: Sequence[float],
    a: float,
    gamma_grid: Sequence[float],
    h: Optional[float] = None,
    tol: Optional[float] = None,
) -> NonlinearTable:
    """Partner ground energy against E_id = E1 - E0 for every (g, gamma)."""
    rows = []
    for g in g_values:
        for gamma in gamma_grid:
            try:
                report = remove_state(gamma, a, 0, g=g, h=h, tol=tol)
            except (PTSusyError, ArithmeticError) as exc:
                logger.warning("nonlinear point g=%g gamma=%g failed: %s", g, gamma, exc)
                rows.append(NonlinearRow(g=g, gamma=gamma, error=str(exc)))
                continue
            rows.append(
                NonlinearRow(
                    g=g,
                    gamma=gamma,
                    E0_2=report.partner_energy,
                    E_id=report.ideal_energy,
                    deviation=report.deviation,
                )
            )
    return NonlinearTable(a=a, rows=rows)


def _real_pair(states: Sequence[EigenSolution], gap: float) -> bool:
    k0, k1 = states[0].kappa, states[1].kappa
    return abs(k0.imag) < 1e-8 and abs(k1.imag) < 1e-8 and abs(k0.real - k1.real) >= gap


def shooting_gamma_crit(
    a: float, h: Optional[float] = None, tol: Optional[float] = None, step: float = 0.02
) -> float:
    """gamma where the two shooting eigenvalues stop being distinct and real.

    Both states are continued from gamma=0 until the pair breaks, then the
    bracket is bisected down to the configured width.
    """
    settings = get_settings()
    field_at = lambda gamma: pt_field(gamma, a)  # noqa: E731
    seeds = [hermitian_seed(a, 0), hermitian_seed(a, 1)]
    good = [solve_state(field_at(0.0), seed, tol, h) for seed in seeds]
    gauges = [seed.gauge for seed in seeds]

    def attempt(gamma: float, start: Sequence[EigenSolution]) -> Optional[List[EigenSolution]]:
        try:
            states = [
                solve_state(
                    field_at(gamma),
                    ShootingUnknowns.from_state(s.unknowns.phi0, s.unknowns.dphi0, s.kappa, gauge),
                    tol,
                    h,
                )
                for s, gauge in zip(start, gauges)
            ]
        except PTSusyError:
            return None
        return states if _real_pair(states, settings.ep_gap) else None

    lo = 0.0
    while True:
        hi = lo + step
        states = attempt(hi, good)
        if states is None:
            break
        lo, good = hi, states
        if lo > 10:
            raise EPStudyError("pair never broke while continuing in gamma")

    while hi - lo > settings.ep_bracket_width:
        mid = (lo + hi) / 2
        states = attempt(mid, good)
        if states is None:
            hi = mid
        else:
            lo, good = mid, states
    logger.info("shooting bracket for gamma_crit: [%.9f, %.9f]", lo, hi)
    return (lo + hi) / 2


def ep_study(a: float, h: Optional[float] = None, tol: Optional[float] = None) -> EPReport:
    """Oracle and shooting estimates of gamma_crit plus the partner state at the EP."""
    gamma_oracle, kappa_ep = find_exceptional_point(a)
    gamma_shooting = shooting_gamma_crit(a, h, tol)
    if abs(gamma_oracle - gamma_shooting) > 1e-3:
        raise EPStudyError(
            f"gamma_crit estimates disagree: oracle {gamma_oracle:.6f}, shooting {gamma_shooting:.6f}"
        )

    report = remove_state(gamma_oracle, a, 0, h=h, tol=tol)
    wavefunction = sample_wavefunction(report.partner_solution)
    return EPReport(
        a=a,
        gamma_crit_oracle=gamma_oracle,
        kappa_ep=kappa_ep,
        gamma_crit_shooting=gamma_shooting,
        survivor=report.partner_solution,
        survivor_wavefunction=wavefunction,
        survivor_asymmetry=pt_asymmetry(wavefunction.x, wavefunction.phi),
    )
