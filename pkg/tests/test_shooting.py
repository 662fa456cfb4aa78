import cmath
import math

import numpy as np
import pytest

from app.config import get_settings
from app.errors import ContinuationGapError
from app.models import ShootingUnknowns
from app.services.oracle import hermitian_seed, oracle_eigenvalues, oracle_seed
from app.services.potentials import pt_asymmetry, pt_field
from app.services.shooting import (
    continue_in_gamma,
    continue_in_parameter,
    measure_norm,
    nonlinear_tail_norm,
    residuals,
    sample_wavefunction,
    solve_nonlinear_state,
    solve_state,
)


# twenty gains across both phases, clear of the exceptional point near 0.4
ORACLE_GAMMAS = [0.0, 0.03, 0.06, 0.09, 0.12, 0.15, 0.18, 0.21, 0.24, 0.27, 0.3, 0.33, 0.36]
ORACLE_GAMMAS += [0.44, 0.47, 0.5, 0.53, 0.56, 0.58, 0.6]


@pytest.mark.parametrize("gamma", ORACLE_GAMMAS)
@pytest.mark.parametrize("index", [0, 1])
def test_shooting_matches_closed_form_eigenvalues(gamma, index, a):
    roots = oracle_eigenvalues(gamma, a)
    expected = roots.kappa0 if index == 0 else roots.kappa1
    solution = solve_state(pt_field(gamma, a), oracle_seed(gamma, a, index))
    assert abs(solution.kappa - expected) < 1e-8


def test_hermitian_seeds_converge_to_both_states(a):
    field = pt_field(0.0, a)
    roots = oracle_eigenvalues(0.0, a)
    ground = solve_state(field, hermitian_seed(a, 0))
    excited = solve_state(field, hermitian_seed(a, 1))
    assert ground.kappa == pytest.approx(roots.kappa0, abs=1e-8)
    assert excited.kappa == pytest.approx(roots.kappa1, abs=1e-8)
    assert ground.energy.real == pytest.approx(-0.3920, abs=5e-4)
    assert excited.energy.real == pytest.approx(-0.0077, abs=5e-4)


def test_solution_is_normalised_and_gauged(states_at):
    ground, _ = states_at(0.2)
    assert measure_norm(ground) == pytest.approx(1.0, abs=1e-8)
    assert ground.unknowns.phi0.imag == 0
    assert ground.unknowns.phi0.real > 0
    assert np.max(np.abs(residuals(ground.unknowns, ground.field))) < 1e-9


def test_deltas_sit_on_grid_nodes(states_at):
    ground, _ = states_at(0.2)
    positions = [event.position for event in ground.jump_events]
    assert positions == pytest.approx([-1.1, 1.1])
    assert np.any(np.isclose(ground.grid, 1.1, atol=1e-12))


def test_unbroken_states_are_pt_symmetric(states_at):
    for state in states_at(0.3):
        wavefunction = sample_wavefunction(state)
        assert pt_asymmetry(wavefunction.x, wavefunction.phi) < 1e-7


def test_broken_states_are_conjugate_partners(states_at):
    state0, state1 = states_at(0.5)
    assert state1.kappa == pytest.approx(state0.kappa.conjugate(), abs=1e-8)
    assert state0.energy.imag > 0


def test_sample_wavefunction_continues_past_the_matching_point(states_at):
    ground, _ = states_at(0.0)
    wavefunction = sample_wavefunction(ground, extent=8.0)
    assert wavefunction.x[0] == pytest.approx(-8.0, abs=2e-3)
    assert wavefunction.x[-1] == pytest.approx(8.0, abs=2e-3)
    steps = np.diff(wavefunction.x)
    assert np.allclose(steps, steps[0])
    assert wavefunction.abs_phi[-1] < 1e-2
    # cosh-shaped between the wells, cusps at the deltas
    assert abs(wavefunction.x[np.argmax(wavefunction.abs_phi)]) == pytest.approx(1.1, abs=1e-9)


def test_solve_state_refuses_nonlinear_fields(a):
    with pytest.raises(ValueError):
        solve_state(pt_field(0.1, a, g=0.01), oracle_seed(0.1, a, 0))


def test_continuation_tracks_the_ground_state(a):
    grid = [0.0, 0.1, 0.2]
    path = continue_in_gamma(lambda gamma: pt_field(gamma, a), grid, hermitian_seed(a, 0))
    for gamma, solution in zip(grid, path):
        assert solution.kappa == pytest.approx(oracle_eigenvalues(gamma, a).kappa0, abs=1e-8)


def test_continuation_grid_must_be_monotone(a):
    with pytest.raises(ValueError):
        continue_in_gamma(lambda gamma: pt_field(gamma, a), [0.0, 0.2, 0.1], hermitian_seed(a, 0))


def test_continuation_failure_names_the_parameter(a):
    seed = ShootingUnknowns.from_state(1.0, 0.0, -0.5)
    with pytest.raises(ContinuationGapError) as info:
        continue_in_parameter(lambda gamma: pt_field(gamma, a), [0.25, 0.3], seed)
    assert info.value.gamma == pytest.approx(0.25)


@pytest.mark.slow
def test_weak_interaction_shifts_the_ground_state(a):
    linear = solve_state(pt_field(0.1, a), oracle_seed(0.1, a, 0), h=1e-2)
    field = pt_field(0.1, a, g=0.01)
    solution = solve_nonlinear_state(field, linear.unknowns)
    assert solution.kappa != linear.kappa
    assert abs(solution.kappa - linear.kappa) < 1e-2
    assert measure_norm(solution) == pytest.approx(1.0, abs=1e-6)


def test_left_tail_decays_away_from_the_matching_point(states_at):
    _, excited = states_at(0.3)
    wavefunction = sample_wavefunction(excited, extent=8.0)
    x_b = float(excited.right.grid[-1])
    distance = -wavefunction.x[0] - x_b
    expected = excited.left.phi[-1] * np.exp(-excited.kappa * distance)
    assert wavefunction.phi[0] == pytest.approx(expected, rel=1e-10)
    assert abs(wavefunction.phi[0]) == pytest.approx(abs(wavefunction.phi[-1]), rel=1e-7)
    assert np.all(np.diff(wavefunction.abs_phi[: len(wavefunction.x) // 4]) > 0)


def test_phase_of_the_seed_does_not_move_the_eigenvalue(a):
    seed = oracle_seed(0.2, a, 0)
    reference = solve_state(pt_field(0.2, a), seed, tol=1e-12)
    for angle in (0.7, -2.1):
        phase = cmath.exp(1j * angle)
        rotated = ShootingUnknowns.from_state(1.01 * seed.phi0 * phase, seed.dphi0 * phase, seed.kappa + 0.01)
        assert abs(solve_state(pt_field(0.2, a), rotated, tol=1e-12).kappa - reference.kappa) < 1e-10
    slope = ShootingUnknowns.from_state(seed.phi0, seed.dphi0, seed.kappa, "slope")
    assert abs(solve_state(pt_field(0.2, a), slope, tol=1e-12).kappa - reference.kappa) < 1e-10


def test_conjugated_seed_finds_the_partner_state(states_at, a):
    state0, _ = states_at(0.5)
    partner = solve_state(pt_field(0.5, a), state0.unknowns.conjugate())
    assert abs(partner.kappa - state0.kappa.conjugate()) < 1e-10
    assert partner.energy.imag == pytest.approx(-state0.energy.imag, abs=1e-10)


def test_nonlinear_tail_norm_matches_the_exact_profile():
    # phi = k sqrt(2/g) / sinh(k (t + t0)) solves phi'' = k^2 phi + g phi^3
    g, k, t0 = 0.1, 0.6, 1.5
    phi_end = k * math.sqrt(2 / g) / math.sinh(k * t0)
    exact = 2 * k / g * (1 / math.tanh(k * t0) - 1)
    assert nonlinear_tail_norm(g, k, phi_end) == pytest.approx(exact, rel=1e-12)
    # no interaction leaves the plain exponential tail
    assert nonlinear_tail_norm(0.0, k, 0.5) == pytest.approx(0.25 / (2 * k), rel=1e-12)
    with pytest.raises(ValueError):
        nonlinear_tail_norm(g, -0.1, 1.0)


@pytest.mark.slow
def test_nonlinear_matching_does_not_depend_on_the_tail_length(a, monkeypatch):
    seed = oracle_seed(0.2, a, 0)
    field = pt_field(0.2, a, g=0.01)
    short = solve_nonlinear_state(field, seed)
    monkeypatch.setenv("PTSUSY_NONLINEAR_TAIL", "3.0")
    get_settings.cache_clear()
    longer = solve_nonlinear_state(field, seed)
    assert float(longer.right.grid[-1]) > float(short.right.grid[-1]) + 0.9
    assert abs(longer.kappa - short.kappa) < 1e-7
