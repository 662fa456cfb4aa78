import math

import numpy as np
import pytest

from app.errors import NodalStateError, PoleError
from app.services import ExperimentRunner, pipeline
from app.services.oracle import find_exceptional_point
from app.services.pipeline import (
    ep_study,
    nonlinear_comparison,
    refined_grid,
    remove_state,
    sweep_spectrum,
)


@pytest.mark.parametrize("gamma", [0.0, 0.1, 0.2, 0.3, 0.39])
def test_ground_removal_is_isospectral(gamma, a):
    report = remove_state(gamma, a, 0)
    assert report.deviation < 1e-6
    assert report.factorization_residual < 1e-8


def test_partner_ground_state_without_gain(a):
    report = remove_state(0.0, a, 0)
    energy = report.partner_energy
    assert energy.real == pytest.approx(0.3843, abs=5e-4)
    assert abs(energy.imag) < 1e-10
    assert 0 < energy.real < abs(report.originals[0].energy)
    wavefunction = report.partner_wavefunction
    assert wavefunction.x[np.argmax(wavefunction.abs_phi)] == pytest.approx(0.0, abs=1e-2)


@pytest.mark.parametrize("gamma", [0.45, 0.5, 0.6])
def test_broken_phase_partner_energy_is_imaginary(gamma, a):
    report = remove_state(gamma, a, 0)
    excited = report.originals[1]
    assert abs(report.partner_energy.real) < 1e-8
    assert report.partner_energy.imag == pytest.approx(2 * excited.energy.imag, abs=1e-6)
    assert report.partner_energy.imag < 0


def test_excited_removal_near_zero_gain_dips_deep(a):
    report = remove_state(0.05, a, 1)
    x = report.v2_samples.x
    centre = report.v2_samples.values[np.argmin(np.abs(x))]
    assert centre.real == pytest.approx(-540, rel=0.1)


def test_excited_removal_without_gain_hits_the_node(a):
    with pytest.raises(NodalStateError):
        remove_state(0.0, a, 1)


def test_excited_removal_gives_pt_symmetric_partner(a):
    report = remove_state(0.3, a, 1)
    assert report.v2_asymmetry < 1e-8
    assert report.pole_markers == []
    assert report.deviation < 1e-6


def test_removal_rejects_bad_index(a):
    with pytest.raises(ValueError):
        remove_state(0.1, a, 2)


XI_CANDIDATES = [
    complex(-2.34, 2.02),
    complex(-2.0, 1.0),
    complex(-1.0, 0.5),
    complex(0.5, 1.0),
    complex(2.0, 2.0),
    complex(-3.0, 0.3),
    complex(1.5, 2.7),
    complex(-0.5, 2.5),
    complex(2.5, 0.8),
    complex(0.0, 1.5),
]


@pytest.mark.slow
def test_xi_family_keeps_the_spectrum_but_breaks_pt_symmetry(a):
    gamma = 0.3
    standard = remove_state(gamma, a, 0)
    accepted = []
    for xi_left in XI_CANDIDATES:
        try:
            report = remove_state(gamma, a, 0, xi_left=xi_left)
        except PoleError:
            continue
        if np.max(np.abs(report.v2_samples.values)) > 1e3:
            continue
        accepted.append(report)
        if len(accepted) == 5:
            break
    assert len(accepted) == 5
    for report in accepted:
        assert abs(report.partner_energy - standard.partner_energy) < 1e-6
        assert report.v2_asymmetry > 1e-2
        assert report.xi_right is not None
        assert 0 <= (report.superpotential.source_kappa * report.xi_right_reduced).imag < np.pi


def test_refined_grid_adds_points_near_the_exceptional_point():
    grid = refined_grid([0.39, 0.4, 0.41], 0.4005)
    assert grid == sorted(grid)
    assert len(grid) > 3
    assert 0.4005 in grid
    assert refined_grid([0.0, 0.1], 0.4005) == [0.0, 0.1]


def test_sweep_below_the_exceptional_point(a):
    table = sweep_spectrum(a, [0.0, 0.1, 0.2], 0, refine=False)
    assert [row.gamma for row in table.rows] == [0.0, 0.1, 0.2]
    for row in table.rows:
        assert abs(row.E0_1.imag) < 1e-8 and abs(row.E1_1.imag) < 1e-8
        assert row.E0_2 == pytest.approx(row.E1_1 - row.E0_1, abs=1e-6)
        assert not row.gamma_crit_flag


def test_sweep_flags_the_crossing_and_pairs_broken_energies(a):
    table = sweep_spectrum(a, [0.3, 0.45, 0.5], 0, refine=False)
    assert [row.gamma_crit_flag for row in table.rows] == [False, True, False]
    for row in table.rows[1:]:
        assert row.E1_1 == pytest.approx(row.E0_1.conjugate(), abs=1e-8)
        assert row.E0_2 == pytest.approx(2j * row.E1_1.imag, abs=1e-6)


def test_empty_sweep(a):
    assert sweep_spectrum(a, [], 0).rows == []


@pytest.mark.slow
def test_parallel_sweep_matches_serial(a):
    grid = [0.0, 0.1, 0.2, 0.3]
    serial = sweep_spectrum(a, grid, 0, refine=False, jobs=1)
    parallel = sweep_spectrum(a, grid, 0, refine=False, jobs=2)
    assert serial == parallel


@pytest.mark.slow
def test_partner_energy_vanishes_towards_the_exceptional_point(a):
    gamma_crit, _ = find_exceptional_point(a)
    table = sweep_spectrum(a, [0.3, 0.39, round(gamma_crit - 0.002, 4)], 0, refine=False)
    energies = [abs(row.E0_2) for row in table.rows]
    assert energies[0] > energies[1] > energies[2]


@pytest.mark.slow
def test_exceptional_point_study(a):
    report = ep_study(a)
    assert report.gamma_crit_oracle == pytest.approx(0.4005, abs=1e-3)
    assert report.difference < 1e-3
    assert abs(report.survivor_energy) < 1e-3
    assert report.survivor_asymmetry < 1e-6


@pytest.mark.slow
def test_nonlinear_comparison_properties(a):
    table = nonlinear_comparison([0.0, 0.001, 0.01, 0.1], a, [0.0, 0.3])
    rows = {(row.g, row.gamma): row for row in table.rows}
    assert all(row.error is None for row in table.rows)
    for gamma in (0.0, 0.3):
        assert rows[(0.0, gamma)].deviation < 1e-6
        assert rows[(0.001, gamma)].deviation < rows[(0.01, gamma)].deviation
        assert rows[(0.01, gamma)].deviation < rows[(0.1, gamma)].deviation
        for g in (0.001, 0.01, 0.1):
            assert rows[(g, gamma)].E0_2.real >= rows[(g, gamma)].E_id.real


@pytest.mark.slow
def test_starting_value_of_the_riccati_superpotential_matters_with_interaction(a):
    own = remove_state(0.0, a, 0, g=0.01)
    shifted = remove_state(0.0, a, 0, xi_left=complex(-5.0, 0.5), g=0.01)
    assert own.superpotential.is_sampled and shifted.superpotential.is_sampled
    assert abs(shifted.partner_energy - own.partner_energy) > 1e-7
    for report in (own, shifted):
        assert abs(report.partner_energy - report.ideal_energy) < 5e-2


def test_nonlinear_comparison_reports_failures_per_point(a, monkeypatch):
    def overflowing(gamma, a, index, g=0.0, h=None, tol=None):
        raise OverflowError("numerical result out of range")

    monkeypatch.setattr(pipeline, "remove_state", overflowing)
    table = nonlinear_comparison([0.01], a, [0.0, 0.3])
    assert [(row.g, row.gamma) for row in table.rows] == [(0.01, 0.0), (0.01, 0.3)]
    assert all("out of range" in row.error for row in table.rows)
    assert all(math.isnan(row.deviation) for row in table.rows)


class TestExperimentRunner:
    def test_defaults_to_the_calibrated_separation(self):
        assert ExperimentRunner().a == pytest.approx(2.2)

    def test_states_agree_with_the_closed_form(self, a):
        runner = ExperimentRunner(a)
        roots = runner.oracle(0.2)
        ground, excited = runner.states(0.2)
        assert ground.kappa == pytest.approx(roots.kappa0, abs=1e-8)
        assert excited.kappa == pytest.approx(roots.kappa1, abs=1e-8)

    def test_removal_uses_the_runner_geometry(self, a):
        report = ExperimentRunner(a).remove(0.1, 0)
        assert report.a == a
        assert report.partner_energy == pytest.approx(report.ideal_energy, abs=1e-6)

    def test_calibration_reports_both_energies(self):
        result = ExperimentRunner.calibrate(0.3920)
        assert result["a"] == pytest.approx(2.2, abs=5e-3)
        assert result["E0_1"] == pytest.approx(-0.3920, abs=1e-8)
