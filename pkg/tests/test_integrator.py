import math

import numpy as np
import pytest

from app.errors import ConvergenceError, DivergenceError, GridAlignmentError, SingularJacobianError
from app.models import DeltaWell, StatePair, TrapSpec
from app.services.integrator import (
    aligned_step,
    exponential_tail,
    interior_norm,
    newton_root,
    norm_with_tails,
    propagate,
)
from app.services.potentials import original_field


def single_delta_field(position: float, strength: complex):
    trap = TrapSpec(separation=1.0, gamma=0.0, deltas=[DeltaWell(position=position, strength=strength)])
    return original_field(trap)


def free_field():
    return original_field(TrapSpec(separation=1.0, gamma=0.0))


class TestAlignedStep:
    def test_calibrated_separation_keeps_requested_step(self):
        assert aligned_step(2.2, 1e-3) == pytest.approx(1e-3)

    def test_step_is_snapped_onto_the_deltas(self):
        h = aligned_step(2.2002, 1e-3)
        assert h <= 1e-3
        assert (2.2002 / 2) / h == pytest.approx(round((2.2002 / 2) / h), abs=1e-9)

    def test_rejects_non_positive_step(self):
        with pytest.raises(ValueError):
            aligned_step(2.2, 0.0)


class TestPropagate:
    def test_free_growth_matches_exponential(self):
        kappa = 0.7 + 0.2j
        trajectory = propagate(free_field(), kappa, StatePair(phi=1.0, dphi=kappa), 0.0, 1.0, 1e-3)
        assert trajectory.phi[-1] == pytest.approx(np.exp(kappa), abs=1e-10)
        assert trajectory.dphi[-1] == pytest.approx(kappa * np.exp(kappa), abs=1e-10)

    def test_rightward_jump_adds_strength_times_phi(self):
        s = complex(-1.0, 0.5)
        field = single_delta_field(0.5, s)
        trajectory = propagate(field, 0.0, StatePair(phi=1.0, dphi=0.0), 0.0, 1.0, 0.01)
        assert trajectory.phi[-1] == pytest.approx(1 + 0.5 * s, abs=1e-12)
        (event,) = trajectory.jump_events
        assert event.position == pytest.approx(0.5)
        assert event.dphi_minus == pytest.approx(0.0)
        assert event.dphi_plus == pytest.approx(s)

    def test_leftward_jump_subtracts_strength_times_phi(self):
        s = complex(-1.0, -0.5)
        field = single_delta_field(-0.5, s)
        trajectory = propagate(field, 0.0, StatePair(phi=1.0, dphi=0.0), 0.0, -1.0, 0.01)
        assert trajectory.direction == -1
        assert trajectory.dphi[-1] == pytest.approx(-s, abs=1e-12)
        assert trajectory.phi[-1] == pytest.approx(1 + 0.5 * s, abs=1e-12)
        (event,) = trajectory.jump_events
        assert event.dphi_plus == pytest.approx(0.0)
        assert event.dphi_minus == pytest.approx(-s)

    def test_delta_off_the_grid_is_rejected(self):
        field = single_delta_field(0.333, -1.0)
        with pytest.raises(GridAlignmentError):
            propagate(field, 0.5, StatePair(phi=1.0, dphi=0.0), 0.0, 1.0, 0.1)

    def test_overflow_guard_raises_divergence(self):
        with pytest.raises(DivergenceError) as info:
            propagate(free_field(), 10.0, StatePair(phi=1.0, dphi=10.0), 0.0, 20.0, 0.01, overflow_guard=1e10)
        assert info.value.position < 20.0

    def test_cubic_overflow_inside_a_stage_raises_divergence(self):
        trap = TrapSpec(separation=1.0, gamma=0.0, nonlinearity=0.1)
        with pytest.raises(DivergenceError) as info:
            propagate(original_field(trap), 0.5, StatePair(phi=1e170, dphi=0.0), 0.0, 1.0, 0.01)
        assert info.value.magnitude == math.inf
        assert info.value.position == pytest.approx(0.01)


def test_interior_norm_of_constant_state():
    start = StatePair(phi=1.0, dphi=0.0)
    left = propagate(free_field(), 0.0, start, 0.0, -1.0, 0.01)
    right = propagate(free_field(), 0.0, start, 0.0, 1.0, 0.01)
    assert interior_norm(left, right) == pytest.approx(2.0, abs=1e-12)


def test_exponential_tail():
    assert exponential_tail(2.0, 0.5 + 0.3j) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        exponential_tail(1.0, -0.1)


def test_norm_with_tails_of_a_cusped_exponential():
    # e^{-|x|} has unit norm; the shots stop at |x| = 3 and the tails supply the rest
    left = propagate(free_field(), 1.0, StatePair(phi=1.0, dphi=1.0), 0.0, -3.0, 0.01)
    right = propagate(free_field(), 1.0, StatePair(phi=1.0, dphi=-1.0), 0.0, 3.0, 0.01)
    assert norm_with_tails(left, right, 1.0) == pytest.approx(1.0, abs=1e-8)
    assert norm_with_tails(left, right, 1.0, left_decay_rate=2.0) < 1.0


class TestNewtonRoot:
    def test_solves_a_two_dimensional_system(self):
        result = newton_root(lambda u: np.array([u[0] ** 2 - 2.0, u[1] - 1.0]), [1.0, 0.0], tol=1e-12)
        assert result.root == pytest.approx([math.sqrt(2.0), 1.0], abs=1e-10)
        assert result.residual_norm < 1e-12

    def test_singular_jacobian(self):
        with pytest.raises(SingularJacobianError):
            newton_root(lambda u: np.array([u[0] + u[1] - 1.0, u[0] + u[1] - 1.0]), [0.3, 0.2])

    def test_no_root_raises_convergence_error(self):
        with pytest.raises(ConvergenceError):
            newton_root(lambda u: np.array([u[0] ** 2 + 1.0]), [0.5], max_iter=5)


class TestConvergence:
    def test_propagation_is_fourth_order(self):
        kappa = 1.5
        errors = []
        for h in (0.1, 0.05, 0.025):
            trajectory = propagate(free_field(), kappa, StatePair(phi=1.0, dphi=kappa), 0.0, 2.0, h)
            errors.append(abs(trajectory.phi[-1] - np.exp(2 * kappa)))
        orders = [math.log2(coarse / fine) for coarse, fine in zip(errors, errors[1:])]
        assert min(orders) >= 3.8

    def test_jumps_keep_the_order(self):
        field = single_delta_field(0.5, complex(-1.0, 0.3))
        reference = propagate(field, 0.8, StatePair(phi=1.0, dphi=0.2), 0.0, 1.0, 1e-3).phi[-1]
        errors = [
            abs(propagate(field, 0.8, StatePair(phi=1.0, dphi=0.2), 0.0, 1.0, h).phi[-1] - reference)
            for h in (0.1, 0.05)
        ]
        assert math.log2(errors[0] / errors[1]) >= 3.8
