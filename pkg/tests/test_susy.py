import math

import numpy as np
import pytest

from app.errors import NodalStateError, PoleError, SuperpotentialError
from app.models import SampledRegion, SampledSmooth, TrapSpec
from app.services.oracle import even_root, oracle_eigenvalues
from app.services.potentials import evaluate_smooth, make_pt_trap
from app.services.shooting import solve_state
from app.services.susy import (
    apply_annihilator,
    fourth_order_gradient,
    partner_potential,
    partner_seed,
    reduce_xi,
    riccati_superpotential,
    superpotential_family,
    superpotential_from_state,
    superpotential_standard,
    verify_factorization,
)


def test_symmetric_ground_state_has_centred_xi(a):
    kappa = oracle_eigenvalues(0.0, a).kappa0
    superpotential = superpotential_standard(kappa, 0.0, a)
    assert superpotential.xis[1] == pytest.approx(0.0, abs=1e-8)
    assert superpotential.pole_markers == []
    assert superpotential.values([0.0])[0] == pytest.approx(0.0, abs=1e-10)


def test_standard_superpotential_rejects_non_eigenvalues(a):
    with pytest.raises(SuperpotentialError):
        superpotential_standard(0.5, 0.2, a)


@pytest.mark.parametrize("gamma, index", [(0.2, 0), (0.3, 1), (0.5, 0)])
def test_factorization_identity_holds(gamma, index, a):
    roots = oracle_eigenvalues(gamma, a)
    kappa = roots.kappa0 if index == 0 else roots.kappa1
    superpotential = superpotential_standard(kappa, gamma, a)
    assert verify_factorization(superpotential, make_pt_trap(gamma, a)) < 1e-8


def test_superpotential_jumps_cancel_the_deltas(a):
    gamma = 0.25
    superpotential = superpotential_standard(oracle_eigenvalues(gamma, a).kappa0, gamma, a)
    nu = complex(-1.0, gamma)
    (left_pos, left_jump), (right_pos, right_jump) = superpotential.jumps
    assert left_jump == pytest.approx(-nu.conjugate(), abs=1e-10)
    assert right_jump == pytest.approx(-nu, abs=1e-10)


def test_excited_removal_without_gain_has_a_pole_at_the_origin(a):
    kappa = oracle_eigenvalues(0.0, a).kappa1
    superpotential = superpotential_standard(kappa, 0.0, a)
    assert superpotential.pole_markers == pytest.approx([0.0], abs=1e-9)


def test_nodal_state_cannot_define_a_superpotential(states_at):
    _, excited = states_at(0.0)
    with pytest.raises(NodalStateError) as info:
        superpotential_from_state(excited)
    assert info.value.position == pytest.approx(0.0, abs=1e-2)


def test_family_limit_reproduces_the_standard_choice(a):
    gamma = 0.3
    kappa = oracle_eigenvalues(gamma, a).kappa0
    standard = superpotential_standard(kappa, gamma, a)
    family = superpotential_family(kappa, gamma, a, None)
    x = np.linspace(-4.0, 4.0, 81)
    assert np.allclose(family.values(x), standard.values(x), atol=1e-8)


def test_family_member_with_a_real_pole_is_rejected(a):
    kappa = even_root(a)
    xi_left = complex(-3.0, -math.pi / (2 * kappa))
    with pytest.raises(PoleError) as info:
        superpotential_family(kappa, 0.0, a, xi_left)
    assert any(abs(position + 3.0) < 1e-9 for position in info.value.positions)


def test_reduce_xi_lands_in_the_canonical_strip():
    kappa = 0.5 - 0.1j
    reduced = reduce_xi(complex(1.0, 20.0), kappa)
    assert 0 <= (kappa * reduced).imag < math.pi
    assert np.tanh(kappa * (0.3 - reduced)) == pytest.approx(np.tanh(kappa * (0.3 - complex(1.0, 20.0))))
    assert reduce_xi(None, kappa) is None


def test_mirrored_trap_constants_map_over_by_conjugation(a):
    # With the gain well on the other side (x -> -x) the family sends
    # xi_left = -2.34+2.02i to xi_right = 2.30+2.18i. For real kappa that trap
    # is the complex conjugate of this one, so the conjugated pair must match here.
    gamma = 0.3
    kappa = oracle_eigenvalues(gamma, a).kappa0
    assert abs(kappa.imag) < 1e-10
    family = superpotential_family(kappa, gamma, a, complex(-2.34, -2.02))
    expected = reduce_xi(complex(2.30, -2.18), kappa)
    assert reduce_xi(family.xis[-1], kappa) == pytest.approx(expected, abs=2e-2)


def test_fourth_order_gradient_of_a_polynomial_is_exact():
    x = np.linspace(0.0, 1.0, 11)
    assert fourth_order_gradient(x, x**4) == pytest.approx(4 * x**3, abs=1e-10)
    with pytest.raises(SuperpotentialError):
        fourth_order_gradient(x[:4], x[:4])


def test_partner_potential_negates_the_deltas(a):
    gamma = 0.2
    kappa = oracle_eigenvalues(gamma, a).kappa0
    partner = partner_potential(superpotential_standard(kappa, gamma, a), make_pt_trap(gamma, a))
    assert [d.strength for d in partner.trap.deltas] == [complex(1.0, 0.2), complex(1.0, -0.2)]
    assert partner.field.asymptote == pytest.approx(kappa**2)
    assert partner.field.kind == "partner"


def test_partner_smooth_part_without_gain(a):
    kappa = oracle_eigenvalues(0.0, a).kappa0
    partner = partner_potential(superpotential_standard(kappa, 0.0, a), make_pt_trap(0.0, a))
    assert evaluate_smooth(partner.field, 0.0) == pytest.approx(-(kappa**2), abs=1e-10)
    for x in (-5.0, -1.5, 1.2, 3.0):
        assert evaluate_smooth(partner.field, x) == pytest.approx(kappa**2, abs=1e-10)


def test_annihilator_removes_the_source_state(states_at, a):
    ground, _ = states_at(0.2)
    superpotential = superpotential_standard(ground.kappa, 0.2, a)
    image = apply_annihilator(superpotential, ground)
    assert np.max(np.abs(image.phi)) < 1e-6


def test_intertwining_maps_the_other_state_onto_the_partner_state(states_at, a):
    gamma = 0.2
    ground, excited = states_at(gamma)
    superpotential = superpotential_standard(ground.kappa, gamma, a)
    partner = partner_potential(superpotential, make_pt_trap(gamma, a))
    solution = solve_state(partner.field, partner_seed(partner, ground, excited))
    assert solution.energy == pytest.approx(excited.energy - ground.energy, abs=1e-6)

    image = apply_annihilator(superpotential, excited).phi
    psi = solution.wavefunction
    scale = np.vdot(psi, image) / np.vdot(psi, psi)
    assert np.max(np.abs(image - scale * psi)) / np.max(np.abs(image)) < 1e-5


def test_state_superpotential_matches_the_analytic_one(states_at, a):
    ground, _ = states_at(0.2)
    sampled = superpotential_from_state(ground)
    analytic = superpotential_standard(ground.kappa, 0.2, a)
    for index, piece in enumerate(sampled.pieces):
        region = np.full(piece.x.shape, index)
        assert np.allclose(piece.w, analytic.values(piece.x, region), atol=1e-7)


def test_riccati_reproduces_the_state_superpotential(states_at, a):
    ground, _ = states_at(0.2)
    sampled = superpotential_from_state(ground)
    background = SampledSmooth(
        regions=[SampledRegion(x=piece.x, values=piece.background) for piece in sampled.pieces]
    )
    integrated = riccati_superpotential(
        background, sampled.pieces[0].w[0], make_pt_trap(0.2, a), ground.kappa
    )
    for mine, reference in zip(integrated.pieces, sampled.pieces):
        assert np.allclose(mine.w, reference.w, atol=1e-6)


class TestRiccatiPoles:
    """W' = W^2 - kappa^2 from W(-2) = 2*kappa is -kappa*coth(kappa*(x - p))."""

    kappa = 0.5
    pole = -2.0 + math.atanh(0.5) / 0.5

    def background(self):
        x = np.linspace(-2.0, 2.0, 4001)
        return SampledSmooth(regions=[SampledRegion(x=x, values=np.full(x.shape, self.kappa**2 + 0j))])

    def trap(self):
        return TrapSpec(separation=1.0, gamma=0.0)

    def test_pole_is_reported(self):
        with pytest.raises(PoleError) as info:
            riccati_superpotential(self.background(), 2 * self.kappa, self.trap(), self.kappa)
        assert info.value.positions == pytest.approx([self.pole], abs=2e-3)

    def test_integration_continues_through_the_pole(self):
        superpotential = riccati_superpotential(
            self.background(), 2 * self.kappa, self.trap(), self.kappa, allow_poles=True
        )
        assert superpotential.pole_markers == pytest.approx([self.pole], abs=2e-3)
        piece = superpotential.pieces[0]
        expected = -self.kappa / np.tanh(self.kappa * (piece.x[-1] - self.pole))
        assert piece.w[-1] == pytest.approx(expected, abs=1e-6)
