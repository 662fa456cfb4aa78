"""Services module."""

from .oracle import calibrate_separation, find_exceptional_point, oracle_eigenvalues
from .pipeline import ep_study, nonlinear_comparison, remove_state, sweep_spectrum
from .potentials import make_pt_trap, pt_field
from .runner import ExperimentRunner
from .shooting import solve_nonlinear_state, solve_state
from .susy import partner_potential, superpotential_family, superpotential_standard

__all__ = [
    "ExperimentRunner",
    "calibrate_separation",
    "find_exceptional_point",
    "oracle_eigenvalues",
    "ep_study",
    "nonlinear_comparison",
    "remove_state",
    "sweep_spectrum",
    "make_pt_trap",
    "pt_field",
    "solve_nonlinear_state",
    "solve_state",
    "partner_potential",
    "superpotential_family",
    "superpotential_standard",
]
