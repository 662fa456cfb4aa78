"""One trap geometry and numerical setting, shared by every experiment."""

from typing import Dict, List, Optional, Sequence

from app.config import get_settings
from app.models.reports import EPReport, NonlinearTable, RemovalReport, SpectrumTable
from app.models.solution import EigenSolution, OracleRoots
from app.services import pipeline
from app.services.oracle import calibrate_separation, even_root, odd_root, oracle_eigenvalues


class ExperimentRunner:
    """Run experiments on a trap of fixed separation with a fixed step and tolerance."""

    def __init__(self, a: Optional[float] = None, h: Optional[float] = None, tol: Optional[float] = None):
        settings = get_settings()
        self.a = settings.separation if a is None else a
        self.h = h
        self.tol = tol

    def states(self, gamma: float, g: float = 0.0) -> List[EigenSolution]:
        """Both original states; continued in g when the trap interacts."""
        if g > 0:
            return pipeline.nonlinear_states(gamma, self.a, g, self.h, self.tol)
        return pipeline.original_states(gamma, self.a, self.h, self.tol)

    def oracle(self, gamma: float) -> OracleRoots:
        return oracle_eigenvalues(gamma, self.a)

    def exceptional_point(self) -> EPReport:
        return pipeline.ep_study(self.a, self.h, self.tol)

    def remove(
        self, gamma: float, index: int, xi_left: Optional[complex] = None, g: float = 0.0
    ) -> RemovalReport:
        return pipeline.remove_state(gamma, self.a, index, xi_left, g, self.h, self.tol)

    def sweep(self, gamma_grid: Sequence[float], index: int, jobs: Optional[int] = None) -> SpectrumTable:
        return pipeline.sweep_spectrum(self.a, gamma_grid, index, self.h, self.tol, jobs)

    def nonlinear(self, g_values: Sequence[float], gamma_grid: Sequence[float]) -> NonlinearTable:
        return pipeline.nonlinear_comparison(g_values, self.a, gamma_grid, self.h, self.tol)

    @staticmethod
    def calibrate(target: float) -> Dict[str, float]:
        """Separation whose gain-free ground energy is -target, with both energies there."""
        a = calibrate_separation(target)
        return {"target": target, "a": a, "E0_1": -even_root(a) ** 2, "E1_1": -odd_root(a) ** 2}
