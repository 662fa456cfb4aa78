"""Closed-form eigenvalue equation of the linear PT double-delta trap.

Below the exceptional point both roots are real and found by bracketing;
above it they form a conjugate pair found by complex Newton.
"""

import logging
import math
from typing import Tuple

import numpy as np
from scipy.optimize import brentq, newton

from app.errors import CalibrationError, OracleError
from app.models.solution import OracleRoots, ShootingUnknowns
from app.services.integrator import newton_root

logger = logging.getLogger(__name__)


def char_fn(kappa: complex, gamma: float, a: float) -> complex:
    """Vanishes at the decay rates of the bound states."""
    nu = complex(-1.0, gamma)
    return (2 * kappa + nu) * (2 * kappa + nu.conjugate()) - abs(nu) ** 2 * np.exp(-2 * kappa * a)


def char_fn_derivative(kappa: complex, gamma: float, a: float) -> complex:
    nu_sq = 1.0 + gamma**2
    return 8 * kappa - 4 + 2 * a * nu_sq * np.exp(-2 * kappa * a)


# Real restriction F(k) and its first two derivatives.
def _f(kappa: float, gamma: float, a: float) -> float:
    return (2 * kappa - 1) ** 2 + gamma**2 - (1 + gamma**2) * math.exp(-2 * kappa * a)


def _f1(kappa: float, gamma: float, a: float) -> float:
    return 4 * (2 * kappa - 1) + 2 * a * (1 + gamma**2) * math.exp(-2 * kappa * a)


def _f2(kappa: float, gamma: float, a: float) -> float:
    return 8 - 4 * a**2 * (1 + gamma**2) * math.exp(-2 * kappa * a)


def even_root(a: float) -> float:
    """gamma=0 symmetric state: 2k - 1 = exp(-k a)."""
    return brentq(lambda k: 2 * k - 1 - math.exp(-k * a), 0.5, 1.0, xtol=1e-15)


def odd_root(a: float) -> float:
    """gamma=0 antisymmetric state: 2k - 1 = -exp(-k a); exists only for a > 2."""
    if a <= 2:
        raise OracleError(f"a={a:g} supports a single bound state")
    k_min = math.log(a / 2) / a
    return brentq(lambda k: 2 * k - 1 + math.exp(-k * a), k_min, 0.5, xtol=1e-15)


def hermitian_roots(a: float) -> Tuple[float, float]:
    return even_root(a), odd_root(a)


def _minimum(gamma: float, a: float) -> float:
    """Position of the local minimum of F on the positive axis."""
    scale = a**2 * (1 + gamma**2) / 2
    if a * (1 + gamma**2) <= 2 or scale <= 1:
        raise OracleError(f"trap (gamma={gamma:g}, a={a:g}) supports fewer than two bound states")
    inflection = math.log(scale) / (2 * a)
    if _f1(inflection, gamma, a) >= 0:
        raise OracleError(f"trap (gamma={gamma:g}, a={a:g}) supports fewer than two bound states")
    return brentq(_f1, inflection, 1 + gamma, args=(gamma, a), xtol=1e-15)


def _maximum(gamma: float, a: float) -> float:
    scale = a**2 * (1 + gamma**2) / 2
    inflection = math.log(scale) / (2 * a)
    return brentq(_f1, 0.0, inflection, args=(gamma, a), xtol=1e-15)


def gap_function(gamma: float, a: float) -> float:
    """Minimum of F over positive k: negative below the EP, positive above."""
    return _f(_minimum(gamma, a), gamma, a)


def oracle_eigenvalues(gamma: float, a: float) -> OracleRoots:
    """Both bound-state decay constants at (gamma, a).

    State 0 is the larger-Re root below the EP and the root with Im E > 0
    (Im k < 0) above it.
    """
    if not a > 0:
        raise ValueError(f"separation must be positive, got {a}")
    k_star = _minimum(gamma, a)
    depth = _f(k_star, gamma, a)

    if abs(depth) < 1e-14:
        logger.info("gamma=%g is an exceptional point of a=%g", gamma, a)
        return OracleRoots(kappa0=complex(k_star), kappa1=complex(k_star), gamma=gamma, a=a, degenerate=True)

    if depth < 0:
        k_max = _maximum(gamma, a)
        k1 = brentq(_f, k_max, k_star, args=(gamma, a), xtol=1e-15)
        k0 = brentq(_f, k_star, 1 + gamma, args=(gamma, a), xtol=1e-15)
        return OracleRoots(kappa0=complex(k0), kappa1=complex(k1), gamma=gamma, a=a)

    seed = complex(k_star, -math.sqrt(2 * depth / _f2(k_star, gamma, a)))
    try:
        root = complex(
            newton(char_fn, seed, fprime=char_fn_derivative, args=(gamma, a), tol=1e-15, maxiter=100)
        )
    except RuntimeError as exc:
        raise OracleError(f"complex root search failed at gamma={gamma:g}: {exc}") from exc
    if abs(char_fn(root, gamma, a)) > 1e-12:
        raise OracleError(f"complex root search failed at gamma={gamma:g}")
    if root.imag > 0:
        root = root.conjugate()
    degenerate = abs(root.imag) < 5e-13
    return OracleRoots(kappa0=root, kappa1=root.conjugate(), gamma=gamma, a=a, degenerate=degenerate)


def find_exceptional_point(a: float) -> Tuple[float, complex]:
    """(gamma_crit, kappa_ep) where F = dF/dk = 0 on the real k axis."""
    if not a > 0:
        raise ValueError(f"separation must be positive, got {a}")
    try:
        gap_function(0.0, a)
    except OracleError as exc:
        raise OracleError(f"no exceptional point for a={a:g}: {exc}") from exc

    lo, hi = 0.0, 0.05
    while gap_function(hi, a) < 0:
        lo, hi = hi, hi + 0.05
        if hi > 20:
            raise OracleError(f"no exceptional point found for a={a:g}")
    gamma_seed = brentq(gap_function, lo, hi, args=(a,), xtol=1e-12)
    kappa_seed = _minimum(gamma_seed, a)

    result = newton_root(
        lambda u: np.array([_f(u[0], u[1], a), _f1(u[0], u[1], a)]),
        [kappa_seed, gamma_seed],
        tol=1e-13,
        max_iter=30,
    )
    kappa_ep, gamma_crit = result.root
    logger.info("exceptional point a=%g: gamma_crit=%.10f kappa=%.10f", a, gamma_crit, kappa_ep)
    return float(gamma_crit), complex(kappa_ep)


def calibrate_separation(target_E0_abs: float) -> float:
    """Separation a whose gamma=0 ground state has |E0| = target."""
    if not 0.25 < target_E0_abs < 1.0:
        raise CalibrationError(f"|E0|={target_E0_abs:g} is outside the reachable range (0.25, 1)")

    def mismatch(a: float) -> float:
        return even_root(a) ** 2 - target_E0_abs

    lo, hi = 1e-6, 1.0
    while mismatch(hi) > 0:
        hi *= 2
        if hi > 1e4:
            raise CalibrationError(f"|E0|={target_E0_abs:g} needs an unreachable separation")
    return brentq(mismatch, lo, hi, xtol=1e-14)


def analytic_state(kappa: complex, gamma: float, a: float) -> Tuple[complex, complex]:
    """phi(0) and phi'(0) of the closed-form state normalised to e^{kx} on the left."""
    nu_conj = complex(-1.0, -gamma)
    coeff_a = (2 * kappa + nu_conj) / (2 * kappa)
    coeff_b = -nu_conj * np.exp(-kappa * a) / (2 * kappa)
    return complex(coeff_a + coeff_b), complex(kappa * (coeff_a - coeff_b))


def oracle_seed(gamma: float, a: float, index: int) -> ShootingUnknowns:
    """Shooting unknowns from the closed-form state (unnormalised)."""
    roots = oracle_eigenvalues(gamma, a)
    kappa = roots.kappa0 if index == 0 else roots.kappa1
    phi0, dphi0 = analytic_state(kappa, gamma, a)
    gauge = "slope" if abs(phi0) < 1e-8 * max(1.0, abs(dphi0)) else "value"
    return ShootingUnknowns.from_state(phi0, dphi0, kappa, gauge)


def hermitian_seed(a: float, index: int) -> ShootingUnknowns:
    """gamma=0 seed from the even (index 0) or odd (index 1) matching equation."""
    if index == 0:
        kappa = even_root(a)
        return ShootingUnknowns.from_state(1.0, 0.0, kappa, "value")
    kappa = odd_root(a)
    return ShootingUnknowns.from_state(0.0, kappa, kappa, "slope")
