"""Closed-form rate and noise-robustness formulas on strongly convex quadratics.

GD with stepsize ``alpha`` contracts at ``max |1 - alpha*lambda|`` and has
per-eigenvalue stationary suboptimality ``alpha / (2 (2 - alpha*lambda))``.
AG with momentum ``beta`` has a 2x2 closed-loop block per eigenvalue; its
rate follows from the block's characteristic polynomial and its robustness
from the rational function ``ag_u``.  The ``*_array`` helpers are vectorized
versions used by the grid optimizers; they do no validation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InstabilityError, ValidationError
from .linsys import AlgorithmSpec, QuadraticSpectrum, as_spectrum

DENOMINATOR_GUARD = 1e-14


class Region(str, enum.Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    OUTSIDE = "OUTSIDE"


@dataclass(frozen=True, slots=True)
class RateRobustnessPoint:
    rho: float
    J: float
    params: AlgorithmSpec
    Jprime: float | None = None


@dataclass(frozen=True, slots=True)
class StabilityVerdict:
    inside: bool
    region_label: Region
    margin: float


def _check_curvature(mu: float, L: float) -> None:
    if not (0.0 < mu <= L) or not np.isfinite(L):
        raise ValidationError(f"need 0 < mu <= L, got mu={mu}, L={L}", code="OUT_OF_RANGE")


def _check_gd_stepsize(alpha: float, L: float) -> None:
    if not (0.0 < alpha < 2.0 / L):
        raise ValidationError(f"stepsize {alpha} outside (0, 2/L) = (0, {2.0 / L})",
                              code="OUT_OF_RANGE")


# --------------------------------------------------------------------------- GD

def gd_rate(alpha: float, mu: float, L: float) -> float:
    """Worst-case linear rate of GD; values at or above one mean divergence."""
    _check_curvature(mu, L)
    if alpha <= 0.0:
        raise ValidationError("stepsize must be positive", code="OUT_OF_RANGE")
    return max(abs(1.0 - alpha * mu), abs(1.0 - alpha * L))


def gd_robustness(alpha: float, spectrum: QuadraticSpectrum) -> float:
    spectrum = as_spectrum(spectrum)
    _check_gd_stepsize(alpha, spectrum.L)
    lam = spectrum.array
    return float(np.sum(alpha / (2.0 * (2.0 - alpha * lam))))


def gd_robustness_iterates(alpha: float, spectrum: QuadraticSpectrum) -> float:
    spectrum = as_spectrum(spectrum)
    _check_gd_stepsize(alpha, spectrum.L)
    lam = spectrum.array
    return float(np.sum(alpha / (lam * (2.0 - alpha * lam))))


def gd_lower_bound(alpha: float, spectrum: QuadraticSpectrum) -> float:
    """A rate-dependent lower bound on ``gd_robustness``.

    Fast contraction forces large noise amplification: the bound is
    ``(1 - rho^2) * sum(1 / (8 lambda_i))``.
    """
    spectrum = as_spectrum(spectrum)
    _check_gd_stepsize(alpha, spectrum.L)
    rho = gd_rate(alpha, spectrum.mu, spectrum.L)
    return float((1.0 - rho * rho) * np.sum(1.0 / (8.0 * spectrum.array)))


def gd_point(alpha: float, spectrum: QuadraticSpectrum) -> RateRobustnessPoint:
    spectrum = as_spectrum(spectrum)
    return RateRobustnessPoint(
        rho=gd_rate(alpha, spectrum.mu, spectrum.L),
        J=gd_robustness(alpha, spectrum),
        Jprime=gd_robustness_iterates(alpha, spectrum),
        params=AlgorithmSpec.gd(alpha),
    )


# --------------------------------------------------------------------------- AG rate

def ag_delta_array(alpha, beta, lam):
    h = 1.0 - np.multiply(alpha, lam)
    return (1.0 + beta) ** 2 * h * h - 4.0 * beta * h


def ag_rate_lambda_array(alpha, beta, lam):
    """Spectral radius of the AG block for one eigenvalue (vectorized)."""
    h = 1.0 - np.multiply(alpha, lam)
    delta = (1.0 + beta) ** 2 * h * h - 4.0 * beta * h
    real_branch = 0.5 * np.abs((1.0 + beta) * h) + 0.5 * np.sqrt(np.maximum(delta, 0.0))
    complex_branch = np.sqrt(np.maximum(beta * h, 0.0))
    return np.where(delta >= 0.0, real_branch, complex_branch)


def ag_rate_array(alpha, beta, mu, L):
    return np.maximum(ag_rate_lambda_array(alpha, beta, mu), ag_rate_lambda_array(alpha, beta, L))


def ag_delta(alpha: float, beta: float, lam: float) -> float:
    """Discriminant of the AG block's characteristic polynomial."""
    return float(ag_delta_array(alpha, beta, lam))


def ag_rate_lambda(alpha: float, beta: float, lam: float) -> float:
    return float(ag_rate_lambda_array(alpha, beta, lam))


def ag_rate(alpha: float, beta: float, mu: float, L: float) -> float:
    """Worst-case linear rate of AG over eigenvalues in ``[mu, L]``.

    The block spectral radius is quasi-convex in the eigenvalue, so the two
    endpoints decide.  On the seam ``delta == 0`` the real-root branch is
    used; both branches agree there.
    """
    _check_curvature(mu, L)
    if alpha <= 0.0 or beta < 0.0:
        raise ValidationError("need alpha > 0 and beta >= 0", code="OUT_OF_RANGE")
    return float(ag_rate_array(alpha, beta, mu, L))


# --------------------------------------------------------------------------- stability region

def stability_margin_array(alpha, beta, mu, L):
    """Smallest slack among the inequalities defining the open stability region."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    momentum_slack = 1.0 - beta * (1.0 - alpha * mu)
    curvature_slack = 1.0 / (2.0 * beta + 1.0) - (alpha * L - 1.0)
    return np.minimum(np.minimum(alpha, momentum_slack), curvature_slack)


def in_stability_region(alpha: float, beta: float, mu: float, L: float) -> StabilityVerdict:
    """Membership of ``(alpha, beta)`` in the open AG stability region.

    The region is the union of three pieces split by the stepsize: up to
    ``1/L`` (S1), between ``1/L`` and ``min(2/L, 1/mu)`` (S2), and from
    ``1/mu`` to ``2/L`` (S3, nonempty only when ``mu >= L/2``).  All pieces
    share the two inequalities ``beta (1 - alpha mu) < 1`` and
    ``alpha L - 1 < 1 / (2 beta + 1)``, whose smallest slack is reported as
    ``margin``.  Points on the closure boundary are OUTSIDE.  Where pieces
    overlap the lowest index wins.
    """
    _check_curvature(mu, L)
    if alpha < 0.0 or beta < 0.0:
        raise ValidationError("need alpha >= 0 and beta >= 0", code="OUT_OF_RANGE")
    margin = float(stability_margin_array(alpha, beta, mu, L))
    if margin <= 0.0:
        return StabilityVerdict(False, Region.OUTSIDE, margin)
    if alpha <= 1.0 / L:
        label = Region.S1
    elif alpha <= min(2.0 / L, 1.0 / mu):
        label = Region.S2
    else:
        label = Region.S3
    return StabilityVerdict(True, label, margin)


def _require_stable(alpha: float, beta: float, mu: float, L: float) -> None:
    verdict = in_stability_region(alpha, beta, mu, L)
    if not verdict.inside:
        raise InstabilityError(
            f"(alpha, beta) = ({alpha}, {beta}) is outside the stability region",
            code="NOT_STABLE", margin=verdict.margin)


# --------------------------------------------------------------------------- AG robustness

def _ag_factors(alpha, beta, lam):
    h = 1.0 - np.multiply(alpha, lam)
    numerator = alpha * (1.0 + beta * h)
    momentum_factor = 1.0 - beta * h
    curvature_factor = 2.0 + 2.0 * beta - np.multiply(alpha, lam) * (1.0 + 2.0 * beta)
    return numerator, momentum_factor, curvature_factor


def ag_u_array(alpha, beta, lam):
    numerator, f1, f2 = _ag_factors(alpha, beta, lam)
    return numerator / (2.0 * f1 * f2)


def ag_u_iterates_array(alpha, beta, lam):
    numerator, f1, f2 = _ag_factors(alpha, beta, lam)
    return numerator / (np.multiply(lam, f1) * f2)


def _guard(alpha: float, beta: float, lam: float) -> None:
    _, f1, f2 = _ag_factors(alpha, beta, lam)
    if f1 <= DENOMINATOR_GUARD or f2 <= DENOMINATOR_GUARD:
        raise InstabilityError(
            f"robustness diverges at lambda={lam} for (alpha, beta)=({alpha}, {beta})",
            code="DIVERGENT")


def ag_u(alpha: float, beta: float, lam: float) -> float:
    """Stationary suboptimality contributed by one eigenvalue ``lam`` under AG."""
    _guard(alpha, beta, lam)
    return float(ag_u_array(alpha, beta, lam))


def ag_u_iterates(alpha: float, beta: float, lam: float) -> float:
    """Stationary squared distance contributed by one eigenvalue; ``u = (lam/2) u'``."""
    _guard(alpha, beta, lam)
    return float(ag_u_iterates_array(alpha, beta, lam))


def ag_robustness(alpha: float, beta: float, spectrum: QuadraticSpectrum) -> float:
    spectrum = as_spectrum(spectrum)
    _require_stable(alpha, beta, spectrum.mu, spectrum.L)
    for lam in (spectrum.mu, spectrum.L):
        _guard(alpha, beta, lam)
    return float(np.sum(ag_u_array(alpha, beta, spectrum.array)))


def ag_robustness_iterates(alpha: float, beta: float, spectrum: QuadraticSpectrum) -> float:
    spectrum = as_spectrum(spectrum)
    _require_stable(alpha, beta, spectrum.mu, spectrum.L)
    for lam in (spectrum.mu, spectrum.L):
        _guard(alpha, beta, lam)
    return float(np.sum(ag_u_iterates_array(alpha, beta, spectrum.array)))


def ag_robustness_upper(alpha: float, beta: float, mu: float, L: float, d: int) -> float:
    """Spectrum-free bound ``d * max(u(mu), u(L))``, valid because ``u`` is convex."""
    _require_stable(alpha, beta, mu, L)
    return d * max(ag_u(alpha, beta, mu), ag_u(alpha, beta, L))


def ag_robustness_worst_case(alpha: float, beta: float, mu: float, L: float, d: int) -> float:
    """Largest robustness over spectra containing both ``mu`` and ``L``."""
    _require_stable(alpha, beta, mu, L)
    u_mu, u_L = ag_u(alpha, beta, mu), ag_u(alpha, beta, L)
    if d == 1:
        return max(u_mu, u_L)
    return (d - 1) * max(u_mu, u_L) + min(u_mu, u_L)


def ag_point(alpha: float, beta: float, spectrum: QuadraticSpectrum) -> RateRobustnessPoint:
    spectrum = as_spectrum(spectrum)
    return RateRobustnessPoint(
        rho=ag_rate(alpha, beta, spectrum.mu, spectrum.L),
        J=ag_robustness(alpha, beta, spectrum),
        Jprime=ag_robustness_iterates(alpha, beta, spectrum),
        params=AlgorithmSpec.ag(alpha, beta),
    )
