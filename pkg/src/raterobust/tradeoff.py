"""Rate versus robustness trade-offs for GD and AG.

Two ways of trading speed for noise robustness are supported:

* penalized: minimize ``F_tau = J + tau / (1 - rho^2)`` for ``tau > 0``;
* constrained: pick parameters whose rate is a factor ``1 + eps`` slower
  than the fastest achievable one.

For GD the penalized problem is one-dimensional and its stationary points
are roots of an explicit polynomial.  For AG it is solved by a grid over the
stability region followed by a pattern search.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P
import scipy.optimize

from . import quad
from .errors import NumericalError, ValidationError
from .linsys import AlgorithmSpec, Method, QuadraticSpectrum, as_spectrum
from .quad import RateRobustnessPoint

MAX_EXACT_DIM = 8
DEFAULT_GRID = (40, 40)
DEFAULT_BETA_MAX = 1.0


class Mode(str, enum.Enum):
    TAU_PENALIZED = "tau"
    EPS_CONSTRAINED = "eps"


class Provenance(str, enum.Enum):
    EXACT_QUAD = "exact"
    UPPER_BOUND = "upper_bound"
    SDP_CERT = "sdp"


@dataclass(frozen=True, slots=True)
class TradeoffConfig:
    mode: Mode
    tau: float | None = None
    eps: float | None = None
    grid_alpha: int = DEFAULT_GRID[0]
    grid_beta: int = DEFAULT_GRID[1]

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.mode is Mode.TAU_PENALIZED and (self.tau is None or not self.tau > 0):
            raise ValidationError("penalized mode needs tau > 0", code="OUT_OF_RANGE")
        if self.mode is Mode.EPS_CONSTRAINED and (self.eps is None or self.eps < 0):
            raise ValidationError("constrained mode needs eps >= 0", code="EPS_OUT_OF_RANGE")
        _check_grid((self.grid_alpha, self.grid_beta))


@dataclass(frozen=True, slots=True)
class ParetoCurve:
    points: tuple[RateRobustnessPoint, ...]
    method: Method
    provenance: Provenance
    params: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        order = sorted(range(len(self.points)), key=lambda i: (self.points[i].rho, self.points[i].J))
        object.__setattr__(self, "points", tuple(self.points[i] for i in order))
        if self.params:
            object.__setattr__(self, "params", tuple(self.params[i] for i in order))

    @property
    def rates(self) -> np.ndarray:
        return np.array([p.rho for p in self.points])

    @property
    def robustness(self) -> np.ndarray:
        return np.array([p.J for p in self.points])


@dataclass(frozen=True, slots=True)
class GDOptimum:
    alpha: float
    rho: float
    J: float
    objective: float


@dataclass(frozen=True, slots=True)
class AGOptimum:
    alpha: float
    beta: float
    rho: float
    J: float
    objective: float


# --------------------------------------------------------------------------- polynomial roots

def _horner(coeffs: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    value = np.full_like(z, coeffs[0])
    deriv = np.zeros_like(z)
    for c in coeffs[1:]:
        deriv = deriv * z + value
        value = value * z + c
    return value, deriv


def poly_roots(coefficients: Sequence[float], tol: float = 1e-12, max_iter: int = 1000,
               seed: int = 0) -> np.ndarray:
    """All complex roots of a polynomial given highest degree first.

    Uses the Aberth-Ehrlich simultaneous iteration started from a randomly
    rotated circle whose radius is the Cauchy-type bound of the coefficients.
    Repeated roots are returned repeatedly.
    """
    c = np.asarray(coefficients, dtype=complex).ravel()
    if c.size < 2:
        raise ValidationError("polynomial must have degree at least one", code="DEGREE_ZERO")
    if abs(c[0]) <= 1e-300:
        raise ValidationError("leading coefficient must be nonzero", code="DEGREE_ZERO")
    if not np.all(np.isfinite(c)):
        raise ValidationError("non-finite coefficient", code="NONFINITE")

    # Exact zero roots are split off so the iteration never sees them.
    n_zero = 0
    while c.size > 1 and c[-1] == 0:
        c = c[:-1]
        n_zero += 1
    monic = c / c[0]
    n = monic.size - 1
    if n == 0:
        return np.zeros(n_zero, dtype=complex)

    rng = np.random.default_rng(seed)
    abs_tail = np.abs(monic[1:])
    radius = 0.5 * (np.max(abs_tail ** (1.0 / np.arange(1, n + 1))) + np.min(
        np.where(abs_tail > 0, abs_tail, np.inf) ** (1.0 / np.arange(1, n + 1))))
    if not np.isfinite(radius) or radius <= 0:
        radius = 1.0
    angles = 2 * np.pi * np.arange(n) / n + rng.uniform(0, 2 * np.pi / n) + 0.4
    z = radius * np.exp(1j * angles) * (1 + 0.01 * rng.standard_normal(n))

    abs_coeffs = np.abs(monic)
    for _ in range(max_iter):
        value, deriv = _horner(monic, z)
        backward = _horner(abs_coeffs.astype(complex), np.abs(z).astype(complex))[0].real
        settled = np.abs(value) <= 4 * np.finfo(float).eps * backward
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = value / deriv
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            repulsion = inv.sum(axis=1)
            step = ratio / (1.0 - ratio * repulsion)
        step = np.where(settled | ~np.isfinite(step), 0.0, step)
        z = z - step
        if np.all(np.abs(step) <= tol * np.maximum(1.0, np.abs(z))):
            break
    else:
        raise NumericalError("root iteration did not converge", code="NO_CONVERGENCE")
    return np.concatenate([z, np.zeros(n_zero, dtype=complex)])


# --------------------------------------------------------------------------- GD penalized problem

def _check_tau(tau: float) -> None:
    if not (tau > 0) or not math.isfinite(tau):
        raise ValidationError(f"tau must be positive and finite, got {tau}", code="OUT_OF_RANGE")


def gd_objective(alpha: float, tau: float, spectrum: QuadraticSpectrum) -> float:
    spectrum = as_spectrum(spectrum)
    rho = quad.gd_rate(alpha, spectrum.mu, spectrum.L)
    return quad.gd_robustness(alpha, spectrum) + tau / (1.0 - rho * rho)


def gd_stationarity_polynomials(tau: float, spectrum: QuadraticSpectrum) -> tuple[np.ndarray, np.ndarray]:
    """Numerators of ``dF_tau/dalpha`` on the two linear pieces of the rate.

    Returns ascending-order coefficient arrays.  The first applies where the
    rate is ``1 - alpha mu`` (small steps), the second where it is
    ``alpha L - 1``.  Each is the derivative multiplied by
    ``(alpha^2 lam_edge / 2) * prod_j (2 - alpha lam_j)^2``.
    """
    lam = spectrum.array
    squares = [P.polypow([2.0, -x], 2) for x in lam]

    def product(skip: int | None) -> np.ndarray:
        out = np.array([1.0])
        for j, sq in enumerate(squares):
            if j != skip:
                out = P.polymul(out, sq)
        return out

    cross = np.array([0.0])
    for i in range(len(lam)):
        cross = P.polyadd(cross, product(i))

    polys = []
    for edge, idx in ((spectrum.mu, 0), (spectrum.L, len(lam) - 1)):
        first = P.polymul([0.0, 0.0, edge / 2.0], cross)
        second = P.polymul([-tau, tau * edge], product(idx))
        polys.append(P.polyadd(first, second))
    return polys[0], polys[1]


def gd_optimal_stepsize_tau(tau: float, spectrum: QuadraticSpectrum) -> GDOptimum:
    """Exact minimizer of ``J(alpha) + tau / (1 - rho(alpha)^2)`` for GD.

    Candidates are the fastest stepsize ``2/(mu+L)`` and the real roots of
    the two stationarity polynomials lying in ``(0, 2/L)`` on the matching
    side of ``2/(mu+L)`` (equivalently, ``|1 - alpha mu|`` larger or smaller
    than ``|1 - alpha L|``).  Ties go to the smaller stepsize.
    """
    spectrum = as_spectrum(spectrum)
    _check_tau(tau)
    if spectrum.d > MAX_EXACT_DIM:
        raise ValidationError(
            f"exact path supports d <= {MAX_EXACT_DIM}; use a grid search for d={spectrum.d}",
            code="EXACT_PATH_UNSUPPORTED")
    mu, L = spectrum.mu, spectrum.L
    candidates = [2.0 / (mu + L)]
    small_side, large_side = gd_stationarity_polynomials(tau, spectrum)
    for poly, want_small in ((small_side, True), (large_side, False)):
        poly = P.polytrim(poly, tol=0.0)
        if poly.size < 2:
            continue
        for r in poly_roots(poly[::-1]):
            if abs(r.imag) > 1e-9:
                continue
            a = float(r.real)
            if not (0.0 < a < 2.0 / L):
                continue
            # Left of the fastest stepsize the rate is 1 - alpha mu, right of it alpha L - 1.
            if (a < candidates[0]) if want_small else (a > candidates[0]):
                candidates.append(a)
    values = [(gd_objective(a, tau, spectrum), a) for a in candidates]
    best_value = min(v for v, _ in values)
    ties = [a for v, a in values if v <= best_value + 1e-15 * max(1.0, abs(best_value))]
    alpha = min(ties)
    if not (0.0 < alpha < 2.0 / L):
        raise NumericalError("no interior candidate", code="NO_INTERIOR_CANDIDATE")
    return GDOptimum(alpha=alpha, rho=quad.gd_rate(alpha, mu, L),
                     J=quad.gd_robustness(alpha, spectrum), objective=gd_objective(alpha, tau, spectrum))


# --------------------------------------------------------------------------- eps parameterizations

def _check_kappa(mu: float, L: float) -> float:
    if not (0.0 < mu <= L):
        raise ValidationError(f"need 0 < mu <= L, got mu={mu}, L={L}", code="OUT_OF_RANGE")
    kappa = L / mu
    if kappa == 1.0:
        raise ValidationError("eps parameterizations need kappa > 1", code="KAPPA_ONE")
    return kappa


def gd_eps_limit(mu: float, L: float) -> float:
    return 2.0 / (_check_kappa(mu, L) - 1.0)


def ag_eps_limit(mu: float, L: float) -> float:
    root_kappa = math.sqrt(_check_kappa(mu, L))
    return math.sqrt(root_kappa / (root_kappa - 1.0)) - 1.0


def gd_fastest_rate(mu: float, L: float) -> float:
    return (L - mu) / (L + mu)


def ag_fastest_certified_rate(mu: float, L: float) -> float:
    return math.sqrt(1.0 - math.sqrt(mu / L))


def gd_alpha_for_eps(eps: float, mu: float, L: float) -> float:
    """Smaller stepsize whose GD rate is ``(1 + eps)`` times the fastest rate."""
    limit = gd_eps_limit(mu, L)
    if not (0.0 <= eps < limit):
        raise ValidationError(f"eps must lie in [0, {limit}), got {eps}", code="EPS_OUT_OF_RANGE")
    return (2.0 - eps * (L / mu - 1.0)) / (L + mu)


def ag_alpha_for_eps(eps: float, mu: float, L: float) -> tuple[float, float]:
    """AG parameters whose certified rate ``sqrt(1 - sqrt(alpha mu))`` is ``(1+eps)`` times the best."""
    limit = ag_eps_limit(mu, L)
    if not (0.0 <= eps < limit):
        raise ValidationError(f"eps must lie in [0, {limit}), got {eps}", code="EPS_OUT_OF_RANGE")
    root = 1.0 - (1.0 + eps) ** 2 * (1.0 - math.sqrt(mu / L))
    alpha = root * root / mu
    s = math.sqrt(alpha * mu)
    return alpha, (1.0 - s) / (1.0 + s)


# --------------------------------------------------------------------------- AG grid optimizers

def _check_grid(grid: Sequence[int]) -> tuple[int, int]:
    n_alpha, n_beta = (int(g) for g in grid)
    if n_alpha < 8 or n_beta < 8:
        raise ValidationError("grid counts must be at least 8", code="OUT_OF_RANGE")
    return n_alpha, n_beta


ArrayObjective = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _admissible(alpha, beta, mu, L):
    _, f_mu_1, f_mu_2 = quad._ag_factors(alpha, beta, mu)
    _, f_L_1, f_L_2 = quad._ag_factors(alpha, beta, L)
    guard = quad.DENOMINATOR_GUARD
    return ((quad.stability_margin_array(alpha, beta, mu, L) > 0.0)
            & (np.minimum(np.minimum(f_mu_1, f_mu_2), np.minimum(f_L_1, f_L_2)) > guard)
            & (quad.ag_rate_array(alpha, beta, mu, L) < 1.0 - 1e-12))


def _masked(objective: ArrayObjective, mu: float, L: float) -> ArrayObjective:
    def wrapped(alpha, beta):
        alpha = np.asarray(alpha, dtype=float)
        beta = np.asarray(beta, dtype=float)
        ok = _admissible(alpha, beta, mu, L) & (beta >= 0.0) & (alpha > 0.0)
        with np.errstate(all="ignore"):
            value = np.asarray(objective(alpha, beta), dtype=float)
        return np.where(ok & np.isfinite(value), value, np.inf)
    return wrapped


_DIRECTIONS = np.array([[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, -1], [1, -1], [-1, 1]], dtype=float)


def _pattern_search(objective: ArrayObjective, start: tuple[float, float], steps: tuple[float, float],
                    min_steps: tuple[float, float], max_iter: int = 20000,
                    rel_tol: float = 1e-10) -> tuple[float, float, float]:
    x = np.array(start, dtype=float)
    h = np.array(steps, dtype=float)
    h0 = h.copy()
    fx = float(objective(x[0:1], x[1:2])[0])
    directions = _DIRECTIONS if h[1] > 0 else _DIRECTIONS[:2]
    for _ in range(max_iter):
        trial = x[None, :] + directions * h[None, :]
        values = objective(trial[:, 0], trial[:, 1])
        k = int(np.argmin(values))
        # Gains below the relative tolerance count as failures so the steps keep shrinking.
        if values[k] < fx - rel_tol * abs(fx):
            x, fx = trial[k], float(values[k])
            h = np.minimum(2.0 * h, h0)
            continue
        if values[k] < fx:
            x, fx = trial[k], float(values[k])
        if np.all(h <= min_steps):
            break
        h = np.maximum(0.5 * h, min_steps)
    return float(x[0]), float(x[1]), fx


def _simplex_polish(objective: ArrayObjective, x: tuple[float, float, float],
                    frozen_beta: bool) -> tuple[float, float, float]:
    """Nelder-Mead from a pattern-search point; follows curved kinks that compass steps cannot."""
    la, b, value = x
    if not np.isfinite(value):
        return x
    scale = max(abs(value), 1e-300)

    if frozen_beta:
        def scalar(v):
            return float(objective(v[0:1], np.array([b]))[0]) / scale
        simplex = [[la], [la + 1e-2]]
    else:
        def scalar(v):
            return float(objective(v[0:1], v[1:2])[0]) / scale
        simplex = [[la, b], [la + 1e-2, b], [la, b + 1e-3]]
    res = scipy.optimize.minimize(scalar, simplex[0], method="Nelder-Mead",
                                  options={"xatol": 1e-10, "fatol": 1e-13, "maxfev": 2000,
                                           "initial_simplex": simplex})
    if not np.isfinite(res.fun) or res.fun * scale >= value:
        return x
    return float(res.x[0]), (b if frozen_beta else float(res.x[1])), float(res.fun * scale)


def region_grid(L: float, grid: Sequence[int], beta_max: float) -> tuple[np.ndarray, np.ndarray]:
    """Stepsize and momentum grid values.

    Each axis merges a uniform grid with a geometric one so that small
    stepsizes and momenta close to ``beta_max`` are resolved as well; the
    counts apply to each part.
    """
    n_alpha, n_beta = _check_grid(grid)
    top = 2.0 / L
    uniform = (np.arange(n_alpha) + 0.5) / n_alpha * top
    geometric = top * np.geomspace(1e-7, 1.0 - 0.25 / n_alpha, n_alpha)
    alphas = np.unique(np.concatenate([uniform, geometric]))
    if beta_max <= 0:
        return alphas, np.zeros(1)
    betas = np.unique(np.concatenate([
        np.linspace(0.0, beta_max, n_beta),
        beta_max * (1.0 - np.geomspace(1e-4, 1.0, n_beta)),
    ]))
    return alphas, betas


def minimize_over_region(objective: ArrayObjective, mu: float, L: float,
                         grid: Sequence[int] = DEFAULT_GRID, beta_max: float = DEFAULT_BETA_MAX,
                         seeds: Iterable[tuple[float, float]] = (), n_starts: int = 6) -> tuple[float, float, float]:
    """Grid search over the stability region followed by pattern-search refinement.

    ``objective`` is evaluated on arrays; points outside the open stability
    region count as infinite.  The refinement works in ``(log alpha, beta)``
    and halves its steps until they fall below ``1e-12``.  ``beta_max = 0``
    freezes the momentum at zero.  Extra starting points can be passed
    through ``seeds``; the best grid points are always used as starts too.
    """
    masked = _masked(objective, mu, L)
    alphas, betas = region_grid(L, grid, beta_max)
    AA, BB = np.meshgrid(alphas, betas, indexing="ij")
    values = masked(AA.ravel(), BB.ravel())
    starts = [(float(a), float(b)) for a, b in seeds]
    starts = [s for s in starts if np.isfinite(masked(np.array([s[0]]), np.array([s[1]]))[0])]
    finite = np.flatnonzero(np.isfinite(values))
    if finite.size == 0 and not starts:
        raise ValidationError("no grid point lies strictly inside the stability region", code="EMPTY_GRID")
    order = finite[np.argsort(values[finite], kind="stable")][:n_starts]
    starts += [(float(AA.ravel()[i]), float(BB.ravel()[i])) for i in order]

    def in_log(log_alpha, beta):
        return masked(np.exp(log_alpha), beta)

    step_log = float(np.max(np.diff(np.log(alphas))))
    step_beta = float(np.max(np.diff(betas))) if betas.size > 1 else 0.0
    fine = (1e-12, 1e-12 if step_beta > 0 else 0.0)
    coarse = (1e-4, 1e-4 if step_beta > 0 else 0.0)
    best = None
    for a0, b0 in starts:
        x = _pattern_search(in_log, (math.log(a0), b0), (step_log, step_beta), coarse)
        x = _simplex_polish(in_log, x, frozen_beta=step_beta == 0)
        la, b, value = _pattern_search(in_log, x[:2], (1e-3, 1e-4 if step_beta > 0 else 0.0), fine)
        result = (math.exp(la), b, value)
        if best is None or result[2] < best[2] or (result[2] == best[2] and result[:2] < best[:2]):
            best = result
    return best


def ag_objective_array(tau: float, spectrum: QuadraticSpectrum) -> ArrayObjective:
    lam = spectrum.array
    mu, L = spectrum.mu, spectrum.L

    def objective(alpha, beta):
        J = np.sum(quad.ag_u_array(alpha[..., None], beta[..., None], lam), axis=-1)
        rho = quad.ag_rate_array(alpha, beta, mu, L)
        return J + tau / (1.0 - rho * rho)
    return objective


def ag_ubound_objective_array(tau: float, mu: float, L: float, d: int) -> ArrayObjective:
    def objective(alpha, beta):
        Jbar = d * np.maximum(quad.ag_u_array(alpha, beta, mu), quad.ag_u_array(alpha, beta, L))
        rho = quad.ag_rate_array(alpha, beta, mu, L)
        return Jbar + tau / (1.0 - rho * rho)
    return objective


def _gd_seed(tau: float, mu: float, L: float, spectrum: QuadraticSpectrum | None) -> list[tuple[float, float]]:
    if spectrum is not None and spectrum.d <= MAX_EXACT_DIM:
        return [(gd_optimal_stepsize_tau(tau, spectrum).alpha, 0.0)]
    return [(2.0 / (mu + L), 0.0)]


def ag_optimize_exact(tau: float, spectrum: QuadraticSpectrum, grid: Sequence[int] = DEFAULT_GRID,
                      beta_max: float = DEFAULT_BETA_MAX) -> AGOptimum:
    """Minimize ``J(alpha, beta) + tau / (1 - rho^2)`` over the AG stability region."""
    spectrum = as_spectrum(spectrum)
    _check_tau(tau)
    mu, L = spectrum.mu, spectrum.L
    alpha, beta, value = minimize_over_region(ag_objective_array(tau, spectrum), mu, L, grid, beta_max,
                                              seeds=_gd_seed(tau, mu, L, spectrum))
    return AGOptimum(alpha=alpha, beta=beta, rho=quad.ag_rate(alpha, beta, mu, L),
                     J=quad.ag_robustness(alpha, beta, spectrum), objective=value)


def ag_optimize_ubound(tau: float, mu: float, L: float, d: int, grid: Sequence[int] = DEFAULT_GRID,
                       beta_max: float = DEFAULT_BETA_MAX) -> AGOptimum:
    """Minimize the spectrum-free relaxation ``d max(u(mu), u(L)) + tau / (1 - rho^2)``.

    The returned ``J`` is the relaxed robustness ``d max(u(mu), u(L))``.
    """
    _check_tau(tau)
    if d < 1:
        raise ValidationError("dimension must be at least 1", code="OUT_OF_RANGE")
    alpha, beta, value = minimize_over_region(ag_ubound_objective_array(tau, mu, L, d), mu, L, grid,
                                              beta_max, seeds=[(2.0 / (mu + L), 0.0)])
    return AGOptimum(alpha=alpha, beta=beta, rho=quad.ag_rate(alpha, beta, mu, L),
                     J=quad.ag_robustness_upper(alpha, beta, mu, L, d), objective=value)


def ag_optimize_rate_constrained(rate_cap: float, spectrum: QuadraticSpectrum,
                                 grid: Sequence[int] = DEFAULT_GRID,
                                 beta_max: float = DEFAULT_BETA_MAX) -> AGOptimum:
    """Most robust AG parameters whose rate does not exceed ``rate_cap``."""
    spectrum = as_spectrum(spectrum)
    mu, L = spectrum.mu, spectrum.L
    if not (0.0 < rate_cap < 1.0):
        raise ValidationError("rate cap must lie in (0, 1)", code="OUT_OF_RANGE")
    lam = spectrum.array

    def objective(alpha, beta):
        J = np.sum(quad.ag_u_array(alpha[..., None], beta[..., None], lam), axis=-1)
        rho = quad.ag_rate_array(alpha, beta, mu, L)
        return np.where(rho <= rate_cap, J, np.inf)

    seeds = []
    gd_alpha = (1.0 - rate_cap) / mu
    if quad.gd_rate(gd_alpha, mu, L) <= rate_cap:
        seeds.append((gd_alpha, 0.0))
    try:
        alpha, beta, value = minimize_over_region(objective, mu, L, grid, beta_max, seeds=seeds)
    except ValidationError as exc:
        raise ValidationError(f"no AG parameters reach rate {rate_cap}", code="INFEASIBLE_RATE") from exc
    if not np.isfinite(value):
        raise ValidationError(f"no AG parameters reach rate {rate_cap}", code="INFEASIBLE_RATE")
    return AGOptimum(alpha=alpha, beta=beta, rho=quad.ag_rate(alpha, beta, mu, L),
                     J=quad.ag_robustness(alpha, beta, spectrum), objective=value)


def gd_optimize_rate_constrained(rate_cap: float, spectrum: QuadraticSpectrum) -> GDOptimum:
    """Most robust GD stepsize with rate at most ``rate_cap``: the smallest admissible one."""
    spectrum = as_spectrum(spectrum)
    mu, L = spectrum.mu, spectrum.L
    if not (gd_fastest_rate(mu, L) <= rate_cap < 1.0):
        raise ValidationError("rate cap below the fastest GD rate", code="INFEASIBLE_RATE")
    alpha = (1.0 - rate_cap) / mu
    rho = quad.gd_rate(alpha, mu, L)
    return GDOptimum(alpha=alpha, rho=rho, J=quad.gd_robustness(alpha, spectrum), objective=np.nan)


# --------------------------------------------------------------------------- Pareto curves

def dominates(p: RateRobustnessPoint, q: RateRobustnessPoint) -> bool:
    return p.rho <= q.rho and p.J <= q.J and (p.rho < q.rho or p.J < q.J)


def pareto_filter(points: Iterable[RateRobustnessPoint]) -> list[RateRobustnessPoint]:
    """Non-dominated points sorted by rate; exact duplicates are kept once."""
    ordered = sorted(points, key=lambda p: (p.rho, p.J))
    kept: list[RateRobustnessPoint] = []
    best_J = math.inf
    for p in ordered:
        if p.J < best_J:
            kept.append(p)
            best_J = p.J
    return kept


def default_tau_grid(n: int = 60, low: float = 1e-4, high: float = 1e4) -> np.ndarray:
    return np.logspace(math.log10(low), math.log10(high), n)


def _ag_point(alpha: float, beta: float, J: float, rho: float) -> RateRobustnessPoint:
    return RateRobustnessPoint(rho=rho, J=J, params=AlgorithmSpec.ag(alpha, beta))


def sweep(method: Method | str, mode: Mode | str, values: Sequence[float],
          spectrum: QuadraticSpectrum | None = None, mu: float | None = None, L: float | None = None,
          d: int | None = None, grid: Sequence[int] = DEFAULT_GRID) -> tuple[list[RateRobustnessPoint], Provenance]:
    """Raw (unfiltered) trade-off points, one per parameter value, in input order.

    With a spectrum the exact quadratic robustness is used.  Without one,
    ``(mu, L, d)`` select spectrum-free upper bounds: the relaxed AG
    objective, or the worst-case GD robustness ``d u_gd(L)``.
    """
    method, mode = Method(method), Mode(mode)
    values = list(values)
    if not values:
        raise ValidationError("empty parameter sweep", code="EMPTY_SWEEP")
    if spectrum is not None:
        spectrum = as_spectrum(spectrum)
        mu, L, d = spectrum.mu, spectrum.L, spectrum.d
        provenance = Provenance.EXACT_QUAD
    else:
        if mu is None or L is None or d is None:
            raise ValidationError("need a spectrum or all of mu, L, d")
        provenance = Provenance.UPPER_BOUND
        worst = QuadraticSpectrum((L,) * d) if mu == L else QuadraticSpectrum.endpoints(mu, L, d)

    points = []
    for v in values:
        if method is Method.GD:
            if mode is Mode.TAU_PENALIZED:
                target = spectrum if spectrum is not None else worst
                alpha = gd_optimal_stepsize_tau(v, target).alpha if target.d <= MAX_EXACT_DIM else \
                    _gd_grid_tau(v, target)
            else:
                alpha = gd_alpha_for_eps(v, mu, L)
            J_spec = spectrum if spectrum is not None else QuadraticSpectrum((L,) * d)
            points.append(RateRobustnessPoint(
                rho=quad.gd_rate(alpha, mu, L), J=quad.gd_robustness(alpha, J_spec),
                Jprime=quad.gd_robustness_iterates(alpha, spectrum) if spectrum is not None else None,
                params=AlgorithmSpec.gd(alpha)))
        else:
            if mode is Mode.TAU_PENALIZED:
                opt = ag_optimize_exact(v, spectrum, grid) if spectrum is not None else \
                    ag_optimize_ubound(v, mu, L, d, grid)
                alpha, beta = opt.alpha, opt.beta
            else:
                alpha, beta = ag_alpha_for_eps(v, mu, L)
            if spectrum is not None:
                J = quad.ag_robustness(alpha, beta, spectrum)
                Jp = quad.ag_robustness_iterates(alpha, beta, spectrum)
            else:
                J, Jp = quad.ag_robustness_upper(alpha, beta, mu, L, d), None
            points.append(RateRobustnessPoint(rho=quad.ag_rate(alpha, beta, mu, L), J=J, Jprime=Jp,
                                              params=AlgorithmSpec.ag(alpha, beta)))
    return points, provenance


def _gd_grid_tau(tau: float, spectrum: QuadraticSpectrum, n: int = 20001) -> float:
    alphas = np.linspace(0, 2 / spectrum.L, n + 2)[1:-1]
    lam = spectrum.array
    rho = np.maximum(np.abs(1 - alphas * spectrum.mu), np.abs(1 - alphas * spectrum.L))
    F = np.sum(alphas[:, None] / (2 * (2 - alphas[:, None] * lam)), axis=1) + tau / (1 - rho ** 2)
    return float(alphas[int(np.argmin(F))])


def pareto_curve(method: Method | str, mode: Mode | str, values: Sequence[float] | None = None,
                 spectrum: QuadraticSpectrum | None = None, mu: float | None = None,
                 L: float | None = None, d: int | None = None,
                 grid: Sequence[int] = DEFAULT_GRID) -> ParetoCurve:
    """Sweep the trade-off parameter, drop dominated points and sort by rate."""
    method, mode = Method(method), Mode(mode)
    if values is None:
        if mode is not Mode.TAU_PENALIZED:
            raise ValidationError("an eps grid is required", code="EMPTY_SWEEP")
        values = default_tau_grid()
    points, provenance = sweep(method, mode, values, spectrum, mu, L, d, grid)
    by_id = {id(p): v for p, v in zip(points, values)}
    kept = pareto_filter(points)
    return ParetoCurve(points=tuple(kept), method=method, provenance=provenance,
                       params=tuple(float(by_id[id(p)]) for p in kept))


@dataclass(frozen=True, slots=True)
class DominanceEntry:
    rho_gd: float
    J_gd: float
    rho_ag: float
    J_ag: float
    alpha_ag: float
    beta_ag: float

    @property
    def dominated(self) -> bool:
        return self.rho_ag <= self.rho_gd and self.J_ag <= self.J_gd + 1e-9


def dominance_report(gd_points: Iterable[RateRobustnessPoint], spectrum: QuadraticSpectrum,
                     grid: Sequence[int] = DEFAULT_GRID) -> list[DominanceEntry]:
    """For each GD point, the most robust AG parameters that are at least as fast."""
    spectrum = as_spectrum(spectrum)
    report = []
    for p in gd_points:
        opt = ag_optimize_rate_constrained(p.rho, spectrum, grid)
        report.append(DominanceEntry(p.rho, p.J, opt.rho, opt.J, opt.alpha, opt.beta))
    return report
