"""Seeded Monte Carlo runs of GD and AG with additive gradient noise.

Replicas advance together as one ``(replicas, d)`` array.  Each replica
draws its noise from its own Philox stream, keyed by ``(seed, replica)``.
The draws are consumed in step order, so a trajectory does not depend on
how many replicas run alongside it.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator, TextIO

import numpy as np
from scipy.special import expit

from .errors import NumericalError, ValidationError
from .linsys import AlgorithmSpec, Method, QuadraticSpectrum
from .quad import ag_rate, gd_rate, in_stability_region

CHUNK = 256
IMPULSE_MAX_STEPS = 10 ** 6


class NoiseDistribution(str, enum.Enum):
    GAUSSIAN_ISOTROPIC = "gaussian"


@dataclass(frozen=True, slots=True)
class NoiseModel:
    sigma: float
    distribution: NoiseDistribution = NoiseDistribution.GAUSSIAN_ISOTROPIC

    def __post_init__(self) -> None:
        if not (self.sigma >= 0.0) or not math.isfinite(self.sigma):
            raise ValidationError(f"noise level must be finite and nonnegative, got {self.sigma}",
                                  code="OUT_OF_RANGE")


@dataclass(frozen=True, slots=True)
class EstimatorConfig:
    replicas: int = 100
    k_max: int = 2000
    burn_in: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.replicas < 1:
            raise ValidationError("need at least one replica", code="OUT_OF_RANGE")
        if self.k_max < 1:
            raise ValidationError("k_max must be positive", code="OUT_OF_RANGE")
        if self.burn_in is not None and not (0 <= self.burn_in < self.k_max):
            raise ValidationError("burn_in must lie in [0, k_max)", code="OUT_OF_RANGE")
        if not (0 <= self.seed < 2 ** 64):
            raise ValidationError("seed must be a 64-bit unsigned integer", code="OUT_OF_RANGE")


# --------------------------------------------------------------------------- objectives

class Objective:
    """Smooth strongly convex test function with known minimizer.

    ``value`` and ``gradient`` act row-wise on arrays of shape ``(n, d)``.
    """

    d: int
    mu: float
    L: float
    x_star: np.ndarray
    f_star: float

    def value(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def is_quadratic(self) -> bool:
        return False


class QuadraticObjective(Objective):
    """``f(x) = 1/2 (x - x*)' Q (x - x*) + f*`` with a diagonal or dense Hessian."""

    def __init__(self, hessian, x_star=None, f_star: float = 0.0):
        H = np.asarray(hessian, dtype=float)
        self.diagonal = H.ndim == 1
        self.hessian = H
        self.eigenvalues = np.sort(H if self.diagonal else np.linalg.eigvalsh(0.5 * (H + H.T)))
        self.d = self.eigenvalues.size
        self.mu = float(self.eigenvalues[0])
        self.L = float(self.eigenvalues[-1])
        self.x_star = np.zeros(self.d) if x_star is None else np.asarray(x_star, dtype=float)
        self.f_star = float(f_star)

    @classmethod
    def from_spectrum(cls, spectrum, x_star=None) -> "QuadraticObjective":
        values = spectrum.array if isinstance(spectrum, QuadraticSpectrum) else np.asarray(spectrum, float)
        return cls(values, x_star)

    @property
    def is_quadratic(self) -> bool:
        return True

    @property
    def spectrum(self) -> QuadraticSpectrum:
        return QuadraticSpectrum(tuple(self.eigenvalues))

    def _apply(self, E: np.ndarray) -> np.ndarray:
        return E * self.hessian if self.diagonal else E @ self.hessian

    def value(self, X: np.ndarray) -> np.ndarray:
        E = np.atleast_2d(X) - self.x_star
        return 0.5 * np.sum(E * self._apply(E), axis=1) + self.f_star

    def gradient(self, X: np.ndarray) -> np.ndarray:
        return self._apply(np.atleast_2d(X) - self.x_star)


def cyclic_laplacian(d: int) -> np.ndarray:
    lap = 2.0 * np.eye(d)
    idx = np.arange(d)
    lap[idx, (idx + 1) % d] -= 1.0
    lap[idx, (idx - 1) % d] -= 1.0
    return lap


def make_laplacian_objective(d: int, delta: float = 0.1, seed: int = 0) -> QuadraticObjective:
    """``1/2 x' Lap x + delta |x|^2 - p' x`` on a cycle of ``d`` nodes with a seeded linear term.

    When ``delta = 0`` the Hessian is singular.  The linear term is then
    projected onto its range and the minimum-norm minimizer is used.
    """
    if d < 2:
        raise ValidationError("a cycle needs at least two nodes", code="OUT_OF_RANGE")
    if delta < 0.0:
        raise ValidationError("regularization must be nonnegative", code="OUT_OF_RANGE")
    Q = cyclic_laplacian(d) + 2.0 * delta * np.eye(d)
    p = np.random.default_rng(seed).standard_normal(d)
    if delta == 0.0:
        p -= p.mean()
    x_star = np.linalg.lstsq(Q, p, rcond=None)[0]
    f_star = -0.5 * float(p @ x_star)
    return QuadraticObjective(Q, x_star, f_star)


class LogisticObjective(Objective):
    """Mean logistic loss of a linear classifier plus ``delta |x|^2``."""

    def __init__(self, data: np.ndarray, labels: np.ndarray, delta: float, tol: float = 1e-10):
        self.data = np.asarray(data, dtype=float)
        self.labels = np.asarray(labels, dtype=float)
        if delta <= 0.0:
            raise ValidationError("regularization must be positive", code="OUT_OF_RANGE")
        self.delta = float(delta)
        n, self.d = self.data.shape
        self.mu = 2.0 * delta
        self.L = 2.0 * delta + float(np.linalg.norm(self.data, 2)) ** 2 / (4.0 * n)
        self.x_star = self._solve(tol)
        self.f_star = float(self.value(self.x_star)[0])

    def value(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        margins = (X @ self.data.T) * self.labels
        return np.mean(np.logaddexp(0.0, -margins), axis=1) + self.delta * np.sum(X * X, axis=1)

    def gradient(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        margins = (X @ self.data.T) * self.labels
        weights = -self.labels * expit(-margins) / self.data.shape[0]
        return weights @ self.data + 2.0 * self.delta * X

    def _solve(self, tol: float) -> np.ndarray:
        """Noiseless AG with the standard strongly convex momentum, run to gradient norm ``tol``."""
        alpha = 1.0 / self.L
        s = math.sqrt(alpha * self.mu)
        beta = (1.0 - s) / (1.0 + s)
        x_prev = x = np.zeros((1, self.d))
        for _ in range(IMPULSE_MAX_STEPS):
            y = (1.0 + beta) * x - beta * x_prev
            g = self.gradient(y)
            x_prev, x = x, y - alpha * g
            if np.linalg.norm(self.gradient(x)) <= tol:
                return x[0]
        raise NumericalError("logistic minimizer did not converge", code="NO_CONVERGENCE")


def make_logistic_objective(n: int = 2000, d: int = 100, delta: float | None = None,
                            kappa: float = 1e3, seed: int = 0) -> LogisticObjective:
    """Synthetic classification data: standard normal features, labels from a planted separator with 10% flips.

    With ``delta`` unset, the regularization is chosen so that ``L / mu``
    equals ``kappa``.
    """
    rng = np.random.default_rng(seed)
    data = rng.standard_normal((n, d))
    planted = rng.standard_normal(d)
    labels = np.sign(data @ planted)
    labels[labels == 0] = 1.0
    labels[rng.random(n) < 0.1] *= -1.0
    if delta is None:
        data_smoothness = float(np.linalg.norm(data, 2)) ** 2 / (4.0 * n)
        delta = data_smoothness / (2.0 * (kappa - 1.0))
    return LogisticObjective(data, labels, delta)


# --------------------------------------------------------------------------- runner

@dataclass
class Trajectory:
    """Per-step suboptimality and squared distance, shape ``(replicas, k_max + 1)``."""

    subopt: np.ndarray
    dist2: np.ndarray
    seed: int
    meta: dict = field(default_factory=dict)

    def to_csv(self, stream: TextIO, schema_version: int = 1) -> None:
        stream.write(f"# schema-version: {schema_version}\n")
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["k", "replica", "subopt", "dist2"])
        replicas, steps = self.subopt.shape
        for r in range(replicas):
            for k in range(steps):
                writer.writerow([k, r, f"{self.subopt[r, k]:.12g}", f"{self.dist2[r, k]:.12g}"])


def replica_generators(seed: int, replicas: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(r,))))
            for r in range(replicas)]


def _warn_if_unstable(spec: AlgorithmSpec, objective: Objective) -> None:
    if not objective.is_quadratic:
        return
    mu, L = objective.mu, objective.L
    if spec.method is Method.GD:
        stable = gd_rate(spec.alpha, mu, L) < 1.0
    else:
        stable = in_stability_region(spec.alpha, spec.beta, mu, L).inside
    if not stable:
        warnings.warn("parameters are outside the stability region; iterates may diverge",
                      RuntimeWarning, stacklevel=3)


def _steps(spec: AlgorithmSpec, objective: Objective, X0: np.ndarray, sigma: float,
           k_max: int, generators) -> Iterator[np.ndarray]:
    """Yields the iterate array for k = 0..k_max, drawing noise after each iterate is formed."""
    alpha, beta = spec.alpha, (spec.beta if spec.method is Method.AG else 0.0)
    x = X0.copy()
    x_prev = x.copy()
    noise = None
    yield x
    for k in range(k_max):
        j = k % CHUNK
        if j == 0 and sigma > 0.0:
            block = min(CHUNK, k_max - k)
            noise = np.stack([g.standard_normal((block, x.shape[1])) for g in generators], axis=1)
        y = x if beta == 0.0 else (1.0 + beta) * x - beta * x_prev
        g = objective.gradient(y)
        if sigma > 0.0:
            g = g + sigma * noise[j]
        x_prev, x = x, y - alpha * g
        if not np.all(np.isfinite(x)):
            raise NumericalError(f"iterate became non-finite at step {k + 1}", code="NONFINITE",
                                 step=k + 1)
        yield x


def _initial(objective: Objective, x0, replicas: int) -> np.ndarray:
    x0 = objective.x_star if x0 is None else np.asarray(x0, dtype=float)
    if x0.shape != (objective.d,):
        raise ValidationError(f"initial point must have shape ({objective.d},)", code="OUT_OF_RANGE")
    return np.tile(x0, (replicas, 1))


def run_noisy(spec: AlgorithmSpec, objective: Objective, x0=None, noise: NoiseModel = NoiseModel(0.0),
              k_max: int = 1000, seed: int = 0, replicas: int = 1) -> Trajectory:
    """Simulate ``replicas`` independent noisy runs and record both error measures at every step."""
    _warn_if_unstable(spec, objective)
    X = _initial(objective, x0, replicas)
    subopt = np.empty((replicas, k_max + 1))
    dist2 = np.empty((replicas, k_max + 1))
    for k, x in enumerate(_steps(spec, objective, X, noise.sigma, k_max,
                                 replica_generators(seed, replicas))):
        subopt[:, k] = objective.value(x) - objective.f_star
        dist2[:, k] = np.sum((x - objective.x_star) ** 2, axis=1)
    return Trajectory(subopt, dist2, seed, {"spec": spec, "sigma": noise.sigma})


def nominal_rate(spec: AlgorithmSpec, mu: float, L: float) -> float:
    if spec.method is Method.GD:
        return gd_rate(spec.alpha, mu, L)
    return ag_rate(spec.alpha, spec.beta, mu, L)


def default_burn_in(spec: AlgorithmSpec, objective: Objective, k_max: int) -> int:
    if objective.is_quadratic:
        rho = nominal_rate(spec, objective.mu, objective.L)
        if 0.0 < rho < 1.0:
            return min(int(math.ceil(math.log(1e-6) / (2.0 * math.log(rho)))), k_max - 1)
        if rho == 0.0:
            return 1 if k_max > 1 else 0
    return k_max // 2


def _stationary_average(spec, objective, noise, config, measure: str) -> tuple[float, float]:
    if noise.sigma <= 0.0:
        raise ValidationError("estimating robustness needs positive noise", code="OUT_OF_RANGE")
    _warn_if_unstable(spec, objective)
    burn_in = config.burn_in if config.burn_in is not None else default_burn_in(spec, objective, config.k_max)
    X = _initial(objective, None, config.replicas)
    totals = np.zeros(config.replicas)
    for k, x in enumerate(_steps(spec, objective, X, noise.sigma, config.k_max,
                                 replica_generators(config.seed, config.replicas))):
        if k < burn_in:
            continue
        if measure == "J":
            totals += objective.value(x) - objective.f_star
        else:
            totals += np.sum((x - objective.x_star) ** 2, axis=1)
    means = totals / ((config.k_max - burn_in + 1) * noise.sigma ** 2)
    stderr = float(np.std(means, ddof=1) / math.sqrt(config.replicas)) if config.replicas > 1 else math.nan
    return float(np.mean(means)), stderr


def estimate_J(spec: AlgorithmSpec, objective: Objective, noise: NoiseModel,
               config: EstimatorConfig = EstimatorConfig()) -> tuple[float, float]:
    """Time-and-replica average of ``(f(x_k) - f*) / sigma^2`` after burn-in, with its standard error."""
    return _stationary_average(spec, objective, noise, config, "J")


def estimate_Jprime(spec: AlgorithmSpec, objective: Objective, noise: NoiseModel,
                    config: EstimatorConfig = EstimatorConfig()) -> tuple[float, float]:
    return _stationary_average(spec, objective, noise, config, "Jprime")


def impulse_J_star(spec: AlgorithmSpec, objective: Objective, rate: float | None = None,
                   rel_tol: float = 1e-12, history: str = "optimum") -> float:
    """Summed squared distance to the optimum after a unit gradient kick along each coordinate.

    All ``d`` kicks run together from the optimum.  The sum stops when a
    geometric tail estimate drops below ``rel_tol`` times the running total.
    The estimate is built from the squared norm of the whole state, both the
    current and previous iterate, because one oscillating iterate can pass
    close to the optimum.  ``rate`` sets the tail ratio.  By default it is the
    quadratic worst-case rate for the objective's curvature range.

    ``history="optimum"`` is the true impulse response: the momentum
    method's previous iterate starts at the optimum.  ``history="repeat"``
    starts it at the kicked point instead, which is the initial condition
    under which ``perturb_stability_bounds`` is derived for momentum.
    """
    if history not in ("optimum", "repeat"):
        raise ValidationError(f"unknown history {history!r}", code="OUT_OF_RANGE")
    d = objective.d
    rho = nominal_rate(spec, objective.mu, objective.L) if rate is None else rate
    if not (0.0 <= rho < 1.0):
        raise ValidationError("impulse response needs a convergent method", code="NOT_STABLE")
    ratio = math.sqrt(rho) if rho > 0.0 else 0.0
    alpha, beta = spec.alpha, (spec.beta if spec.method is Method.AG else 0.0)
    x = np.tile(objective.x_star, (d, 1)) - alpha * np.eye(d)
    x_prev = x.copy() if history == "repeat" else np.tile(objective.x_star, (d, 1))
    total = 0.0
    for _ in range(IMPULSE_MAX_STEPS):
        term = float(np.sum((x - objective.x_star) ** 2))
        total += term
        if not math.isfinite(total):
            raise NumericalError("impulse response diverged", code="NONFINITE")
        state = term + float(np.sum((x_prev - objective.x_star) ** 2))
        if state * ratio / (1.0 - ratio) <= rel_tol * total:
            return total
        y = x if beta == 0.0 else (1.0 + beta) * x - beta * x_prev
        x_prev, x = x, y - alpha * objective.gradient(y)
    raise NumericalError("impulse response did not settle", code="NO_CONVERGENCE")


def tail_average(trajectory: Trajectory, fraction: float = 0.5, measure: str = "subopt") -> float:
    values = trajectory.subopt if measure == "subopt" else trajectory.dist2
    start = int(values.shape[1] * (1.0 - fraction))
    return float(np.mean(values[:, start:]))
