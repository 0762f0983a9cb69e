"""Matrix-inequality certificates of rate and robustness on smooth strongly convex functions.

Every certificate here is a small symmetric matrix inequality.  It is the
``d``-dimensional inequality with each ``M (x) I_d`` block replaced by its
template ``M``.  GD uses a 2x2 template over ``(x_k, g)``.  AG uses a 3x3
template over ``(x_k, x_{k-1}, g)``.

The SDP behind the AG trade-off curve has four scalar unknowns
``(cbar, p11, p12, p22)``.  It is solved by a dense log-barrier Newton
method written out below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InfeasibleError, NumericalError, ValidationError
from .linsys import AlgorithmSpec, Method, build_system
from .quad import ag_rate_array, gd_rate, stability_margin_array
from .tradeoff import (ParetoCurve, Provenance, ag_alpha_for_eps, ag_eps_limit,
                       gd_alpha_for_eps, gd_fastest_rate, ag_fastest_certified_rate)
from .quad import RateRobustnessPoint

FEASIBILITY_TOL = -1e-10
PSD_TOL = -1e-12
RHO_FLOOR = 1e-6


def _check_curvature(mu: float, L: float) -> None:
    if not (0.0 < mu <= L) or not math.isfinite(L):
        raise ValidationError(f"need 0 < mu <= L, got mu={mu}, L={L}", code="OUT_OF_RANGE")


def _sym(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def _min_eig(M: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(_sym(np.atleast_2d(M)))[0])


# --------------------------------------------------------------------------- blocks

@dataclass(frozen=True)
class MIBlocks:
    """Reduced templates of one certification inequality at a fixed rate ``rho``.

    ``A`` and ``B`` are the per-coordinate state-space templates.  ``x1``
    and ``x2`` exist only for AG.
    """

    spec: AlgorithmSpec
    mu: float
    L: float
    rho: float
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    x0: np.ndarray
    x1: np.ndarray | None = None
    x2: np.ndarray | None = None

    @property
    def state_dim(self) -> int:
        return self.A.shape[0]

    @property
    def x_rho(self) -> np.ndarray:
        """``rho^2 X1 + (1 - rho^2) X2`` for AG; zero for GD, whose inequality has no such term."""
        if self.x1 is None:
            return np.zeros_like(self.x0)
        r2 = self.rho * self.rho
        return r2 * self.x1 + (1.0 - r2) * self.x2

    def phi(self, ptilde) -> np.ndarray:
        P = np.atleast_2d(np.asarray(ptilde, dtype=float))
        A, B = self.A, self.B
        top = np.hstack([A.T @ P @ A - self.rho ** 2 * P, A.T @ P @ B])
        bottom = np.hstack([B.T @ P @ A, B.T @ P @ B])
        return _sym(np.vstack([top, bottom]))


def _sector_block(C: np.ndarray, mu: float, L: float) -> np.ndarray:
    """Quadratic form that is nonpositive whenever ``g`` lies in the ``[mu, L]`` gradient sector of ``C x``."""
    C = np.atleast_2d(C)
    return np.block([[2.0 * mu * L * C.T @ C, -(mu + L) * C.T],
                     [-(mu + L) * C, 2.0 * np.eye(C.shape[0])]])


def momentum_templates(alpha: float, beta: float, mu: float, L: float) -> tuple[np.ndarray, np.ndarray]:
    """Function-value templates for AG in state order ``(x_k, x_{k-1}, g)``."""
    a, b = alpha, beta
    g = a * (2.0 - L * a)
    x1 = 0.5 * np.array([[b * b * mu, -b * b * mu, -b],
                         [-b * b * mu, b * b * mu, b],
                         [-b, b, g]])
    x2 = 0.5 * np.array([[(1 + b) ** 2 * mu, -b * (1 + b) * mu, -(1 + b)],
                         [-b * (1 + b) * mu, b * b * mu, b],
                         [-(1 + b), b, g]])
    return x1, x2


def build_blocks(spec: AlgorithmSpec, mu: float, L: float, rho: float) -> MIBlocks:
    _check_curvature(mu, L)
    if not (0.0 <= rho <= 1.0):
        raise ValidationError(f"rho must lie in [0, 1], got {rho}", code="OUT_OF_RANGE")
    alpha = spec.alpha
    if spec.method is Method.GD:
        A = np.array([[1.0]])
        B = np.array([[-alpha]])
        C = np.array([[1.0]])
        return MIBlocks(spec, mu, L, rho, A, B, C, _sector_block(C, mu, L))
    beta = spec.beta
    A = np.array([[1.0 + beta, -beta], [1.0, 0.0]])
    B = np.array([[-alpha], [0.0]])
    C = np.array([[1.0 + beta, -beta]])
    x1, x2 = momentum_templates(alpha, beta, mu, L)
    return MIBlocks(spec, mu, L, rho, A, B, C, _sector_block(C, mu, L), x1, x2)


def mi_slack(blocks: MIBlocks, c0: float, c: float, ptilde) -> np.ndarray:
    return _sym(c0 * blocks.x0 + c * blocks.x_rho - blocks.phi(ptilde))


def check_mi(blocks: MIBlocks, c0: float, c: float, ptilde) -> float:
    """Smallest eigenvalue of the certification slack.  The inequality holds when it is at least -1e-10."""
    P = np.atleast_2d(np.asarray(ptilde, dtype=float))
    if _min_eig(P) < PSD_TOL:
        raise ValidationError("ptilde is not positive semidefinite", code="P_NOT_PSD")
    if c0 < 0.0 or c < 0.0:
        raise ValidationError("multipliers c0 and c must be nonnegative", code="OUT_OF_RANGE")
    return _min_eig(mi_slack(blocks, c0, c, P))


def full_slack(blocks: MIBlocks, c0: float, c: float, ptilde, d: int) -> np.ndarray:
    """The unreduced slack built from the d-dimensional system with ``P = ptilde (x) I_d``.

    The state comes first in the usual block order, followed by the gradient.
    """
    system = build_system(blocks.spec, d)
    A, B, C = system.A, system.B, system.C
    I = np.eye(d)
    P = np.kron(np.atleast_2d(np.asarray(ptilde, dtype=float)), I)
    phi = np.block([[A.T @ P @ A - blocks.rho ** 2 * P, A.T @ P @ B],
                    [B.T @ P @ A, B.T @ P @ B]])
    x0 = np.block([[2.0 * blocks.mu * blocks.L * C.T @ C, -(blocks.mu + blocks.L) * C.T],
                   [-(blocks.mu + blocks.L) * C, 2.0 * I]])
    x_rho = np.kron(blocks.x_rho, I)
    return _sym(c0 * x0 + c * x_rho - phi)


# --------------------------------------------------------------------------- certificates

@dataclass(frozen=True)
class Certificate:
    method: Method
    ptilde: np.ndarray
    c0: float
    c: float
    rho: float
    slack_min_eig: float
    bound_R: float
    cbar: float = 0.0
    metadata: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.slack_min_eig >= FEASIBILITY_TOL


def _check_gd_stepsize(alpha: float, L: float) -> None:
    if not (0.0 < alpha < 2.0 / L):
        raise ValidationError(f"stepsize {alpha} outside (0, 2/L)", code="OUT_OF_RANGE")


def _gd_best_p(alpha: float, mu: float, L: float, rho: float) -> tuple[float, float]:
    """Best scalar ``p`` for the GD inequality with unit sector multiplier, and the resulting 2x2 determinant.

    The slack is ``[[2 mu L - p(1-rho^2), p alpha - (mu+L)], [., 2 - p alpha^2]]``.
    Its determinant is a concave quadratic in ``p``.  The slack is PSD iff
    some ``p`` keeps both diagonal entries and the determinant nonnegative.
    """
    r2 = rho * rho
    upper = 2.0 / (alpha * alpha)
    if r2 < 1.0:
        upper = min(upper, 2.0 * mu * L / (1.0 - r2))
    linear = 2.0 * (r2 - (1.0 - alpha * mu) * (1.0 - alpha * L))
    quadratic = alpha * alpha * r2
    p = linear / (2.0 * quadratic) if quadratic > 0.0 else upper
    p = min(max(p, 0.0), upper)
    det = -(L - mu) ** 2 + linear * p - quadratic * p * p
    return p, det


def gd_mi_feasible(alpha: float, mu: float, L: float, rho: float) -> bool:
    p, det = _gd_best_p(alpha, mu, L, rho)
    return p > 0.0 and det >= 0.0


def gd_min_rho(alpha: float, mu: float, L: float, tol: float = 1e-12) -> float:
    """Smallest rate the GD inequality certifies at stepsize ``alpha``, by bisection on ``rho``."""
    _check_curvature(mu, L)
    _check_gd_stepsize(alpha, L)
    if gd_mi_feasible(alpha, mu, L, RHO_FLOOR):
        return RHO_FLOOR
    lo, hi = RHO_FLOOR, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gd_mi_feasible(alpha, mu, L, mid):
            hi = mid
        else:
            lo = mid
    return hi


def gd_bound_R(alpha: float, mu: float, L: float, d: int) -> float:
    _check_curvature(mu, L)
    _check_gd_stepsize(alpha, L)
    rho = gd_rate(alpha, mu, L)
    return L * alpha * alpha * d / (2.0 * (1.0 - rho * rho))


def gd_certificate(alpha: float, mu: float, L: float, d: int, rho: float | None = None) -> Certificate:
    """GD certificate at ``rho`` (default: the analytic rate), using the best scalar ``p``."""
    _check_curvature(mu, L)
    _check_gd_stepsize(alpha, L)
    if rho is None:
        rho = gd_rate(alpha, mu, L)
    p, _ = _gd_best_p(alpha, mu, L, rho)
    blocks = build_blocks(AlgorithmSpec.gd(alpha), mu, L, rho)
    slack = check_mi(blocks, 1.0, 0.0, p)
    return Certificate(Method.GD, np.array([[p]]), 1.0, 0.0, rho, slack,
                       gd_bound_R(alpha, mu, L, d) if rho >= gd_rate(alpha, mu, L) else math.inf,
                       metadata={"slack": slack})


def momentum_for_stepsize(alpha: float, mu: float) -> float:
    s = math.sqrt(alpha * mu)
    return (1.0 - s) / (1.0 + s)


def _check_ag_stepsize(alpha: float, L: float) -> None:
    if not (0.0 < alpha <= 1.0 / L):
        raise ValidationError(f"stepsize {alpha} outside (0, 1/L]", code="OUT_OF_RANGE")


def ag_explicit_bound(alpha: float, mu: float, L: float, d: int) -> tuple[float, float]:
    """Rate and robustness bound for AG with momentum tied to the stepsize."""
    _check_curvature(mu, L)
    _check_ag_stepsize(alpha, L)
    rho = math.sqrt(1.0 - math.sqrt(alpha * mu))
    return rho, math.sqrt(alpha) * d * (1.0 + alpha * L) / (2.0 * math.sqrt(mu))


def ag_witness_ptilde(alpha: float, mu: float) -> np.ndarray:
    v = np.array([math.sqrt(1.0 / (2.0 * alpha)), math.sqrt(mu / 2.0) - math.sqrt(1.0 / (2.0 * alpha))])
    return np.outer(v, v)


def ag_witness_certificate(alpha: float, mu: float, L: float, d: int = 1) -> Certificate:
    _check_curvature(mu, L)
    _check_ag_stepsize(alpha, L)
    beta = momentum_for_stepsize(alpha, mu)
    rho, R = ag_explicit_bound(alpha, mu, L, d)
    P = ag_witness_ptilde(alpha, mu)
    slack = check_mi(build_blocks(AlgorithmSpec.ag(alpha, beta), mu, L, rho), 0.0, 1.0, P)
    return Certificate(Method.AG, P, 0.0, 1.0, rho, slack, R, metadata={"beta": beta, "slack": slack})


def R_from_certificate(cert: Certificate, alpha: float, L: float, d: int) -> float:
    """Robustness bound implied by a feasible certificate with ``c > 0``."""
    if not cert.feasible or cert.c <= 0.0:
        raise InfeasibleError("certificate must be feasible with c > 0", code="INFEASIBLE_CERT",
                              slack=cert.slack_min_eig)
    P = np.atleast_2d(cert.ptilde)
    base = L * alpha * alpha * d / (2.0 * (1.0 - cert.rho ** 2))
    if P.shape == (1, 1):
        return base
    p11, p12, p22 = P[0, 0], P[0, 1], P[1, 1]
    if p22 > 0.0:
        schur = max(p11 - p12 * p12 / p22, 0.0)
        return base * (cert.c * L + 2.0 * p11) / (cert.c * L + 2.0 * schur)
    return base


def relaxed_bound(alpha: float, L: float, d: int, rho: float, p11: float) -> float:
    """Convex upper bound on the certificate bound, linear in ``p11`` (unit ``c``)."""
    return alpha * alpha * d * (L + 2.0 * p11) / (2.0 * (1.0 - rho * rho))


def perturb_stability_bounds(spec: AlgorithmSpec, mu: float, L: float, d: int) -> float:
    """Upper bound on the summed impulse-response energy of the iterates.

    For momentum the bound is derived from a start whose previous iterate
    equals the kicked iterate (``impulse_J_star(..., history="repeat")``).
    The true impulse response leaves the previous iterate at the optimum and
    can exceed this value for small stepsizes.
    """
    _check_curvature(mu, L)
    alpha = spec.alpha
    if spec.method is Method.GD:
        _check_gd_stepsize(alpha, L)
        rho = gd_rate(alpha, mu, L)
        return alpha * alpha * d / (1.0 - rho * rho)
    _check_ag_stepsize(alpha, L)
    if not math.isclose(spec.beta, momentum_for_stepsize(alpha, mu), rel_tol=1e-9, abs_tol=1e-12):
        raise ValidationError("AG bound needs beta = (1 - sqrt(alpha mu)) / (1 + sqrt(alpha mu))",
                              code="OUT_OF_RANGE")
    return alpha * alpha * d * (1.0 + L / mu) / math.sqrt(alpha * mu)


# --------------------------------------------------------------------------- small SDP

@dataclass(frozen=True)
class AffineLMI:
    """``F(z) = F0 + sum_i z_i F_i``; the constraint is ``F(z)`` PSD.

    ``Fs`` is stacked with shape ``(n, m, m)``.
    """

    F0: np.ndarray
    Fs: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "F0", np.asarray(self.F0, dtype=float))
        object.__setattr__(self, "Fs", np.asarray(self.Fs, dtype=float).reshape(-1, *self.F0.shape))

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return self.F0 + np.tensordot(z, self.Fs, axes=1)

    @property
    def size(self) -> int:
        return self.F0.shape[0]


def stack_lmis(parts: Sequence[AffineLMI]) -> AffineLMI:
    """Block-diagonal union of constraints over the same variables."""
    from scipy.linalg import block_diag
    n = parts[0].Fs.shape[0]
    F0 = block_diag(*(p.F0 for p in parts))
    Fs = np.stack([block_diag(*(p.Fs[i] for p in parts)) for i in range(n)])
    return AffineLMI(F0, Fs)


@dataclass(frozen=True)
class SdpResult:
    status: str
    z: np.ndarray | None
    value: float
    slack_min_eig: float
    duality_gap: float
    kkt_residual: float
    iterations: int

    @property
    def optimal(self) -> bool:
        return self.status == "OPTIMAL"


def _cone_constraints(bound: float) -> AffineLMI:
    """``cbar >= 0``, ``P PSD`` and ``cbar + p11 + p22 <= bound`` over ``(cbar, p11, p12, p22)``."""
    Fs = np.zeros((4, 4, 4))
    Fs[0, 0, 0] = 1.0
    Fs[1, 1, 1] = 1.0
    Fs[2, 1, 2] = Fs[2, 2, 1] = 1.0
    Fs[3, 2, 2] = 1.0
    for i in (0, 1, 3):
        Fs[i, 3, 3] = -1.0
    F0 = np.zeros((4, 4))
    F0[3, 3] = bound
    return AffineLMI(F0, Fs)


def _barrier_terms(con: AffineLMI, z: np.ndarray):
    """Value, gradient and Hessian of ``-log det F(z)``; None outside the cone."""
    F = con(z)
    try:
        chol = np.linalg.cholesky(F)
    except np.linalg.LinAlgError:
        return None
    diag = np.diag(chol)
    if np.any(diag <= 0.0):
        return None
    Linv = np.linalg.inv(chol)
    G = np.einsum("ab,ibc->iac", Linv, np.einsum("iab,cb->iac", con.Fs, Linv))
    grad = -np.einsum("iaa->i", G)
    hess = np.einsum("iab,kab->ik", G, G)
    return -2.0 * float(np.sum(np.log(diag))), grad, hess


def _barrier_value(con: AffineLMI, z: np.ndarray) -> float:
    try:
        chol = np.linalg.cholesky(con(z))
    except np.linalg.LinAlgError:
        return math.inf
    diag = np.diag(chol)
    return -2.0 * float(np.sum(np.log(diag))) if np.all(diag > 0.0) else math.inf


def _barrier_minimize(cost: np.ndarray, con: AffineLMI, z0: np.ndarray, gap_tol,
                      max_outer: int = 50, stop=None, t0: float = 1.0, center_tol: float = 1e-7):
    """Path following with barrier weight shrunk by 0.2 per outer round.

    Centering uses the damped Newton step ``1 / (1 + lambda)``.  Here
    ``lambda`` is the Newton decrement.  Because the log-det barrier is
    self-concordant, this step stays feasible and needs no line search.
    Returns ``(z, gap, lambda, iterations)``.
    """
    m = con.size
    z = z0.astype(float).copy()
    t = t0
    iterations = 0
    lam = math.inf
    for _ in range(max_outer):
        best = math.inf
        stalled = 0
        for _ in range(100):
            terms = _barrier_terms(con, z)
            if terms is None:
                raise NumericalError("barrier iterate left the feasible set", code="NUMERICAL_FAILURE")
            _, grad, hess = terms
            g = t * cost + grad
            try:
                step = -np.linalg.solve(hess, g)
            except np.linalg.LinAlgError:
                step = -np.linalg.lstsq(hess, g, rcond=None)[0]
            lam = math.sqrt(max(float(-g @ step), 0.0))
            iterations += 1
            if lam <= center_tol:
                break
            # rounding floor: the decrement stops shrinking once the Hessian is too ill-conditioned
            stalled = stalled + 1 if lam >= 0.5 * best else 0
            best = min(best, lam)
            if stalled >= 5 and lam < 1e-4:
                break
            s = 1.0 / (1.0 + lam) if lam > 0.25 else 1.0
            while _barrier_value(con, z + s * step) == math.inf:
                s *= 0.5
                if s < 1e-12:
                    raise NumericalError("barrier Newton step cannot stay feasible",
                                         code="NUMERICAL_FAILURE", decrement=lam)
            z = z + s * step
        if lam > 1e-3:
            raise NumericalError("barrier centering did not converge", code="NUMERICAL_FAILURE",
                                 decrement=lam)
        if stop is not None and stop(z, m / t):
            break
        if m / t <= gap_tol(cost @ z):
            break
        t /= 0.2
    return z, m / t, lam, iterations


def solve_small_sdp(cost: Sequence[float], lmi: AffineLMI, cost_offset: float = 0.0,
                    bound: float = 1e6) -> SdpResult:
    """Minimize ``cost . z + cost_offset`` over ``z = (cbar, p11, p12, p22)``.

    The constraints are ``lmi(z) PSD``, ``cbar >= 0`` and ``[[p11, p12], [p12, p22]] PSD``.
    A box ``cbar + p11 + p22 <= bound`` keeps the problem bounded.  A first
    phase maximizes the common slack ``s`` to find a strictly feasible start.
    When that maximum is at most 1e-9 the status is INFEASIBLE.
    """
    cost = np.asarray(cost, dtype=float)
    n = len(cost)
    if n != 4 or lmi.Fs.shape[0] != 4:
        raise ValidationError("the SDP has exactly four variables", code="OUT_OF_RANGE")
    con = stack_lmis([lmi, _cone_constraints(bound)])

    # phase 1 over (z, s): F(z) - s I PSD and s <= 1
    m = con.size
    F0 = np.zeros((m + 1, m + 1))
    F0[:m, :m] = con.F0
    F0[m, m] = 1.0
    Fs = np.zeros((n + 1, m + 1, m + 1))
    Fs[:n, :m, :m] = con.Fs
    Fs[n, :m, :m] = -np.eye(m)
    Fs[n, m, m] = -1.0
    shifted = AffineLMI(F0, Fs)
    z_start = np.array([1.0, 1.0, 0.0, 1.0])
    s_start = min(_min_eig(con(z_start)), 0.0) - 1.0
    phase1_cost = np.zeros(n + 1)
    phase1_cost[-1] = -1.0
    w, gap1, _, it1 = _barrier_minimize(phase1_cost, shifted, np.append(z_start, s_start),
                                        gap_tol=lambda v: 1e-11,
                                        stop=lambda w, gap: w[-1] > 1e-6 or w[-1] + gap <= 1e-9)
    if w[-1] <= 1e-9:
        if w[-1] + gap1 <= 1e-9:
            return SdpResult("INFEASIBLE", None, math.inf, float(w[-1]), gap1, math.nan, it1)
        raise NumericalError("phase 1 could not decide feasibility", code="NUMERICAL_FAILURE",
                             slack=float(w[-1]))
    z0 = w[:n]
    t0 = con.size / max(abs(cost @ z0) + abs(cost_offset), 1e-12)
    z, gap, kkt, it2 = _barrier_minimize(cost, con, z0, t0=t0,
                                         gap_tol=lambda v: 1e-6 * (1.0 + abs(v + cost_offset)))
    return SdpResult("OPTIMAL", z, float(cost @ z + cost_offset), _min_eig(lmi(z)), gap, kkt, it1 + it2)


# --------------------------------------------------------------------------- AG trade-off SDP

def ag_sdp_lmi(alpha: float, beta: float, mu: float, L: float, rho: float) -> AffineLMI:
    """Slack ``cbar X0 + X(rho) - Phi(P)`` as an affine map of ``(cbar, p11, p12, p22)``."""
    blocks = build_blocks(AlgorithmSpec.ag(alpha, beta), mu, L, rho)
    units = (np.array([[1.0, 0.0], [0.0, 0.0]]),
             np.array([[0.0, 1.0], [1.0, 0.0]]),
             np.array([[0.0, 0.0], [0.0, 1.0]]))
    return AffineLMI(blocks.x_rho, np.stack((blocks.x0,) + tuple(-blocks.phi(E) for E in units)))


def ag_sdp_bound(alpha: float, beta: float, mu: float, L: float, d: int, rho: float) -> tuple[float, SdpResult]:
    """Smallest relaxed bound certifiable at ``(alpha, beta)`` with rate ``rho``; inf if none."""
    scale = alpha * alpha * d / (2.0 * (1.0 - rho * rho))
    result = solve_small_sdp([0.0, 2.0 * scale, 0.0, 0.0], ag_sdp_lmi(alpha, beta, mu, L, rho),
                             cost_offset=scale * L)
    return (result.value if result.optimal else math.inf), result


@dataclass(frozen=True, slots=True)
class SdpCurvePoint:
    eps: float
    rho: float
    value: float
    alpha: float
    beta: float
    witness_value: float
    solved: int
    pruned: int


def sdp_grid(L: float, grid: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    n_alpha, n_beta = int(grid[0]), int(grid[1])
    if n_alpha < 8 or n_beta < 8:
        raise ValidationError("grid counts must be at least 8", code="GRID_TOO_SMALL")
    return np.linspace(2.0 / L / n_alpha, 2.0 / L, n_alpha), np.linspace(0.0, 1.0, n_beta)


def ag_sdp_point(eps: float, mu: float, L: float, d: int, grid: Sequence[int] = (30, 30)) -> SdpCurvePoint:
    """Best relaxed AG bound at rate ``(1 + eps)`` times the best certified rate.

    The grid point ``(alpha_eps, beta_eps)`` is always searched, and its
    closed-form witness is kept as a fallback.  A grid point is skipped
    when its quadratic rate already exceeds the target, since no
    certificate can exist there.  It is also skipped when even ``p11 = 0``
    cannot beat the best value so far.
    """
    rho = (1.0 + eps) * ag_fastest_certified_rate(mu, L)
    alpha_eps, beta_eps = ag_alpha_for_eps(eps, mu, L)
    alphas, betas = sdp_grid(L, grid)

    witness = ag_witness_ptilde(alpha_eps, mu)
    blocks = build_blocks(AlgorithmSpec.ag(alpha_eps, beta_eps), mu, L, rho)
    witness_value = math.inf
    if check_mi(blocks, 0.0, 1.0, witness) >= FEASIBILITY_TOL:
        witness_value = relaxed_bound(alpha_eps, L, d, rho, witness[0, 0])
    best = (witness_value, alpha_eps, beta_eps)

    candidates = [(alpha_eps, beta_eps)] + [(a, b) for a in alphas for b in betas]
    solved = pruned = 0
    for a, b in candidates:
        floor = a * a * d * L / (2.0 * (1.0 - rho * rho))
        inside = stability_margin_array(a, b, mu, L) > 0.0
        if not inside or ag_rate_array(a, b, mu, L) > rho or floor >= best[0]:
            pruned += 1
            continue
        try:
            value, _ = ag_sdp_bound(a, b, mu, L, d, rho)
        except NumericalError:
            continue
        solved += 1
        if value < best[0]:
            best = (value, a, b)
    return SdpCurvePoint(eps, rho, best[0], best[1], best[2], witness_value, solved, pruned)


def _curve(points: list[tuple[float, float, AlgorithmSpec]], method: Method, provenance: Provenance,
           params: Sequence[float]) -> ParetoCurve:
    return ParetoCurve(tuple(RateRobustnessPoint(rho=r, J=v, params=s) for r, v, s in points),
                       method, provenance, tuple(params))


def _check_eps_grid(eps_values: Sequence[float]) -> list[float]:
    values = [float(e) for e in eps_values]
    if not values:
        raise ValidationError("empty eps grid", code="EMPTY_SWEEP")
    return values


def ag_sdp_curve(eps_values: Sequence[float], mu: float, L: float, d: int,
                 grid: Sequence[int] = (30, 30)) -> ParetoCurve:
    _check_curvature(mu, L)
    ag_eps_limit(mu, L)
    points = [ag_sdp_point(e, mu, L, d, grid) for e in _check_eps_grid(eps_values)]
    return _curve([(p.rho, p.value, AlgorithmSpec.ag(p.alpha, p.beta)) for p in points],
                  Method.AG, Provenance.SDP_CERT, [p.eps for p in points])


def ag_explicit_curve(eps_values: Sequence[float], mu: float, L: float, d: int) -> ParetoCurve:
    rows = []
    eps_values = _check_eps_grid(eps_values)
    for e in eps_values:
        alpha, beta = ag_alpha_for_eps(e, mu, L)
        rho, R = ag_explicit_bound(alpha, mu, L, d)
        rows.append((rho, R, AlgorithmSpec.ag(alpha, beta)))
    return _curve(rows, Method.AG, Provenance.UPPER_BOUND, eps_values)


def gd_eps_curve(eps_values: Sequence[float], mu: float, L: float, d: int) -> ParetoCurve:
    rows = []
    eps_values = _check_eps_grid(eps_values)
    for e in eps_values:
        alpha = gd_alpha_for_eps(e, mu, L)
        rows.append(((1.0 + e) * gd_fastest_rate(mu, L), gd_bound_R(alpha, mu, L, d), AlgorithmSpec.gd(alpha)))
    return _curve(rows, Method.GD, Provenance.UPPER_BOUND, eps_values)
