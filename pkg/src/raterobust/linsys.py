"""State-space realizations of GD and AG, discrete Lyapunov solves and H2 norms.

Both methods are written as linear systems driven by the gradient,

    xi_{k+1} = A xi_k + B u_k,   y_k = C xi_k,   x_k = T xi_k,

with ``u_k = grad f(y_k)``.  On a quadratic with Hessian ``Q`` the loop closes
to ``A_Q = A + B Q C``.  With ``Q`` diagonal the closed loop decouples into one
1x1 (GD) or 2x2 (AG) block per eigenvalue, and the Lyapunov solver here detects
and exploits that block structure for arbitrary inputs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.sparse.csgraph import connected_components

from .errors import InstabilityError, NumericalError, ValidationError

STABILITY_GUARD = 1e-12
DENSE_ORACLE_MAX_DIM = 64


class Method(str, enum.Enum):
    GD = "gd"
    AG = "ag"


@dataclass(frozen=True, slots=True)
class AlgorithmSpec:
    """Method together with its stepsize ``alpha`` and momentum ``beta``."""

    method: Method
    alpha: float
    beta: float = 0.0

    def __post_init__(self) -> None:
        try:
            method = Method(self.method)
        except ValueError as exc:
            raise ValidationError(f"unknown method {self.method!r}") from exc
        object.__setattr__(self, "method", method)
        alpha = float(self.alpha)
        beta = float(self.beta)
        if not np.isfinite(alpha) or alpha <= 0.0:
            raise ValidationError(f"alpha must be positive, got {alpha}", code="OUT_OF_RANGE")
        if not np.isfinite(beta) or beta < 0.0:
            raise ValidationError(f"beta must be nonnegative, got {beta}", code="OUT_OF_RANGE")
        if method is Method.GD and beta != 0.0:
            raise ValidationError("gradient descent has no momentum term; beta must be 0",
                                  code="OUT_OF_RANGE")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def gd(cls, alpha: float) -> "AlgorithmSpec":
        return cls(Method.GD, alpha, 0.0)

    @classmethod
    def ag(cls, alpha: float, beta: float) -> "AlgorithmSpec":
        return cls(Method.AG, alpha, beta)


@dataclass(frozen=True, slots=True)
class QuadraticSpectrum:
    """Hessian eigenvalues of a strongly convex quadratic, stored ascending."""

    eigenvalues: tuple[float, ...]

    def __post_init__(self) -> None:
        values = np.asarray(self.eigenvalues, dtype=float).ravel()
        if values.size == 0:
            raise ValidationError("spectrum needs at least one eigenvalue", code="OUT_OF_RANGE")
        if not np.all(np.isfinite(values)) or np.any(values <= 0.0):
            raise ValidationError("eigenvalues must be finite and positive", code="OUT_OF_RANGE")
        object.__setattr__(self, "eigenvalues", tuple(float(v) for v in np.sort(values)))

    @classmethod
    def from_matrix(cls, Q: np.ndarray, symmetry_tol: float = 1e-12) -> "QuadraticSpectrum":
        """Diagonalize a dense symmetric positive definite Hessian."""
        Q = np.asarray(Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValidationError("Hessian must be square")
        scale = max(1.0, float(np.max(np.abs(Q))))
        if np.max(np.abs(Q - Q.T)) > symmetry_tol * scale:
            raise ValidationError("Hessian must be symmetric")
        return cls(tuple(np.linalg.eigvalsh(0.5 * (Q + Q.T))))

    @classmethod
    def endpoints(cls, mu: float, L: float, d: int = 2) -> "QuadraticSpectrum":
        """Spectrum with ``mu`` once and ``L`` repeated to fill dimension ``d``."""
        if d < 1:
            raise ValidationError("dimension must be at least 1", code="OUT_OF_RANGE")
        if d == 1:
            if mu != L:
                raise ValidationError("a one-dimensional spectrum needs mu == L")
            return cls((mu,))
        return cls((mu,) + (L,) * (d - 1))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.eigenvalues)

    @property
    def d(self) -> int:
        return len(self.eigenvalues)

    @property
    def mu(self) -> float:
        return self.eigenvalues[0]

    @property
    def L(self) -> float:
        return self.eigenvalues[-1]

    @property
    def kappa(self) -> float:
        return self.L / self.mu


@dataclass(frozen=True, slots=True)
class SystemMatrices:
    """State-space matrices ``(A, B, C, T)``; the feedthrough term is zero."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    T: np.ndarray
    spec: AlgorithmSpec
    template: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray] = field(repr=False)

    @property
    def state_dim(self) -> int:
        return self.A.shape[0]

    @property
    def io_dim(self) -> int:
        return self.B.shape[1]


@dataclass(frozen=True, slots=True)
class LyapunovSolution:
    X: np.ndarray
    residual: float


def system_template(spec: AlgorithmSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-coordinate matrices ``(a, b, c, t)``; the full system is ``m (x) I_d``."""
    alpha, beta = spec.alpha, spec.beta
    if spec.method is Method.GD:
        one = np.ones((1, 1))
        return one, np.array([[-alpha]]), one.copy(), one.copy()
    a = np.array([[1.0 + beta, -beta], [1.0, 0.0]])
    b = np.array([[-alpha], [0.0]])
    c = np.array([[1.0 + beta, -beta]])
    t = np.array([[1.0, 0.0]])
    return a, b, c, t


def build_system(spec: AlgorithmSpec, d: int) -> SystemMatrices:
    """Full ``d``-dimensional realization of ``spec``."""
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise ValidationError(f"dimension must be a positive integer, got {d!r}", code="OUT_OF_RANGE")
    d = int(d)
    template = system_template(spec)
    eye = np.eye(d)
    A, B, C, T = (np.kron(m, eye) for m in template)
    return SystemMatrices(A=A, B=B, C=C, T=T, spec=spec, template=template)


def closed_loop_matrix(system: SystemMatrices, spectrum: QuadraticSpectrum) -> np.ndarray:
    """``A + B diag(lambda) C`` for the quadratic with the given spectrum."""
    if system.io_dim != spectrum.d:
        raise ValidationError(
            f"system has io dimension {system.io_dim} but spectrum has {spectrum.d} eigenvalues",
            code="DIMENSION_MISMATCH",
        )
    return system.A + system.B @ (spectrum.array[:, None] * system.C)


def _components(*matrices: np.ndarray) -> tuple[int, np.ndarray]:
    """Connected components of the joint sparsity graph (block-diagonal structure)."""
    pattern = np.zeros(matrices[0].shape, dtype=bool)
    for M in matrices:
        pattern |= M != 0
    pattern |= pattern.T
    return connected_components(pattern, directed=False)


def _block_eigenvalues(M: np.ndarray) -> np.ndarray:
    n = M.shape[0]
    if n == 1:
        return M[0].astype(complex)
    if n == 2:
        tr = M[0, 0] + M[1, 1]
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        root = np.sqrt(complex(tr * tr - 4.0 * det))
        # Pick the larger-modulus root first, recover the other from det to avoid cancellation.
        first = 0.5 * (tr + root) if tr.real >= 0 else 0.5 * (tr - root)
        second = det / first if first != 0 else 0.0
        return np.array([first, second])
    try:
        return np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("eigenvalue iteration did not converge", code="NO_CONVERGENCE") from exc


def eigenvalues(M: np.ndarray) -> np.ndarray:
    """All eigenvalues, computed block by block when ``M`` is block diagonal up to permutation."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError("matrix must be square")
    if not np.all(np.isfinite(M)):
        raise ValidationError("matrix has non-finite entries", code="NONFINITE")
    n_comp, labels = _components(M)
    if n_comp == 1:
        return _block_eigenvalues(M)
    parts = []
    for k in range(n_comp):
        idx = np.flatnonzero(labels == k)
        parts.append(_block_eigenvalues(M[np.ix_(idx, idx)]))
    return np.concatenate(parts)


def spectral_radius(M: np.ndarray) -> float:
    """Largest eigenvalue modulus of a square matrix."""
    return float(np.max(np.abs(eigenvalues(M))))


def _stein_solve(A1: np.ndarray, A2: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Solve ``A1 X A2^T - X + W = 0`` by vectorization (row-major)."""
    n1, n2 = A1.shape[0], A2.shape[0]
    K = np.eye(n1 * n2) - np.kron(A1, A2)
    try:
        lu, piv = scipy.linalg.lu_factor(K, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError("vectorized Lyapunov system is singular", code="SINGULAR") from exc
    diag = np.abs(np.diag(lu))
    if diag.min() <= 1e-14 * max(1.0, diag.max()):
        raise NumericalError("vectorized Lyapunov system is numerically singular", code="SINGULAR")
    return scipy.linalg.lu_solve((lu, piv), W.reshape(-1), check_finite=False).reshape(n1, n2)


def _residual(A: np.ndarray, X: np.ndarray, W: np.ndarray) -> np.ndarray:
    return A @ X @ A.T - X + W


def solve_discrete_lyapunov(A: np.ndarray, W: np.ndarray, method: str = "auto") -> LyapunovSolution:
    """Solve ``A X A^T - X + W = 0`` for a stable ``A``.

    Parameters
    ----------
    A, W:
        Square matrices of equal size; ``W`` symmetric.
    method:
        ``"blocks"`` splits the problem along the block-diagonal structure of
        ``A`` (after symmetric permutation) and only solves the small coupled
        pieces that ``W`` actually excites.  ``"dense"`` vectorizes the whole
        equation into an ``m^2 x m^2`` system and is limited to ``m <= 64``.
        ``"auto"`` uses blocks whenever ``A`` decouples, else dense for small
        ``m`` and a Schur-based solver for larger ``m``.

    Raises
    ------
    InstabilityError
        ``UNSTABLE`` when the spectral radius is at least ``1 - 1e-12``.
    NumericalError
        ``SINGULAR`` when a vectorized system is rank deficient.
    """
    A = np.asarray(A, dtype=float)
    W = np.asarray(W, dtype=float)
    m = A.shape[0]
    if A.ndim != 2 or A.shape != (m, m) or W.shape != (m, m):
        raise ValidationError("A and W must be square matrices of the same size",
                              code="DIMENSION_MISMATCH")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(W))):
        raise ValidationError("non-finite entries", code="NONFINITE")
    radius = spectral_radius(A)
    if radius >= 1.0 - STABILITY_GUARD:
        raise InstabilityError(f"spectral radius {radius:.6g} is not below one", code="UNSTABLE",
                               spectral_radius=radius)

    n_comp, labels = _components(A)
    if method == "auto":
        method = "blocks" if n_comp > 1 else ("dense" if m <= DENSE_ORACLE_MAX_DIM else "schur")
    if method == "blocks":
        X = _solve_by_blocks(A, W, n_comp, labels)
    elif method == "dense":
        if m > DENSE_ORACLE_MAX_DIM:
            raise ValidationError(f"dense path is limited to m <= {DENSE_ORACLE_MAX_DIM}")
        X = _stein_solve(A, A, W)
    elif method == "schur":
        X = scipy.linalg.solve_discrete_lyapunov(A, W)
    else:
        raise ValidationError(f"unknown Lyapunov method {method!r}")

    X = 0.5 * (X + X.T)
    R = _residual(A, X, W)
    tol = 1e-10 * (1.0 + float(np.max(np.abs(W), initial=0.0)))
    for _ in range(3):
        if np.max(np.abs(R), initial=0.0) <= tol:
            break
        # Iterative refinement: the correction solves the same equation with the residual as data.
        correction = _solve_by_blocks(A, R, n_comp, labels) if n_comp > 1 else (
            _stein_solve(A, A, R) if m <= DENSE_ORACLE_MAX_DIM else scipy.linalg.solve_discrete_lyapunov(A, R))
        X = X + 0.5 * (correction + correction.T)
        R = _residual(A, X, W)
    return LyapunovSolution(X=X, residual=float(np.max(np.abs(R), initial=0.0)))


def _solve_by_blocks(A: np.ndarray, W: np.ndarray, n_comp: int, labels: np.ndarray) -> np.ndarray:
    m = A.shape[0]
    groups = [np.flatnonzero(labels == k) for k in range(n_comp)]
    rows, cols = np.nonzero(W)
    pairs = set(zip(labels[rows].tolist(), labels[cols].tolist()))
    X = np.zeros((m, m))
    for i, j in sorted(pairs):
        gi, gj = groups[i], groups[j]
        X[np.ix_(gi, gj)] = _stein_solve(A[np.ix_(gi, gi)], A[np.ix_(gj, gj)], W[np.ix_(gi, gj)])
    return X


def h2_norm_squared(A: np.ndarray, B: np.ndarray, Cout: np.ndarray) -> float:
    """Stationary output variance ``Tr(C X C^T)`` under unit white-noise input."""
    A, B, Cout = (np.asarray(M, dtype=float) for M in (A, B, Cout))
    if B.shape[0] != A.shape[0] or Cout.shape[1] != A.shape[0]:
        raise ValidationError("incompatible system dimensions", code="DIMENSION_MISMATCH")
    X = solve_discrete_lyapunov(A, B @ B.T).X
    return float(np.trace(Cout @ X @ Cout.T))


def h2_norm_squared_dual(A: np.ndarray, B: np.ndarray, Cout: np.ndarray) -> float:
    """Same quantity from the observability equation ``A^T Y A - Y + C^T C = 0``."""
    A, B, Cout = (np.asarray(M, dtype=float) for M in (A, B, Cout))
    Y = solve_discrete_lyapunov(A.T, Cout.T @ Cout).X
    return float(np.trace(B.T @ Y @ B))


def robustness_h2(spec: AlgorithmSpec, spectrum: QuadraticSpectrum, measure: str = "J") -> float:
    """Noise robustness of ``spec`` on a quadratic via the Lyapunov route.

    ``measure="J"`` weights the output with ``sqrt(lambda/2)`` (function-value
    suboptimality); ``measure="Jprime"`` reads the iterate directly.
    """
    system = build_system(spec, spectrum.d)
    A_Q = closed_loop_matrix(system, spectrum)
    if measure == "J":
        Cout = np.sqrt(spectrum.array / 2.0)[:, None] * system.T
    elif measure == "Jprime":
        Cout = system.T
    else:
        raise ValidationError(f"unknown measure {measure!r}")
    return h2_norm_squared(A_Q, system.B, Cout)


def as_spectrum(values: QuadraticSpectrum | Sequence[float]) -> QuadraticSpectrum:
    if isinstance(values, QuadraticSpectrum):
        return values
    return QuadraticSpectrum(tuple(values))
