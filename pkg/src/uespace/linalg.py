"""Dense symmetric decompositions and small matrix helpers.

Everything operates on float64 numpy arrays. The two decompositions here
(Cholesky with a jitter retry policy, cyclic Jacobi eigendecomposition)
are the basis for every projector in the package, so they are implemented
against the uespace.kernels backends rather than delegating to LAPACK;
tests verify them by recomposition.

Convention: eigenvectors are stored as ROWS of ``EigenDecomposition.
eigenvectors``, i.e. row i pairs with ``eigenvalues[i]`` and a symmetric
matrix reconstructs as ``U.T @ diag(w) @ U``. This is the transpose of
the usual column convention; it makes ``sqrt(w)[:, None] * U`` directly
usable as a projector onto the leading eigenspace.
"""

from dataclasses import dataclass

import numpy as np

from uespace import kernels
from uespace.errors import (
    NegativeEigenvalueError,
    NoConvergenceError,
    NotSquareError,
    NotSymmetricError,
    RankDeficientError,
    RankOutOfRangeError,
    ShapeMismatchError,
)

SYMMETRY_RTOL = 1e-9
EIGEN_OFF_RTOL = 1e-12
EIGEN_MAX_SWEEPS = 100
EIGEN_CLAMP_RTOL = 1e-12


@dataclass(frozen=True)
class JitterPolicy:
    """Retry policy for Cholesky on numerically singular PSD matrices.

    When a pivot fails, retry on ``a + eps*I`` with ``eps = base_scale *
    trace(a)/n``, growing ``eps`` by ``growth`` up to ``max_retries``
    times. ``allow=False`` turns the mechanism off entirely.
    """

    allow: bool = True
    base_scale: float = 1e-10
    max_retries: int = 3
    growth: float = 10.0


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted descending; unit eigenvectors as rows."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


def _as_matrix(a, name="matrix"):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeMismatchError(f"{name} must be 2-D, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ShapeMismatchError(f"{name} must have at least one row and column")
    return a


def _require_square_symmetric(a, name="matrix"):
    a = _as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise NotSquareError(f"{name} is {a.shape[0]}x{a.shape[1]}")
    norm = np.linalg.norm(a)
    if np.linalg.norm(a - a.T) > SYMMETRY_RTOL * max(norm, 1e-300):
        raise NotSymmetricError(f"{name} is not symmetric within {SYMMETRY_RTOL} relative")
    return a


def matmul(a, b):
    a = _as_matrix(a, "left operand")
    b = _as_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def matvec(a, v):
    a = _as_matrix(a, "matrix")
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or a.shape[1] != v.shape[0]:
        raise ShapeMismatchError(f"cannot apply {a.shape} to vector of shape {v.shape}")
    return a @ v


def transpose(a):
    return np.ascontiguousarray(_as_matrix(a).T)


def cholesky(a, jitter=JitterPolicy()):
    """Lower-triangular L with L @ L.T == a (or a + eps*I after jitter).

    Returns (L, applied_jitter); applied_jitter is 0.0 when no diagonal
    shift was needed. Raises RankDeficientError when a pivot fails and the
    policy forbids or exhausts jitter.
    """
    a = _require_square_symmetric(a, "cholesky input")
    n = a.shape[0]
    diag = np.diag(a)
    pivot_tol = n * np.finfo(np.float64).eps * max(float(np.max(np.abs(diag))), 0.0)

    lower, fail = kernels.cholesky_lower(a, pivot_tol)
    if fail < 0:
        return lower, 0.0

    eps = jitter.base_scale * float(np.trace(a)) / n
    if not jitter.allow or not eps > 0.0:
        raise RankDeficientError(
            f"pivot {fail} at or below tolerance {pivot_tol:.3e} and jitter disallowed"
        )
    for _ in range(jitter.max_retries):
        shifted = a + eps * np.eye(n)
        lower, fail = kernels.cholesky_lower(shifted, pivot_tol)
        if fail < 0:
            return lower, eps
        eps *= jitter.growth
    raise RankDeficientError(
        f"pivot still failing after {jitter.max_retries} jitter retries (last eps {eps / jitter.growth:.3e})"
    )


def sym_eig(a):
    """Full eigendecomposition of a symmetric matrix via cyclic Jacobi.

    Eigenvalues come back sorted descending; magnitudes below
    1e-12 * largest are clamped to exactly 0 so PSD inputs cannot leak
    tiny negative values into downstream square roots.
    """
    a = _require_square_symmetric(a, "sym_eig input")
    off_tol = EIGEN_OFF_RTOL * np.linalg.norm(a)
    w, v, _sweeps, converged = kernels.jacobi_eigh(a, off_tol, EIGEN_MAX_SWEEPS)
    if not converged:
        raise NoConvergenceError(
            f"Jacobi did not converge in {EIGEN_MAX_SWEEPS} sweeps (n={a.shape[0]})"
        )
    order = np.argsort(-w, kind="stable")
    w = w[order]
    rows = np.ascontiguousarray(v[:, order].T)
    if w[0] > 0.0:
        w[np.abs(w) < EIGEN_CLAMP_RTOL * w[0]] = 0.0
    return EigenDecomposition(eigenvalues=w, eigenvectors=rows)


def truncated_root(eig, rank):
    """Root factor P (rank x n) with rows sqrt(w[i]) * U[i].

    P.T @ P is the best rank-``rank`` approximation of the decomposed
    matrix, and equals it exactly at full rank.
    """
    n = eig.dim
    if not 1 <= rank <= n:
        raise RankOutOfRangeError(f"rank {rank} outside [1, {n}]")
    w = eig.eigenvalues[:rank].copy()
    floor = -EIGEN_CLAMP_RTOL * max(float(eig.eigenvalues[0]), 0.0)
    if np.any(w < floor):
        worst = float(np.min(w))
        raise NegativeEigenvalueError(
            f"eigenvalue {worst:.3e} in leading {rank} is negative beyond tolerance"
        )
    w[w < 0.0] = 0.0
    return np.sqrt(w)[:, None] * eig.eigenvectors[:rank]
