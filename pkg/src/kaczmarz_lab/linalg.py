"""Dense linear-algebra substrate.

SVD with an explicit rank decision, general real eigendecomposition with
complex output, forward/backward triangular solves, and the least-norm
solve used as the reference solution of consistent systems.

All inputs are 64-bit real; only eigendecompositions produce complex
output.  Every routine is a pure function of its arguments and is safe to
call from parallel workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import NumericalError

__all__ = [
    "SvdResult",
    "EigResult",
    "LeastNormResult",
    "default_rank_tol",
    "svd",
    "eig_general",
    "solve_lower",
    "solve_upper",
    "least_norm_solution",
]


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"expected a 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


@dataclass(frozen=True)
class SvdResult:
    """Rank-truncated SVD: A ~ U @ diag(S) @ V.T with r retained values.

    U is m-by-r and V is n-by-r with orthonormal columns; S holds the r
    retained singular values, strictly positive and nonincreasing.
    ``rank_tol`` is the relative threshold used for the cut: singular
    values <= rank_tol * S[0] were discarded.
    """

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    rank_tol: float

    @property
    def rank(self) -> int:
        return int(self.S.size)


@dataclass(frozen=True)
class EigResult:
    """General (possibly complex) eigendecomposition of a real matrix.

    ``eigenvalues`` are sorted by descending modulus, ties broken by
    descending real part then ascending imaginary part, so reports are
    deterministic.  ``eigenvectors`` columns pair with the eigenvalues.
    ``kappa`` is the 2-norm condition number of the eigenvector matrix.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    kappa: float


@dataclass(frozen=True)
class LeastNormResult:
    """Least-norm solve output with a consistency flag.

    ``residual`` is the norm of the component of b outside range(A);
    ``inconsistent`` is set when that residual exceeds the consistency
    tolerance (expected for noisy right-hand sides).
    """

    x: np.ndarray
    residual: float
    inconsistent: bool


def default_rank_tol(A) -> float:
    """Conventional numerical-rank threshold max(m, n) * eps (relative)."""
    return max(np.shape(A)) * float(np.finfo(float).eps)


def svd(A, rank_tol: float | None = None) -> SvdResult:
    """Rank-truncated SVD of a dense real matrix.

    Singular values below ``rank_tol * sigma_max`` are truncated; with
    ``rank_tol=0`` only exact zeros are dropped.  The default threshold
    is ``max(m, n) * eps``.  Raises NumericalError for the zero matrix.
    """
    A = _as_matrix(A)
    if rank_tol is None:
        rank_tol = default_rank_tol(A)
    if rank_tol < 0:
        raise ValueError("rank_tol must be nonnegative")
    U, S, Vt = np.linalg.svd(A, full_matrices=False)
    if S[0] <= 0.0:
        raise NumericalError("rank zero matrix")
    r = int(np.count_nonzero(S > rank_tol * S[0]))
    if r == 0:
        raise NumericalError("rank zero matrix (all singular values truncated)")
    return SvdResult(
        U=U[:, :r].copy(), S=S[:r].copy(), V=Vt[:r].T.copy(), rank_tol=float(rank_tol)
    )


def eig_general(M) -> EigResult:
    """Eigendecomposition of a square real matrix, complex output allowed.

    Complex eigenvalues of real input occur in conjugate pairs.  The
    eigenvector-matrix condition number kappa is reported so callers can
    detect near-defective spectra.
    """
    M = _as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got {M.shape}")
    try:
        w, X = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    order = np.lexsort((w.imag, -w.real, -np.abs(w)))
    w = np.ascontiguousarray(w[order])
    X = np.ascontiguousarray(X[:, order])
    kappa = float(np.linalg.cond(X, 2))
    return EigResult(eigenvalues=w, eigenvectors=X, kappa=kappa)


def _check_triangular_diag(T: np.ndarray) -> None:
    if T.shape[0] != T.shape[1]:
        raise ValueError("triangular factor must be square")
    if np.any(np.diag(T) == 0.0):
        raise NumericalError("singular triangular factor")


def solve_lower(L, b) -> np.ndarray:
    """Solve L x = b by forward substitution; b may hold multiple columns."""
    L = np.asarray(L, dtype=float)
    _check_triangular_diag(L)
    return sla.solve_triangular(L, np.asarray(b, dtype=float), lower=True)


def solve_upper(U, b) -> np.ndarray:
    """Solve U x = b by back substitution; companion of solve_lower."""
    U = np.asarray(U, dtype=float)
    _check_triangular_diag(U)
    return sla.solve_triangular(U, np.asarray(b, dtype=float), lower=False)


def least_norm_solution(
    A, b, rank_tol: float | None = None, consistency_tol: float = 1e-8
) -> LeastNormResult:
    """Least-norm solution V @ diag(S)^-1 @ U.T @ b of A x = b.

    For a consistent system this is the unique solution orthogonal to
    null(A).  The component of b outside range(A) is reported as
    ``residual`` and, when it exceeds ``consistency_tol * ||b||``, the
    result is flagged inconsistent rather than rejected (noisy data ends
    up here on purpose).
    """
    sv = A if isinstance(A, SvdResult) else svd(A, rank_tol)
    b = np.asarray(b, dtype=float)
    coeff = sv.U.T @ b
    x = sv.V @ (coeff / sv.S)
    residual = float(np.linalg.norm(b - sv.U @ coeff))
    bnorm = float(np.linalg.norm(b))
    inconsistent = residual > consistency_tol * bnorm if bnorm > 0 else False
    return LeastNormResult(x=x, residual=residual, inconsistent=inconsistent)
