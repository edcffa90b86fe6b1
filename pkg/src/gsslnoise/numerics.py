"""Dense linear-algebra kernels used by the classifiers.

At benchmark scale (n = 1500) dense LAPACK routines are fast and fully
deterministic, so sparse operators are densified before factorization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg, sparse
from scipy.linalg import lapack

__all__ = [
    "SingularMatrixError",
    "ConvergenceError",
    "EigenPairs",
    "SPDFactor",
    "solve_spd",
    "smallest_eigenpairs",
    "least_squares",
]


class SingularMatrixError(np.linalg.LinAlgError):
    """Cholesky met a non-positive pivot."""

    def __init__(self, pivot):
        self.pivot = pivot
        super().__init__(f"matrix is not positive definite: non-positive pivot at index {pivot}")


class ConvergenceError(np.linalg.LinAlgError):
    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


def _dense(A) -> np.ndarray:
    if sparse.issparse(A):
        return A.toarray()
    return np.asarray(A, dtype=float)


class SPDFactor:
    """Cholesky factorization of a symmetric positive-definite matrix."""

    def __init__(self, A):
        A = _dense(A)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        self.n = A.shape[0]
        if self.n == 0:
            self._c = A
            return
        c, info = lapack.dpotrf(A, lower=True, clean=True, overwrite_a=False)
        if info > 0:
            raise SingularMatrixError(info - 1)
        if info < 0:
            raise ValueError(f"illegal argument {-info} to dpotrf")
        self._c = c

    def solve(self, B) -> np.ndarray:
        B = np.asarray(B, dtype=float)
        if self.n == 0:
            return B.copy()
        return linalg.cho_solve((self._c, True), B, check_finite=False)


def solve_spd(A, B) -> np.ndarray:
    """Solve ``A X = B`` for SPD ``A``; B may be a vector or an n x c matrix."""
    return SPDFactor(A).solve(B)


@dataclass(frozen=True)
class EigenPairs:
    """Ascending eigenvalues with orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def p(self) -> int:
        return self.values.shape[0]

    def head(self, p: int) -> "EigenPairs":
        return EigenPairs(self.values[:p], self.vectors[:, :p])


def _fix_signs(V, tol=1e-10):
    # first component with non-negligible magnitude made positive
    big = np.abs(V) > tol * np.abs(V).max(axis=0, initial=0.0)
    first = np.argmax(big, axis=0)
    signs = np.sign(V[first, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def smallest_eigenpairs(A, p: int, check: bool = True) -> EigenPairs:
    """The ``p`` algebraically smallest eigenpairs of a symmetric matrix.

    Uses LAPACK's tridiagonal reduction with relatively robust
    representations (``syevr``).  Each eigenvector's first non-negligible
    component is made positive.  With ``check`` the residual and
    orthonormality bounds are verified and a :class:`ConvergenceError`
    carrying the achieved residual is raised when they fail.
    """
    A = _dense(A)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("A must be square")
    if not 1 <= p <= n:
        raise ValueError(f"p must lie in 1..{n}, got {p}")
    A = 0.5 * (A + A.T)
    try:
        values, vectors = linalg.eigh(A, subset_by_index=(0, p - 1), driver="evr")
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolver failed: {exc}") from exc
    vectors = _fix_signs(vectors)
    if check:
        scale = max(np.abs(A).sum(axis=1).max(), 1.0)
        residual = np.linalg.norm(A @ vectors - vectors * values, axis=0).max()
        ortho = np.abs(vectors.T @ vectors - np.eye(p)).max()
        if residual > 1e-8 * scale or ortho > 1e-8:
            raise ConvergenceError(
                f"eigenpairs did not reach tolerance (residual {residual:.3e}, "
                f"orthonormality {ortho:.3e})", residual=residual)
    return EigenPairs(values, vectors)


def least_squares(design, targets) -> np.ndarray:
    """Minimum-norm least-squares coefficients for ``design @ coef ~ targets``."""
    design = np.asarray(design, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if design.ndim != 2 or design.shape[0] < 1 or design.shape[1] < 1:
        raise ValueError("design must be a non-empty 2-d matrix")
    coef, *_ = np.linalg.lstsq(design, targets, rcond=None)
    return coef
