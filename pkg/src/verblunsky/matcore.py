"""Dense complex-matrix kernels shared by the Toeplitz and Hankel pipelines.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  All routines are
pure; none of them mutates its arguments.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionError, PositivityError, RankError

#: Relative Frobenius tolerance for hermiticity, inherited by every check.
HERMITIAN_RTOL = 1e-10


def as_matrix(M) -> np.ndarray:
    """Return `M` as a 2-D complex array (scalars become 1x1)."""
    A = np.asarray(M, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2:
        raise DimensionError(f"expected a matrix, got array of shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def _require_square(A: np.ndarray) -> None:
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")


def adjoint(M: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(M, -1, -2))


def hermitian_residual(M) -> float:
    """``||M - M*||_F``."""
    A = as_matrix(M)
    return float(np.linalg.norm(A - adjoint(A)))


def is_hermitian(M, rtol: float = HERMITIAN_RTOL) -> bool:
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        return False
    return hermitian_residual(A) <= rtol * (1.0 + np.linalg.norm(A))


def hermitian_part(M) -> np.ndarray:
    A = as_matrix(M)
    return 0.5 * (A + adjoint(A))


def cholesky_pivots(M) -> np.ndarray:
    """Pivots of an unpivoted LDL* elimination of the Hermitian part of `M`.

    Elimination stops at the first non-positive pivot, which is returned as
    the last entry.  For a positive definite matrix the pivots are the squared
    diagonal entries of its Cholesky factor.
    """
    A = hermitian_part(M).copy()
    m = A.shape[0]
    pivots = []
    for k in range(m):
        d = A[k, k].real
        pivots.append(d)
        if not d > 0.0:
            break
        col = A[k + 1:, k].copy()
        A[k + 1:, k + 1:] -= np.outer(col, np.conj(col)) / d
    return np.array(pivots)


def is_positive_definite(M, rtol: float = HERMITIAN_RTOL) -> tuple[bool, float]:
    """Test ``M = M* > 0``.

    Returns
    -------
    ok : bool
        True iff `M` is Hermitian within `rtol` and every Cholesky pivot is
        strictly positive.
    min_pivot : float
        Smallest pivot met during elimination.
    """
    A = as_matrix(M)
    _require_square(A)
    if A.shape[0] == 0:
        return True, np.inf
    pivots = cholesky_pivots(A)
    min_pivot = float(pivots.min())
    ok = is_hermitian(A, rtol) and len(pivots) == A.shape[0] and min_pivot > 0.0
    return bool(ok), min_pivot


def is_positive_semidefinite(M, atol: float = 0.0, rtol: float = 1e-10) -> bool:
    """Hermitian with smallest eigenvalue ``>= -(atol + rtol*||M||_2)``."""
    A = as_matrix(M)
    _require_square(A)
    if A.shape[0] == 0:
        return True
    if not is_hermitian(A, max(rtol, HERMITIAN_RTOL)):
        return False
    ev = np.linalg.eigvalsh(hermitian_part(A))
    return bool(ev[0] >= -(atol + rtol * max(abs(ev[-1]), abs(ev[0]))))


def _pd_eigh(M) -> tuple[np.ndarray, np.ndarray]:
    A = as_matrix(M)
    _require_square(A)
    ok, pivot = is_positive_definite(A)
    if not ok:
        raise PositivityError(f"matrix is not positive definite (min pivot {pivot:.3g})")
    w, V = np.linalg.eigh(hermitian_part(A))
    if w[0] <= 0.0:
        raise PositivityError(f"matrix is not positive definite (min eigenvalue {w[0]:.3g})")
    return w, V


def pd_sqrt(M) -> np.ndarray:
    """The unique positive definite square root of `M`."""
    w, V = _pd_eigh(M)
    return (V * np.sqrt(w)) @ adjoint(V)


def pd_inv_sqrt(M) -> np.ndarray:
    """The positive definite square root of ``M^{-1}``."""
    w, V = _pd_eigh(M)
    return (V / np.sqrt(w)) @ adjoint(V)


def polar_unitary(M, rcond: float = 1e-13) -> np.ndarray:
    """Unitary `U` with ``U @ M`` Hermitian positive definite.

    With ``M = W S V*`` (SVD) the choice is ``U = V W*`` so that
    ``U M = V S V*``.
    """
    A = as_matrix(M)
    _require_square(A)
    W, s, Vh = np.linalg.svd(A)
    if s.size and s[-1] <= rcond * max(s[0], np.finfo(float).tiny):
        raise RankError("polar factor requested for a singular matrix")
    return adjoint(Vh) @ adjoint(W)


def spectral_norm(M) -> float:
    """Largest singular value (0 for empty matrices)."""
    A = as_matrix(M)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def solve(A, B) -> np.ndarray:
    """``A^{-1} B`` with a rank check instead of a silent garbage result."""
    A = as_matrix(A)
    _require_square(A)
    try:
        X = np.linalg.solve(A, B)
    except np.linalg.LinAlgError as exc:
        raise RankError(str(exc)) from exc
    if not np.all(np.isfinite(X)):
        raise RankError("solve produced non-finite values")
    return X


def inv(A) -> np.ndarray:
    A = as_matrix(A)
    return solve(A, np.eye(A.shape[0], dtype=complex))


def flip_J(p: int) -> np.ndarray:
    """``J = [[0, I_p], [I_p, 0]]``."""
    Z, I = np.zeros((p, p)), np.eye(p)
    return np.block([[Z, I], [I, Z]]).astype(complex)


def signature_j(p: int) -> np.ndarray:
    """``j = diag(I_p, -I_p)``."""
    return np.diag(np.r_[np.ones(p), -np.ones(p)]).astype(complex)


def block(M: np.ndarray, i: int, j: int, p: int) -> np.ndarray:
    """The (i, j) block of size p x p (0-based)."""
    return M[i * p:(i + 1) * p, j * p:(j + 1) * p]
