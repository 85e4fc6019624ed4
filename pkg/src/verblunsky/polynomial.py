"""Matrix polynomials with exact coefficient arithmetic.

A :class:`MatrixPoly` stores ascending coefficients ``P(z) = sum_k P_k z^k``
as an array of shape ``(deg + 1, rows, cols)``.  Products and sums are
computed on coefficients, never by sampling.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DegenerateParameterError, DimensionError, RankError
from .matcore import solve


class MatrixPoly:
    """Matrix polynomial with ascending coefficients."""

    __slots__ = ("coef",)

    def __init__(self, coef):
        c = np.array(coef, dtype=complex)
        if c.ndim == 2:
            c = c[None]
        if c.ndim != 3:
            raise DimensionError(f"coefficients must have shape (deg+1, rows, cols), got {c.shape}")
        # trim trailing exact zeros, keep at least the constant term
        last = c.shape[0]
        while last > 1 and not np.any(c[last - 1]):
            last -= 1
        self.coef = c[:last]

    @classmethod
    def constant(cls, M) -> "MatrixPoly":
        return cls(np.asarray(M, dtype=complex)[None])

    @classmethod
    def identity(cls, m: int) -> "MatrixPoly":
        return cls.constant(np.eye(m))

    @classmethod
    def linear(cls, c0, c1) -> "MatrixPoly":
        return cls(np.stack([np.asarray(c0, complex), np.asarray(c1, complex)]))

    @property
    def shape(self) -> tuple[int, int]:
        return self.coef.shape[1:]

    @property
    def degree(self) -> int:
        return self.coef.shape[0] - 1

    @property
    def leading(self) -> np.ndarray:
        return self.coef[-1]

    def __call__(self, z):
        """Horner evaluation at a scalar `z`."""
        z = complex(z)
        out = self.coef[-1].copy()
        for c in self.coef[-2::-1]:
            out = out * z + c
        return out

    def evaluate_many(self, zs) -> np.ndarray:
        """Horner evaluation at every point of `zs`; shape ``(len(zs), rows, cols)``."""
        z = np.asarray(zs, dtype=complex).reshape(-1, 1, 1)
        out = np.broadcast_to(self.coef[-1], (z.shape[0],) + self.shape).copy()
        for c in self.coef[-2::-1]:
            out = out * z + c
        return out

    def derivative(self) -> "MatrixPoly":
        if self.degree == 0:
            return MatrixPoly(np.zeros((1,) + self.shape))
        k = np.arange(1, self.degree + 1)[:, None, None]
        return MatrixPoly(self.coef[1:] * k)

    def __matmul__(self, other):
        if not isinstance(other, MatrixPoly):
            other = MatrixPoly.constant(other)
        if self.shape[1] != other.shape[0]:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        out = np.zeros((self.degree + other.degree + 1, self.shape[0], other.shape[1]), complex)
        for a, A in enumerate(self.coef):
            for b, B in enumerate(other.coef):
                out[a + b] += A @ B
        return MatrixPoly(out)

    def __rmatmul__(self, other):
        return MatrixPoly.constant(other) @ self

    def __add__(self, other):
        if not isinstance(other, MatrixPoly):
            other = MatrixPoly.constant(other)
        d = max(self.degree, other.degree) + 1
        out = np.zeros((d,) + self.shape, complex)
        out[:self.degree + 1] += self.coef
        out[:other.degree + 1] += other.coef
        return MatrixPoly(out)

    def __neg__(self):
        return MatrixPoly(-self.coef)

    def __sub__(self, other):
        return self + (-other if isinstance(other, MatrixPoly) else -np.asarray(other))

    def rows(self, sl) -> "MatrixPoly":
        return MatrixPoly(self.coef[:, sl, :])

    def cols(self, sl) -> "MatrixPoly":
        return MatrixPoly(self.coef[:, :, sl])

    def __repr__(self):
        return f"MatrixPoly(degree={self.degree}, shape={self.shape})"


def product(factors: Sequence[MatrixPoly], m: int) -> MatrixPoly:
    """Ordered product ``F_0 F_1 ... F_{r-1}`` (identity of size m if empty)."""
    out = MatrixPoly.identity(m)
    for F in factors:
        out = out @ F
    return out


def inverse_series_at_infinity(D: MatrixPoly, terms: int) -> np.ndarray:
    """Coefficients ``c_0, c_1, ...`` with ``D(z)^{-1} = sum_m c_m z^{-d-m}``.

    From ``D(z) D(z)^{-1} = I``:  ``D_d c_m = delta_{m0} I - sum_{j=1}^{m} D_{d-j} c_{m-j}``.
    Requires an invertible leading coefficient.
    """
    d = D.degree
    p = D.shape[0]
    lead = D.leading
    try:
        solve(lead, np.eye(p))
    except RankError as exc:
        raise DegenerateParameterError("leading coefficient of the denominator is singular") from exc
    c = np.zeros((terms, p, p), complex)
    for m in range(terms):
        rhs = np.eye(p, dtype=complex) if m == 0 else np.zeros((p, p), complex)
        for j in range(1, min(m, d) + 1):
            rhs = rhs - D.coef[d - j] @ c[m - j]
        c[m] = solve(lead, rhs)
    return c


def laurent_at_infinity(N: MatrixPoly, D: MatrixPoly, max_power: int) -> dict[int, np.ndarray]:
    """Laurent coefficients of ``N(z) D(z)^{-1}`` at infinity.

    Returns a mapping ``e -> L_e`` for the powers ``z^{-e}``, covering every
    nonpositive power of the polynomial part (``e <= 0``) and ``1 <= e <= max_power``.
    """
    d = D.degree
    lo = d - N.degree  # smallest e present
    terms = max_power + N.degree - d + 1
    if terms <= 0:
        return {e: np.zeros((N.shape[0], D.shape[1]), complex) for e in range(1, max_power + 1)}
    c = inverse_series_at_infinity(D, terms)
    out = {}
    for e in range(min(lo, 1), max_power + 1):
        acc = np.zeros((N.shape[0], D.shape[1]), complex)
        # z^a * z^{-d-m} = z^{-e}  ->  m = e + a - d
        for a, Na in enumerate(N.coef):
            m = e + a - d
            if 0 <= m < terms:
                acc = acc + Na @ c[m]
        out[e] = acc
    return out


def det_roots(D: MatrixPoly, inf_tol: float = 1e-10) -> np.ndarray:
    """Finite zeros of ``det D(z)`` from the block companion pencil.

    The pencil ``z B - A`` with ``B = diag(I, ..., I, D_d)`` and ``A`` the block
    companion matrix has ``det(z B - A) = det D(z)``; eigenvalues with
    vanishing ``beta`` (a singular leading coefficient) are dropped.
    """
    p = D.shape[0]
    d = D.degree
    if D.shape[0] != D.shape[1]:
        raise DimensionError("det_roots needs a square matrix polynomial")
    if d == 0:
        return np.zeros(0, complex)
    m = d * p
    A = np.zeros((m, m), complex)
    B = np.eye(m, dtype=complex)
    A[:-p, p:] = np.eye(m - p)
    for i in range(d):
        A[-p:, i * p:(i + 1) * p] = -D.coef[i]
    B[-p:, -p:] = D.coef[d]
    w = scipy.linalg.eigvals(A, B, homogeneous_eigvals=True)
    alpha, beta = w
    scale = np.maximum(np.abs(alpha), np.abs(beta))
    finite = np.abs(beta) > inf_tol * scale
    if not np.any(scale > 0):
        raise DegenerateParameterError("det D vanishes identically")
    return alpha[finite] / beta[finite]
