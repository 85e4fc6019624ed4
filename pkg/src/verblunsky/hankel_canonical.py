"""Block Hankel matrices, discrete canonical systems and the coefficients omega_k.

A positive definite block Hankel matrix ``H(n) = {H_{i+j-2}}`` satisfies

    A H - H A* = i Pi J Pi*,   A = down-shift,
    Phi1 = -i [0; H_0; ...; H_{n-2}],   Phi2 = [I; 0; ...; 0],

and generates the canonical system ``y_{k+1} = (I + (i/lam) J Q_k) y_k``.
The Hamiltonians factor as ``Q_k = omega_k* t_{k+1}^{-1} omega_k`` with the
p x 2p coefficients ``omega_k = P2 T(k+1) Pi(k+1)``, ``T = H^{-1}``.

The sequence ``omega_0, ..., omega_{n-1}`` determines ``H(n)`` uniquely; the
inverse map is :func:`hankel_from_omega`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateChainError,
    DimensionError,
    InvalidCoefficientError,
    PoleError,
    PositivityError,
    RankError,
    StructureError,
)
from .matcore import (
    adjoint,
    as_matrix,
    flip_J,
    hermitian_part,
    is_hermitian,
    is_positive_definite,
    polar_unitary,
    solve,
)
from .measure import DiscreteMeasure
from .polynomial import MatrixPoly, laurent_at_infinity, product


@dataclass(frozen=True)
class HankelSpec:
    """Blocks ``H_0, ..., H_{2n-2}`` of ``H(n)``."""

    H: tuple

    def __post_init__(self):
        blocks = tuple(as_matrix(b) for b in self.H)
        if len(blocks) % 2 != 1:
            raise DimensionError(f"a Hankel spec needs 2n-1 blocks, got {len(blocks)}")
        p = blocks[0].shape[0]
        for k, b in enumerate(blocks):
            if b.shape != (p, p):
                raise DimensionError(f"H_{k} has shape {b.shape}, expected {(p, p)}")
            if not is_hermitian(b, 1e-9):
                raise StructureError(f"H_{k} is not Hermitian")
        object.__setattr__(self, "H", blocks)

    @property
    def p(self) -> int:
        return self.H[0].shape[0]

    @property
    def n(self) -> int:
        return (len(self.H) + 1) // 2

    def section(self, m: int) -> "HankelSpec":
        if not 1 <= m <= self.n:
            raise DimensionError(f"section order {m} outside 1..{self.n}")
        return HankelSpec(self.H[:2 * m - 1])


class HankelIdentityData(NamedTuple):
    A: np.ndarray
    Phi1: np.ndarray
    Phi2: np.ndarray
    J: np.ndarray
    P2: np.ndarray

    @property
    def Pi(self) -> np.ndarray:
        return np.hstack([self.Phi1, self.Phi2])


@dataclass(frozen=True)
class CanonicalSystem:
    """Hamiltonians ``Q_0, ..., Q_{n-1}`` (2p x 2p, PSD, rank <= p)."""

    Q: tuple

    def __post_init__(self):
        object.__setattr__(self, "Q", tuple(as_matrix(q) for q in self.Q))

    @property
    def p(self) -> int:
        return self.Q[0].shape[0] // 2

    @property
    def n(self) -> int:
        return len(self.Q)


@dataclass(frozen=True)
class OmegaSeq:
    """Coefficients ``omega_0, ..., omega_{n-1}`` (each p x 2p)."""

    omega: tuple

    def __post_init__(self):
        object.__setattr__(self, "omega", tuple(as_matrix(w) for w in self.omega))

    @property
    def p(self) -> int:
        return self.omega[0].shape[0]

    @property
    def n(self) -> int:
        return len(self.omega)

    def pairing(self, k: int) -> np.ndarray:
        """``omega_0 [0; I]`` for k = 0, ``i omega_k J omega_{k-1}*`` otherwise (= ``t_{k+1}``)."""
        p = self.p
        if k == 0:
            return self.omega[0][:, p:]
        return 1j * self.omega[k] @ flip_J(p) @ adjoint(self.omega[k - 1])

    def validate(self, rtol: float = 1e-8) -> None:
        """Check the admissibility relations of an omega chain.

        ``omega_0 [I; 0] = 0``, ``omega_0 [0; I] > 0``; for k >= 1
        ``omega_k J omega_k* = 0`` and ``i omega_k J omega_{k-1}* > 0``.
        """
        p = self.p
        J = flip_J(p)
        for k, w in enumerate(self.omega):
            if w.shape != (p, 2 * p):
                raise DimensionError(f"omega_{k} has shape {w.shape}, expected {(p, 2 * p)}")
        w0 = self.omega[0]
        scale = 1 + np.linalg.norm(w0)
        if np.linalg.norm(w0[:, :p]) > rtol * scale:
            raise InvalidCoefficientError("omega_0 [I; 0] must vanish")
        for k in range(self.n):
            if k > 0:
                w = self.omega[k]
                if np.linalg.norm(w @ J @ adjoint(w)) > rtol * (1 + np.linalg.norm(w)) ** 2:
                    raise InvalidCoefficientError(f"omega_{k} J omega_{k}* must vanish")
            t = self.pairing(k)
            if not is_hermitian(t, rtol):
                raise InvalidCoefficientError(f"pairing {k} is not Hermitian")
            ok, _ = is_positive_definite(hermitian_part(t))
            if not ok:
                raise InvalidCoefficientError(f"pairing {k} is not positive definite")


@dataclass(frozen=True)
class GammaSeq:
    """Factors ``gamma_k`` (p x 2p) with ``Q_k = gamma_k* gamma_k``."""

    gamma: tuple

    def __post_init__(self):
        object.__setattr__(self, "gamma", tuple(as_matrix(g) for g in self.gamma))

    @property
    def p(self) -> int:
        return self.gamma[0].shape[0]

    @property
    def n(self) -> int:
        return len(self.gamma)


# -- assembly and the identity ---------------------------------------------------

def assemble_hankel(spec: HankelSpec) -> np.ndarray:
    p, n = spec.p, spec.n
    H = np.empty((n * p, n * p), dtype=complex)
    for i in range(n):
        for j in range(n):
            H[i * p:(i + 1) * p, j * p:(j + 1) * p] = spec.H[i + j]
    return H


def hankel_identity(spec: HankelSpec) -> HankelIdentityData:
    p, n = spec.p, spec.n
    A = np.kron(np.eye(n, k=-1), np.eye(p)).astype(complex)
    Phi1 = np.zeros((n * p, p), complex)
    for i in range(1, n):
        Phi1[i * p:(i + 1) * p] = -1j * spec.H[i - 1]
    Phi2 = np.zeros((n * p, p), complex)
    Phi2[:p] = np.eye(p)
    P2 = np.zeros((p, n * p), complex)
    P2[:, -p:] = np.eye(p)
    return HankelIdentityData(A=A, Phi1=Phi1, Phi2=Phi2, J=flip_J(p), P2=P2)


def verify_hankel_identity(spec: HankelSpec) -> float:
    """``||A H - H A* - i Pi J Pi*||_F``."""
    d = hankel_identity(spec)
    H = assemble_hankel(spec)
    Pi = d.Pi
    return float(np.linalg.norm(d.A @ H - H @ adjoint(d.A) - 1j * Pi @ d.J @ adjoint(Pi)))


def _require_pd(spec: HankelSpec) -> None:
    ok, pivot = is_positive_definite(assemble_hankel(spec))
    if not ok:
        raise PositivityError(f"H({spec.n}) is not positive definite (min pivot {pivot:.3g})")


def leading_sections_pd(spec: HankelSpec) -> list[bool]:
    return [is_positive_definite(assemble_hankel(spec.section(m)))[0] for m in range(1, spec.n + 1)]


def transfer_wA_hankel(spec: HankelSpec, lam: complex) -> np.ndarray:
    """``w_A(lam) = I - i J Pi* H^{-1} (A - lam I)^{-1} Pi`` (A nilpotent, so lam != 0)."""
    lam = complex(lam)
    if lam == 0:
        raise PoleError("the Hankel transfer function has a pole at lambda = 0")
    d = hankel_identity(spec)
    m = d.A.shape[0]
    R = scipy.linalg.solve_triangular(d.A - lam * np.eye(m), d.Pi, lower=True)
    X = solve(assemble_hankel(spec), R)
    return np.eye(2 * spec.p) - 1j * d.J @ adjoint(d.Pi) @ X


# -- Schur complements and the omega coefficients -------------------------------------

def schur_t_hankel(spec: HankelSpec, k: int) -> np.ndarray:
    """``t_k = (H_{2k-2} - H21 T(k-1) H12)^{-1}``; ``t_1 = H_0^{-1}``."""
    p = spec.p
    if not 1 <= k <= spec.n:
        raise DimensionError(f"k = {k} outside 1..{spec.n}")
    if k == 1:
        return solve(spec.H[0], np.eye(p))
    prev = assemble_hankel(spec.section(k - 1))
    H12 = np.vstack(spec.H[k - 1:2 * k - 2])
    try:
        schur = spec.H[2 * k - 2] - adjoint(H12) @ solve(prev, H12)
        return solve(schur, np.eye(p))
    except RankError as exc:
        raise RankError(f"leading section H({k}) or H({k - 1}) is singular") from exc


def omega_from_hankel(spec: HankelSpec) -> OmegaSeq:
    """``omega_k = P2 T(k+1) Pi(k+1)`` for k = 0..n-1."""
    _require_pd(spec)
    p = spec.p
    out = []
    for k in range(spec.n):
        sec = spec.section(k + 1)
        d = hankel_identity(sec)
        Z = solve(assemble_hankel(sec), d.Pi)
        out.append(Z[-p:])
    return OmegaSeq(tuple(out))


def hamiltonian_from_hankel(spec: HankelSpec) -> CanonicalSystem:
    """``Q_k = Pi* T P2* t_{k+1}^{-1} P2 T Pi`` with ``t`` from Schur complements."""
    _require_pd(spec)
    p = spec.p
    Q = []
    for k in range(spec.n):
        if k == 0:
            E = np.vstack([np.zeros((p, p)), np.eye(p)])
            Q.append(E @ solve(spec.H[0], adjoint(E)))
            continue
        sec = spec.section(k + 1)
        d = hankel_identity(sec)
        row = d.P2 @ solve(assemble_hankel(sec), d.Pi)
        t = schur_t_hankel(spec, k + 1)
        Q.append(adjoint(row) @ solve(t, row))
    return CanonicalSystem(tuple(Q))


def hamiltonian_from_omega(os: OmegaSeq) -> CanonicalSystem:
    """``Q_0 = omega_0* (omega_0 [0;I])^{-1} omega_0``, ``Q_k = omega_k* (i omega_k J omega_{k-1}*)^{-1} omega_k``."""
    Q = []
    for k, w in enumerate(os.omega):
        try:
            Q.append(adjoint(w) @ solve(os.pairing(k), w))
        except RankError as exc:
            raise InvalidCoefficientError(f"pairing {k} is singular") from exc
    return CanonicalSystem(tuple(Q))


# -- gamma normalization ----------------------------------------------------------------

def gamma_factor(cs: CanonicalSystem) -> GammaSeq:
    """Rank-p factors ``Q_k = gamma_k* gamma_k`` from the top p eigenpairs."""
    p = cs.p
    out = []
    for k, Q in enumerate(cs.Q):
        w, V = np.linalg.eigh(hermitian_part(Q))
        if w[0] < -1e-10 * max(1.0, abs(w[-1])):
            raise StructureError(f"Q_{k} is not positive semidefinite")
        if np.sum(w[:p]) > 1e-12 * max(np.trace(Q).real, 1e-300) * p:
            raise StructureError(f"Q_{k} has rank greater than p")
        top = np.clip(w[p:], 0.0, None)
        out.append(np.sqrt(top)[:, None] * adjoint(V[:, p:]))
    return GammaSeq(tuple(out))


def omega_from_gamma(gs: GammaSeq) -> OmegaSeq:
    """Normalize a gamma chain into the unique omega chain with the same Hamiltonian."""
    p = gs.p
    J = flip_J(p)
    g0 = gs.gamma[0]
    if np.linalg.norm(g0[:, :p]) > 1e-10 * (1 + np.linalg.norm(g0)):
        raise DegenerateChainError("gamma_0 [I; 0] must vanish")
    try:
        u = polar_unitary(g0[:, p:])
    except RankError as exc:
        raise DegenerateChainError("gamma_0 [0; I] is singular") from exc
    omega = [(u @ g0[:, p:]) @ u @ g0]
    for k in range(1, gs.n):
        M = 1j * gs.gamma[k] @ J @ adjoint(omega[-1])
        try:
            u = polar_unitary(M)
        except RankError as exc:
            raise DegenerateChainError(f"gamma_{k - 1} J gamma_{k}* is singular") from exc
        omega.append((u @ M) @ u @ gs.gamma[k])
    return OmegaSeq(tuple(omega))


# -- inverse reconstruction ----------------------------------------------------------------

def frak_a_factors(Q: Sequence[np.ndarray]) -> list[MatrixPoly]:
    """Linear factors ``I - i z Q_k J``."""
    out = []
    for q in Q:
        m = q.shape[0]
        out.append(MatrixPoly.linear(np.eye(m), -1j * q @ flip_J(m // 2)))
    return out


def frak_a_from_hamiltonians(Q: Sequence[np.ndarray], m: int) -> MatrixPoly:
    """``(I - i z Q_0 J)(I - i z Q_1 J) ... `` with the k = 0 factor leftmost."""
    return product(frak_a_factors(Q), m)


class HankelReconstruction(NamedTuple):
    spec: HankelSpec
    #: ``(N, D)`` numerator/denominator pairs of ``phi = i N D^{-1}`` per step r >= 1
    steps: tuple


def _odd_block_laurent(Q, omega_r, r: int, p: int):
    A = frak_a_from_hamiltonians(Q[:r], 2 * p)
    Qpar = adjoint(omega_r)
    N = A.rows(slice(0, p)) @ Qpar
    D = A.rows(slice(p, 2 * p)) @ Qpar
    if np.linalg.norm(D.coef[r:].reshape(-1)) == 0 or D.degree != r:
        raise InvalidCoefficientError(f"denominator at step {r} has degree {D.degree}, expected {r}")
    try:
        L = laurent_at_infinity(N, D, 2 * r)
    except Exception as exc:
        raise InvalidCoefficientError(f"denominator at step {r} has a singular leading term") from exc
    return -1j * L[2 * r], (N, D)


def _odd_block_direct(blocks: list, os: OmegaSeq, r: int, p: int):
    # last block row of H(r+1)^{-1} Pi(r+1) is omega_r; unknown H_{2r-1} enters linearly
    prev = HankelSpec(tuple(blocks))
    V = solve(assemble_hankel(prev), hankel_identity(prev).Pi)
    rhs = np.hstack([-1j * blocks[r - 1], np.zeros((p, p))]) - solve(os.pairing(r), os.omega[r])
    for a in range(r - 1):
        rhs = rhs - blocks[r + a] @ V[a * p:(a + 1) * p]
    return rhs @ np.linalg.pinv(os.omega[r - 1]), None


def reconstruct_hankel(os: OmegaSeq, rtol: float = 1e-8, method: str = "laurent") -> HankelReconstruction:
    """Recover ``H(n)`` from its omega chain, block pair by block pair.

    Parameters
    ----------
    os : OmegaSeq
        Admissible chain ``omega_0..omega_{n-1}``.
    rtol : float
        Tolerance for the admissibility checks.
    method : {"laurent", "direct"}
        ``"laurent"`` builds ``A(r, z)`` from ``Q_0..Q_{r-1}``, expands
        ``phi = i A_1 omega_r* (A_2 omega_r*)^{-1}`` at infinity and reads
        ``H_{2r-1}`` off the ``z^{-2r}`` coefficient.  ``"direct"`` solves the
        linear relation between ``omega_r`` and the last block row of
        ``H(r+1)^{-1} Pi(r+1)`` for ``H_{2r-1}``.  Either way
        ``H_{2r} = t_{r+1}^{-1} + H21 T(r) H12``.

    Returns
    -------
    HankelReconstruction
        The spec and, for the Laurent route, the ``(N, D)`` pair of each step.
    """
    os.validate(rtol)
    blocks, steps = _blocks_from_omega(os, method)
    spec = HankelSpec(tuple(blocks))
    _require_pd(spec)
    return HankelReconstruction(spec, tuple(steps))


def _blocks_from_omega(os: OmegaSeq, method: str = "laurent") -> tuple[list, list]:
    """The reconstruction loop without validation or the final positivity check."""
    if method not in ("laurent", "direct"):
        raise ValueError(f"unknown method {method!r}")
    p = os.p
    Q = hamiltonian_from_omega(os).Q if method == "laurent" else None
    blocks = [hermitian_part(solve(os.pairing(0), np.eye(p)))]
    steps = []
    for r in range(1, os.n):
        if method == "laurent":
            H_odd, step = _odd_block_laurent(Q, os.omega[r], r, p)
        else:
            H_odd, step = _odd_block_direct(blocks, os, r, p)
        blocks.append(hermitian_part(H_odd))
        prev = HankelSpec(tuple(blocks[:2 * r - 1]))
        H12 = np.vstack(blocks[r:2 * r])
        H_even = solve(os.pairing(r), np.eye(p)) + adjoint(H12) @ solve(assemble_hankel(prev), H12)
        blocks.append(hermitian_part(H_even))
        steps.append(step)
    return blocks, steps


def hankel_from_omega(os: OmegaSeq, method: str = "laurent") -> HankelSpec:
    return reconstruct_hankel(os, method=method).spec


# -- fundamental solution and spectral transform -------------------------------------------

def _step(Q: np.ndarray, mu: complex) -> np.ndarray:
    """``I + i mu J Q``, the step matrix at spectral parameter ``lam = 1/mu``."""
    m = Q.shape[0]
    return np.eye(m) + 1j * mu * flip_J(m // 2) @ Q


def fundamental_Y(cs: CanonicalSystem, k: int, lam: complex) -> np.ndarray:
    """``Y(k, lam)`` from ``Y(k+1) = (I + (i/lam) J Q_k) Y(k)``, ``Y(0) = I``."""
    lam = complex(lam)
    if lam == 0:
        raise PoleError("the canonical recursion has a pole at lambda = 0")
    return fundamental_Y_inverse_arg(cs, k, 1.0 / lam)


def fundamental_Y_inverse_arg(cs: CanonicalSystem, k: int, mu: complex) -> np.ndarray:
    """``Y(k, 1/mu)``; a polynomial in `mu`, so ``mu = 0`` is admissible."""
    if not 0 <= k <= cs.n:
        raise DimensionError(f"k = {k} outside 0..{cs.n}")
    Y = np.eye(2 * cs.p, dtype=complex)
    for Q in cs.Q[:k]:
        Y = _step(Q, complex(mu)) @ Y
    return Y


def fundamental_Y_product(cs: CanonicalSystem, k: int, lam: complex) -> np.ndarray:
    """``Y(k, lam)`` as ``A(k, 1/conj(lam))*`` from the polynomial product."""
    lam = complex(lam)
    if lam == 0:
        raise PoleError("lambda = 0")
    A = frak_a_from_hamiltonians(cs.Q[:k], 2 * cs.p)
    return adjoint(A(1.0 / np.conj(lam)))


def _as_h(h, n: int, p: int) -> dict[int, np.ndarray]:
    if isinstance(h, dict):
        items = h.items()
    else:
        items = enumerate(h)
    out = {}
    for k, v in items:
        if not 0 <= k < n:
            raise DimensionError(f"h is supported outside 0..{n - 1}")
        out[k] = np.asarray(v, dtype=complex).reshape(2 * p)
    return out


class IsometryCheck(NamedTuple):
    lhs: float
    rhs: float

    @property
    def gap(self) -> float:
        return abs(self.lhs - self.rhs)


def transform_V(cs: CanonicalSystem, h, t: float) -> np.ndarray:
    """``(V h)(t) = [0 I] sum_k Y(k, 1/t)* Q_k h(k)``."""
    p = cs.p
    hv = _as_h(h, cs.n, p)
    acc = np.zeros(2 * p, complex)
    for k, v in hv.items():
        acc = acc + adjoint(fundamental_Y_inverse_arg(cs, k, t)) @ cs.Q[k] @ v
    return acc[p:]


def spectral_transform_V(cs: CanonicalSystem, h, measure: DiscreteMeasure) -> IsometryCheck:
    """``lhs = sum h(k)* Q_k h(k)`` and ``rhs = int (V h)* dtau (V h)``."""
    p = cs.p
    hv = _as_h(h, cs.n, p)
    lhs = sum((np.conj(v) @ cs.Q[k] @ v).real for k, v in hv.items())
    rhs = 0.0
    for t, w in measure.atoms():
        f = transform_V(cs, hv, t)
        rhs += (np.conj(f) @ w @ f).real
    return IsometryCheck(float(lhs), float(rhs))


def measure_to_hankel(measure: DiscreteMeasure, n: int) -> HankelSpec:
    """``H_k = sum_j t_j^k w_j`` for k = 0..2n-2 (positivity is not enforced)."""
    if n < 1:
        raise DimensionError("n must be positive")
    return HankelSpec(tuple(hermitian_part(measure.moment(k)) for k in range(2 * n - 1)))
