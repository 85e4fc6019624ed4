"""Block Toeplitz matrices, discrete Dirac systems and the coefficients rho_k.

A positive definite block Toeplitz matrix ``S(n) = {s_{j-i}}`` together with a
Hermitian ``p x p`` matrix ``nu`` determines, through the operator identity

    A S - S A* = i Pi J Pi*,      Pi = [Phi1, Phi2],

a discrete Dirac system

    W_{k+1}(lam) - W_k(lam) = -(i/lam) j C_k W_k(lam),    C_k > 0,  C_k j C_k = j,

and each potential ``C_k`` is the Halmos extension of a strict contraction
``rho_k``.  This module implements the forward map ``(S, nu) -> C -> rho``,
its inverse, the transfer matrix function ``w_A`` with its factorization,
the fundamental solution ``W_k`` and the Weyl series.

Only ``s_0, s_{-1}, ..., s_{1-n}`` are stored; ``s_k = s_{-k}*`` for k > 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    ContractionError,
    DimensionError,
    DomainError,
    PoleError,
    PositivityError,
    ReconstructionError,
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
    pd_inv_sqrt,
    signature_j,
    solve,
    spectral_norm,
)

#: ``||C j C - j||_F`` tolerance for potentials.
JUNITARY_TOL = 1e-9


def K_matrix(p: int) -> np.ndarray:
    """``K = (1/sqrt 2) [[I, -I], [I, I]]``; unitary with ``K* J K = j``."""
    I = np.eye(p)
    return (np.block([[I, -I], [I, I]]) / np.sqrt(2.0)).astype(complex)


@dataclass(frozen=True)
class ToeplitzSpec:
    """The pair ``{S(n), nu}``.

    Attributes
    ----------
    s : tuple of (p, p) arrays
        ``s_0, s_{-1}, ..., s_{1-n}``.
    nu : (p, p) array
        Hermitian offset entering ``Phi2``.
    """

    s: tuple
    nu: np.ndarray

    def __post_init__(self):
        if len(self.s) == 0:
            raise DimensionError("a Toeplitz spec needs at least s_0")
        blocks = tuple(as_matrix(b) for b in self.s)
        p = blocks[0].shape[0]
        for b in blocks:
            if b.shape != (p, p):
                raise DimensionError(f"inconsistent block shape {b.shape}, expected {(p, p)}")
        nu = np.zeros((p, p), dtype=complex) if self.nu is None else as_matrix(self.nu)
        if nu.shape != (p, p):
            raise DimensionError(f"nu has shape {nu.shape}, expected {(p, p)}")
        if not is_hermitian(blocks[0]):
            raise StructureError("s_0 is not Hermitian")
        if not is_hermitian(nu):
            raise StructureError("nu is not Hermitian")
        object.__setattr__(self, "s", blocks)
        object.__setattr__(self, "nu", nu)

    @classmethod
    def from_blocks(cls, s: Sequence, nu=None) -> "ToeplitzSpec":
        return cls(tuple(s), nu)

    @property
    def p(self) -> int:
        return self.s[0].shape[0]

    @property
    def n(self) -> int:
        return len(self.s)

    def section(self, m: int) -> "ToeplitzSpec":
        """The pair ``{S(m), nu}`` of the leading m x m block section."""
        if not 1 <= m <= self.n:
            raise DimensionError(f"section order {m} outside 1..{self.n}")
        return ToeplitzSpec(self.s[:m], self.nu)

    def block(self, k: int) -> np.ndarray:
        """``s_k`` for any ``|k| < n``."""
        if k <= 0:
            return self.s[-k]
        return adjoint(self.s[k])

    @property
    def alpha0(self) -> np.ndarray:
        return self.s[0] / 2 + 1j * self.nu


class ToeplitzIdentityData(NamedTuple):
    A: np.ndarray
    Phi1: np.ndarray
    Phi2: np.ndarray
    J: np.ndarray
    K: np.ndarray
    j: np.ndarray

    @property
    def Pi(self) -> np.ndarray:
        return np.hstack([self.Phi1, self.Phi2])


@dataclass(frozen=True)
class DiracSystem:
    """Potentials ``C_0, ..., C_{n-1}`` (each 2p x 2p)."""

    C: tuple

    def __post_init__(self):
        object.__setattr__(self, "C", tuple(as_matrix(c) for c in self.C))

    @property
    def p(self) -> int:
        return self.C[0].shape[0] // 2

    @property
    def n(self) -> int:
        return len(self.C)

    def validate(self, tol: float = JUNITARY_TOL) -> None:
        """Raise :class:`StructureError` unless every ``C_k`` is J-unitary PD."""
        j = signature_j(self.p)
        for k, C in enumerate(self.C):
            ok, _ = is_positive_definite(C)
            if not ok:
                raise StructureError(f"C_{k} is not Hermitian positive definite")
            if np.linalg.norm(C @ j @ C - j) > tol * (1 + np.linalg.norm(C) ** 2):
                raise StructureError(f"C_{k} is not j-unitary")


@dataclass(frozen=True)
class VerblunskySeqT:
    """Coefficients ``rho_0, ..., rho_{n-1}`` with spectral norm < 1."""

    rho: tuple

    def __post_init__(self):
        object.__setattr__(self, "rho", tuple(as_matrix(r) for r in self.rho))

    @property
    def p(self) -> int:
        return self.rho[0].shape[0]

    @property
    def n(self) -> int:
        return len(self.rho)

    def validate(self) -> None:
        for k, r in enumerate(self.rho):
            if r.shape != (self.p, self.p):
                raise DimensionError(f"rho_{k} has shape {r.shape}")
            if not spectral_norm(r) < 1.0:
                raise ContractionError(f"||rho_{k}|| = {spectral_norm(r):.6g} is not < 1")


class SchurQuantities(NamedTuple):
    """Last-block-row quantities of ``S(k)``; ``beta`` is ``beta(k-1)``."""

    t: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    beta: np.ndarray


class WeylSeries(NamedTuple):
    """``i phi(i(z+1)/(z-1)) = alpha0 + sum_{k>=1} s_{-k} z^k`` truncated."""

    alpha0: np.ndarray
    tail: tuple

    @property
    def p(self) -> int:
        return self.alpha0.shape[0]

    @property
    def order(self) -> int:
        return len(self.tail)


# -- assembly and the operator identity -------------------------------------

def assemble_toeplitz(spec: ToeplitzSpec) -> np.ndarray:
    """``S(n)`` with block (i, j) equal to ``s_{j-i}``."""
    p, n = spec.p, spec.n
    S = np.empty((n * p, n * p), dtype=complex)
    for i in range(n):
        for j in range(n):
            S[i * p:(i + 1) * p, j * p:(j + 1) * p] = spec.block(j - i)
    return S


def _operator_A(p: int, n: int) -> np.ndarray:
    # lower triangular: i/2 on the diagonal, i strictly below
    L = np.tril(np.ones((n, n)), -1) * 1j + np.eye(n) * 0.5j
    return np.kron(L, np.eye(p))


def _phi2(spec: ToeplitzSpec) -> np.ndarray:
    partial = np.cumsum(np.stack(spec.s), axis=0) - spec.s[0] / 2
    return (partial + 1j * spec.nu).reshape(spec.n * spec.p, spec.p)


def build_identity(spec: ToeplitzSpec) -> ToeplitzIdentityData:
    p, n = spec.p, spec.n
    Phi1 = np.tile(np.eye(p, dtype=complex), (n, 1))
    return ToeplitzIdentityData(
        A=_operator_A(p, n),
        Phi1=Phi1,
        Phi2=_phi2(spec),
        J=flip_J(p),
        K=K_matrix(p),
        j=signature_j(p),
    )


def verify_identity(spec: ToeplitzSpec) -> float:
    """``||A S - S A* - i Pi J Pi*||_F``."""
    d = build_identity(spec)
    S = assemble_toeplitz(spec)
    Pi = d.Pi
    R = d.A @ S - S @ adjoint(d.A) - 1j * Pi @ d.J @ adjoint(Pi)
    return float(np.linalg.norm(R))


def _require_pd(S: np.ndarray, what: str) -> None:
    ok, pivot = is_positive_definite(S)
    if not ok:
        raise PositivityError(f"{what} is not positive definite (min pivot {pivot:.3g})")


# -- Schur quantities and the Dirac potentials --------------------------------

def _last_row_data(spec: ToeplitzSpec) -> tuple[np.ndarray, np.ndarray]:
    """``t`` and ``[X Y] = [0 ... I] S^{-1} Pi`` for the full order of `spec`."""
    p = spec.p
    S = assemble_toeplitz(spec)
    d = build_identity(spec)
    E = np.zeros((spec.n * p, p), dtype=complex)
    E[-p:] = np.eye(p)
    Z = solve(S, E)  # S^{-1} E ; its adjoint is the last block row of S^{-1}
    t = hermitian_part(Z[-p:])
    XY = adjoint(Z) @ d.Pi
    return t, XY


def schur_quantities(spec: ToeplitzSpec, k: int) -> SchurQuantities:
    """``t_k``, ``X_k``, ``Y_k`` and ``beta(k-1) = t_k^{-1/2} [X_k Y_k]``."""
    sec = spec.section(k)
    _require_pd(assemble_toeplitz(sec), f"S({k})")
    p = spec.p
    t, XY = _last_row_data(sec)
    beta = pd_inv_sqrt(t) @ XY
    return SchurQuantities(t=t, X=XY[:, :p], Y=XY[:, p:], beta=beta)


def dirac_from_toeplitz(spec: ToeplitzSpec) -> DiracSystem:
    """``C_k = 2 K* beta(k)* beta(k) K - j`` for k = 0..n-1."""
    _require_pd(assemble_toeplitz(spec), f"S({spec.n})")
    p = spec.p
    K, j = K_matrix(p), signature_j(p)
    C = []
    for k in range(spec.n):
        beta = schur_quantities(spec, k + 1).beta
        C.append(2 * adjoint(K) @ adjoint(beta) @ beta @ K - j)
    return DiracSystem(tuple(C))


# -- Halmos extension ------------------------------------------------------------

def halmos_extend(rho) -> np.ndarray:
    """``D F`` with ``F = [[I, rho], [rho*, I]]``, ``D = diag((I-rho rho*)^{-1/2}, (I-rho* rho)^{-1/2})``."""
    rho = as_matrix(rho)
    p = rho.shape[0]
    if rho.shape != (p, p):
        raise DimensionError("rho must be square")
    if not spectral_norm(rho) < 1.0:
        raise ContractionError(f"||rho|| = {spectral_norm(rho):.6g} is not < 1")
    I = np.eye(p)
    D1 = pd_inv_sqrt(I - rho @ adjoint(rho))
    D2 = pd_inv_sqrt(I - adjoint(rho) @ rho)
    F = np.block([[I, rho], [adjoint(rho), I]])
    D = np.block([[D1, np.zeros((p, p))], [np.zeros((p, p)), D2]])
    return D @ F


def halmos_decompose(C, tol: float = JUNITARY_TOL) -> np.ndarray:
    """``rho = c11^{-1} c12`` of a J-unitary positive potential."""
    C = as_matrix(C)
    if C.shape[0] != C.shape[1] or C.shape[0] % 2:
        raise DimensionError(f"potential must be 2p x 2p, got {C.shape}")
    DiracSystem((C,)).validate(tol)
    p = C.shape[0] // 2
    try:
        return solve(C[:p, :p], C[:p, p:])
    except RankError as exc:
        raise StructureError("top-left block of potential is singular") from exc


def verblunsky_from_dirac(D: DiracSystem) -> VerblunskySeqT:
    D.validate()
    seq = VerblunskySeqT(tuple(halmos_decompose(C) for C in D.C))
    seq.validate()
    return seq


def verblunsky_from_toeplitz(spec: ToeplitzSpec) -> VerblunskySeqT:
    return verblunsky_from_dirac(dirac_from_toeplitz(spec))


# -- inverse reconstruction -----------------------------------------------------

def _last_potential(spec: ToeplitzSpec) -> np.ndarray:
    """``C_{n-1}`` of `spec`, computed without assuming positivity.

    Uses ``beta* beta = [X Y]* t^{-1} [X Y]`` so the map can be probed away
    from the positive definite set during Newton iterations.
    """
    p = spec.p
    t, XY = _last_row_data(spec)
    M = adjoint(XY) @ solve(t, XY)
    K = K_matrix(p)
    return 2 * adjoint(K) @ M @ K - signature_j(p)


def _potential_of_extension(known: ToeplitzSpec, x: np.ndarray) -> np.ndarray:
    """Potential ``C_k`` produced when `known` (order k) is extended by ``s_{-k} = x``."""
    return _last_potential(ToeplitzSpec(known.s + (x,), known.nu))


def _base_block(C0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``s_0`` and ``nu`` from the first potential."""
    p = C0.shape[0] // 2
    K = K_matrix(p)
    M = K @ (C0 + signature_j(p)) @ adjoint(K) / 2
    s0 = hermitian_part(solve(M[:p, :p], np.eye(p)))
    alpha0 = solve(M[:p, :p], M[:p, p:])
    nu = hermitian_part((alpha0 - adjoint(alpha0)) / 2j)
    return s0, nu


def _pack(x: np.ndarray) -> np.ndarray:
    return np.concatenate([x.real.ravel(), x.imag.ravel()])


def _unpack(v: np.ndarray, p: int) -> np.ndarray:
    return (v[:p * p] + 1j * v[p * p:]).reshape(p, p)


def _newton_block(known: ToeplitzSpec, target: np.ndarray, tol: float, max_iter: int):
    """Damped Gauss-Newton for ``s_{-k}`` with a central-difference Jacobian.

    Returns ``(x, iterations, residual)``.
    """
    p = known.p

    def residual(v):
        try:
            R = _potential_of_extension(known, _unpack(v, p)) - target
        except RankError:
            return None
        return _pack(R)

    v = np.zeros(2 * p * p)
    r = residual(v)
    if r is None:
        raise ReconstructionError("forward map undefined at the seed", block=known.n)
    norm = np.linalg.norm(r)
    for it in range(max_iter + 1):
        if norm <= tol:
            return _unpack(v, p), it, norm
        if it == max_iter:
            break
        h = 1e-6 * (1.0 + np.linalg.norm(v))
        Jac = np.empty((r.size, v.size))
        for c in range(v.size):
            e = np.zeros_like(v)
            e[c] = h
            rp, rm = residual(v + e), residual(v - e)
            if rp is None or rm is None:
                raise ReconstructionError("forward map undefined near iterate", norm, known.n)
            Jac[:, c] = (rp - rm) / (2 * h)
        step = np.linalg.lstsq(Jac, -r, rcond=None)[0]
        lam = 1.0
        while lam > 1e-6:
            trial = residual(v + lam * step)
            if trial is not None and np.linalg.norm(trial) < norm:
                break
            lam /= 2
        else:
            break
        v = v + lam * step
        r = trial
        norm = np.linalg.norm(r)
    raise ReconstructionError(
        f"Newton did not reach residual {tol:g} for block s_-{known.n} "
        f"(residual {norm:.3e})",
        residual=norm,
        block=known.n,
    )


def _direct_block(known: ToeplitzSpec, target: np.ndarray) -> np.ndarray:
    """Closed-form ``s_{-k}``: a linear equation in the unknown block.

    With ``G = M11^{-1} M12`` read off the target potential, the last block
    row ``[g1, g2]`` of ``S(k+1)^{-1} Pi(k+1)`` (up to the factor ``t``)
    must satisfy ``g2 = g1 G``; both ``g1`` and ``g2`` are affine in
    ``s_{-k}``.
    """
    p, k = known.p, known.n
    K = K_matrix(p)
    M = K @ (target + signature_j(p)) @ adjoint(K) / 2
    G = solve(M[:p, :p], M[:p, p:])
    d = build_identity(known)
    Z = solve(assemble_toeplitz(known), d.Pi)
    r, q = Z[:, :p], Z[:, p:]
    R = np.hstack([known.s[k - l] for l in range(1, k)]) if k > 1 else np.zeros((p, 0))
    P = d.Phi2[-p:]
    I = np.eye(p)
    rhs = P - R @ q[p:] + (R @ r[p:] - I) @ G
    coef = q[:p] - I - r[:p] @ G
    return solve(coef.T, rhs.T).T  # rhs @ coef^{-1}


class ToeplitzReconstruction(NamedTuple):
    spec: ToeplitzSpec
    iterations: tuple
    residuals: tuple


def reconstruct_toeplitz(seq: VerblunskySeqT, method: str = "newton",
                         tol: float = 1e-10, max_iter: int = 100) -> ToeplitzReconstruction:
    """Recover ``{S(n), nu}`` from ``rho_0, ..., rho_{n-1}``.

    ``s_0`` and ``nu`` follow in closed form from ``C_0``.  Each further block
    ``s_{-k}`` solves ``F(s_{-k}) = C_k`` where `F` is the forward map with
    ``S(k)`` held fixed; ``method="newton"`` uses damped Newton seeded at zero,
    ``method="direct"`` the closed-form linear solve.
    """
    seq.validate()
    C = [halmos_extend(r) for r in seq.rho]
    s0, nu = _base_block(C[0])
    spec = ToeplitzSpec((s0,), nu)
    iterations, residuals = [0], [float(np.linalg.norm(_last_potential(spec) - C[0]))]
    for k in range(1, seq.n):
        if method == "newton":
            x, it, res = _newton_block(spec, C[k], tol, max_iter)
        elif method == "direct":
            x = _direct_block(spec, C[k])
            it, res = 0, float(np.linalg.norm(_potential_of_extension(spec, x) - C[k]))
        else:
            raise ValueError(f"unknown method {method!r}")
        spec = ToeplitzSpec(spec.s + (x,), nu)
        iterations.append(it)
        residuals.append(float(res))
    _require_pd(assemble_toeplitz(spec), f"reconstructed S({spec.n})")
    return ToeplitzReconstruction(spec, tuple(iterations), tuple(residuals))


def toeplitz_from_verblunsky(seq: VerblunskySeqT, method: str = "newton",
                             tol: float = 1e-10, max_iter: int = 100) -> ToeplitzSpec:
    return reconstruct_toeplitz(seq, method, tol, max_iter).spec


# -- transfer matrix function -------------------------------------------------------

_SPECTRUM_A = 0.5j


def transfer_wA_toeplitz(spec: ToeplitzSpec, lam: complex) -> np.ndarray:
    """``w_A(n, lam) = I - i J Pi* S^{-1} (A - lam I)^{-1} Pi``."""
    lam = complex(lam)
    if abs(lam - _SPECTRUM_A) < 1e-14:
        raise PoleError("w_A has its pole at lambda = i/2")
    d = build_identity(spec)
    S = assemble_toeplitz(spec)
    Pi = d.Pi
    R = solve_triangular(d.A - lam * np.eye(d.A.shape[0]), Pi, lower=True)
    return np.eye(2 * spec.p) - 1j * d.J @ adjoint(Pi) @ solve(S, R)


def transfer_factors(spec: ToeplitzSpec) -> list[Callable[[complex], np.ndarray]]:
    """Closures ``w_1, ..., w_n`` with ``w_A(n, .) = w_n ... w_1``."""
    J = flip_J(spec.p)
    factors = []
    for k in range(1, spec.n + 1):
        q = schur_quantities(spec, k)
        XY = np.hstack([q.X, q.Y])
        core = J @ adjoint(XY) @ solve(q.t, XY)

        def w(lam, core=core):
            lam = complex(lam)
            if abs(lam - _SPECTRUM_A) < 1e-14:
                raise PoleError("factor has its pole at lambda = i/2")
            return np.eye(core.shape[0]) - 1j / (0.5j - lam) * core

        factors.append(w)
    return factors


def transfer_product(spec: ToeplitzSpec, lam: complex) -> np.ndarray:
    """``w_n(lam) ... w_1(lam)``."""
    out = np.eye(2 * spec.p, dtype=complex)
    for w in transfer_factors(spec):
        out = w(lam) @ out
    return out


# -- fundamental solution -------------------------------------------------------------

def fundamental_W(D: DiracSystem, k: int, lam: complex) -> np.ndarray:
    """``W_k`` via ``W_{k+1} = (I - (i/lam) j C_k) W_k``, ``W_0 = I``."""
    lam = complex(lam)
    if lam == 0:
        raise PoleError("the Dirac recursion has a pole at lambda = 0")
    if not 0 <= k <= D.n:
        raise DimensionError(f"k = {k} outside 0..{D.n}")
    j = signature_j(D.p)
    W = np.eye(2 * D.p, dtype=complex)
    for C in D.C[:k]:
        W = (np.eye(2 * D.p) - 1j / lam * j @ C) @ W
    return W


def fundamental_W_via_transfer(spec: ToeplitzSpec, k: int, lam: complex) -> np.ndarray:
    """``W_k = lam^{-k} (lam + i)^k K* w_A(k, -lam/2) K``."""
    lam = complex(lam)
    if k == 0:
        return np.eye(2 * spec.p, dtype=complex)
    if lam == 0 or abs(lam + 1j) < 1e-14:
        raise PoleError("transfer route has poles at lambda = 0 and lambda = -i")
    K = K_matrix(spec.p)
    wA = transfer_wA_toeplitz(spec.section(k), -lam / 2)
    return ((lam + 1j) / lam) ** k * adjoint(K) @ wA @ K


# -- Weyl function ------------------------------------------------------------------------

def weyl_series(spec: ToeplitzSpec, m: int | None = None) -> WeylSeries:
    """Coefficients ``alpha0 = s_0/2 + i nu`` and ``s_{-1}, ..., s_{-m}``."""
    if m is None:
        m = spec.n - 1
    if not 0 <= m <= spec.n - 1:
        raise DimensionError(f"series order {m} outside 0..{spec.n - 1}")
    return WeylSeries(alpha0=spec.alpha0, tail=tuple(spec.s[1:m + 1]))


def cayley(lam: complex) -> complex:
    """``z = (lam + i)/(lam - i)``, mapping the lower half-plane into the unit disk."""
    return (lam + 1j) / (lam - 1j)


def weyl_eval(ws: WeylSeries, lam: complex) -> np.ndarray:
    """Truncated ``phi(lam) = -i (alpha0 + sum s_{-k} z^k)``."""
    lam = complex(lam)
    if not lam.imag < 0:
        raise DomainError(f"Weyl function is evaluated in the open lower half-plane, got {lam}")
    z = cayley(lam)
    acc = ws.alpha0.copy()
    zk = 1.0
    for s in ws.tail:
        zk *= z
        acc = acc + s * zk
    return -1j * acc


def weyl_inequality_check(D: DiracSystem, phi_eval, lam: complex, K_terms: int) -> list[float]:
    """Partial sums of ``sum_k q^k [i phi* I] K W_k* C_k W_k K* [-i phi; I]`` (traces).

    `phi_eval` is either a callable ``lam -> (p, p)`` or a fixed matrix.
    Returns ``K_terms + 1`` partial sums, starting from the empty sum 0.
    """
    lam = complex(lam)
    if not lam.imag < 0:
        raise DomainError("the Weyl inequality is stated on the lower half-plane")
    if lam == 0:
        raise PoleError("lambda = 0")
    if not 0 <= K_terms <= D.n:
        raise DimensionError(f"K_terms = {K_terms} outside 0..{D.n}")
    phi = as_matrix(phi_eval(lam) if callable(phi_eval) else phi_eval)
    p = D.p
    K = K_matrix(p)
    q = abs(lam ** 2) / (abs(lam ** 2) + 1)
    u = np.vstack([-1j * phi, np.eye(p)])
    sums = [0.0]
    W = np.eye(2 * p, dtype=complex)
    j = signature_j(p)
    for k in range(K_terms):
        v = W @ adjoint(K) @ u
        term = q ** k * np.trace(adjoint(v) @ D.C[k] @ v).real
        sums.append(sums[-1] + term)
        W = (np.eye(2 * p) - 1j / lam * j @ D.C[k]) @ W
    return sums


# -- Szego recurrence ---------------------------------------------------------------------------

def szego_step(a, Z, lam: complex) -> np.ndarray:
    """One step ``Z_{k+1} = D [[I, -a*], [-a, I]] diag(lam I, I) Z_k``.

    ``D = diag((I - a* a)^{-1/2}, (I - a a*)^{-1/2})``; for p = 1 this is the
    scalar factor ``(1 - |a|^2)^{-1/2}``.
    """
    a = as_matrix(a)
    p = a.shape[0]
    if not spectral_norm(a) < 1.0:
        raise ContractionError("Verblunsky coefficient must satisfy ||a|| < 1")
    Z = np.asarray(Z, dtype=complex).reshape(2 * p, -1)
    I = np.eye(p)
    D = np.block([[pd_inv_sqrt(I - adjoint(a) @ a), np.zeros((p, p))],
                  [np.zeros((p, p)), pd_inv_sqrt(I - a @ adjoint(a))]])
    M = np.block([[I, -adjoint(a)], [-a, I]])
    L = np.block([[complex(lam) * I, np.zeros((p, p))], [np.zeros((p, p)), I]])
    return D @ M @ L @ Z
