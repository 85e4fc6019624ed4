"""The truncated Hamburger moment problem through a linear-fractional transformation.

For ``H(n) > 0`` with Hamiltonians ``Q_0, ..., Q_{n-1}`` put
``A(n, z) = (I - i z Q_0 J) ... (I - i z Q_{n-1} J)`` and, for a constant
``2p x p`` parameter ``Q`` with ``Q*Q > 0`` and ``Q*JQ >= 0``,

    phi(z) = i A_1(z) Q (A_2(z) Q)^{-1},      A_1 = [I 0] A,  A_2 = [0 I] A.

Then ``phi(z) = int dtau(t) / (t - z)`` with ``H_k = int t^k dtau`` for
``k < 2n - 2`` and ``H_{2n-2} >= int t^{2n-2} dtau``.

Measures are recovered exactly from the rational structure of ``phi``.  Real
poles give atoms (weights are minus the residues).  When ``Q*JQ`` is not
zero the measure also carries the rational density
``(phi(t) - phi(t)*) / (2 pi i)``, integrated by residues in the upper half-plane.
Residues are contour integrals on small circles (trapezoidal rule), so they
do not depend on pole locations being exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import (
    DegenerateParameterError,
    DimensionError,
    InconsistentInputError,
    MomentMismatchError,
    NotHerglotzError,
    NumericalDegeneracyError,
    PoleError,
)
from .hankel_canonical import (
    CanonicalSystem,
    HankelSpec,
    assemble_hankel,
    frak_a_from_hamiltonians,
    hamiltonian_from_hankel,
    hankel_identity,
)
from .matcore import (
    adjoint,
    as_matrix,
    flip_J,
    hermitian_part,
    is_positive_definite,
    is_positive_semidefinite,
    solve,
)
from .measure import DiscreteMeasure
from .polynomial import MatrixPoly, det_roots, laurent_at_infinity

#: Points used for sampled checks of rational functions.
SAMPLE_POINTS = tuple(
    complex(np.cos(1.3 * k) * (1 + 0.4 * k), 0.35 + 0.25 * k) for k in range(20)
)
CONTOUR_NODES = 96
CLUSTER_RADIUS = 1e-8


# -- parameters ---------------------------------------------------------------------

@dataclass(frozen=True)
class QParam:
    """Constant ``2p x p`` parameter of the linear-fractional transformation."""

    Q: np.ndarray

    def __post_init__(self):
        Q = as_matrix(self.Q)
        if Q.shape[0] != 2 * Q.shape[1]:
            raise DimensionError(f"Q must be 2p x p, got {Q.shape}")
        object.__setattr__(self, "Q", Q)

    @property
    def p(self) -> int:
        return self.Q.shape[1]

    @property
    def form(self) -> np.ndarray:
        """``Q* J Q``."""
        return hermitian_part(adjoint(self.Q) @ flip_J(self.p) @ self.Q)


def check_property_J(Q, rtol: float = 1e-10) -> bool:
    """``Q*Q > 0`` and ``Q*JQ >= 0``."""
    q = Q if isinstance(Q, QParam) else QParam(Q)
    gram_ok, _ = is_positive_definite(hermitian_part(adjoint(q.Q) @ q.Q))
    scale = np.linalg.norm(q.Q) ** 2
    return bool(gram_ok and is_positive_semidefinite(q.form, atol=rtol * scale))


def is_j_neutral(Q, rtol: float = 1e-10) -> bool:
    q = Q if isinstance(Q, QParam) else QParam(Q)
    return bool(np.linalg.norm(q.form) <= rtol * (1 + np.linalg.norm(q.Q) ** 2))


def equality_candidate(Q, omega_last, rtol: float = 1e-10) -> bool:
    """Property-J, ``Q*JQ = 0`` and ``det(omega_{n-1} J Q) != 0``: the moment inequality becomes equality."""
    q = Q if isinstance(Q, QParam) else QParam(Q)
    if not (check_property_J(q, rtol) and is_j_neutral(q, rtol)):
        return False
    M = as_matrix(omega_last) @ flip_J(q.p) @ q.Q
    s = np.linalg.svd(M, compute_uv=False)
    return bool(s[-1] > rtol * max(s[0], 1.0) * 1e2)


# -- the polynomial A(n, z) ---------------------------------------------------------

def frakA(source: CanonicalSystem | HankelSpec, n: int | None = None) -> MatrixPoly:
    """``A(n, z)`` from a canonical system or a positive definite Hankel spec."""
    cs = hamiltonian_from_hankel(source) if isinstance(source, HankelSpec) else source
    n = cs.n if n is None else n
    if not 0 <= n <= cs.n:
        raise DimensionError(f"n = {n} outside 0..{cs.n}")
    return frak_a_from_hamiltonians(cs.Q[:n], 2 * cs.p)


# -- rational Herglotz functions ------------------------------------------------------

class RationalHerglotz:
    """``phi(z) = i N(z) D(z)^{-1}`` with matrix polynomials ``N``, ``D``."""

    def __init__(self, N: MatrixPoly, D: MatrixPoly, form: np.ndarray | None = None):
        if N.shape != D.shape or D.shape[0] != D.shape[1]:
            raise DimensionError(f"numerator {N.shape} and denominator {D.shape} do not match")
        self.N = N
        self.D = D
        #: ``Q* J Q`` when phi comes from a parameter Q; gives the density without cancellation
        self.form = form

    @property
    def p(self) -> int:
        return self.D.shape[0]

    def __call__(self, z) -> np.ndarray:
        return 1j * self.N(z) @ solve(self.D(z), np.eye(self.p))

    def evaluate_many(self, zs) -> np.ndarray:
        """``phi`` at every point of `zs`; shape ``(len(zs), p, p)``."""
        N = self.N.evaluate_many(zs)
        D = self.D.evaluate_many(zs)
        try:
            X = np.linalg.solve(np.swapaxes(D, -1, -2), np.swapaxes(N, -1, -2))
        except np.linalg.LinAlgError as exc:
            raise PoleError("phi evaluated at a pole") from exc
        return 1j * np.swapaxes(X, -1, -2)

    def density_many(self, zs) -> np.ndarray:
        """:meth:`density` at every point of `zs`."""
        zs = np.asarray(zs, dtype=complex)
        return (self.evaluate_many(zs) - adjoint(self.evaluate_many(np.conj(zs)))) / (2j * np.pi)

    def reflected(self, z) -> np.ndarray:
        """``phi(conj(z))*``."""
        return adjoint(self(np.conj(complex(z))))

    def density(self, z) -> np.ndarray:
        """``(phi(z) - phi(conj z)*) / (2 pi i)``; on the real line, the density of the measure."""
        return (self(z) - self.reflected(z)) / (2j * np.pi)

    def real_density(self, t: float) -> np.ndarray:
        """Density on the real line, ``D(t)^{-*} Q*JQ D(t)^{-1} / (2 pi)`` when the form is known."""
        if self.form is None:
            return hermitian_part(self.density(complex(t)))
        Di = solve(self.D(float(t)), np.eye(self.p))
        return hermitian_part(adjoint(Di) @ self.form @ Di) / (2 * np.pi)

    def expansion(self, count: int) -> list[np.ndarray]:
        """``L_0, ..., L_{count-1}`` with ``phi(z) = -sum_k L_k z^{-k-1}`` at infinity."""
        L = laurent_at_infinity(self.N, self.D, count)
        return [-1j * L[k + 1] for k in range(count)]

    def poles(self) -> np.ndarray:
        """Finite zeros of ``det D``."""
        return det_roots(self.D)

    def is_real_symmetric(self, tol: float = 1e-9, points=SAMPLE_POINTS) -> bool:
        for z in points:
            a, b = self(z), self.reflected(z)
            if np.linalg.norm(a - b) > tol * (1 + np.linalg.norm(a) + np.linalg.norm(b)):
                return False
        return True

    def min_imag_eig(self, points=SAMPLE_POINTS) -> float:
        """Smallest eigenvalue of ``Im phi(z)`` over upper half-plane sample points."""
        out = np.inf
        for z in points:
            if z.imag <= 0:
                raise ValueError("sample points must lie in the upper half-plane")
            F = self(z)
            out = min(out, float(np.linalg.eigvalsh((F - adjoint(F)) / 2j)[0]))
        return out

    def is_herglotz(self, atol: float = 1e-10, points=SAMPLE_POINTS) -> bool:
        return self.min_imag_eig(points) >= -atol


def lft_phi(A: MatrixPoly, Q) -> RationalHerglotz:
    """``phi = i A_1 Q (A_2 Q)^{-1}`` as an exact pair ``(N, D) = (A_1 Q, A_2 Q)``."""
    q = Q if isinstance(Q, QParam) else QParam(Q)
    p = q.p
    if A.shape != (2 * p, 2 * p):
        raise DimensionError(f"A has shape {A.shape}, parameter needs {(2 * p, 2 * p)}")
    N = A.rows(slice(0, p)) @ q.Q
    D = A.rows(slice(p, 2 * p)) @ q.Q
    scale = max(1.0, float(np.abs(D.coef).max()))
    probes = (0.37 + 1.1j, -1.3 + 0.2j, 2.1 - 0.7j)
    if all(abs(np.linalg.det(D(z))) <= 1e-12 * (scale * (1 + abs(z)) ** D.degree) ** p for z in probes):
        raise DegenerateParameterError("det(A_2 Q) vanishes identically")
    return RationalHerglotz(N, D, q.form)


def ve19_residual(A: MatrixPoly, Q, Qhat, z: complex) -> float:
    """``||phi_Q(z) - phi_Qhat(conj z)* - i (A_2(conj z) Qhat)^{-*} Qhat* J Q (A_2(z) Q)^{-1}||``."""
    Q = as_matrix(Q)
    Qhat = as_matrix(Qhat)
    p = Q.shape[1]
    phi, phihat = lft_phi(A, Q), lft_phi(A, Qhat)
    lhs = phi(z) - phihat.reflected(z)
    Dz = A.rows(slice(p, 2 * p))(z) @ Q
    Dh = A.rows(slice(p, 2 * p))(np.conj(z)) @ Qhat
    rhs = 1j * adjoint(solve(Dh, np.eye(p))) @ adjoint(Qhat) @ flip_J(p) @ Q @ solve(Dz, np.eye(p))
    return float(np.linalg.norm(lhs - rhs))


# -- residues -----------------------------------------------------------------------

def contour_integral(f: Callable, center: complex, radius: float, m: int = CONTOUR_NODES):
    """``oint f(z) dz`` on a circle by the trapezoidal rule (exponentially accurate for analytic `f`).

    `f` is called once with the array of nodes and returns values stacked on axis 0.
    """
    e = np.exp(2j * np.pi * np.arange(m) / m)
    vals = np.asarray(f(center + radius * e))
    dz = e * (1j * radius * 2 * np.pi / m)
    return np.tensordot(dz, vals, axes=(0, 0))


def cluster(points: Sequence[complex], radius: float = CLUSTER_RADIUS) -> list[list[complex]]:
    """Group points closer than ``radius * (1 + |z|)`` (single linkage)."""
    groups: list[list[complex]] = []
    for z in points:
        hits = [g for g in groups if any(abs(z - w) <= radius * (1 + abs(z)) for w in g)]
        merged = [z]
        for g in hits:
            merged.extend(g)
            groups.remove(g)
        groups.append(merged)
    return groups


def _radius(c: complex, singularities: Sequence[complex]) -> float:
    """Half the distance from `c` to the nearest singularity outside its own cluster."""
    others = [abs(s - c) for s in singularities if abs(s - c) > CLUSTER_RADIUS * 10 * (1 + abs(c))]
    return 0.5 * (min(others) if others else 1.0 + abs(c))


def _is_real(z: complex, tol: float) -> bool:
    return abs(z.imag) <= tol * (1 + abs(z))


# -- representing measures ----------------------------------------------------------

class RationalMeasure:
    """Atoms plus a rational density, as produced by a rational Herglotz function.

    ``tau = sum_j w_j delta_{t_j} + f(t) dt``,  ``f(t) = (phi(t) - phi(t)*) / (2 pi i)``.
    Integrals of scalar functions against ``f`` are evaluated by residues in
    the upper half-plane, so the integrand ``g f`` must decay like ``t^{-2}``
    and `g` must be analytic there apart from the poles it declares.
    """

    def __init__(self, atoms: DiscreteMeasure, phi: RationalHerglotz | None, uhp_poles=(), singular=()):
        self.atoms = atoms
        self.phi = phi
        self.uhp_poles = tuple(complex(c) for c in uhp_poles)
        self.singular = tuple(complex(c) for c in singular)
        self._circles = [(c, _radius(c, self.singular)) for c in self.uhp_poles]
        self._cache: dict = {}

    @property
    def p(self) -> int:
        return self.atoms.p

    @property
    def has_density(self) -> bool:
        return self.phi is not None and len(self.uhp_poles) > 0

    def density(self, t: float) -> np.ndarray:
        if not self.has_density:
            return np.zeros((self.p, self.p), complex)
        return self.phi.real_density(t)

    def _samples(self, c: complex, r: float):
        key = (c, r)
        if key not in self._cache:
            e = np.exp(2j * np.pi * np.arange(CONTOUR_NODES) / CONTOUR_NODES)
            z = c + r * e
            dz = e * (1j * r * 2 * np.pi / CONTOUR_NODES)
            self._cache[key] = (z, dz[:, None, None] * self.phi.density_many(z))
        return self._cache[key]

    def integrate(self, g: Callable, poles=()) -> np.ndarray:
        """``int g(t) dtau(t)``; `poles` lists the singularities of `g` (vectorized in its argument)."""
        out = self.atoms.integrate(g)
        if not self.has_density:
            return out
        poles = [complex(c) for c in poles]
        upper = [c for c in poles if c.imag > 0]
        sing = list(self.singular) + poles
        circles = []
        for c, r in self._circles:
            if any(abs(q - c) < 2 * r for q in poles):
                r = _radius(c, sing)
            circles.append((c, r))
        circles += [(c, _radius(c, sing)) for c in upper]
        for c, r in circles:
            z, fdz = self._samples(c, r)
            out = out + np.tensordot(g(z), fdz, axes=(0, 0))
        return out

    def moment(self, k: int) -> np.ndarray:
        return hermitian_part(self.integrate(lambda z: z ** k))

    def moments(self, count: int) -> list[np.ndarray]:
        return [self.moment(k) for k in range(count)]

    def stieltjes(self, z: complex) -> np.ndarray:
        z = complex(z)
        return self.integrate(lambda t: 1.0 / (t - z), poles=(z,))


def _atoms_from_real_poles(phi: RationalHerglotz, real_groups, singular, psd_rtol: float) -> DiscreteMeasure:
    p = phi.p
    nodes, weights = [], []
    for g in real_groups:
        c = complex(np.mean(g).real)
        r = _radius(c, singular)
        res = contour_integral(phi.evaluate_many, c, r)
        res1 = contour_integral(lambda z: z[:, None, None] * phi.evaluate_many(z), c, r)
        w = hermitian_part(-res / (2j * np.pi))
        tr = np.trace(w).real
        t = c.real
        if tr > 0:
            t1 = np.trace(-res1 / (2j * np.pi)).real / tr
            if abs(t1 - c.real) < r:
                t = t1
        nodes.append(t)
        weights.append(w)
    total = sum((np.linalg.norm(w) for w in weights), 0.0)
    keep = [(t, w) for t, w in zip(nodes, weights) if np.linalg.norm(w) > 1e-12 * max(total, 1e-300)]
    for t, w in keep:
        if not is_positive_semidefinite(w, rtol=psd_rtol):
            raise NumericalDegeneracyError(f"residue at t = {t:.6g} is not positive semidefinite")
    if not keep:
        return DiscreteMeasure.empty(p)
    return DiscreteMeasure.from_atoms(keep)


def extract_measure(phi: RationalHerglotz, real_tol: float = 1e-6, check_tol: float = 1e-8) -> DiscreteMeasure:
    """Atoms of a real-symmetric rational Herglotz function.

    Nodes are the real zeros of ``det D``; weights are ``-Res phi``.  The
    result is checked against ``phi`` at sample points.
    """
    roots = phi.poles()
    for z in roots:
        if not _is_real(z, real_tol):
            raise NotHerglotzError(f"complex pole {z:.6g} of a function expected to have real poles only")
    if not phi.is_real_symmetric():
        raise NotHerglotzError("phi(z) differs from phi(conj z)*, so its poles are not all real")
    groups = cluster([complex(z.real, 0.0) for z in roots])
    mu = _atoms_from_real_poles(phi, groups, [complex(z.real) for z in roots], 1e-8)
    for z in SAMPLE_POINTS[:8]:
        a, b = mu.stieltjes(z), phi(z)
        if np.linalg.norm(a - b) > check_tol * (1 + np.linalg.norm(b)):
            raise NumericalDegeneracyError("atoms do not reproduce phi at the sample points")
    return mu


def representing_measure(phi: RationalHerglotz, real_tol: float = 1e-8) -> DiscreteMeasure | RationalMeasure:
    """The measure of ``phi = int dtau / (t - z)``; discrete when ``phi`` is real-symmetric."""
    if phi.is_real_symmetric():
        return extract_measure(phi)
    roots = list(phi.poles())
    real = [z for z in roots if _is_real(z, real_tol)]
    lower = [z for z in roots if not _is_real(z, real_tol) and z.imag < 0]
    upper = [z for z in roots if not _is_real(z, real_tol) and z.imag > 0]
    singular = [complex(z) for z in roots] + [complex(np.conj(z)) for z in lower]
    for g in cluster(upper):
        c = complex(np.mean(g))
        r = _radius(c, singular)
        res = contour_integral(phi.evaluate_many, c, r)
        if np.linalg.norm(res) > 1e-9 * r * (1 + np.linalg.norm(phi(c + r))):
            raise NotHerglotzError(f"pole {c:.6g} in the upper half-plane")
    atoms = _atoms_from_real_poles(phi, cluster([complex(z.real, 0.0) for z in real]), singular, 1e-7)
    uhp = [complex(np.conj(np.mean(g))) for g in cluster(lower)]
    return RationalMeasure(atoms, phi, uhp, singular)


# -- moments and the appendix identities ----------------------------------------------

class MomentReport(NamedTuple):
    #: largest k such that H_0..H_k all match the measure
    equal_through: int
    #: ``H_{2n-2} - int t^{2n-2} dtau``
    gap: np.ndarray


def verify_moments(measure, spec: HankelSpec, expect_equality: bool = False, tol: float = 1e-8) -> MomentReport:
    """Check ``H_k = int t^k dtau`` for ``k <= 2n-3`` and ``H_{2n-2} >= int t^{2n-2} dtau``.

    Tolerances are relative: ``tol * (1 + ||H_k||)``.
    """
    n = spec.n
    top = 2 * n - 2
    for k in range(top):
        m = measure.moment(k)
        if np.linalg.norm(spec.H[k] - m) > tol * (1 + np.linalg.norm(spec.H[k])):
            raise MomentMismatchError(k)
    gap = hermitian_part(spec.H[top] - measure.moment(top))
    slack = tol * (1 + np.linalg.norm(spec.H[top]))
    if not is_positive_semidefinite(gap, atol=slack):
        raise MomentMismatchError(top, f"H_{top} - int t^{top} dtau is not positive semidefinite")
    closed = np.linalg.norm(gap) <= slack
    if expect_equality and not closed:
        raise MomentMismatchError(top, f"moment {top} should match, gap norm {np.linalg.norm(gap):.3g}")
    return MomentReport(top if closed else top - 1, gap)


def hankel_of_measure(measure, n: int) -> np.ndarray:
    """``H_tau = int V(t) dtau V(t)*`` with ``V(t) = [I; tI; ...; t^{n-1} I]``."""
    p = measure.p
    mom = measure.moments(2 * n - 1)
    out = np.empty((n * p, n * p), complex)
    for i in range(n):
        for j in range(n):
            out[i * p:(i + 1) * p, j * p:(j + 1) * p] = mom[i + j]
    return hermitian_part(out)


@dataclass(frozen=True)
class HerglotzDecomposition:
    """``phi(z) = mu z + nu_h + int (1/(t-z) - t/(1+t^2)) dtau(t)``."""

    mu: np.ndarray
    nu_h: np.ndarray
    measure: object

    def __call__(self, z: complex) -> np.ndarray:
        z = complex(z)
        g = lambda t: 1.0 / (t - z) - t / (1 + t * t)
        integral = self.measure.integrate(g, poles=(z, 1j, -1j))
        return self.mu * z + self.nu_h + integral


def herglotz_decompose(phi: RationalHerglotz | None, measure) -> HerglotzDecomposition:
    """``mu = 0`` and ``nu_h = int t/(1+t^2) dtau``."""
    p = measure.p
    nu_h = hermitian_part(measure.integrate(lambda t: t / (1 + t * t), poles=(1j, -1j)))
    return HerglotzDecomposition(np.zeros((p, p), complex), nu_h, measure)


class AppendixReport(NamedTuple):
    #: smallest eigenvalue of H - H_tau
    h15_min_eig: float
    #: max over samples of ||(I - zA)^{-1} Phi_2 - [I; zI; ...]||
    h16_residual: float
    #: ||A (H - H_tau) A* - Phi_2 mu Phi_2*|| with mu = 0
    h17_residual: float
    nu_h: np.ndarray
    #: max over samples of ||herglotz form - int dtau/(t - z)|| (relative)
    h14_residual: float
    #: max over samples of ||herglotz form - phi(z)|| (relative), nan without phi
    phi_residual: float


def verify_appendix(spec: HankelSpec, measure, phi: RationalHerglotz | None = None,
                    points=SAMPLE_POINTS[:10], tol: float = 1e-8) -> AppendixReport:
    n, p = spec.n, spec.p
    H = assemble_hankel(spec)
    Ht = hankel_of_measure(measure, n)
    gap = hermitian_part(H - Ht)
    min_eig = float(np.linalg.eigvalsh(gap)[0])
    if min_eig < -tol * (1 + np.linalg.norm(H)):
        raise InconsistentInputError(f"H - H_tau is not positive semidefinite (min eigenvalue {min_eig:.3g})")
    d = hankel_identity(spec)
    h16 = 0.0
    for z in points:
        lhs = solve(np.eye(n * p) - z * d.A, d.Phi2)
        rhs = np.vstack([z ** k * np.eye(p) for k in range(n)])
        h16 = max(h16, float(np.linalg.norm(lhs - rhs)))
    dec = herglotz_decompose(phi, measure)
    h17 = float(np.linalg.norm(d.A @ gap @ adjoint(d.A) - d.Phi2 @ dec.mu @ adjoint(d.Phi2)))
    h14 = 0.0
    phi_res = float("nan") if phi is None else 0.0
    for z in points:
        hv = dec(z)
        st = measure.stieltjes(z)
        h14 = max(h14, float(np.linalg.norm(hv - st) / (1 + np.linalg.norm(st))))
        if phi is not None:
            f = phi(z)
            phi_res = max(phi_res, float(np.linalg.norm(hv - f) / (1 + np.linalg.norm(f))))
    return AppendixReport(min_eig, h16, h17, dec.nu_h, h14, phi_res)
