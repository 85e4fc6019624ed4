"""Random generators for specs, coefficient chains and parameters.

Every generator takes a :class:`numpy.random.Generator`; nothing touches
global random state.
"""
from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .hankel_canonical import (
    GammaSeq,
    _blocks_from_omega,
    assemble_hankel,
    HankelSpec,
    OmegaSeq,
    measure_to_hankel,
    omega_from_gamma,
)
from .matcore import adjoint, flip_J, is_positive_definite
from .measure import DiscreteMeasure
from .toeplitz_dirac import K_matrix, ToeplitzSpec, assemble_toeplitz


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_unitary(rng: np.random.Generator, p: int) -> np.ndarray:
    if p == 1:
        return np.exp(2j * np.pi * rng.uniform()).reshape(1, 1)
    return unitary_group.rvs(p, random_state=rng)


def random_hermitian(rng: np.random.Generator, p: int, scale: float = 1.0) -> np.ndarray:
    G = complex_normal(rng, (p, p))
    return scale * (G + adjoint(G)) / 2


def random_contraction(rng: np.random.Generator, p: int, max_norm: float = 0.9) -> np.ndarray:
    """A p x p matrix with spectral norm uniform in ``[0, max_norm)``."""
    G = complex_normal(rng, (p, p))
    return G * (max_norm * rng.uniform() / np.linalg.norm(G, 2))


def random_toeplitz_spec(rng: np.random.Generator, p: int, n: int, nu_scale: float = 1.0) -> ToeplitzSpec:
    """Positive definite ``S(n)`` with smallest eigenvalue at least 0.2 and a random ``nu``."""
    s = [random_hermitian(rng, p)] + [0.5 * complex_normal(rng, (p, p)) / n for _ in range(n - 1)]
    S = assemble_toeplitz(ToeplitzSpec(tuple(s), None))
    shift = 0.2 - np.linalg.eigvalsh(S)[0]
    s[0] = s[0] + shift * np.eye(p)
    return ToeplitzSpec(tuple(s), random_hermitian(rng, p, nu_scale))


def random_discrete_measure(rng: np.random.Generator, p: int, atoms: int,
                            interval: tuple[float, float] = (-1.5, 1.5)) -> DiscreteMeasure:
    """Atoms at well-separated nodes with positive definite weights of unit average trace.

    Nodes are stratified over `interval` so that Hankel sections built from
    the measure stay well conditioned at desk scale.
    """
    lo, hi = interval
    edges = np.linspace(lo, hi, atoms + 1)
    width = edges[1] - edges[0]
    nodes = edges[:-1] + width * (0.2 + 0.6 * rng.uniform(size=atoms))
    weights = []
    for _ in range(atoms):
        G = complex_normal(rng, (p, p))
        weights.append(G @ adjoint(G) / p + 0.1 * np.eye(p))
    total = sum(np.trace(w).real for w in weights) / p
    return DiscreteMeasure(nodes, np.stack(weights) / total)


def random_hankel_spec(rng: np.random.Generator, p: int, n: int, extra_atoms: int = 2) -> tuple[HankelSpec, DiscreteMeasure]:
    """``H(n)`` from the moments of a random measure with ``n p + extra_atoms`` atoms."""
    mu = random_discrete_measure(rng, p, n * p + extra_atoms)
    return measure_to_hankel(mu, n), mu


def _draw_factor(rng, p, prev_omega, J, spread, noise, min_sv):
    # [I, iB] J [I, iB]* = -iB + iB = 0, so the factor is J-neutral
    E = np.eye(p) + noise * complex_normal(rng, (p, p))
    g = E @ np.hstack([np.eye(p), 1j * random_hermitian(rng, p, spread)])
    s = np.linalg.svd(1j * g @ J @ adjoint(prev_omega), compute_uv=False)
    if s[-1] < min_sv * s[0]:
        return None
    # unit-norm pairing keeps t_{k+1} at a fixed scale along the chain
    return g / np.sqrt(s[0])


def random_gamma_chain(rng: np.random.Generator, p: int, n: int, candidates: int = 10,
                       spread: float = 1.0, noise: float = 0.2, min_sv: float = 0.1,
                       max_tries: int = 1000) -> GammaSeq:
    """Factors ``gamma_0 = [0, G]`` and ``gamma_k = E_k [I, i B_k] / c_k`` with ``B_k`` Hermitian.

    ``G`` and ``E_k`` are the identity plus complex Gaussian noise of size
    `noise`, and ``B_k`` has entries of size `spread`.  A draw is discarded
    when the pairing ``i gamma_k J omega_{k-1}*`` has a singular value below
    `min_sv` times the largest.  ``c_k`` scales that pairing to unit norm.

    Each factor is the best of `candidates` admissible draws, ranked by the
    condition number of the Hankel blocks the chain so far reconstructs to.
    Unfiltered draws give Hankel matrices with condition numbers up to 1e20
    at n = 5, where round trips carry no digits.  The ranking never looks
    at positivity.
    """
    J = flip_J(p)
    gammas = [np.hstack([np.zeros((p, p)), np.eye(p) + noise * complex_normal(rng, (p, p))])]
    chain = omega_from_gamma(GammaSeq(tuple(gammas)))
    for _ in range(1, n):
        best, seen = None, 0
        for _ in range(max_tries):
            g = _draw_factor(rng, p, chain.omega[-1], J, spread, noise, min_sv)
            if g is None:
                continue
            cand = omega_from_gamma(GammaSeq(tuple(gammas + [g])))
            H = assemble_hankel(HankelSpec(tuple(_blocks_from_omega(cand)[0])))
            score = np.linalg.cond(H)
            if best is None or score < best[0]:
                best = (score, g, cand)
            seen += 1
            if seen == candidates:
                break
        if best is None:
            raise RuntimeError("could not draw a nondegenerate gamma factor")
        gammas.append(best[1])
        chain = best[2]
    return GammaSeq(tuple(gammas))


def random_omega_chain(rng: np.random.Generator, p: int, n: int, **kwargs) -> OmegaSeq:
    """An admissible omega chain: a :func:`random_gamma_chain`, normalized."""
    return omega_from_gamma(random_gamma_chain(rng, p, n, **kwargs))


def random_property_j(rng: np.random.Generator, p: int, neutral: bool = False) -> np.ndarray:
    """``Q = K [A; R A]`` with ``A`` nonsingular.

    ``Q* J Q = A* (I - R* R) A`` since ``K* J K = j``; `R` is a strict
    contraction (``Q*JQ > 0``) or, when `neutral`, unitary (``Q*JQ = 0``).
    """
    A = complex_normal(rng, (p, p)) + 2 * np.eye(p)
    R = random_unitary(rng, p) if neutral else random_contraction(rng, p)
    return K_matrix(p) @ np.vstack([A, R @ A])


def random_lft_parameter(rng: np.random.Generator, frak_a, neutral: bool = False,
                         min_lead_ratio: float = 1e-2, max_tries: int = 1000) -> tuple[np.ndarray, int]:
    """A :func:`random_property_j` draw whose denominator keeps its full degree robustly.

    The leading coefficient of ``A_2(z) Q`` is nearly singular when `Q` lies
    close to the set where ``det(A_2 Q)`` drops degree; an atom then escapes to
    ``|t| ~ 1/ratio`` and the top moment amplifies rounding in ``Q_k`` by about
    ``|t|^{2n-2}``.  Draws whose smallest-to-largest singular value ratio is
    below `min_lead_ratio` are redrawn.  Returns the parameter and the number
    of redraws.
    """
    p = frak_a.shape[0] // 2
    lead = frak_a.leading[p:]
    for redraws in range(max_tries):
        Q = random_property_j(rng, p, neutral)
        sv = np.linalg.svd(lead @ Q, compute_uv=False)
        if sv[-1] >= min_lead_ratio * sv[0]:
            return Q, redraws
    raise RuntimeError("could not draw a well-conditioned parameter")


def is_pd_hankel(spec: HankelSpec) -> bool:
    return is_positive_definite(assemble_hankel(spec))[0]
