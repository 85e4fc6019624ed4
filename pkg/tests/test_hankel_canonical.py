import numpy as np
import pytest
from hypothesis import given, strategies as st

from verblunsky.errors import DegenerateChainError, InvalidCoefficientError, PoleError, StructureError
from verblunsky.hankel_canonical import (
    CanonicalSystem,
    GammaSeq,
    HankelSpec,
    OmegaSeq,
    assemble_hankel,
    fundamental_Y,
    fundamental_Y_product,
    gamma_factor,
    hamiltonian_from_hankel,
    hamiltonian_from_omega,
    hankel_from_omega,
    hankel_identity,
    leading_sections_pd,
    measure_to_hankel,
    omega_from_gamma,
    omega_from_hankel,
    reconstruct_hankel,
    schur_t_hankel,
    spectral_transform_V,
    transfer_wA_hankel,
    verify_hankel_identity,
)
from verblunsky.matcore import adjoint, flip_J
from verblunsky.measure import DiscreteMeasure
from verblunsky.moment_lft import frakA
from verblunsky.sampling import random_hankel_spec, random_omega_chain, random_unitary

seeds = st.integers(0, 2**32 - 1)
H101 = HankelSpec(([[1]], [[0]], [[1]]))
SYM = DiscreteMeasure([-1.0, 1.0], [[[0.5]], [[0.5]]])


def test_assemble_and_identity_examples():
    assert np.allclose(assemble_hankel(HankelSpec(([[1]],))), [[1]])
    assert np.allclose(assemble_hankel(H101), np.eye(2))
    assert verify_hankel_identity(H101) <= 1e-14
    d = hankel_identity(H101)
    assert np.allclose(d.A, [[0, 0], [1, 0]])
    assert np.allclose(d.Phi1, [[0], [-1j]]) and np.allclose(d.Phi2, [[1], [0]])
    assert np.allclose(d.P2 @ adjoint(d.A), 0)
    sp = HankelSpec(([[1]], [[0.5]], [[1]]))
    assert np.allclose(assemble_hankel(sp), [[1, 0.5], [0.5, 1]])
    assert leading_sections_pd(sp) == [True, True]


def test_spec_structure_errors():
    with pytest.raises(StructureError):
        HankelSpec(([[1j]],))


def test_schur_t_examples():
    assert np.allclose(schur_t_hankel(HankelSpec(([[1]],)), 1), 1)
    assert np.allclose(schur_t_hankel(H101, 2), 1)
    assert np.allclose(schur_t_hankel(HankelSpec(([[1]], [[0.5]], [[1]])), 2), 4 / 3)


def test_omega_examples():
    assert np.allclose(omega_from_hankel(HankelSpec(([[1]],))).omega[0], [[0, 1]])
    om = omega_from_hankel(H101)
    assert np.allclose(om.omega[1], [[-1j, 0]])
    J = flip_J(1)
    assert np.allclose(om.omega[1] @ J @ adjoint(om.omega[1]), 0)
    assert np.allclose(om.pairing(1), 1)


def test_hamiltonian_examples():
    assert np.allclose(hamiltonian_from_hankel(HankelSpec(([[1]],))).Q[0], [[0, 0], [0, 1]])
    assert np.allclose(hamiltonian_from_hankel(H101).Q[1], [[1, 0], [0, 0]])
    assert np.allclose(hamiltonian_from_hankel(HankelSpec(([[0.25]],))).Q[0], [[0, 0], [0, 4]])


def test_gamma_examples():
    om = omega_from_gamma(GammaSeq(([[0, 2]],))).omega[0]
    assert np.allclose(om, [[0, 4]])
    assert np.allclose(hankel_from_omega(OmegaSeq((om,))).H[0], 0.25)
    assert np.allclose(omega_from_gamma(GammaSeq(([[0, -3]],))).omega[0], [[0, 9]])


def test_gamma_degenerate_chain():
    with pytest.raises(DegenerateChainError):
        omega_from_gamma(GammaSeq(([[0, 1]], [[0, 1]])))


def test_reconstruction_examples():
    assert np.allclose(hankel_from_omega(OmegaSeq(([[0, 1]],))).H[0], 1)
    rec = reconstruct_hankel(OmegaSeq(([[0, 1]], [[-1j, 0]])))
    assert all(np.abs(a - b).max() <= 1e-15 for a, b in zip(rec.spec.H, ([[1]], [[0]], [[1]])))
    N, D = rec.steps[0]
    for z in (0.3 + 1j, -2 + 0.5j):
        assert abs(1j * N(z)[0, 0] / D(z)[0, 0] + 1 / z) <= 1e-12


def test_reconstruction_rejects_inadmissible():
    with pytest.raises(InvalidCoefficientError):
        hankel_from_omega(OmegaSeq(([[1, 1]],)))
    with pytest.raises(InvalidCoefficientError):
        hankel_from_omega(OmegaSeq(([[0, 1]], [[1j, 0]])))


@given(seeds, st.integers(1, 3), st.integers(1, 5))
def test_identity_and_omega_relations(seed, p, n):
    rng = np.random.default_rng(seed)
    sp, _ = random_hankel_spec(rng, p, n)
    H = assemble_hankel(sp)
    assert verify_hankel_identity(sp) <= 1e-10 * (1 + np.linalg.norm(H))
    om = omega_from_hankel(sp)
    J = flip_J(p)
    assert np.abs(om.omega[0][:, :p]).max() <= 1e-12
    assert np.allclose(om.omega[0][:, p:], schur_t_hankel(sp, 1))
    for k in range(1, n):
        assert np.linalg.norm(om.omega[k] @ J @ adjoint(om.omega[k])) <= 1e-10 * (1 + np.linalg.norm(om.omega[k]) ** 2)
        t = schur_t_hankel(sp, k + 1)
        assert np.linalg.norm(om.pairing(k) - t) <= 1e-9 * (1 + np.linalg.norm(t))


@given(seeds, st.integers(1, 2), st.integers(1, 5))
def test_hankel_roundtrip_both_methods(seed, p, n):
    rng = np.random.default_rng(seed)
    sp, _ = random_hankel_spec(rng, p, n)
    om = omega_from_hankel(sp)
    for method in ("laurent", "direct"):
        back = hankel_from_omega(om, method=method)
        assert max(np.abs(a - b).max() for a, b in zip(sp.H, back.H)) <= 1e-8


@given(seeds, st.integers(1, 3), st.integers(1, 4))
def test_hamiltonian_two_routes(seed, p, n):
    rng = np.random.default_rng(seed)
    sp, _ = random_hankel_spec(rng, p, n)
    a = hamiltonian_from_hankel(sp).Q
    b = hamiltonian_from_omega(omega_from_hankel(sp)).Q
    assert max(np.linalg.norm(x - y) / (1 + np.linalg.norm(x)) for x, y in zip(a, b)) <= 1e-10


@given(seeds, st.integers(1, 2), st.integers(1, 4))
def test_gamma_representative_independence(seed, p, n):
    rng = np.random.default_rng(seed)
    om = random_omega_chain(rng, p, n)
    gs = gamma_factor(hamiltonian_from_omega(om))
    twisted = GammaSeq(tuple(random_unitary(rng, p) @ g for g in gs.gamma))
    for chain in (gs, twisted):
        back = omega_from_gamma(chain)
        assert max(np.abs(a - b).max() for a, b in zip(back.omega, om.omega)) <= 1e-8


@given(seeds, st.integers(1, 2), st.integers(2, 5))
def test_truncation_consistency(seed, p, n):
    rng = np.random.default_rng(seed)
    sp, _ = random_hankel_spec(rng, p, n)
    full = omega_from_hankel(sp).omega
    for r in range(1, n):
        part = omega_from_hankel(sp.section(r)).omega
        assert all(np.allclose(a, b, atol=1e-10) for a, b in zip(part, full))


def test_fundamental_Y_examples():
    cs = hamiltonian_from_hankel(HankelSpec(([[1]],)))
    assert np.allclose(fundamental_Y(cs, 0, 0.3), np.eye(2))
    assert np.allclose(fundamental_Y(cs, 1, 1.0), [[1, 1j], [0, 1]])
    cs2 = hamiltonian_from_hankel(H101)
    assert np.linalg.norm(fundamental_Y(cs2, 2, 2.0) - fundamental_Y_product(cs2, 2, 2.0)) <= 1e-12
    with pytest.raises(PoleError):
        fundamental_Y(cs, 1, 0)


@given(seeds, st.integers(1, 2), st.integers(1, 4))
def test_frakA_matches_resolvent_transfer(seed, p, n):
    rng = np.random.default_rng(seed)
    sp, _ = random_hankel_spec(rng, p, n)
    A = frakA(sp)
    for _ in range(5):
        z = complex(rng.normal(), rng.normal())
        direct = adjoint(transfer_wA_hankel(sp, 1 / np.conj(z)))
        assert np.linalg.norm(A(z) - direct) <= 1e-9 * (1 + np.linalg.norm(direct))


def test_isometry_examples():
    cs = hamiltonian_from_hankel(HankelSpec(([[1]],)))
    zero = spectral_transform_V(cs, {0: [0, 0]}, DiscreteMeasure([0.0], [[[1.0]]]))
    assert zero.lhs == 0 and zero.rhs == 0
    iso = spectral_transform_V(cs, {0: [0.7, 2.0]}, DiscreteMeasure([0.0], [[[1.0]]]))
    assert iso.lhs == pytest.approx(4) and iso.rhs == pytest.approx(4)
    iso = spectral_transform_V(hamiltonian_from_hankel(H101), {0: [1.0, -0.5 + 1j]}, SYM)
    assert iso.gap <= 1e-10


def test_measure_to_hankel_examples():
    delta = DiscreteMeasure([0.0], [[[1.0]]])
    assert [float(h.real[0, 0]) for h in measure_to_hankel(delta, 2).H] == [1, 0, 0]
    assert np.allclose(np.array(measure_to_hankel(SYM, 2).H).ravel(), [1, 0, 1])
    sp3 = measure_to_hankel(SYM, 3)
    assert np.allclose(np.array(sp3.H).ravel(), [1, 0, 1, 0, 1])
    assert leading_sections_pd(sp3) == [True, True, False]


def test_canonical_system_q0_support(rng):
    sp, _ = random_hankel_spec(rng, 2, 3)
    Q0 = hamiltonian_from_hankel(sp).Q[0]
    assert np.abs(Q0[:2, :]).max() <= 1e-12 and np.abs(Q0[:, :2]).max() <= 1e-12
    assert isinstance(hamiltonian_from_hankel(sp), CanonicalSystem)
