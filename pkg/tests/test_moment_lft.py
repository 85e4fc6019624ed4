import numpy as np
import pytest
from hypothesis import given, strategies as st

from verblunsky.errors import DegenerateParameterError, InconsistentInputError, MomentMismatchError, NotHerglotzError
from verblunsky.hankel_canonical import HankelSpec, hamiltonian_from_hankel, omega_from_hankel, schur_t_hankel
from verblunsky.matcore import adjoint, flip_J
from verblunsky.measure import DiscreteMeasure
from verblunsky.moment_lft import (
    SAMPLE_POINTS,
    RationalHerglotz,
    RationalMeasure,
    check_property_J,
    equality_candidate,
    extract_measure,
    frakA,
    hankel_of_measure,
    herglotz_decompose,
    is_j_neutral,
    lft_phi,
    representing_measure,
    ve19_residual,
    verify_appendix,
    verify_moments,
)
from verblunsky.polynomial import MatrixPoly
from verblunsky.sampling import random_hankel_spec, random_lft_parameter, random_property_j, random_unitary

seeds = st.integers(0, 2**32 - 1)
H101 = HankelSpec(([[1]], [[0]], [[1]]))
SYM = DiscreteMeasure([-1.0, 1.0], [[[0.5]], [[0.5]]])
DELTA0 = DiscreteMeasure([0.0], [[[1.0]]])


def _phi_from_scalars(num, den):
    """``phi = i N / D`` for scalar polynomial coefficient lists (ascending)."""
    N = MatrixPoly(np.array(num, complex).reshape(-1, 1, 1))
    D = MatrixPoly(np.array(den, complex).reshape(-1, 1, 1))
    return RationalHerglotz(N, D)


def test_frakA_examples():
    A0 = frakA(HankelSpec(([[1]],)), 0)
    assert A0.degree == 0 and np.allclose(A0(3.0), np.eye(2))
    A1 = frakA(HankelSpec(([[1]],)), 1)
    z = 0.4 - 1.2j
    assert np.allclose(A1(z), [[1, 0], [-1j * z, 1]])
    assert np.allclose(frakA(H101, 2)(z), [[1, -1j * z], [-1j * z, 1 - z * z]])


def test_lft_phi_examples():
    phi = lft_phi(frakA(HankelSpec(([[1]],)), 0), [[0], [1]])
    assert np.allclose(phi(0.3 + 1j), 0)
    phi = lft_phi(frakA(HankelSpec(([[1]],)), 1), [[1j], [0]])
    assert np.allclose(phi.N.coef.ravel(), [1j]) and np.allclose(phi.D.coef.ravel(), [0, 1])
    for z in SAMPLE_POINTS[:5]:
        assert abs(phi(z)[0, 0] + 1 / z) <= 1e-12
    assert phi.is_real_symmetric()


def test_lft_phi_degenerate():
    with pytest.raises(DegenerateParameterError):
        lft_phi(frakA(HankelSpec(([[1]],)), 0), [[1], [0]])


def test_extract_measure_examples():
    mu = extract_measure(_phi_from_scalars([1j], [0, 1]))
    assert np.allclose(mu.nodes, [0]) and np.allclose(mu.weights.ravel(), [1])
    # z / (1 - z^2) = i N / D with N = -i z
    mu = extract_measure(_phi_from_scalars([0, -1j], [1, 0, -1]))
    order = np.argsort(mu.nodes)
    assert np.allclose(mu.nodes[order], [-1, 1]) and np.allclose(mu.weights.ravel()[order], [0.5, 0.5])
    assert len(extract_measure(_phi_from_scalars([0], [1]))) == 0


def test_extract_measure_rejects_complex_poles():
    with pytest.raises(NotHerglotzError):
        extract_measure(_phi_from_scalars([1j], [1j, 1]))


def test_verify_moments_examples():
    rep = verify_moments(DELTA0, H101)
    assert rep.equal_through == 1 and np.allclose(rep.gap, 1)
    rep = verify_moments(SYM, H101, expect_equality=True)
    assert rep.equal_through == 2 and np.allclose(rep.gap, 0)
    with pytest.raises(MomentMismatchError) as exc:
        verify_moments(DiscreteMeasure.empty(1), H101)
    assert exc.value.index == 0
    # with n = 1 only the inequality at k = 0 is asserted unless equality is requested
    assert verify_moments(DiscreteMeasure.empty(1), HankelSpec(([[1]],))).equal_through == -1
    with pytest.raises(MomentMismatchError) as exc:
        verify_moments(DiscreteMeasure.empty(1), HankelSpec(([[1]],)), expect_equality=True)
    assert exc.value.index == 0


def test_appendix_examples():
    assert np.allclose(hankel_of_measure(SYM, 2), np.eye(2))
    rep = verify_appendix(H101, SYM)
    assert abs(rep.h15_min_eig) <= 1e-14 and np.allclose(rep.nu_h, 0)
    assert np.allclose(hankel_of_measure(DELTA0, 2), [[1, 0], [0, 0]])
    rep = verify_appendix(H101, DELTA0)
    assert rep.h15_min_eig == pytest.approx(0) and rep.h16_residual <= 1e-12
    with pytest.raises(InconsistentInputError):
        verify_appendix(HankelSpec(([[0.5]],)), DELTA0)


def test_herglotz_decompose_symmetric():
    dec = herglotz_decompose(None, SYM)
    assert np.allclose(dec.mu, 0) and np.allclose(dec.nu_h, 0)
    z = 0.2 + 0.9j
    assert np.allclose(dec(z), SYM.stieltjes(z))


def test_property_J_examples():
    assert check_property_J([[0], [1]])
    assert check_property_J([[1], [1]])
    assert not check_property_J([[1], [-1]])
    om = omega_from_hankel(H101)
    assert not equality_candidate(adjoint(om.omega[1]), om.omega[1])
    assert equality_candidate(flip_J(1) @ adjoint(om.omega[1]), om.omega[1])


@given(seeds, st.integers(1, 2), st.integers(1, 4), st.booleans())
def test_phi_is_herglotz(seed, p, n, neutral):
    rng = np.random.default_rng(seed)
    sp, _ = random_hankel_spec(rng, p, n)
    phi = lft_phi(frakA(sp), random_property_j(rng, p, neutral))
    assert phi.min_imag_eig() >= -1e-10 * (1 + max(np.linalg.norm(phi(z)) for z in SAMPLE_POINTS))
    if neutral:
        assert phi.is_real_symmetric()


@given(seeds, st.integers(1, 2), st.integers(1, 4))
def test_ve19_identity(seed, p, n):
    rng = np.random.default_rng(seed)
    sp, _ = random_hankel_spec(rng, p, n)
    A = frakA(sp)
    Q, Qh = random_property_j(rng, p), random_property_j(rng, p, neutral=True)
    for z in SAMPLE_POINTS[:4]:
        scale = 1 + np.linalg.norm(lft_phi(A, Q)(z))
        assert ve19_residual(A, Q, Qh, z) <= 1e-9 * scale


@given(seeds, st.integers(1, 2), st.integers(2, 5))
def test_leading_coefficient_law(seed, p, n):
    rng = np.random.default_rng(seed)
    sp, _ = random_hankel_spec(rng, p, n)
    om = omega_from_hankel(sp)
    cs = hamiltonian_from_hankel(sp)
    for r in range(1, n):
        D = frakA(cs, r).rows(slice(p, 2 * p)) @ adjoint(om.omega[r])
        t = schur_t_hankel(sp, r + 1)
        assert D.degree == r
        assert np.linalg.norm(D.leading - t) <= 1e-9 * (1 + np.linalg.norm(t))


@given(seeds, st.integers(1, 2), st.integers(1, 4))
def test_unitary_right_factor_leaves_phi_invariant(seed, p, n):
    rng = np.random.default_rng(seed)
    sp, _ = random_hankel_spec(rng, p, n)
    A = frakA(sp)
    Q = random_property_j(rng, p)
    U = random_unitary(rng, p)
    for z in SAMPLE_POINTS[:3]:
        a, b = lft_phi(A, Q)(z), lft_phi(A, Q @ U)(z)
        assert np.linalg.norm(a - b) <= 1e-10 * (1 + np.linalg.norm(a))


def test_strict_parameter_gives_density(rng):
    sp, _ = random_hankel_spec(rng, 1, 2)
    phi = lft_phi(frakA(sp), random_property_j(rng, 1))
    mu = representing_measure(phi)
    assert isinstance(mu, RationalMeasure) and mu.has_density
    for z in SAMPLE_POINTS[:3]:
        assert np.linalg.norm(mu.stieltjes(z) - phi(z)) <= 1e-8 * (1 + np.linalg.norm(phi(z)))
    rep = verify_moments(mu, sp)
    assert np.linalg.eigvalsh(rep.gap)[0] >= -1e-8


@pytest.mark.parametrize("neutral", [False, True])
def test_lft_parameter_keeps_denominator_leading_coefficient_nonsingular(rng, neutral):
    sp, _ = random_hankel_spec(rng, 2, 3)
    A = frakA(sp)
    for _ in range(10):
        Q, redraws = random_lft_parameter(rng, A, neutral=neutral, min_lead_ratio=0.05)
        sv = np.linalg.svd(A.leading[2:] @ Q, compute_uv=False)
        assert redraws >= 0 and sv[-1] >= 0.05 * sv[0]
        assert is_j_neutral(Q) == neutral
