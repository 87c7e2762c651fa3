import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm
from scipy.optimize import linear_sum_assignment

from hlep.dynamics import (
    PairingError,
    SingularTransformError,
    build_dynamics_matrix,
    commutator_matrix,
    eigendecompose,
    pair_eigenvalues,
    transform_noise,
    two_mode_closed_form,
    two_mode_matrix,
    trace_identity_residual,
)
from hlep.model import TwoModeParams, make_system, two_mode_system

from published_tables import SINGLE_EP_PARAMS


def _dev(a, b):
    cost = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    r, c = linear_sum_assignment(cost)
    return cost[r, c].max()


params = st.builds(
    TwoModeParams,
    st.floats(0, 3),
    st.floats(0, 3),
    st.floats(0.05, 3),
    st.floats(-3, 3),
    st.floats(-3, 3),
)


def test_two_mode_matrix_matches_general_builder():
    p = TwoModeParams(1.3, 0.4, 0.9, -0.2, 0.35)
    d = build_dynamics_matrix(two_mode_system(p))
    assert np.array_equal(d.m_omega, two_mode_matrix(p))
    assert d.noise_corr[0, 1] == 1.3 and d.noise_corr[3, 2] == 0.4
    assert np.count_nonzero(d.noise_corr) == 2


def test_closed_dynamics_preserves_commutators():
    rng = np.random.default_rng(3)
    e = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    k = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    s = make_system(e + e.conj().T, k + k.T, [("damped", 0.0)] * 3)
    m = np.asarray(build_dynamics_matrix(s).m_omega)
    c = commutator_matrix(3)
    # closed unitary dynamics preserves the commutators: M C + C M^T = 0
    assert np.allclose(m @ c + c @ m.T, 0, atol=1e-12)
    # row structure: dagger rows are negated conjugates
    for j in range(3):
        perm = np.arange(6) ^ 1
        assert np.allclose(m[2 * j + 1], -np.conj(m[2 * j])[perm])


@settings(max_examples=200, deadline=None)
@given(params)
def test_closed_form_matches_numerics(p):
    m = two_mode_matrix(p)
    cf = two_mode_closed_form(p)
    scale = max(1.0, np.linalg.norm(m, 2))
    assert _dev(cf.omegas, np.linalg.eigvals(m)) <= 1e-10 * scale or _near_ep(p)


def _near_ep(p):
    # at a defective point the numeric eigenvalues scatter like sqrt(eps)
    e2, a = p.epsilon**2, p.alpha
    return min(abs(e2 - (a - p.g) ** 2), abs(e2 - (a + p.g) ** 2)) < 1e-6


@settings(max_examples=100, deadline=None)
@given(params)
def test_eigendecompose_invariants(p):
    d = build_dynamics_matrix(two_mode_system(p))
    s = eigendecompose(d)
    m = np.asarray(d.m_omega)
    assert trace_identity_residual(s, m) < 1e-9
    for i, j in s.pairing:
        assert abs(s.omegas[i] + np.conj(s.omegas[j])) < 1e-8 * max(1, np.linalg.norm(m, 2))
    if s.p_matrix is not None and s.residual < 1e-6:
        lhs = s.p_inverse @ m @ s.p_matrix
        assert np.allclose(lhs, s.jordan_matrix(), atol=1e-6 * max(1, np.linalg.norm(m, 2)))


def test_imaginary_parts_are_common():
    p = TwoModeParams(1.0, 0.2, 1.0, 0.3, 0.1)
    s = eigendecompose(two_mode_matrix(p))
    assert np.allclose(s.omegas.imag, -p.gamma_minus)


def test_exceptional_point_jordan_form():
    p = TwoModeParams(**SINGLE_EP_PARAMS)
    d = build_dynamics_matrix(two_mode_system(p))
    s = eigendecompose(d)
    assert not s.diagonalizable
    assert s.coalescing == (0,)
    assert s.omegas[0] == s.omegas[1]
    assert abs(s.omegas[0] + 0.5j) < 1e-9
    assert s.residual < 1e-8
    j = s.jordan_matrix()
    assert j[0, 1] == 1.0 and np.count_nonzero(j - np.diag(np.diag(j))) == 1
    with pytest.raises(SingularTransformError):
        transform_noise(s, d)
    k = transform_noise(s, d, allow_jordan=True)
    assert np.allclose(s.p_matrix @ k @ s.p_matrix.T, d.noise_corr)


def test_closed_form_at_ep_and_flip():
    cf = two_mode_closed_form(TwoModeParams(**SINGLE_EP_PARAMS))
    assert not cf.diagonalizable and cf.coalescing == (0,)
    p = TwoModeParams(1.0, 0.2, 1.0, 0.3, -0.4)
    cf = two_mode_closed_form(p)
    assert cf.phase_flipped
    m = two_mode_matrix(p)
    assert _dev(cf.omegas, np.linalg.eigvals(m)) < 1e-12
    assert np.linalg.norm(m @ cf.p_matrix - cf.p_matrix @ np.diag(cf.omegas)) < 1e-12


def test_closed_form_eigenvectors():
    p = TwoModeParams(0.7, 0.3, 1.1, 0.25, 0.4)
    cf = two_mode_closed_form(p)
    m = two_mode_matrix(p)
    for k in range(4):
        v = cf.p_matrix[:, k]
        assert np.linalg.norm(m @ v - cf.omegas[k] * v) < 1e-12


def test_first_moments_follow_exponential():
    p = TwoModeParams(1.0, 0.2, 1.0, 0.3, 0.1)
    d = build_dynamics_matrix(two_mode_system(p))
    s = eigendecompose(d)
    x0 = np.array([0.3, 0.3, 0.1j, -0.1j])
    t = 1.7
    direct = expm(-1j * np.asarray(d.m_omega) * t) @ x0
    via = s.p_matrix @ (np.exp(-1j * s.omegas * t) * (s.p_inverse @ x0))
    assert np.allclose(direct, via, atol=1e-12)


def test_pairing_errors():
    slots, pairing = pair_eigenvalues(np.array([1 - 1j, -1 - 1j, 2j, -3j]), 1e-9)
    assert slots[0] == (0, 1) and (2, 2) in pairing
    with pytest.raises(PairingError):
        pair_eigenvalues(np.array([1 - 1j, -2 - 1j]), 1e-9)
    with pytest.raises(ValueError):
        eigendecompose(np.zeros((3, 3)))
