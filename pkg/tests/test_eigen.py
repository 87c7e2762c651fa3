import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hlep.eigen import cluster, eigvals, hessenberg, null_space, nullity, schur
from scipy.optimize import linear_sum_assignment


def _match(a, b):
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return cost[r, c].max()


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 9), st.integers(0, 2**31 - 1))
def test_schur_factorization(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    t, q = schur(a)
    assert np.allclose(np.tril(t, -1), 0)
    assert np.allclose(q.conj().T @ q, np.eye(n), atol=1e-12)
    assert np.linalg.norm(q @ t @ q.conj().T - a) <= 1e-12 * max(1, np.linalg.norm(a))
    assert _match(eigvals(a), np.linalg.eigvals(a)) < 1e-10


def test_hessenberg_form():
    a = np.random.default_rng(1).normal(size=(6, 6))
    h, q = hessenberg(a)
    assert np.allclose(np.tril(h, -2), 0)
    assert np.allclose(q @ h @ q.conj().T, a)


def test_triangular_and_defective_inputs():
    j = np.array([[2.0, 1.0, 0.0], [0.0, 2.0, 1.0], [0.0, 0.0, 2.0]])
    assert np.allclose(eigvals(j), 2.0)
    assert eigvals(np.zeros((0, 0))).shape == (0,)


def test_cluster_and_rank():
    groups = cluster([0.0, 1e-9, 1.0, 1.0 + 5e-10, 3.0], 1e-8)
    assert sorted(map(sorted, groups)) == [[0, 1], [2, 3], [4]]
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert nullity(a, 1e-10) == 1
    ns = null_space(a, 1e-10)
    assert ns.shape == (2, 1) and np.allclose(a @ ns, 0)
    assert nullity(np.eye(3), 1e-10) == 0


def test_nonsquare_rejected():
    with pytest.raises(ValueError):
        schur(np.ones((2, 3)))


def test_subnormal_entries_do_not_break_reduction():
    a = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1e-300], [1e-310, 3e-320, 2.0]], dtype=complex)
    with np.errstate(over="raise", invalid="raise", divide="raise"):
        got = eigvals(a)
    assert np.allclose(np.sort_complex(got), np.sort_complex(np.linalg.eigvals(a)), atol=1e-12)
