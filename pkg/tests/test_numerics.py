import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from rmm.numerics import ridge_from_gram, ridge_solve, sym_eig, thin_svd


def check_eig(S, res):
    lam, V = res.eigenvalues, res.eigenvectors
    assert np.all(np.diff(lam) <= 0)
    assert np.max(np.abs(V.T @ V - np.eye(len(lam)))) <= 1e-10
    scale = max(1.0, abs(lam[0]))
    for i in range(len(lam)):
        assert np.linalg.norm(S @ V[:, i] - lam[i] * V[:, i]) <= 1e-8 * scale
    assert np.max(np.abs(S - (V * lam) @ V.T)) <= 1e-8 * (1 + abs(lam[0]))


def test_sym_eig_identity():
    res = sym_eig(np.eye(3))
    np.testing.assert_allclose(res.eigenvalues, [1, 1, 1])
    check_eig(np.eye(3), res)


def test_sym_eig_diagonal():
    res = sym_eig(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_array_equal(res.eigenvalues, [3, 2, 1])
    np.testing.assert_array_equal(np.abs(res.eigenvectors), np.eye(3)[:, [0, 2, 1]])


def test_sym_eig_two_by_two():
    res = sym_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
    np.testing.assert_allclose(res.eigenvalues, [3, 1], rtol=1e-14)
    v = res.eigenvectors[:, 0]
    np.testing.assert_allclose(np.abs(v), [2**-0.5, 2**-0.5], rtol=1e-14)


@pytest.mark.parametrize("bad", [np.array([[1.0, 2.0], [0.0, 1.0]]), np.array([[np.nan, 0.0], [0.0, 1.0]]),
                                 np.ones((2, 3))])
def test_sym_eig_rejects(bad):
    with pytest.raises(ValueError):
        sym_eig(bad)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 24), seed=st.integers(0, 2**16), rank=st.integers(0, 24))
def test_sym_eig_random(n, seed, rank):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, min(rank, n) or n))
    S = B @ B.T if rank else B + B.T
    S = 0.5 * (S + S.T)
    check_eig(S, sym_eig(S))


def test_sym_eig_psd_clamp():
    v = np.random.default_rng(0).standard_normal((20, 3))
    S = v @ v.T
    lam = sym_eig(S).eigenvalues
    assert np.all(lam >= 0)


def test_sym_eig_deterministic():
    S = np.random.default_rng(1).standard_normal((30, 30))
    S = S + S.T
    a, b = sym_eig(S), sym_eig(S)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_thin_svd_examples():
    r = thin_svd(np.zeros((3, 4)))
    assert np.all(r.s == 0) and r.rank == 0
    r = thin_svd(np.array([[3.0, 0.0], [0.0, 4.0]]))
    np.testing.assert_allclose(r.s, [4, 3])
    with pytest.raises(ValueError):
        thin_svd(np.array([[np.inf]]))


@pytest.mark.parametrize("shape", [(5, 8), (8, 5), (64, 128)])
def test_thin_svd_cross_checks_sym_eig(shape):
    A = np.random.default_rng(7).standard_normal(shape)
    r = thin_svd(A)
    assert np.all(np.diff(r.s) <= 0)
    assert np.max(np.abs(A - (r.U * r.s) @ r.V.T)) <= 1e-8 * r.s[0]
    k = min(shape)
    np.testing.assert_allclose(r.U.T @ r.U, np.eye(k), atol=1e-12)
    np.testing.assert_allclose(r.V.T @ r.V, np.eye(k), atol=1e-12)
    lam = sym_eig(A.T @ A).eigenvalues[:k]
    np.testing.assert_allclose(r.s**2, lam, rtol=1e-8)


def test_thin_svd_rank_revealing():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((10, 3)) @ rng.standard_normal((3, 7))
    assert thin_svd(A).rank == 3


def test_ridge_examples():
    X = np.array([[1.0], [2.0]])
    Y = np.array([1.0, 2.0])
    np.testing.assert_allclose(ridge_solve(X, Y, 0.0), [1.0], rtol=1e-14)
    np.testing.assert_allclose(ridge_solve(X, Y, 1.0), [5 / 6], rtol=1e-14)
    assert np.all(ridge_solve(X, np.zeros((2, 3)), 0.5) == 0)


@pytest.mark.parametrize("args", [(np.ones((2, 1)), np.ones(3), 1.0), (np.ones((2, 1)), np.ones(2), -1.0),
                                  (np.zeros((0, 2)), np.zeros(0), 1.0)])
def test_ridge_rejects(args):
    with pytest.raises(ValueError):
        ridge_solve(*args)


def test_ridge_normal_equations_hold():
    rng = np.random.default_rng(4)
    X, Y = rng.standard_normal((40, 6)), rng.standard_normal((40, 3))
    for lam in [1e-4, 1.0, 100.0]:
        B = ridge_solve(X, Y, lam)
        lhs = (X.T @ X + lam * np.eye(6)) @ B
        np.testing.assert_allclose(lhs, X.T @ Y, rtol=1e-8, atol=1e-10)


def test_ridge_rank_deficient_flags_minimal_norm():
    X = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    B, info = ridge_solve(X, np.array([1.0, 2.0, 3.0]), 0.0, full_output=True)
    assert info["minimal_norm"] and info["rank"] == 1 and info["method"] == "svd-pinv"
    np.testing.assert_allclose(B, [0.5, 0.5], rtol=1e-13)
    exact = sympy.Matrix([[1, 1], [2, 2], [3, 3]]).pinv() * sympy.Matrix([1, 2, 3])
    np.testing.assert_allclose(B, np.array(exact, dtype=float).ravel(), rtol=1e-13)


def test_ridge_from_gram_matches_direct():
    rng = np.random.default_rng(5)
    X, Y = rng.standard_normal((50, 7)), rng.standard_normal((50, 2))
    np.testing.assert_allclose(ridge_from_gram(X.T @ X, X.T @ Y, 0.1), ridge_solve(X, Y, 0.1), rtol=1e-10)
    # singular Gram at lam = 0 takes the eigen-filtered path
    Z = np.hstack([X, X[:, :1]])
    B = ridge_from_gram(Z.T @ Z, Z.T @ Y, 0.0)
    np.testing.assert_allclose(Z @ B, Z @ np.linalg.pinv(Z) @ Y, atol=1e-8)


def test_ridge_deterministic():
    rng = np.random.default_rng(6)
    X, Y = rng.standard_normal((30, 5)), rng.standard_normal(30)
    assert np.array_equal(ridge_solve(X, Y, 1e-4), ridge_solve(X, Y, 1e-4))
    assert np.array_equal(ridge_solve(X, Y, 0.0), ridge_solve(X, Y, 0.0))
