import json

import numpy as np
import pytest

from rmm.motifs import extract_motifs, extract_motifs_eig, zero_crossings
from rmm.reservoir import build_reservoir, metric_tensor, operator_A


@pytest.fixture(scope="module")
def basis():
    return extract_motifs(build_reservoir(12, 0.9, 0.5), 40)


def test_near_zero_memory_single_motif():
    b = extract_motifs(build_reservoir(10, 1e-12, 0.3), 20)
    assert b.n_motifs == 1
    np.testing.assert_allclose(b.eigenvalues, [10 * 0.09], rtol=1e-12)
    e = np.zeros(20)
    e[-1] = 1.0
    np.testing.assert_allclose(b.motifs[:, 0], e, atol=1e-10)


def test_full_rank_at_default_scale():
    b = extract_motifs(build_reservoir(150, 0.99, 1.0), 336)
    assert b.n_motifs == 150
    assert np.all(np.diff(b.eigenvalues) <= 0)


@pytest.mark.parametrize("N,tau,rho", [(12, 40, 0.9), (32, 64, 0.99), (20, 10, 0.5), (150, 336, 0.9)])
def test_basis_invariants(N, tau, rho):
    s = build_reservoir(N, rho, 0.05)
    b = extract_motifs(s, tau)
    M, lam = b.motifs, b.eigenvalues
    assert b.n_motifs <= min(N, tau)
    assert np.max(np.abs(M.T @ M - np.eye(b.n_motifs))) <= 1e-8
    Q = metric_tensor(operator_A(s, tau))
    assert np.max(np.linalg.norm(Q @ M - M * lam, axis=0)) <= 1e-8 * lam[0]
    first = np.array([M[np.flatnonzero(np.abs(M[:, i]) > 1e-12)[0], i] for i in range(b.n_motifs)])
    assert np.all(first > 0)


@pytest.mark.parametrize("rho", [0.5, 0.9, 0.99])
def test_eigenvalue_sum_equals_trace(rho):
    N, tau, r = 16, 48, 0.7
    b = extract_motifs(build_reservoir(N, rho, r), tau, rank_tol=0.0)
    trace = N * r * r * sum(rho ** (2 * k) for k in range(tau))
    np.testing.assert_allclose(b.eigenvalues.sum(), trace, rtol=1e-8)


@pytest.mark.parametrize("N,tau,rho", [(8, 24, 0.9), (16, 40, 0.99), (32, 48, 0.95)])
def test_eig_and_svd_routes_agree(N, tau, rho):
    s = build_reservoir(N, rho, 1.0)
    a, b = extract_motifs(s, tau), extract_motifs_eig(s, tau)
    assert a.n_motifs == b.n_motifs
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, rtol=1e-8)
    gaps = np.diff(a.eigenvalues)
    separated = np.ones(a.n_motifs, dtype=bool)
    close = np.abs(gaps) < 1e-6 * a.eigenvalues[0]
    separated[:-1] &= ~close
    separated[1:] &= ~close
    for i in np.flatnonzero(separated):
        sgn = np.sign(a.motifs[:, i] @ b.motifs[:, i])
        np.testing.assert_allclose(a.motifs[:, i], sgn * b.motifs[:, i], atol=1e-7)
    # near-tied pairs: compare spanned subspaces instead
    Pa, Pb = a.motifs @ a.motifs.T, b.motifs @ b.motifs.T
    np.testing.assert_allclose(Pa, Pb, atol=1e-7)


def test_projection_examples(basis):
    e = np.zeros(basis.n_motifs)
    e[0] = 1.0
    np.testing.assert_allclose(basis.project(basis.motifs[:, 0]), e, atol=1e-12)
    assert np.all(basis.project(np.zeros(40)) == 0)
    np.testing.assert_allclose(basis.reservoir_features(basis.motifs[:, 0]), np.sqrt(basis.eigenvalues[0]) * e,
                               atol=1e-10)
    assert np.all(basis.reservoir_features(np.zeros(40)) == 0)
    rng = np.random.default_rng(0)
    for u in rng.standard_normal((100, 40)):
        assert np.linalg.norm(basis.project(u)) <= np.linalg.norm(u) * (1 + 1e-12)
    with pytest.raises(ValueError, match="tau"):
        basis.project(np.zeros(39))


def test_scaled_projection(basis):
    u = np.random.default_rng(1).standard_normal(40)
    k = basis.n_motifs
    np.testing.assert_array_equal(basis.scaled_projection(u, np.ones(k)), basis.project(u))
    np.testing.assert_allclose(basis.scaled_projection(u, np.sqrt(basis.eigenvalues)), basis.reservoir_features(u),
                               rtol=1e-14)
    assert np.all(basis.scaled_projection(u, np.zeros(k)) == 0)
    with pytest.raises(ValueError):
        basis.scaled_projection(u, np.ones(k + 1))
    bad = np.ones(k)
    bad[0] = np.nan
    with pytest.raises(ValueError):
        basis.scaled_projection(u, bad)


def test_reservoir_features_reproduce_kernel(basis):
    s = basis.spec
    Q = metric_tensor(operator_A(s, 40))
    rng = np.random.default_rng(2)
    for u, v in rng.standard_normal((20, 2, 40)):
        k = basis.reservoir_features(u) @ basis.reservoir_features(v)
        assert abs(k - u @ Q @ v) <= 1e-8 * np.sqrt((u @ Q @ u) * (v @ Q @ v))


def test_stack_projection(basis):
    U = np.random.default_rng(3).standard_normal((5, 40))
    np.testing.assert_allclose(basis.project(U), np.stack([basis.project(u) for u in U]), rtol=1e-13)


def test_csv_export(tmp_path, basis):
    basis.to_csv(tmp_path / "m.csv")
    lines = (tmp_path / "m.csv").read_text().splitlines()
    assert lines[0].split(",") == [f"motif_{i + 1}" for i in range(basis.n_motifs)]
    assert len(lines) == 41
    M = np.loadtxt(tmp_path / "m.csv", delimiter=",", skiprows=1)
    assert np.array_equal(M, basis.motifs)
    ev = np.loadtxt(tmp_path / "m_eigenvalues.csv", delimiter=",", skiprows=1)
    assert np.array_equal(ev[:, 1], basis.eigenvalues)
    meta = json.loads((tmp_path / "m_meta.json").read_text())
    assert meta["n_motifs"] == basis.n_motifs and meta["tau"] == 40


def test_zero_crossings():
    assert zero_crossings([1, -1, 1]) == 2
    assert zero_crossings([1, 0, 1]) == 0
    assert zero_crossings([1, 0, -1]) == 1
    assert zero_crossings([]) == 0


def test_low_index_motifs_are_smoother():
    b = extract_motifs(build_reservoir(50, 0.99, 1.0), 100)
    zc = [zero_crossings(b.motifs[:, i]) for i in range(b.n_motifs)]
    assert np.median(zc[:6]) < np.median(zc[-6:])
