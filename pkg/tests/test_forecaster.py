import numpy as np
import pytest

from rmm.data import SplitSpec, TimeSeries, make_windows
from rmm.forecaster import (
    ForecastModel, absorb_coefficients, featurize, fit, fit_arrays, lrc_extractor, predict, rmm_extractor,
)
from rmm.motifs import extract_motifs
from rmm.reservoir import build_reservoir, operator_A, reservoir_states


def windows_of(x, tau, H, targets=None):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    cols = [f"c{i}" for i in range(x.shape[1])]
    T = len(x)
    return make_windows(TimeSeries(x, cols), SplitSpec(T, T, T), tau, H, targets or cols)["train"]


@pytest.fixture(scope="module")
def basis():
    return extract_motifs(build_reservoir(8, 0.9, 0.5), 24)


def test_featurize_motif_gives_unit_vector(basis):
    ex = rmm_extractor(basis)
    e = np.zeros(basis.n_motifs)
    e[0] = 1
    np.testing.assert_allclose(featurize(basis.motifs[:, :1], ex), e, atol=1e-12)


def test_featurize_identical_channels(basis):
    u = np.random.default_rng(0).standard_normal(24)
    f = featurize(np.stack([u, u], axis=1), rmm_extractor(basis, 2))
    k = basis.n_motifs
    assert f.shape == (2 * k,)
    assert np.array_equal(f[:k], f[k:])
    np.testing.assert_allclose(f[:k], basis.project(u), rtol=1e-12)


def test_featurize_channel_order(basis):
    U = np.random.default_rng(1).standard_normal((24, 3))
    f = featurize(U, rmm_extractor(basis, 3))
    k = basis.n_motifs
    for c in range(3):
        np.testing.assert_allclose(f[c * k : (c + 1) * k], basis.project(U[:, c]), rtol=1e-12)


def test_lrc_features_match_state_simulation():
    spec = build_reservoir(8, 0.9, 0.5)
    ex = lrc_extractor(spec, 24, 2)
    U = np.random.default_rng(2).standard_normal((24, 2))
    f = featurize(U, ex)
    for c in range(2):
        x = reservoir_states(spec, U[:, c])[-1]
        np.testing.assert_allclose(f[c * 8 : (c + 1) * 8], x, rtol=1e-10, atol=1e-12)


def test_featurize_shape_mismatch(basis):
    with pytest.raises(ValueError, match="tau"):
        featurize(np.zeros((23, 1)), rmm_extractor(basis))
    with pytest.raises(ValueError):
        featurize(np.zeros((24, 2)), rmm_extractor(basis))


def test_zero_targets_zero_model(basis):
    x = np.random.default_rng(3).standard_normal((80, 2))
    x[:, 1] = 0.0
    wd = make_windows(TimeSeries(x, ["a", "b"]), SplitSpec(80, 80, 80), 24, 3, ["b"], ["a"])["train"]
    m = fit(wd, rmm_extractor(basis), 1e-4)
    assert np.all(m.weights == 0) and np.all(m.intercept == 0)


def test_constant_forecast_from_intercept(basis):
    ex = rmm_extractor(basis)
    m = ForecastModel(ex, np.zeros((ex.dim, 4)), np.array([1.0, 2.0, 3.0, 4.0]), 2, 2, 0.0)
    u = np.random.default_rng(4).standard_normal((24, 1))
    np.testing.assert_array_equal(predict(m, u), [[1, 2], [3, 4]])


def test_interpolation_limit():
    # one pair, no intercept freedom needed: fit on two pairs sharing the mean
    rng = np.random.default_rng(5)
    F = rng.standard_normal((2, 4))
    Y = rng.standard_normal((2, 3))
    errs = []
    for lam in [1.0, 1e-2, 1e-4, 1e-6]:
        W, b, _ = fit_arrays(F, Y, lam)
        errs.append(np.abs(F @ W + b - Y).max())
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-5


def test_single_pair_predicts_its_target(basis):
    x = np.random.default_rng(6).standard_normal(25)
    wd = windows_of(x, 24, 1)
    assert len(wd) == 1
    m = fit(wd, rmm_extractor(basis), 1e-4)
    np.testing.assert_allclose(m.predict(wd.window(0))[0, 0], x[-1], rtol=1e-12)


def test_gram_path_matches_direct_solve(basis):
    x = np.random.default_rng(7).standard_normal((400, 2))
    wd = windows_of(x, 24, 5)
    ex = rmm_extractor(basis, 2)
    m = fit(wd, ex, 0.3)
    W, b, _ = fit_arrays(ex(wd.windows()), wd.targets(), 0.3)
    np.testing.assert_allclose(m.weights, W, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(m.intercept, b, rtol=1e-9, atol=1e-12)
    assert m.weights.shape == (2 * basis.n_motifs, 10)


def test_pooled_parts_equal_concatenation(basis):
    x = np.random.default_rng(8).standard_normal(300)
    wd = windows_of(x, 24, 2)
    a, b = wd.subset(wd.anchors[:100]), wd.subset(wd.anchors[100:])
    ex = rmm_extractor(basis)
    m1, m2 = fit([a, b], ex, 1e-3), fit(wd, ex, 1e-3)
    np.testing.assert_allclose(m1.weights, m2.weights, rtol=1e-10, atol=1e-13)


def test_persistence_bit_identical(tmp_path, basis):
    x = np.random.default_rng(9).standard_normal((300, 2))
    wd = windows_of(x, 24, 4)
    m = fit(wd, rmm_extractor(basis, 2), 1e-4, meta={"dataset": "toy"})
    m.save(tmp_path / "m.rmm")
    r = ForecastModel.load(tmp_path / "m.rmm")
    assert np.array_equal(r.predict_dataset(wd), m.predict_dataset(wd))
    assert r.meta == {"dataset": "toy"}
    assert np.array_equal(r.extractor.basis.eigenvalues, basis.eigenvalues)
    r.save(tmp_path / "r.rmm")
    assert (tmp_path / "m.rmm").read_bytes() == (tmp_path / "r.rmm").read_bytes()
    lrc = fit(wd, lrc_extractor(basis.spec, 24, 2), 1e-4)
    lrc.save(tmp_path / "l.rmm")
    assert np.array_equal(ForecastModel.load(tmp_path / "l.rmm").predict_dataset(wd), lrc.predict_dataset(wd))


def test_prediction_linear_without_intercept(basis):
    rng = np.random.default_rng(10)
    wd = windows_of(rng.standard_normal(200), 24, 3)
    m = fit(wd, rmm_extractor(basis), 1e-4)
    m.intercept = np.zeros_like(m.intercept)
    u, v = rng.standard_normal((2, 24, 1))
    lhs = m.predict(2.5 * u - 0.7 * v)
    rhs = 2.5 * m.predict(u) - 0.7 * m.predict(v)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-10 * np.abs(rhs).max())


def test_fit_rejects_bad_input(basis):
    wd = windows_of(np.zeros(30), 24, 1)
    with pytest.raises(ValueError):
        fit(wd, rmm_extractor(basis), -1.0)
    with pytest.raises(ValueError):
        fit(wd.subset(wd.anchors[:0]), rmm_extractor(basis), 1.0)
    with pytest.raises(ValueError, match="channels"):
        fit(wd, rmm_extractor(basis, 2), 1.0)


def test_rank_deficient_flag():
    spec = build_reservoir(8, 0.9, 0.5)
    wd = windows_of(np.random.default_rng(11).standard_normal(30), 24, 1)  # 6 windows < 8 features
    m = fit(wd, lrc_extractor(spec, 24), 0.0)
    assert m.info["minimal_norm"]


def test_rmm_lrc_span_equivalence():
    spec = build_reservoir(8, 0.9, 0.5)
    basis = extract_motifs(spec, 24)
    # the N=8 sign pattern has two vanishing DFT modes, so rank(A) = 6
    assert basis.n_motifs == np.linalg.matrix_rank(operator_A(spec, 24)) == 6
    wd = windows_of(np.random.default_rng(12).standard_normal(24 + 50), 24, 1)
    assert len(wd) == 50
    a = fit(wd, rmm_extractor(basis), 0.0)
    b = fit(wd, lrc_extractor(spec, 24), 0.0)
    ya, yb = a.predict_dataset(wd), b.predict_dataset(wd)
    assert np.max(np.abs(ya - yb)) <= 1e-6 * np.max(np.abs(yb))


def test_reparameterization_invariance_at_zero_ridge(basis):
    rng = np.random.default_rng(13)
    wd = windows_of(rng.standard_normal(150), 24, 2)
    F = rmm_extractor(basis)(wd.windows())
    C = rng.uniform(0.1, 3.0, basis.n_motifs) * rng.choice([-1, 1], basis.n_motifs)
    W1, b1, _ = fit_arrays(F, wd.targets(), 0.0)
    W2, b2, _ = fit_arrays(F * C, wd.targets(), 0.0)
    np.testing.assert_allclose(F @ W1 + b1, (F * C) @ W2 + b2, rtol=1e-9, atol=1e-10)


def test_absorb_coefficients_model_level(basis):
    rng = np.random.default_rng(14)
    C = rng.uniform(0.5, 2.0, basis.n_motifs)
    W = rng.standard_normal((basis.n_motifs, 3))
    for u in rng.standard_normal((10, 24)):
        np.testing.assert_allclose(basis.project(u) @ absorb_coefficients(W, C),
                                   basis.scaled_projection(u, C) @ W, rtol=1e-12, atol=1e-14)


def test_fit_deterministic(tmp_path, basis):
    wd = windows_of(np.random.default_rng(15).standard_normal((300, 2)), 24, 4)
    for lam in (0.0, 1e-4):
        fit(wd, rmm_extractor(basis, 2), lam).save(tmp_path / "a.rmm")
        fit(wd, rmm_extractor(basis, 2), lam).save(tmp_path / "b.rmm")
        assert (tmp_path / "a.rmm").read_bytes() == (tmp_path / "b.rmm").read_bytes()


def test_small_ar1_monte_carlo():
    # T=500 leaves ~100 test windows, so single runs are noisy; pool squared errors over 20 series.
    # tau <= N keeps the last sample inside the motif span.
    from conftest import ar1_series, raw_prepared
    from rmm.evaluation import grid_search

    model_se = oracle_se = 0.0
    for seed in range(20):
        data = raw_prepared(ar1_series(500, 0.8, 100 + seed), tau=4, horizon=1)
        res = grid_search(data, N=16)
        test = data.windows["test"]
        y = test.targets()[:, 0]
        model_se += np.sum((res.model.predict_dataset(test)[:, 0] - y) ** 2)
        oracle_se += np.sum((0.8 * test.windows()[:, -1, 0] - y) ** 2)
    assert model_se <= 1.05 * oracle_se
