"""Linear readouts over reservoir-derived features.

Two feature maps share the same readout machinery:

* ``rmm``: motif coordinates ``M^T z`` of every input channel's lookback block
  (the Lin-RMM model);
* ``lrc``: truncated-history reservoir state ``A z`` per channel (the linear
  reservoir baseline, L-RC).

Channel blocks are concatenated in dataset column order. A single readout
emits the whole ``H x D_out`` horizon block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from .io import read_container, write_container
from .motifs import MotifBasis
from .numerics import ridge_from_gram, ridge_solve
from .reservoir import ReservoirSpec, operator_A

MODEL_FORMAT = "rmm-forecast-model/1"
CHUNK = 4096


@dataclass(frozen=True, eq=False)
class FeatureExtractor:
    variant: str  # "rmm" or "lrc"
    matrix: np.ndarray  # (tau, k): motifs for rmm, A^T for lrc
    d_in: int
    basis: MotifBasis | None = None

    def __post_init__(self):
        if self.variant not in ("rmm", "lrc"):
            raise ValueError(f"unknown feature variant {self.variant!r}")

    @property
    def tau(self) -> int:
        return self.matrix.shape[0]

    @property
    def per_channel(self) -> int:
        return self.matrix.shape[1]

    @property
    def dim(self) -> int:
        return self.d_in * self.per_channel

    def __call__(self, windows) -> np.ndarray:
        """Features of one ``(tau, d_in)`` window or a stack ``(n, tau, d_in)``."""
        w = np.asarray(windows, dtype=np.float64)
        single = w.ndim == 2
        if single:
            w = w[None]
        if w.shape[1:] != (self.tau, self.d_in):
            raise ValueError(f"window shape {w.shape[1:]} does not match "
                             f"(tau={self.tau}, d_in={self.d_in})")
        f = (np.swapaxes(w, 1, 2) @ self.matrix).reshape(len(w), self.dim)
        return f[0] if single else f


def rmm_extractor(basis: MotifBasis, d_in: int = 1) -> FeatureExtractor:
    return FeatureExtractor("rmm", basis.motifs, d_in, basis)


def lrc_extractor(spec: ReservoirSpec, tau: int, d_in: int = 1) -> FeatureExtractor:
    return FeatureExtractor("lrc", np.ascontiguousarray(operator_A(spec, tau).T), d_in)


def featurize(window, extractor: FeatureExtractor) -> np.ndarray:
    return extractor(window)


def _chunks(n: int, size: int = CHUNK):
    for s in range(0, n, size):
        yield slice(s, min(s + size, n))


@dataclass(eq=False)
class ForecastModel:
    extractor: FeatureExtractor
    weights: np.ndarray  # (feature_dim, H * d_out)
    intercept: np.ndarray  # (H * d_out,)
    horizon: int
    d_out: int
    ridge: float
    mean: np.ndarray = field(default_factory=lambda: np.zeros(0))
    std: np.ndarray = field(default_factory=lambda: np.zeros(0))
    meta: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def predict_features(self, F: np.ndarray) -> np.ndarray:
        return F @ self.weights + self.intercept

    def predict(self, window) -> np.ndarray:
        """Forecast block ``(H, d_out)`` for one lookback window."""
        return self.predict_features(self.extractor(window)).reshape(self.horizon, self.d_out)

    def predict_dataset(self, wd) -> np.ndarray:
        """Flattened forecasts ``(n, H * d_out)`` for every pair of a WindowedDataset."""
        out = np.empty((len(wd), self.weights.shape[1]))
        for sl in _chunks(len(wd)):
            out[sl] = self.predict_features(self.extractor(wd.windows(sl)))
        return out

    def save(self, path) -> None:
        ex = self.extractor
        arrays = {"weights": self.weights, "intercept": self.intercept,
                  "feature_matrix": ex.matrix, "mean": self.mean, "std": self.std}
        meta = {"format": MODEL_FORMAT, "variant": ex.variant, "d_in": ex.d_in,
                "horizon": self.horizon, "d_out": self.d_out, "ridge": self.ridge,
                "task": self.meta}
        if ex.basis is not None:
            b = ex.basis
            arrays["eigenvalues"] = b.eigenvalues
            meta["basis"] = {"tau": b.tau, "rank_tol": b.rank_tol, "reservoir": b.spec.to_dict()}
        write_container(path, arrays, meta)

    @classmethod
    def load(cls, path) -> "ForecastModel":
        arrays, meta = read_container(path)
        if meta.get("format") != MODEL_FORMAT:
            raise ValueError(f"{path}: not a forecast model file")
        basis = None
        if "basis" in meta:
            bm = meta["basis"]
            basis = MotifBasis(arrays["feature_matrix"], arrays["eigenvalues"], bm["tau"],
                               ReservoirSpec.from_dict(bm["reservoir"]), bm["rank_tol"])
        ex = FeatureExtractor(meta["variant"], arrays["feature_matrix"], meta["d_in"], basis)
        return cls(ex, arrays["weights"], arrays["intercept"], meta["horizon"], meta["d_out"],
                   meta["ridge"], arrays["mean"], arrays["std"], meta["task"])


def fit_arrays(F: np.ndarray, Y: np.ndarray, lam: float) -> tuple[np.ndarray, np.ndarray, dict]:
    """Ridge readout with an unpenalized intercept, from in-memory features.

    Centering features and targets and solving the penalized problem on the
    centered data is the same as appending a constant column that is left
    out of the penalty.
    """
    F = np.asarray(F, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    fm, ym = F.mean(axis=0), Y.mean(axis=0)
    W, info = ridge_solve(F - fm, Y - ym, lam, full_output=True)
    return W, ym - fm @ W, info


def fit(train, extractor: FeatureExtractor, lam: float, meta: dict | None = None,
        scaler=None) -> ForecastModel:
    """Fit a readout on a WindowedDataset (or a list of them, pooled).

    For ``lam > 0`` the centered Gram matrix is accumulated chunk by chunk in
    a fixed order; ``lam == 0`` materializes the design matrix and returns
    the minimal-norm solution.
    """
    parts = train if isinstance(train, (list, tuple)) else [train]
    n = sum(len(p) for p in parts)
    if n < 1:
        raise ValueError("need at least one training pair")
    if lam < 0:
        raise ValueError("ridge coefficient must be >= 0")
    wd0 = parts[0]
    if wd0.d_in != extractor.d_in:
        raise ValueError(f"extractor expects {extractor.d_in} input channels, data has {wd0.d_in}")

    if lam == 0:
        F = np.concatenate([extractor(p.windows(sl)) for p in parts for sl in _chunks(len(p))])
        Y = np.concatenate([p.targets(sl) for p in parts for sl in _chunks(len(p))])
        W, b, info = fit_arrays(F, Y, lam)
    else:
        p_dim, q = extractor.dim, wd0.d_out * wd0.horizon
        fsum, ysum = np.zeros(p_dim), np.zeros(q)
        for p in parts:
            for sl in _chunks(len(p)):
                fsum += extractor(p.windows(sl)).sum(axis=0)
                ysum += p.targets(sl).sum(axis=0)
        fm, ym = fsum / n, ysum / n
        G = np.zeros((p_dim, p_dim))
        R = np.zeros((p_dim, q))
        for p in parts:
            for sl in _chunks(len(p)):
                Fc = extractor(p.windows(sl)) - fm
                G += Fc.T @ Fc
                R += Fc.T @ (p.targets(sl) - ym)
        W = ridge_from_gram(G, R, lam)
        b = ym - fm @ W
        info = {"method": "cholesky-gram", "rank": None, "minimal_norm": False}
    mean = scaler.mean if scaler is not None else np.zeros(0)
    std = scaler.std if scaler is not None else np.zeros(0)
    return ForecastModel(extractor, W, b, wd0.horizon, wd0.d_out, float(lam),
                         np.asarray(mean, dtype=np.float64), np.asarray(std, dtype=np.float64),
                         dict(meta or {}), info)


def predict(model: ForecastModel, window) -> np.ndarray:
    return model.predict(window)


def absorb_coefficients(weights: np.ndarray, C) -> np.ndarray:
    """Readout weights acting on unit-coefficient motif coordinates.

    If a linear readout ``q(x) = x @ weights + b`` consumes motif coordinates
    scaled by ``C``, then ``q~(x) = x @ (C[:, None] * weights) + b`` gives the
    same outputs on the unscaled coordinates.
    """
    C = np.asarray(C, dtype=np.float64)
    return C[:, None] * np.asarray(weights, dtype=np.float64)


__all__ = ["FeatureExtractor", "ForecastModel", "rmm_extractor", "lrc_extractor", "featurize",
           "fit", "fit_arrays", "predict", "absorb_coefficients"]
