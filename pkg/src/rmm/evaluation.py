"""Error metrics, validation grid search, benchmark tables and motif relevance."""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .forecaster import ForecastModel, fit, lrc_extractor, rmm_extractor
from .motifs import extract_motifs, zero_crossings
from .reservoir import build_reservoir

log = logging.getLogger(__name__)

RHO_GRID = (0.9, 0.99, 0.999, 0.9999)
R_IN_GRID = (0.01, 0.05, 0.1, 1.0)
DEFAULT_TAU = 336
DEFAULT_N = 150
DEFAULT_RIDGE = 1e-4
TIE_RTOL = 1e-9


def _pair(pred, target):
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    if pred.size == 0:
        raise ValueError("empty input")
    return pred, target


def mse(pred, target) -> float:
    pred, target = _pair(pred, target)
    return float(np.mean((pred - target) ** 2))


def mae(pred, target) -> float:
    pred, target = _pair(pred, target)
    return float(np.mean(np.abs(pred - target)))


def evaluate(model: ForecastModel, wd) -> tuple[float, float]:
    """MSE and MAE over every window, step and channel of a partition."""
    if len(wd) == 0:
        raise ValueError(f"no windows in partition {wd.part!r}")
    sq = ab = 0.0
    count = 0
    step = 4096
    for s in range(0, len(wd), step):
        sl = slice(s, min(s + step, len(wd)))
        err = model.predict_features(model.extractor(wd.windows(sl))) - wd.targets(sl)
        sq += float(np.sum(err * err))
        ab += float(np.sum(np.abs(err)))
        count += err.size
    return sq / count, ab / count


@dataclass
class EvalReport:
    dataset: str
    task: str
    horizon: int
    variant: str
    rho: float
    r_in: float
    tau: int
    N: int
    ridge: float
    split: str
    mse: float
    mae: float
    n_windows: int
    seconds: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.mse) and np.isfinite(self.mae) and self.mse >= 0 and self.mae >= 0):
            raise ValueError(f"invalid error values mse={self.mse}, mae={self.mae}")


REPORT_FIELDS = ["dataset", "task", "horizon", "variant", "rho", "r_in", "tau", "N", "ridge",
                 "split", "mse", "mae", "n_windows"]


def write_reports_csv(path, reports) -> None:
    """Deterministic CSV of reports; wall-clock timings are left out."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(REPORT_FIELDS)
        for r in reports:
            d = asdict(r)
            w.writerow([repr(d[k]) if isinstance(d[k], float) else d[k] for k in REPORT_FIELDS])


def make_extractor(variant: str, N: int, rho: float, r_in: float, tau: int, d_in: int):
    spec = build_reservoir(N, rho, r_in)
    if variant == "rmm":
        return rmm_extractor(extract_motifs(spec, tau), d_in)
    if variant == "lrc":
        return lrc_extractor(spec, tau, d_in)
    raise ValueError(f"unknown variant {variant!r}")


def train_model(data, rho: float, r_in: float, N: int = DEFAULT_N, ridge: float = DEFAULT_RIDGE,
                variant: str = "rmm", with_val: bool = False) -> ForecastModel:
    """Fit one configuration on the train (and optionally validation) windows."""
    w = data.windows
    ex = make_extractor(variant, N, rho, r_in, data.tau, w["train"].d_in)
    meta = {"dataset": data.name, "task": data.task, "horizon": data.horizon, "tau": data.tau,
            "N": N, "rho": rho, "r_in": r_in, "variant": variant,
            "columns": list(data.series.columns), "refit_with_val": with_val}
    train = [w["train"], w["val"]] if with_val else w["train"]
    return fit(train, ex, ridge, meta=meta, scaler=data.scaler)


def report_for(data, model: ForecastModel, part: str, seconds: float = 0.0) -> EvalReport:
    m = model.meta
    e_mse, e_mae = evaluate(model, data.windows[part])
    return EvalReport(data.name, data.task, data.horizon, m["variant"], m["rho"], m["r_in"],
                      data.tau, m["N"], model.ridge, part, e_mse, e_mae,
                      len(data.windows[part]), seconds)


def select_best(reports) -> EvalReport:
    """Lowest validation MSE; near-equal MSEs (relative 1e-9) go to smaller rho, then r_in."""
    best = min(r.mse for r in reports)
    tied = [r for r in reports if r.mse <= best * (1 + TIE_RTOL) + 1e-300]
    return min(tied, key=lambda r: (r.rho, r.r_in))


@dataclass
class GridResult:
    best: EvalReport
    reports: list
    test: EvalReport
    model: ForecastModel


def grid_search(data, rhos=RHO_GRID, r_ins=R_IN_GRID, N: int = DEFAULT_N,
                ridge: float = DEFAULT_RIDGE, variant: str = "rmm",
                refit_with_val: bool = False, workers: int = 1) -> GridResult:
    """Validation grid search over (rho, r_in), then test evaluation of the winner."""
    if not rhos or not r_ins:
        raise ValueError("grids must be non-empty")
    points = sorted({(float(a), float(b)) for a in rhos for b in r_ins})

    def run(point):
        rho, r_in = point
        t0 = time.perf_counter()
        try:
            model = train_model(data, rho, r_in, N, ridge, variant)
            rep = report_for(data, model, "val")
        except Exception as exc:
            raise RuntimeError(f"grid point rho={rho}, r_in={r_in} failed: {exc}") from exc
        rep.seconds = time.perf_counter() - t0
        log.info("%s H=%d rho=%g r_in=%g val mse=%.5f", data.name, data.horizon, rho, r_in, rep.mse)
        return rep

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            reports = list(pool.map(run, points))
    else:
        reports = [run(p) for p in points]
    best = select_best(reports)
    t0 = time.perf_counter()
    model = train_model(data, best.rho, best.r_in, N, ridge, variant, with_val=refit_with_val)
    test = report_for(data, model, "test")
    test.seconds = time.perf_counter() - t0
    return GridResult(best, reports, test, model)


# --------------------------------------------------------------------------
# Motif relevance

@dataclass
class RelevanceProfile:
    scores: np.ndarray
    order: np.ndarray
    meta: dict = field(default_factory=dict)

    def top(self, k: int) -> np.ndarray:
        return self.order[:k]


def motif_relevance(model: ForecastModel) -> RelevanceProfile:
    """Score each motif by the Euclidean norm of all readout weights attached to it.

    The norm runs over every output (horizon step and channel) and over every
    input channel's copy of the motif coordinate.
    """
    ex = model.extractor
    if ex.variant != "rmm":
        raise ValueError("motif relevance needs a motif-feature (rmm) model")
    W = model.weights.reshape(ex.d_in, ex.per_channel, -1)
    scores = np.sqrt(np.sum(W * W, axis=(0, 2)))
    order = np.argsort(-scores, kind="stable")
    return RelevanceProfile(scores, order, dict(model.meta))


def top_motif_zero_crossings(model: ForecastModel, k: int = 6) -> list[int]:
    prof = motif_relevance(model)
    M = model.extractor.matrix
    return [zero_crossings(M[:, i]) for i in prof.top(k)]


# --------------------------------------------------------------------------
# Benchmark suites and published comparison values (MSE, MAE)

UNIVARIATE_SUITE = {
    "ECL": (48, 168, 336, 720, 960),
    "ETTh1": (24, 48, 168, 336, 720),
    "ETTh2": (24, 48, 168, 336, 720),
    "ETTm1": (24, 48, 96, 288, 672),
    "Weather": (24, 48, 168, 336),
}
MULTIVARIATE_SUITE = {
    "ETTm2": (96, 192, 336, 720),
    "Exchange": (96, 192, 336, 720),
    "Weather": (96, 192, 336, 720),
    "ILI": (24, 36, 48, 60),
}

# Informer, LSTMa and ARIMA: as published with Informer (Zhou et al., AAAI 2021).
# f-/w-FEDformer: as published with FEDformer (Zhou et al., ICML 2022).
# "Lin-RMM ref" / "L-RC ref" / "NL-RC ref": previously reported values for the
# same models, kept for comparison with this implementation's numbers.
UNIVARIATE_BASELINES = {
    ("ECL", 48): {"Lin-RMM ref": (0.155, 0.301), "L-RC ref": (0.228, 0.369), "NL-RC ref": (0.341, 0.451),
                  "Informer": (0.239, 0.359), "LSTMa": (0.493, 0.539), "ARIMA": (0.879, 0.764)},
    ("ECL", 168): {"Lin-RMM ref": (0.175, 0.322), "L-RC ref": (0.236, 0.384), "NL-RC ref": (0.327, 0.456),
                   "Informer": (0.447, 0.503), "LSTMa": (0.723, 0.655), "ARIMA": (1.032, 0.833)},
    ("ECL", 336): {"Lin-RMM ref": (0.166, 0.314), "L-RC ref": (0.242, 0.388), "NL-RC ref": (0.341, 0.469),
                   "Informer": (0.489, 0.528), "LSTMa": (1.212, 0.898), "ARIMA": (1.136, 0.876)},
    ("ECL", 720): {"Lin-RMM ref": (0.164, 0.314), "L-RC ref": (0.249, 0.392), "NL-RC ref": (0.330, 0.462),
                   "Informer": (0.540, 0.571), "LSTMa": (1.511, 0.966), "ARIMA": (1.251, 0.933)},
    ("ECL", 960): {"Lin-RMM ref": (0.162, 0.312), "L-RC ref": (0.249, 0.393), "NL-RC ref": (0.321, 0.455),
                   "Informer": (0.582, 0.608), "LSTMa": (1.545, 1.006), "ARIMA": (1.370, 0.982)},
    ("ETTh1", 24): {"Lin-RMM ref": (0.029, 0.127), "L-RC ref": (0.032, 0.135), "NL-RC ref": (0.031, 0.128),
                    "Informer": (0.098, 0.247), "LSTMa": (0.114, 0.272), "ARIMA": (0.108, 0.284)},
    ("ETTh1", 48): {"Lin-RMM ref": (0.044, 0.156), "L-RC ref": (0.048, 0.165), "NL-RC ref": (0.051, 0.168),
                    "Informer": (0.158, 0.319), "LSTMa": (0.193, 0.358), "ARIMA": (0.175, 0.424)},
    ("ETTh1", 168): {"Lin-RMM ref": (0.079, 0.211), "L-RC ref": (0.091, 0.226), "NL-RC ref": (0.109, 0.249),
                     "Informer": (0.183, 0.346), "LSTMa": (0.236, 0.392), "ARIMA": (0.396, 0.504)},
    ("ETTh1", 336): {"Lin-RMM ref": (0.108, 0.254), "L-RC ref": (0.125, 0.271), "NL-RC ref": (0.142, 0.295),
                     "Informer": (0.222, 0.387), "LSTMa": (0.590, 0.698), "ARIMA": (0.468, 0.593)},
    ("ETTh1", 720): {"Lin-RMM ref": (0.189, 0.353), "L-RC ref": (0.198, 0.360), "NL-RC ref": (0.219, 0.386),
                     "Informer": (0.269, 0.435), "LSTMa": (0.683, 0.768), "ARIMA": (0.659, 0.766)},
    ("ETTh2", 24): {"Lin-RMM ref": (0.058, 0.180), "L-RC ref": (0.072, 0.199), "NL-RC ref": (0.058, 0.173),
                    "Informer": (0.093, 0.240), "LSTMa": (0.155, 0.307), "ARIMA": (3.554, 0.445)},
    ("ETTh2", 48): {"Lin-RMM ref": (0.083, 0.220), "L-RC ref": (0.099, 0.238), "NL-RC ref": (0.082, 0.212),
                    "Informer": (0.155, 0.314), "LSTMa": (0.190, 0.348), "ARIMA": (3.190, 0.474)},
    ("ETTh2", 168): {"Lin-RMM ref": (0.146, 0.298), "L-RC ref": (0.164, 0.313), "NL-RC ref": (0.139, 0.290),
                     "Informer": (0.232, 0.389), "LSTMa": (0.385, 0.514), "ARIMA": (2.800, 0.595)},
    ("ETTh2", 336): {"Lin-RMM ref": (0.186, 0.347), "L-RC ref": (0.224, 0.369), "NL-RC ref": (0.185, 0.337),
                     "Informer": (0.263, 0.417), "LSTMa": (0.558, 0.606), "ARIMA": (2.753, 0.738)},
    ("ETTh2", 720): {"Lin-RMM ref": (0.275, 0.427), "L-RC ref": (0.315, 0.450), "NL-RC ref": (0.260, 0.406),
                     "Informer": (0.277, 0.431), "LSTMa": (0.640, 0.681), "ARIMA": (2.878, 1.044)},
    ("ETTm1", 24): {"Lin-RMM ref": (0.010, 0.073), "L-RC ref": (0.012, 0.078), "NL-RC ref": (0.011, 0.074),
                    "Informer": (0.030, 0.137), "LSTMa": (0.121, 0.233), "ARIMA": (0.090, 0.206)},
    ("ETTm1", 48): {"Lin-RMM ref": (0.018, 0.098), "L-RC ref": (0.021, 0.106), "NL-RC ref": (0.021, 0.106),
                    "Informer": (0.069, 0.203), "LSTMa": (0.305, 0.411), "ARIMA": (0.179, 0.306)},
    ("ETTm1", 96): {"Lin-RMM ref": (0.028, 0.124), "L-RC ref": (0.031, 0.131), "NL-RC ref": (0.037, 0.140),
                    "Informer": (0.194, 0.372), "LSTMa": (0.287, 0.420), "ARIMA": (0.272, 0.399)},
    ("ETTm1", 288): {"Lin-RMM ref": (0.053, 0.171), "L-RC ref": (0.054, 0.173), "NL-RC ref": (0.083, 0.216),
                     "Informer": (0.401, 0.554), "LSTMa": (0.524, 0.584), "ARIMA": (0.462, 0.558)},
    ("ETTm1", 672): {"Lin-RMM ref": (0.079, 0.209), "L-RC ref": (0.078, 0.208), "NL-RC ref": (0.138, 0.282),
                     "Informer": (0.512, 0.644), "LSTMa": (1.064, 0.873), "ARIMA": (0.639, 0.697)},
    ("Weather", 24): {"Lin-RMM ref": (0.091, 0.208), "L-RC ref": (0.108, 0.232), "NL-RC ref": (0.093, 0.209),
                      "Informer": (0.117, 0.251), "LSTMa": (0.131, 0.254), "ARIMA": (0.219, 0.355)},
    ("Weather", 48): {"Lin-RMM ref": (0.135, 0.260), "L-RC ref": (0.157, 0.287), "NL-RC ref": (0.139, 0.264),
                      "Informer": (0.178, 0.318), "LSTMa": (0.190, 0.334), "ARIMA": (0.273, 0.409)},
    ("Weather", 168): {"Lin-RMM ref": (0.222, 0.345), "L-RC ref": (0.259, 0.380), "NL-RC ref": (0.223, 0.353),
                       "Informer": (0.266, 0.398), "LSTMa": (0.341, 0.448), "ARIMA": (0.503, 0.599)},
    ("Weather", 336): {"Lin-RMM ref": (0.277, 0.391), "L-RC ref": (0.322, 0.429), "NL-RC ref": (0.271, 0.396),
                       "Informer": (0.297, 0.416), "LSTMa": (0.456, 0.554), "ARIMA": (0.728, 0.730)},
}

MULTIVARIATE_BASELINES = {
    ("ETTm2", 96): {"Lin-RMM ref": (0.107, 0.226), "f-FEDformer": (0.203, 0.287), "w-FEDformer": (0.204, 0.288)},
    ("ETTm2", 192): {"Lin-RMM ref": (0.140, 0.263), "f-FEDformer": (0.269, 0.328), "w-FEDformer": (0.316, 0.363)},
    ("ETTm2", 336): {"Lin-RMM ref": (0.177, 0.302), "f-FEDformer": (0.325, 0.366), "w-FEDformer": (0.359, 0.387)},
    ("ETTm2", 720): {"Lin-RMM ref": (0.223, 0.349), "f-FEDformer": (0.421, 0.415), "w-FEDformer": (0.433, 0.432)},
    ("Exchange", 96): {"Lin-RMM ref": (0.874, 0.680), "f-FEDformer": (0.148, 0.278), "w-FEDformer": (0.139, 0.276)},
    ("Exchange", 192): {"Lin-RMM ref": (1.857, 1.025), "f-FEDformer": (0.271, 0.380), "w-FEDformer": (0.256, 0.369)},
    ("Exchange", 336): {"Lin-RMM ref": (2.819, 1.306), "f-FEDformer": (0.460, 0.500), "w-FEDformer": (0.426, 0.464)},
    ("Exchange", 720): {"Lin-RMM ref": (1.753, 1.013), "f-FEDformer": (1.195, 0.841), "w-FEDformer": (1.090, 0.800)},
    ("ILI", 24): {"Lin-RMM ref": (1.549, 1.005), "f-FEDformer": (3.338, 1.260), "w-FEDformer": (2.203, 0.963)},
    ("ILI", 36): {"Lin-RMM ref": (1.544, 1.003), "f-FEDformer": (2.678, 1.080), "w-FEDformer": (2.272, 0.976)},
    ("ILI", 48): {"Lin-RMM ref": (1.279, 0.885), "f-FEDformer": (2.622, 1.078), "w-FEDformer": (2.209, 0.981)},
    ("ILI", 60): {"Lin-RMM ref": (1.119, 0.804), "f-FEDformer": (2.857, 1.157), "w-FEDformer": (2.545, 1.061)},
    ("Weather", 96): {"Lin-RMM ref": (2.677, 0.876), "f-FEDformer": (0.217, 0.296), "w-FEDformer": (0.227, 0.304)},
    ("Weather", 192): {"Lin-RMM ref": (3.295, 0.956), "f-FEDformer": (0.276, 0.336), "w-FEDformer": (0.295, 0.363)},
    ("Weather", 336): {"Lin-RMM ref": (2.926, 0.939), "f-FEDformer": (0.339, 0.380), "w-FEDformer": (0.381, 0.416)},
    ("Weather", 720): {"Lin-RMM ref": (2.373, 0.912), "f-FEDformer": (0.403, 0.428), "w-FEDformer": (0.424, 0.434)},
}


def baselines_for(task: str) -> dict:
    return UNIVARIATE_BASELINES if task == "univariate" else MULTIVARIATE_BASELINES


def comparison_rows(task: str, test_reports) -> tuple[list, list]:
    """Rows of (dataset, horizon, ours..., baselines...) and the column names."""
    base = baselines_for(task)
    names = []
    for r in test_reports:
        for n in base.get((r.dataset, r.horizon), {}):
            if n not in names:
                names.append(n)
    header = ["dataset", "horizon", "mse", "mae"]
    for n in names:
        header += [f"{n} mse", f"{n} mae"]
    rows = []
    for r in test_reports:
        b = base.get((r.dataset, r.horizon), {})
        row = [r.dataset, r.horizon, r.mse, r.mae]
        for n in names:
            row += list(b.get(n, (float("nan"), float("nan"))))
        rows.append(row)
    return header, rows


def write_comparison_csv(path, task: str, test_reports) -> None:
    header, rows = comparison_rows(task, test_reports)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def format_table(task: str, test_reports) -> str:
    """Plain-text comparison table, one row per (dataset, horizon)."""
    header, rows = comparison_rows(task, test_reports)
    cells = [header] + [[f"{v:.3f}" if isinstance(v, float) else str(v) for v in row] for row in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(header))]
    lines = []
    prev = None
    for k, c in enumerate(cells):
        if k == 1 or (k > 1 and c[0] != prev):
            lines.append("-+-".join("-" * w for w in widths))
        shown = list(c)
        if k > 1 and c[0] == prev:
            shown[0] = ""
        lines.append(" | ".join(s.rjust(w) if i > 1 else s.ljust(w) for i, (s, w) in enumerate(zip(shown, widths))))
        prev = c[0] if k else None
    return "\n".join(lines) + "\n"
