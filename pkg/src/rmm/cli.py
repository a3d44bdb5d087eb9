"""Command-line interface: ``rmm {prepare,motifs,train,evaluate,gridsearch,benchmark}``.

Every command writes into ``--out-dir``::

    config.json      effective configuration
    manifest.json    config fingerprint, input and output checksums
    timings.csv      wall-clock seconds (not covered by the manifest)
    cache/           prepared window datasets (binary container)
    reports/         CSV reports and plain-text tables
    models/          fitted readouts (binary container)
    figures/         SVG motif plots and PNG report figures
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig
from .data import CsvSchema, DataError, get_preset, load_prepared, locate, prepare, save_prepared
from .evaluation import (
    MULTIVARIATE_SUITE, UNIVARIATE_SUITE, comparison_rows, format_table, grid_search,
    motif_relevance, report_for, train_model, write_comparison_csv, write_reports_csv,
)
from .forecaster import ForecastModel
from .io import sha256_file
from .motifs import extract_motifs, zero_crossings
from .reservoir import build_reservoir
from .svg import write_line_plot

log = logging.getLogger("rmm")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
VOLATILE = {"manifest.json", "timings.csv"}


class Run:
    """Output directory bookkeeping for one command invocation."""

    def __init__(self, cfg: RunConfig, command: str):
        self.cfg = cfg
        self.command = command
        self.out = Path(cfg.out_dir)
        for sub in ("reports", "models", "figures"):
            (self.out / sub).mkdir(parents=True, exist_ok=True)
        self.cache = Path(cfg.cache_dir) if cfg.cache_dir else self.out / "cache"
        self.cache.mkdir(parents=True, exist_ok=True)
        self.inputs: dict = {}
        self.timings: list = []

    def path(self, sub: str, name: str) -> Path:
        return self.out / sub / name

    def load(self, dataset: str, task: str, horizon: int):
        """Prepared data for one task, from cache when inputs are unchanged."""
        cfg = self.cfg
        preset = get_preset(dataset)
        raw = locate(preset, task, cfg.data_dir, cfg.download)
        digest = sha256_file(raw)
        self.inputs[str(raw)] = digest
        tau = cfg.resolved_tau(dataset)
        key = json.dumps([dataset, task, tau, horizon, cfg.fill_policy, digest]).encode()
        name = f"{dataset}_{task}_tau{tau}_H{horizon}_{hashlib.sha256(key).hexdigest()[:12]}.rmmw"
        cached = self.cache / name
        if cached.exists():
            log.info("cache hit: %s", cached.name)
            return load_prepared(cached), True
        schema = CsvSchema(timestamp=preset.timestamp, missing=cfg.fill_policy)
        data = prepare(preset, task, cfg.data_dir, tau, horizon, schema=schema)
        save_prepared(cached, data)
        return data, False

    def finish(self) -> None:
        cfg = self.cfg
        (self.out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
        if self.timings:
            with open(self.out / "timings.csv", "w", newline="") as f:
                w = csv.writer(f, lineterminator="\n")
                w.writerow(["step", "seconds"])
                w.writerows(self.timings)
        outputs = {}
        for p in sorted(self.out.rglob("*")):
            rel = p.relative_to(self.out).as_posix()
            if p.is_file() and rel not in VOLATILE:
                outputs[rel] = sha256_file(p)
        manifest = {"command": self.command, "version": __version__,
                    "config_sha256": cfg.fingerprint(), "inputs": self.inputs, "outputs": outputs}
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _tag(dataset: str, task: str, horizon: int) -> str:
    return f"{dataset}_{task}_H{horizon}"


def _forecast_plot(run: Run, data, model: ForecastModel, name: str) -> None:
    from . import plotting

    test = data.windows["test"]
    if len(test) == 0:
        return
    i = len(test) // 2
    window = test.window(i)
    truth = test.targets(slice(i, i + 1))[0].reshape(test.horizon, test.d_out)
    pred = model.predict(window)
    plotting.forecast_figure(run.path("figures", name), window[:, -1], truth[:, -1], pred[:, -1],
                             title=f"{data.name} H={test.horizon} (last channel)")


def _motif_svg(path, basis_matrix, indices, labels, title) -> None:
    traces = [(lab, basis_matrix[:, i]) for i, lab in zip(indices, labels)]
    write_line_plot(path, traces, title=title, xlabel="lag (oldest to newest)")


def cmd_prepare(cfg: RunConfig) -> Run:
    run = Run(cfg, "prepare")
    for h in cfg.horizons:
        data, hit = run.load(cfg.dataset, cfg.task, h)
        rep = data.series.report
        print(f"{data.name} {data.task} H={h}: T={data.series.T} D={data.series.D} "
              f"rows_dropped={rep.get('rows_dropped', 0)} "
              f"windows train/val/test={len(data.windows['train'])}/{len(data.windows['val'])}/"
              f"{len(data.windows['test'])} {'(cache hit)' if hit else '(prepared)'}")
    run.finish()
    return run


def cmd_motifs(cfg: RunConfig) -> Run:
    run = Run(cfg, "motifs")
    k = cfg.top_k
    if cfg.model:
        model = ForecastModel.load(cfg.model)
        basis = model.extractor.basis
        if basis is None:
            raise ConfigError("model has no motif basis (L-RC model?)")
        prof = motif_relevance(model)
        order = prof.order
        with open(run.path("reports", "relevance.csv"), "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["rank", "motif", "score", "eigenvalue", "zero_crossings"])
            for r, i in enumerate(order, start=1):
                w.writerow([r, int(i) + 1, repr(float(prof.scores[i])), repr(float(basis.eigenvalues[i])),
                            zero_crossings(basis.motifs[:, i])])
        title = f"{k} most relevant motifs"
        m = model.meta
        if m:
            title += f" ({m.get('dataset')} H={m.get('horizon')})"
    else:
        spec = build_reservoir(cfg.resolved_n(), cfg.rhos[0], cfg.r_ins[0])
        basis = extract_motifs(spec, cfg.resolved_tau())
        order = np.arange(basis.n_motifs)
        title = f"top {k} motifs by eigenvalue (N={spec.N}, rho={spec.rho:g}, tau={basis.tau})"
    basis.to_csv(run.path("reports", "motifs.csv"))
    top = order[:k]
    labels = [f"motif {int(i) + 1} (lambda={basis.eigenvalues[i]:.3g})" for i in top]
    _motif_svg(run.path("figures", f"motifs_top{k}.svg"), basis.motifs, top, labels, title)
    write_line_plot(run.path("figures", "spectrum.svg"), [("log10 eigenvalue", np.log10(basis.eigenvalues))],
                    title="motif eigenvalue spectrum", xlabel="motif index")
    print(f"{basis.n_motifs} motifs of length {basis.tau} written to {run.path('reports', 'motifs.csv')}")
    run.finish()
    return run


def cmd_train(cfg: RunConfig) -> Run:
    run = Run(cfg, "train")
    reports = []
    for h in cfg.horizons:
        data, _ = run.load(cfg.dataset, cfg.task, h)
        t0 = time.perf_counter()
        model = train_model(data, cfg.rhos[0], cfg.r_ins[0], cfg.resolved_n(), cfg.ridge, cfg.variant,
                            with_val=cfg.refit_with_val)
        run.timings.append([f"train {_tag(data.name, data.task, h)}", f"{time.perf_counter() - t0:.3f}"])
        model.save(run.path("models", f"{_tag(data.name, data.task, h)}.rmm"))
        reports += [report_for(data, model, "val"), report_for(data, model, "test")]
        _forecast_plot(run, data, model, f"forecast_{_tag(data.name, data.task, h)}.png")
    write_reports_csv(run.path("reports", "train.csv"), reports)
    for r in reports:
        print(f"{r.dataset} H={r.horizon} {r.split}: mse={r.mse:.4f} mae={r.mae:.4f}")
    run.finish()
    return run


def cmd_evaluate(cfg: RunConfig) -> Run:
    if not cfg.model:
        raise ConfigError("evaluate needs --model")
    run = Run(cfg, "evaluate")
    model = ForecastModel.load(cfg.model)
    m = model.meta
    dataset, task = m.get("dataset", cfg.dataset), m.get("task", cfg.task)
    data, _ = run.load(dataset, task, model.horizon)
    if data.tau != model.extractor.tau:
        raise ConfigError(f"model lookback {model.extractor.tau} != data lookback {data.tau}")
    reports = [report_for(data, model, part) for part in ("val", "test")]
    write_reports_csv(run.path("reports", "evaluate.csv"), reports)
    _forecast_plot(run, data, model, f"forecast_{_tag(dataset, task, model.horizon)}.png")
    for r in reports:
        print(f"{r.dataset} H={r.horizon} {r.split}: mse={r.mse:.4f} mae={r.mae:.4f}")
    run.finish()
    return run


def _grid_one(run: Run, dataset: str, task: str, h: int, prefix: str = ""):
    from . import plotting

    cfg = run.cfg
    data, _ = run.load(dataset, task, h)
    t0 = time.perf_counter()
    res = grid_search(data, cfg.rhos, cfg.r_ins, cfg.resolved_n(dataset), cfg.ridge, cfg.variant,
                      cfg.refit_with_val, cfg.workers)
    tag = prefix + _tag(dataset, task, h)
    run.timings.append([f"grid {tag}", f"{time.perf_counter() - t0:.3f}"])
    run.timings += [[f"point {tag} rho={r.rho} r_in={r.r_in}", f"{r.seconds:.3f}"] for r in res.reports]
    res.model.save(run.path("models", f"{tag}.rmm"))
    plotting.grid_figure(run.path("figures", f"grid_{tag}.png"), res.reports, title=f"{dataset} H={h}")
    _forecast_plot(run, data, res.model, f"forecast_{tag}.png")
    if res.model.extractor.variant == "rmm":
        prof = motif_relevance(res.model)
        top = prof.top(cfg.top_k)
        b = res.model.extractor.basis
        labels = [f"motif {int(i) + 1} (|w|={prof.scores[i]:.3g}, zc={zero_crossings(b.motifs[:, i])})"
                  for i in top]
        _motif_svg(run.path("figures", f"motifs_{tag}.svg"), b.motifs, top, labels,
                   f"{len(top)} most relevant motifs, {dataset} H={h}")
    log.info("%s: best rho=%g r_in=%g test mse=%.4f mae=%.4f", tag, res.best.rho, res.best.r_in,
             res.test.mse, res.test.mae)
    return res


def cmd_gridsearch(cfg: RunConfig) -> Run:
    run = Run(cfg, "gridsearch")
    vals, tests = [], []
    for h in cfg.horizons:
        res = _grid_one(run, cfg.dataset, cfg.task, h)
        vals += res.reports
        tests.append(res.test)
        print(f"{cfg.dataset} H={h}: rho={res.best.rho:g} r_in={res.best.r_in:g} "
              f"test mse={res.test.mse:.4f} mae={res.test.mae:.4f}")
    write_reports_csv(run.path("reports", "gridsearch_validation.csv"), vals)
    write_reports_csv(run.path("reports", "gridsearch_test.csv"), tests)
    run.finish()
    return run


def benchmark_plan(datasets=None, tasks=None, horizons=None) -> list:
    plan = []
    for task, suite in (("univariate", UNIVARIATE_SUITE), ("multivariate", MULTIVARIATE_SUITE)):
        if tasks and task not in tasks:
            continue
        for ds, hs in suite.items():
            if datasets and ds not in datasets:
                continue
            for h in hs:
                if horizons and h not in horizons:
                    continue
                plan.append((task, ds, h))
    return plan


def cmd_benchmark(cfg: RunConfig, datasets=None, tasks=None, horizons=None) -> Run:
    from . import plotting

    run = Run(cfg, "benchmark")
    plan = benchmark_plan(datasets, tasks, horizons)
    if not plan:
        raise ConfigError("benchmark selection is empty")
    results = {"univariate": [], "multivariate": []}
    vals = {"univariate": [], "multivariate": []}
    skipped = []
    for task, ds, h in plan:
        try:
            res = _grid_one(run, ds, task, h)
        except DataError as exc:
            if not cfg.skip_missing:
                raise DataError(f"benchmark {task} {ds} H={h}: {exc}") from exc
            log.warning("skipping %s %s H=%d: %s", task, ds, h, exc)
            skipped.append((task, ds, h))
            continue
        results[task].append(res.test)
        vals[task] += res.reports
    for task, tests in results.items():
        if not tests:
            continue
        write_comparison_csv(run.path("reports", f"benchmark_{task}.csv"), task, tests)
        write_reports_csv(run.path("reports", f"benchmark_{task}_validation.csv"), vals[task])
        write_reports_csv(run.path("reports", f"benchmark_{task}_test.csv"), tests)
        table = format_table(task, tests)
        (run.path("reports", f"benchmark_{task}.txt")).write_text(table)
        header, rows = comparison_rows(task, tests)
        plotting.benchmark_figure(run.path("figures", f"benchmark_{task}.png"), header, rows,
                                  title=f"{task} test MSE")
        print(f"\n{task} prediction (test split)\n{table}")
    if skipped:
        print(f"skipped {len(skipped)} runs with missing data: "
              + ", ".join(f"{t}/{d}/{h}" for t, d, h in skipped))
    run.finish()
    if not any(results.values()):
        raise DataError("no benchmark data available")
    return run


COMMANDS = {"prepare": cmd_prepare, "motifs": cmd_motifs, "train": cmd_train,
            "evaluate": cmd_evaluate, "gridsearch": cmd_gridsearch, "benchmark": cmd_benchmark}

# flag -> config key
FLAG_KEYS = {"dataset": "dataset", "task": "task", "horizon": "horizons", "tau": "tau",
             "reservoir_size": "reservoir_size", "ridge": "ridge", "refit_with_val": "refit_with_val",
             "top_k": "top_k", "data_dir": "data_dir", "out_dir": "out_dir", "cache_dir": "cache_dir",
             "rho": "rhos", "r_in": "r_ins", "variant": "variant", "fill_policy": "fill_policy",
             "download": "download", "workers": "workers", "model": "model",
             "skip_missing": "skip_missing"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON run configuration; flags override its keys")
    common.add_argument("--data-dir", help="raw CSV directory (default $RMM_DATA_DIR or ./data)")
    common.add_argument("--out-dir")
    common.add_argument("--cache-dir")
    common.add_argument("--dataset")
    common.add_argument("--task", choices=["univariate", "multivariate"])
    common.add_argument("--horizon", nargs="*", type=int, help="one or more prediction horizons")
    common.add_argument("--tau", type=int, help="lookback length")
    common.add_argument("--reservoir-size", type=int)
    common.add_argument("--ridge", type=float)
    common.add_argument("--rho", nargs="+", type=float, help="cycle weight grid")
    common.add_argument("--r-in", nargs="+", type=float, help="input weight grid")
    common.add_argument("--variant", choices=["rmm", "lrc"])
    common.add_argument("--refit-with-val", action="store_true")
    common.add_argument("--top-k", type=int)
    common.add_argument("--fill-policy", choices=["reject", "ffill"])
    common.add_argument("--download", action="store_true")
    common.add_argument("--workers", type=int)
    common.add_argument("--model", help="fitted model file (evaluate, motifs)")
    common.add_argument("--skip-missing", action="store_true", help="benchmark: skip absent datasets")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="rmm", description="Reservoir motif forecasting toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def config_from_args(ns: argparse.Namespace) -> tuple[RunConfig, set]:
    args = vars(ns)
    if "config" in args:
        cfg = RunConfig.from_file(args["config"])
        explicit = set(json.loads(Path(args["config"]).read_text()))
    else:
        cfg, explicit = RunConfig(), set()
    for flag, key in FLAG_KEYS.items():
        if flag in args:
            setattr(cfg, key, args[flag])
            explicit.add(key)
    return cfg.validate(), explicit


def _classify(exc: BaseException) -> int:
    while exc is not None:
        if isinstance(exc, ConfigError):
            return EXIT_CONFIG
        if isinstance(exc, DataError):
            return EXIT_DATA
        if isinstance(exc, (np.linalg.LinAlgError, FloatingPointError)):
            return EXIT_NUMERIC
        exc = exc.__cause__
    return 1


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(ns, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg, explicit = config_from_args(ns)
        if ns.command == "benchmark":
            COMMANDS["benchmark"](
                cfg,
                datasets=[cfg.dataset] if "dataset" in explicit else None,
                tasks=[cfg.task] if "task" in explicit else None,
                horizons=cfg.horizons if "horizons" in explicit else None,
            )
        else:
            COMMANDS[ns.command](cfg)
    except Exception as exc:  # map to documented exit codes
        code = _classify(exc)
        if code == 1:
            raise
        print(f"rmm {ns.command}: error: {exc}", file=sys.stderr)
        return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
