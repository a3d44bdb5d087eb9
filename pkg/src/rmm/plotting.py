"""Report figures rendered with matplotlib (Agg backend, PNG output)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "rmm",
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight", metadata={"Software": None})
    plt.close(fig)
    return path


def benchmark_figure(path, header, rows, title=""):
    """Test MSE against horizon, one panel per dataset, ours vs published baselines."""
    datasets = list(dict.fromkeys(r[0] for r in rows))
    names = [h[:-4] for h in header[4::2]]
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(datasets), figsize=(3.0 * len(datasets), 2.6), squeeze=False)
        for ax, ds in zip(axes[0], datasets):
            sub = [r for r in rows if r[0] == ds]
            hs = [r[1] for r in sub]
            ax.plot(hs, [r[2] for r in sub], "o-", color="k", lw=1.5, label="this run")
            for j, n in enumerate(names):
                vals = [r[4 + 2 * j] for r in sub]
                if not np.all(np.isnan(vals)):
                    ax.plot(hs, vals, ".--", lw=0.8, label=n)
            ax.set_title(ds)
            ax.set_xlabel("horizon")
            ax.set_ylabel("MSE")
        axes[0][-1].legend(loc="best", frameon=False)
        if title:
            fig.suptitle(title)
        return _save(fig, path)


def grid_figure(path, reports, title=""):
    """Validation MSE over the (rho, r_in) grid."""
    rhos = sorted({r.rho for r in reports})
    r_ins = sorted({r.r_in for r in reports})
    Z = np.full((len(rhos), len(r_ins)), np.nan)
    for r in reports:
        Z[rhos.index(r.rho), r_ins.index(r.r_in)] = r.mse
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.6, 3.0))
        im = ax.imshow(Z, cmap="viridis", aspect="auto")
        ax.set_xticks(range(len(r_ins)), [f"{v:g}" for v in r_ins])
        ax.set_yticks(range(len(rhos)), [f"{v:g}" for v in rhos])
        ax.set_xlabel("input weight")
        ax.set_ylabel("cycle weight")
        for i in range(len(rhos)):
            for j in range(len(r_ins)):
                ax.text(j, i, f"{Z[i, j]:.4f}", ha="center", va="center", fontsize=6, color="w")
        fig.colorbar(im, ax=ax, label="validation MSE")
        ax.set_title(title)
        return _save(fig, path)


def forecast_figure(path, history, truth, forecast, title=""):
    """One lookback window, the true continuation and the forecast (first channel)."""
    history = np.asarray(history)
    tau, H = len(history), len(truth)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.0, 2.4))
        ax.plot(np.arange(-tau + 1, 1), history, color="0.5", lw=0.8, label="history")
        ax.plot(np.arange(1, H + 1), truth, color="k", lw=1.0, label="target")
        ax.plot(np.arange(1, H + 1), forecast, color="C3", lw=1.0, label="forecast")
        ax.axvline(0.5, color="0.8", lw=0.5)
        ax.set_xlabel("step")
        ax.set_ylabel("normalized value")
        ax.legend(frameon=False, ncol=3)
        ax.set_title(title)
        return _save(fig, path)


def spectrum_figure(path, eigenvalues, title=""):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.0, 2.6))
        ax.semilogy(np.arange(1, len(eigenvalues) + 1), eigenvalues, ".", ms=3)
        ax.set_xlabel("motif index")
        ax.set_ylabel("eigenvalue")
        ax.set_title(title)
        return _save(fig, path)
