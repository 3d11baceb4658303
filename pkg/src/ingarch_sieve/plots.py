"""Figure rendering for the CLI report paths.

All functions draw to files (Agg backend, no display) and sit beside the
CSV outputs; the CSVs stay the canonical data artifacts.  PNG metadata is
stripped so repeated runs produce identical bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_link_levels",
    "save_link_surface",
    "save_path_overview",
    "save_estimate_comparison",
    "save_traces",
    "save_rate_plot",
]

_SAVE_KW = {"dpi": 140, "bbox_inches": "tight", "metadata": {"Software": None}}


def _level_colors(n):
    return plt.cm.viridis(np.linspace(0.0, 0.9, n))


def save_link_levels(link, count_cap: int, out, title: str = "link function") -> None:
    """Line plot of the link over the intensity range, one line per count."""
    lams = np.linspace(0.0, link.max_intensity, 241)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for y, color in zip(range(count_cap + 1), _level_colors(count_cap + 1)):
        ax.plot(lams, link.values(lams, np.full(lams.size, y)),
                color=color, label=f"y = {y}")
    ax.set_xlabel("intensity")
    ax.set_ylabel("next intensity")
    ax.set_title(title)
    ax.legend(fontsize=8, ncol=2)
    fig.savefig(out, **_SAVE_KW)
    plt.close(fig)


def save_link_surface(link, count_cap: int, out, title: str = "link function") -> None:
    """3-d surface of the link over intensity and count level."""
    lams = np.linspace(0.0, link.max_intensity, 81)
    ys = np.arange(count_cap + 1)
    grid = np.array([link.values(lams, np.full(lams.size, y)) for y in ys])
    ll, yy = np.meshgrid(lams, ys)
    fig = plt.figure(figsize=(6.0, 4.5))
    ax = fig.add_subplot(projection="3d")
    ax.plot_surface(ll, yy, grid, cmap="viridis", edgecolor="none", alpha=0.95)
    ax.set_xlabel("intensity")
    ax.set_ylabel("count")
    ax.set_zlabel("next intensity")
    ax.set_title(title)
    fig.savefig(out, **_SAVE_KW)
    plt.close(fig)


def save_path_overview(path, out) -> None:
    """Counts over time plus the realized (intensity, count) pairs."""
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9.0, 3.4))
    ax0.plot(path.counts, lw=0.6, color="tab:blue")
    ax0.set_xlabel("t")
    ax0.set_ylabel("count")
    ax0.set_title("simulated counts")
    ax1.scatter(path.intensities, path.counts, s=6, alpha=0.35, color="tab:blue")
    ax1.set_xlabel("intensity")
    ax1.set_ylabel("count")
    ax1.set_title("realized pairs")
    fig.tight_layout()
    fig.savefig(out, **_SAVE_KW)
    plt.close(fig)


def save_estimate_comparison(truth, estimate, count_cap: int, out,
                             loss: float | None = None) -> None:
    """Per-count-level overlay of the true link and an estimate."""
    lams = np.linspace(0.0, truth.max_intensity, 241)
    levels = count_cap + 1
    ncol = min(3, levels)
    nrow = (levels + ncol - 1) // ncol
    fig, axes = plt.subplots(nrow, ncol, figsize=(3.2 * ncol, 2.4 * nrow),
                             sharex=True, sharey=True, squeeze=False)
    for y in range(levels):
        ax = axes[y // ncol][y % ncol]
        ax.plot(lams, truth.values(lams, np.full(lams.size, y)),
                color="black", lw=1.2, label="truth")
        ax.plot(lams, estimate.values(lams, np.full(lams.size, y)),
                color="tab:red", lw=1.2, ls="--", label="estimate")
        ax.set_title(f"y = {y}", fontsize=9)
    for k in range(levels, nrow * ncol):
        axes[k // ncol][k % ncol].axis("off")
    axes[0][0].legend(fontsize=8)
    if loss is not None:
        fig.suptitle(f"estimate vs truth (loss = {loss:.4f})")
    fig.tight_layout()
    fig.savefig(out, **_SAVE_KW)
    plt.close(fig)


def save_traces(traces: dict, out) -> None:
    """Best penalized fitness per generation, one curve per run."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, trace in traces.items():
        ax.plot(trace[:, 0], trace[:, 1], label=str(label))
    ax.set_xlabel("generation")
    ax.set_ylabel("best fitness")
    ax.set_title("optimizer progress")
    ax.legend(fontsize=8)
    fig.savefig(out, **_SAVE_KW)
    plt.close(fig)


def save_rate_plot(table, out) -> None:
    """Median loss against sample size on log-log axes with the fitted slope."""
    ns = np.array([r.n for r in table.rows], dtype=float)
    med = np.array([r.median_loss for r in table.rows])
    lo = np.array([r.iqr_low for r in table.rows])
    hi = np.array([r.iqr_high for r in table.rows])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.errorbar(ns, med, yerr=[med - lo, hi - med], fmt="o-", capsize=3,
                color="tab:blue", label="median loss (IQR)")
    fit = np.exp(table.fitted_slope * np.log(ns)
                 + (np.log(med).mean() - table.fitted_slope * np.log(ns).mean()))
    ax.plot(ns, fit, "--", color="tab:gray",
            label=f"slope {table.fitted_slope:.2f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("sample size")
    ax.set_ylabel("loss")
    ax.legend(fontsize=8)
    fig.savefig(out, **_SAVE_KW)
    plt.close(fig)
