"""Report figures: threshold error curves and singleton/geminate summary bars.

Rendering is headless (Agg) and stripped of timestamps so that identical
inputs give byte-identical files.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "gemkit",
    "svg.fonttype": "path",
}
FORM_COLORS = {"singleton": "#4c72b0", "geminate": "#dd8452"}


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix == ".svg":
        fig.savefig(path, format="svg", metadata={"Date": None})
    else:
        fig.savefig(path, format="png", dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_error_curve(curve, path, title: str = "", markers: dict | None = None) -> Path:
    """Line plot of (threshold, error_percent) pairs; ``markers`` maps a
    label to a threshold drawn as a vertical line."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        ax.plot([t for t, _ in curve], [e for _, e in curve], color="k", lw=1.2)
        for (label, t), ls in zip(sorted((markers or {}).items()), ("--", ":", "-.")):
            if t is not None and abs(t) != float("inf"):
                ax.axvline(t, ls=ls, lw=1.0, color="#c44e52", label=f"{label} {t:.3f}")
        if markers:
            ax.legend(frameon=False)
        ax.set_xlabel("Cd/V1d threshold")
        ax.set_ylabel("error (%)")
        ax.set_ylim(bottom=0)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return _save(fig, path)


def plot_summary(summary, path, title: str = "") -> Path:
    """Grouped bars of per-form means with one-std error bars.

    ``summary`` is a DataFrame with columns parameter, form, mean, std.
    """
    params = list(dict.fromkeys(summary["parameter"]))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.5, 3.2))
        width = 0.38
        for k, form in enumerate(("singleton", "geminate")):
            sub = summary[summary["form"] == form].set_index("parameter").reindex(params)
            xs = [i + (k - 0.5) * width for i in range(len(params))]
            ax.bar(xs, sub["mean"], width, yerr=sub["std"], capsize=2,
                   color=FORM_COLORS[form], label=form)
        ax.set_xticks(range(len(params)))
        ax.set_xticklabels(params)
        ax.set_ylabel("duration (ms)")
        ax.legend(frameon=False)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return _save(fig, path)
