"""Figures for the report paths: ROC curves, threshold grids, rank curves.

All figures are written as SVG with a fixed hash salt and no timestamp,
so identical data gives byte-identical files.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_STYLE = {
    "svg.hashsalt": "cascore",
    "svg.fonttype": "none",
    "font.size": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", bbox_inches="tight", metadata={"Date": None})
    plt.close(fig)
    return path


def roc_figure(curves: dict, path, title: str | None = None) -> Path:
    """``curves`` maps a legend label to a RocCurve-like object (fpr, tpr, auc)."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 4.5))
        ax.plot([0, 1], [0, 1], color="0.7", lw=0.8, ls="--")
        for name, c in curves.items():
            ax.plot(c.fpr, c.tpr, lw=1.5, label=f"{name} (AUC={c.auc:.3f})")
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1)
        ax.set_xlabel("false positive rate")
        ax.set_ylabel("true positive rate")
        if title:
            ax.set_title(title)
        ax.legend(loc="lower right", frameon=False)
        return _save(fig, path)


def bar_figure(labels, values, path, xlabel: str, ylabel: str, reference: float | None = None) -> Path:
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        xs = range(len(labels))
        ax.bar(xs, values, color="#4c72b0")
        ax.set_xticks(list(xs), [str(x) for x in labels])
        if reference is not None:
            ax.axhline(reference, color="k", ls="--", lw=1)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        return _save(fig, path)


def line_figure(xs, series: dict, path, xlabel: str, ylabel: str, ylim=None) -> Path:
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for name, ys in series.items():
            ax.plot(xs, ys, marker="o", ms=3, label=name)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if ylim is not None:
            ax.set_ylim(*ylim)
        if len(series) > 1:
            ax.legend(frameon=False)
        return _save(fig, path)


def _read_csv(text: str) -> tuple[list[str], list[dict]]:
    reader = csv.DictReader(io.StringIO(text))
    rows = list(reader)
    return list(reader.fieldnames or []), rows


def plot_csv(text: str, path) -> Path:
    """Render a CSV written by the CLI, picking the chart from its header."""
    header, rows = _read_csv(text)
    cols = set(header)
    if {"fpr", "tpr"} <= cols:
        from .metrics import RocCurve, roc_area
        import numpy as np

        fpr = np.array([float(r["fpr"]) for r in rows])
        tpr = np.array([float(r["tpr"]) for r in rows])
        return roc_figure({"ROC": RocCurve(fpr, tpr, roc_area(fpr, tpr))}, path)
    if {"tau", "outliers"} <= cols:
        return bar_figure([r["tau"] for r in rows], [int(r["outliers"]) for r in rows], path,
                          "threshold", "outlier nodes")
    if {"K", "proportion"} <= cols:
        return line_figure([int(r["K"]) for r in rows], {"proportion": [float(r["proportion"]) for r in rows]},
                           path, "K", "proportion correct", ylim=(0, 1.02))
    if {"rank", "outliers_found"} <= cols:
        return line_figure([int(r["rank"]) for r in rows],
                           {"outliers found": [int(r["outliers_found"]) for r in rows]},
                           path, "rank", "outliers found")
    raise ValueError(f"unrecognized CSV header {header!r}")
