"""Figures for the report directory.

Rendered with the Agg backend straight to PNG files next to the CSVs.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .pipeline import ComparisonReport, MetricReport  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "figure.figsize": (5.0, 3.2),
    "savefig.dpi": 120,
}
COLORS = {"flat": "#c0392b", "segmented": "#2471a3"}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def _bars(ax, reports, attr):
    width = 0.8 / max(len(reports), 1)
    for i, r in enumerate(reports):
        hist = attr(r)
        if not hist:
            continue
        xs = sorted(hist)
        ax.bar([x + (i - (len(reports) - 1) / 2) * width for x in xs], [hist[x] for x in xs],
               width=width, label=r.mode, color=COLORS.get(r.mode))


def _lines(ax, reports, attr, log=False):
    for r in reports:
        values = attr(r)
        if not values:
            continue
        ax.plot(range(len(values)), list(values.values()), label=r.mode, color=COLORS.get(r.mode), lw=1)
    if log:
        ax.set_yscale("symlog", linthresh=1e-3)


def plot_reports(out: Path, reports: Iterable[MetricReport]) -> list[Path]:
    reports = list(reports)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        _bars(ax, reports, lambda r: r.exposure.path_length_histogram)
        ax.set(xlabel="shortest path length (hops)", ylabel="ordered host pairs")
        ax.legend()
        written.append(_save(fig, out / "path_lengths.png"))

        fig, ax = plt.subplots()
        _lines(ax, reports, lambda r: r.exposure.out_degree_per_node)
        ax.set(xlabel="host", ylabel="out-degree")
        ax.legend()
        written.append(_save(fig, out / "out_degrees.png"))

        fig, ax = plt.subplots()
        _lines(ax, reports, lambda r: r.exposure.closeness_per_node)
        ax.set(xlabel="host", ylabel="closeness", ylim=(0, 1.05))
        ax.legend()
        written.append(_save(fig, out / "closeness.png"))

        with_ag = [r for r in reports if r.robustness is not None]
        if with_ag:
            fig, ax = plt.subplots()
            _bars(ax, with_ag, lambda r: r.robustness.attack_path_length_histogram)
            ax.set(xlabel="attack path length (edges)", ylabel="shortest attack paths")
            ax.legend()
            written.append(_save(fig, out / "attack_path_lengths.png"))

            fig, ax = plt.subplots()
            _lines(ax, with_ag, lambda r: r.robustness.betweenness_per_node, log=True)
            ax.set(xlabel="privilege node", ylabel="betweenness")
            ax.legend()
            written.append(_save(fig, out / "betweenness.png"))
    return written


def plot_comparison(out: Path, cmp: ComparisonReport) -> list[Path]:
    written = plot_reports(out, [cmp.flat, cmp.segmented])
    items = [(k, v) for k, v in cmp.improvement_percentages.items() if v is not None]
    if items:
        with plt.rc_context(RC):
            fig, ax = plt.subplots(figsize=(5.5, 0.25 * len(items) + 1))
            ax.barh([k for k, _ in items], [v for _, v in items], color="#566573")
            ax.axvline(0, color="black", lw=0.6)
            ax.set(xlabel="improvement after segmentation (%)")
            ax.invert_yaxis()
            written.append(_save(fig, out / "improvements.png"))
    return written
