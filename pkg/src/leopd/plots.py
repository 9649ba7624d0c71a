"""Figures for a batch report: success-rate CDF and PDCP duplicate counts."""

from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .stats import ModeReport  # noqa: E402

LABELS = {"off": "PD off", "blind": "PD blind", "harq_timer": "PD HARQ"}
STYLE = {
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def plot_success_cdf(reports: Sequence[ModeReport], ax=None):
    if ax is None:
        _, ax = plt.subplots(figsize=(5, 3.5))
    for rep in reports:
        pts = rep.cdf()
        if not pts:
            continue
        xs = [x for x, _ in pts]
        ps = [p for _, p in pts]
        ax.step([xs[0]] + xs, [0.0] + ps, where="post", label=LABELS.get(rep.pd_mode, rep.pd_mode))
    ax.set_xlabel("Application packet success rate [%]")
    ax.set_ylabel("CDF")
    ax.set_ylim(0, 1.02)
    ax.legend(loc="upper left")
    return ax


def plot_duplicates(reports: Sequence[ModeReport], ax=None):
    if ax is None:
        _, ax = plt.subplots(figsize=(4, 3.5))
    dup = [r for r in reports if r.pd_mode != "off"]
    names = [LABELS.get(r.pd_mode, r.pd_mode) for r in dup]
    vals = [r.mean_duplicates for r in dup]
    bars = ax.bar(names, vals, color=["tab:orange", "tab:green"][: len(vals)])
    ax.bar_label(bars, fmt="%.1f")
    ax.set_ylabel("PDCP packets duplicated (mean per run)")
    return ax


def render_report(reports: Sequence[ModeReport], out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        plot_success_cdf(reports, ax)
        paths.append(out / "cdf_success.png")
        fig.savefig(paths[-1])
        plt.close(fig)
        if any(r.pd_mode != "off" for r in reports):
            fig, ax = plt.subplots(figsize=(4, 3.5))
            plot_duplicates(reports, ax)
            paths.append(out / "duplicates.png")
            fig.savefig(paths[-1])
            plt.close(fig)
    return paths
