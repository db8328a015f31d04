"""Matplotlib renderings of the report tables."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from retreval.harness.report import ReportSummary  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def plot_histograms(summaries: list[ReportSummary], out_dir: Path) -> list[Path]:
    """One grouped bar chart of score frequencies per task type."""
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for task in sorted({s.task_type for s in summaries}):
        group = [s for s in summaries if s.task_type == task]
        bins = sorted(set().union(*(s.histogram for s in group)))
        width = 0.8 / len(group)
        with plt.rc_context(RC):
            fig, ax = plt.subplots(figsize=(6.4, 3.6))
            for i, s in enumerate(group):
                offsets = [b - 0.4 + width * (i + 0.5) for b in bins]
                ax.bar(offsets, [s.histogram.get(b, 0) for b in bins], width=width, label=s.method)
            ax.set_xticks(bins)
            ax.set_xlabel("score")
            ax.set_ylabel("count")
            ax.set_title(f"{task} score distribution")
            ax.legend(frameon=False)
            fig.tight_layout()
            path = out_dir / f"histogram_{task}.png"
            fig.savefig(path, dpi=150)
            plt.close(fig)
        paths.append(path)
    return paths


def plot_averages(rows: list[dict], out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    columns = [c for c in ("math_avg", "creative_avg", "combined_avg") if any(r[c] is not None for r in rows)]
    width = 0.8 / len(columns)
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(6.4, 3.6))
        for i, column in enumerate(columns):
            xs = [j - 0.4 + width * (i + 0.5) for j in range(len(rows))]
            ax.bar(xs, [float(r[column]) if r[column] is not None else 0.0 for r in rows], width=width, label=column)
        ax.set_xticks(range(len(rows)))
        ax.set_xticklabels([r["method"] for r in rows])
        ax.set_ylabel("average score")
        ax.legend(frameon=False)
        fig.tight_layout()
        path = out_dir / "averages.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
    return path
