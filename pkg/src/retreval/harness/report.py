"""Summary statistics and tables over judge verdicts.

Averages are computed exactly (``Fraction``) and rounded half-up to two
decimals only for display, so ``(3.93 + 6.38) / 2`` reports as 5.16.
"""

from __future__ import annotations

import csv
import statistics
from collections import defaultdict
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any

from retreval.harness.judge import JudgeVerdict

REPORT_SCHEMA_VERSION = 1
HIGH_SCORE = 7
LEARNING_SPLIT = 100
SCORE_BINS = {"math": range(0, 10), "creative": range(1, 11)}


def round_half_up(value: Fraction | float | int, places: int = 2) -> Decimal:
    """Exact half-up rounding; floats are taken at their shortest repr."""
    if isinstance(value, float):
        value = Fraction(repr(value))
    value = Fraction(value)
    quantum = Decimal(1).scaleb(-places)
    # 28 significant digits: a non-terminating fraction cannot land on a tie
    exact = Decimal(value.numerator) / Decimal(value.denominator)
    return exact.quantize(quantum, rounding=ROUND_HALF_UP)


@dataclass
class ReportSummary:
    method: str
    task_type: str
    count: int
    unscored: int
    average: Fraction
    median: Fraction
    minimum: Fraction
    maximum: Fraction
    high_count: int
    histogram: dict[int, int]
    exact_match_rate: Fraction | None = None
    learning: dict[str, Any] = field(default_factory=dict)

    @property
    def average_2dp(self) -> Decimal:
        return round_half_up(self.average)


def summarize(method: str, task_type: str, verdicts: list[JudgeVerdict]) -> ReportSummary:
    scored = [v for v in verdicts if v.scored]
    if not scored:
        raise ValueError(f"no scored verdicts for {method}/{task_type}")
    scores = [v.score() for v in scored]
    histogram = {b: 0 for b in SCORE_BINS.get(task_type, range(0, 11))}
    for s in scores:
        key = int(round_half_up(s, 0))
        histogram[key] = histogram.get(key, 0) + 1
    flags = [v.exact_match for v in verdicts if v.exact_match is not None]
    ordered = [v.score() for v in sorted(scored, key=lambda v: v.seq)]
    learning: dict[str, Any] = {}
    if len(ordered) > LEARNING_SPLIT:
        first = Fraction(sum(ordered[:LEARNING_SPLIT]), LEARNING_SPLIT)
        rest = Fraction(sum(ordered[LEARNING_SPLIT:]), len(ordered) - LEARNING_SPLIT)
        learning = {
            "first_avg": first,
            "rest_avg": rest,
            "relative_change": (rest - first) / first if first else None,
        }
    return ReportSummary(
        method=method,
        task_type=task_type,
        count=len(scored),
        unscored=len(verdicts) - len(scored),
        average=Fraction(sum(scores), len(scores)),
        median=Fraction(statistics.median(scores)),
        minimum=min(scores),
        maximum=max(scores),
        high_count=sum(1 for s in scores if s >= HIGH_SCORE),
        histogram=dict(sorted(histogram.items())),
        exact_match_rate=Fraction(sum(flags), len(flags)) if flags else None,
        learning=learning,
    )


def combined_average(domain_averages: list[Decimal | Fraction | float]) -> Decimal:
    """Unweighted mean of per-domain averages (each first rounded to 2 places)."""
    rounded = [Fraction(round_half_up(a)) if not isinstance(a, Decimal) else Fraction(a) for a in domain_averages]
    return round_half_up(sum(rounded, Fraction(0)) / len(rounded))


def build_summaries(verdicts: list[JudgeVerdict]) -> list[ReportSummary]:
    groups: dict[tuple[str, str], list[JudgeVerdict]] = defaultdict(list)
    for v in verdicts:
        groups[(v.task_type, v.method)].append(v)
    return [summarize(method, task, group) for (task, method), group in sorted(groups.items()) if any(g.scored for g in group)]


def combined_table(summaries: list[ReportSummary]) -> list[dict[str, Any]]:
    by_method: dict[str, dict[str, Decimal]] = defaultdict(dict)
    for s in summaries:
        by_method[s.method][s.task_type] = s.average_2dp
    rows = []
    for method, domains in sorted(by_method.items()):
        rows.append(
            {
                "method": method,
                "math_avg": domains.get("math"),
                "creative_avg": domains.get("creative"),
                "combined_avg": combined_average(list(domains.values())),
            }
        )
    return rows


def _fmt(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, (Fraction, float)):
        return str(round_half_up(value))
    return str(value)


def _fmt_score(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else _fmt(value)


def _aligned(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(lines)


def _write_csv(path: Path, header: list[str], rows: list[list[Any]]) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["schema_version", *header])
        for row in rows:
            writer.writerow([REPORT_SCHEMA_VERSION, *row])


def report(verdicts: list[JudgeVerdict], out_dir: str | Path, figures: bool = True) -> list[ReportSummary]:
    """Write summary/histogram/combined tables as text + CSV (and PNG figures)."""
    if not verdicts:
        raise ValueError("report needs at least one verdict")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summaries = build_summaries(verdicts)

    summary_header = ["task", "method", "n", "unscored", "average", "median", "range", "high(>=7)", "exact_match", "first100", "rest", "change"]
    summary_rows = []
    for s in summaries:
        learning = s.learning
        summary_rows.append(
            [
                s.task_type,
                s.method,
                str(s.count),
                str(s.unscored),
                _fmt(s.average),
                _fmt(s.median),
                f"{_fmt_score(s.minimum)}-{_fmt_score(s.maximum)}",
                f"{s.high_count} ({_fmt(Fraction(100 * s.high_count, s.count))}%)",
                _fmt(s.exact_match_rate),
                _fmt(learning.get("first_avg")),
                _fmt(learning.get("rest_avg")),
                _fmt(learning["relative_change"] * 100) + "%" if learning.get("relative_change") is not None else "-",
            ]
        )
    _write_csv(out / "summary.csv", summary_header, summary_rows)

    hist_rows = [[s.task_type, s.method, b, n] for s in summaries for b, n in s.histogram.items()]
    _write_csv(out / "histogram.csv", ["task", "method", "score", "count"], hist_rows)
    hist_tables = []
    for task in sorted({s.task_type for s in summaries}):
        group = [s for s in summaries if s.task_type == task]
        bins = sorted(set().union(*(s.histogram for s in group)))
        rows = [[str(b), *[str(s.histogram.get(b, 0)) for s in group]] for b in bins]
        rows.append(["total", *[str(sum(s.histogram.values())) for s in group]])
        hist_tables.append(f"Score histogram ({task})\n" + _aligned(["score", *[s.method for s in group]], rows))

    combined = combined_table(summaries)
    combined_header = ["method", "math_avg", "creative_avg", "combined_avg"]
    combined_rows = [[_fmt(r[h]) for h in combined_header] for r in combined]
    _write_csv(out / "combined.csv", combined_header, combined_rows)

    text = "\n\n".join(
        [
            f"schema_version: {REPORT_SCHEMA_VERSION}",
            "Per-method summary\n" + _aligned(summary_header, summary_rows),
            *hist_tables,
            "Cross-domain summary\n" + _aligned(combined_header, combined_rows),
        ]
    )
    (out / "summary.txt").write_text(text + "\n", encoding="utf-8")

    if figures:
        from retreval.harness.figures import plot_averages, plot_histograms

        plot_histograms(summaries, out / "figures")
        plot_averages(combined, out / "figures")
    return summaries
