"""Tolerant parsers for model output.

None of these raise on bad input: each has a documented fallback, and the
``warn`` callback (usually ``RunTrace.warn``) is told when it was used.
"""

from __future__ import annotations

import re
from collections.abc import Callable

from retreval.model import CritiqueReport

Warn = Callable[[str], None] | None

SCORE_FALLBACK = 0.5
COMPLEXITY_FALLBACK = 3

_NUM = r"-?\d+(?:\.\d+)?"
_SCORE_MARKER = re.compile(
    rf"(?:score|rating|quality)\s*(?:\(0-1\))?\s*(?:[:=]|is)?\s*\**\s*({_NUM})(?:\s*/\s*(\d+(?:\.\d+)?))?",
    re.IGNORECASE,
)
_FRACTION = re.compile(rf"({_NUM})\s*/\s*(10|1)(?![\d.])")
_BARE = re.compile(rf"^\s*({_NUM})\s*\.?\s*$")

_ITEM = re.compile(
    r"^\s*(?:\*\*)?(?:(?:thought|candidate|option)\s*#?\s*(\d+)\s*[:.)\-]|(\d+)\s*[.)]|[-*•])\s*(?:\*\*)?\s*(.*)$",
    re.IGNORECASE,
)


def _emit(warn: Warn, message: str) -> None:
    if warn is not None:
        warn(message)


def format_score(value: float) -> str:
    """Canonical score line; :func:`parse_score` inverts it on the 0.01 grid."""
    return f"score: {value:.2f}"


def _normalize(value: float, denominator: float | None) -> float:
    if denominator:
        value = value / denominator
    elif 1.0 < value <= 10.0:
        value = value / 10.0
    return min(1.0, max(0.0, value))


def parse_score(text: str, warn: Warn = None) -> float:
    """First number attached to a score marker, mapped into [0, 1].

    Accepts ``score: 0.85``, ``Score = 7/10``, bare ``8/10`` or a bare number.
    Values in (1, 10] are read as a ten-point scale.
    """
    match = _SCORE_MARKER.search(text)
    if match is None:
        match = _FRACTION.search(text) or _BARE.search(text)
    if match is None:
        _emit(warn, f"unparseable score, using {SCORE_FALLBACK}: {text[:80]!r}")
        return SCORE_FALLBACK
    value = float(match.group(1))
    denominator = float(match.group(2)) if match.lastindex and match.lastindex >= 2 and match.group(2) else None
    return _normalize(value, denominator)


def parse_complexity(text: str, warn: Warn = None) -> int:
    match = re.search(r"complexity\s*(?:level)?\s*[:=]?\s*(-?\d+)", text, re.IGNORECASE)
    if match is None:
        match = re.search(r"-?\d+", text)
    if match is None:
        _emit(warn, f"unparseable complexity, using {COMPLEXITY_FALLBACK}: {text[:80]!r}")
        return COMPLEXITY_FALLBACK
    return min(5, max(1, int(float(match.group(1) if match.lastindex else match.group(0)))))


def parse_candidates(text: str, expected: int) -> list[str]:
    """Split a delimited list (``Thought 1:``, ``1.``, ``-``) into items.

    Continuation lines attach to the preceding item. Prose with no list
    markers yields ``[]``. At most ``expected`` items are returned.
    """
    items: list[list[str]] = []
    for line in text.splitlines():
        match = _ITEM.match(line)
        if match:
            items.append([match.group(3).strip()])
        elif items and line.strip():
            items[-1].append(line.strip())
    thoughts = [" ".join(part for part in item if part).strip() for item in items]
    return [t for t in thoughts if t][:expected]


_DIMENSIONS = {
    "logical_coherence": r"logical\s+coherence|coherence",
    "correctness": r"correctness",
    "completeness": r"completeness",
    "clarity": r"clarity",
}


def _section(text: str, header: str) -> str | None:
    match = re.search(
        rf"^\s*(?:\*\*)?{header}(?:\*\*)?\s*:\s*(.*?)(?=^\s*(?:\*\*)?[A-Z][A-Za-z ]{{2,30}}(?:\*\*)?\s*:|\Z)",
        text,
        re.IGNORECASE | re.MULTILINE | re.DOTALL,
    )
    return match.group(1).strip() if match else None


def parse_critique(text: str, warn: Warn = None) -> CritiqueReport:
    """Critique text -> report: score line, ``Rationale:``, ``Suggestions:`` bullets."""
    score = parse_score(text, warn)
    rationale = _section(text, "rationale") or ""
    suggestions: list[str] = []
    block = _section(text, "suggestions")
    if block:
        for line in block.splitlines():
            line = re.sub(r"^\s*(?:[-*•]|\d+[.)])\s*", "", line).strip()
            if line and line.lower() not in ("none", "(none)", "n/a"):
                suggestions.append(line)
    notes = {}
    for key, header in _DIMENSIONS.items():
        note = _section(text, f"(?:{header})")
        if note:
            notes[key] = note
    return CritiqueReport(quality_score=score, rationale=rationale, suggestions=suggestions, dimension_notes=notes)


def parse_list(text: str, limit: int) -> list[str]:
    """Bulleted/numbered lines, or non-empty plain lines when no markers exist."""
    items = parse_candidates(text, limit)
    if items:
        return items
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    return lines[:limit]


def extract_final_answer(text: str) -> str:
    parts = re.split(r"final\s+answer\s*:\s*", text, maxsplit=1, flags=re.IGNORECASE)
    return (parts[1] if len(parts) > 1 else text).strip()


def parse_verdict_yes(text: str) -> bool:
    """Self-evaluation yes/no. The leading word decides; otherwise any
    negative keyword wins over a positive one."""
    lowered = text.strip().lower()
    negative = r"(incorrect|not correct|no|fail(?:ed)?|wrong)\b"
    positive = r"(correct|yes|pass(?:ed)?)\b"
    if re.match(r"\W*" + negative, lowered):
        return False
    if re.match(r"\W*" + positive, lowered):
        return True
    if re.search(r"\b" + negative, lowered):
        return False
    return bool(re.search(r"\b" + positive, lowered))
