"""LLM-judge scoring of final outputs, plus local exact-match for math."""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Literal

from retreval.errors import ProviderError
from retreval.llm.gateway import Gateway

VERDICT_SCHEMA_VERSION = 1
TaskType = Literal["math", "creative"]


@dataclass
class ResultRecord:
    """What the judge needs from one (problem, method) run."""

    problem_id: str
    method: str
    domain: str
    statement: str
    final_answer: str
    reference_answer: str | None = None
    seq: int = 0


@dataclass
class JudgeVerdict:
    problem_id: str
    method: str
    task_type: str
    seq: int = 0
    overall: int | None = None  # math quality 0-9
    correctness: int | None = None  # creative criteria, 1-10 each
    meaningfulness: int | None = None
    creativeness: int | None = None
    exact_match: bool | None = None
    scored: bool = True
    rationale: str = ""

    def score(self) -> Fraction | None:
        """Exact per-output score: math overall, or the mean of the three creative criteria."""
        if not self.scored:
            return None
        if self.task_type == "creative":
            return Fraction(self.correctness + self.meaningfulness + self.creativeness, 3)
        return Fraction(self.overall)

    def to_json(self) -> str:
        return json.dumps({"schema_version": VERDICT_SCHEMA_VERSION, **asdict(self)}, ensure_ascii=False)


_NUMBER = re.compile(r"^[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:/\d+)?$")


def _normalize_answer(text: str) -> str:
    text = text.strip()
    text = re.sub(r"^final\s+answer\s*:\s*", "", text, flags=re.IGNORECASE)
    boxed = re.search(r"\\boxed\{([^{}]*)\}", text)
    if boxed:
        text = boxed.group(1)
    text = text.replace("$", "").replace("\\", "").strip()
    if "=" in text:
        text = text.rsplit("=", 1)[1]
    text = text.strip().rstrip(".").strip()
    text = re.sub(r"(?<=\d),(?=\d{3}\b)", "", text)
    text = text.rstrip("%").strip()
    return re.sub(r"\s+", " ", text).lower()


def exact_match(output: str, reference: str) -> bool:
    """Normalized comparison; numeric strings compare by value (``42.0 == 42``)."""
    a, b = _normalize_answer(output), _normalize_answer(reference)
    if _NUMBER.match(a) and _NUMBER.match(b):
        return Fraction(a) == Fraction(b)
    return a == b


def parse_math_judgement(text: str) -> int | None:
    match = re.search(r"score\s*[:=]?\s*(\d+)", text, re.IGNORECASE) or re.match(r"\s*(\d+)\b", text)
    if match is None:
        return None
    value = int(match.group(1))
    return value if 0 <= value <= 9 else None


def parse_creative_judgement(text: str) -> tuple[int, int, int] | None:
    values = []
    for key in ("correctness", "meaningfulness", "creativeness"):
        match = re.search(rf"{key}\s*[:=]?\s*(\d+)", text, re.IGNORECASE)
        if match is None:
            return None
        value = int(match.group(1))
        if not 1 <= value <= 10:
            return None
        values.append(value)
    return values[0], values[1], values[2]


def judge_evaluate(results: list[ResultRecord], judge: Gateway | None, task_type: TaskType) -> list[JudgeVerdict]:
    """Score each result. Math exact-match never needs the judge.

    With ``judge=None`` math verdicts carry only the exact-match flag and
    are marked unscored. Unparseable judge replies are marked unscored too.
    """
    if task_type not in ("math", "creative"):
        raise ValueError(f"unknown task type {task_type!r}")
    verdicts = []
    for record in results:
        verdict = JudgeVerdict(record.problem_id, record.method, task_type, seq=record.seq)
        if task_type == "math":
            if record.reference_answer is not None:
                verdict.exact_match = exact_match(record.final_answer, record.reference_answer)
            if judge is None:
                verdict.scored = False
            else:
                text = _ask(judge, "judge_math", record)
                verdict.rationale = (text or "").strip()
                verdict.overall = parse_math_judgement(text) if text is not None else None
                verdict.scored = verdict.overall is not None
        else:
            text = _ask(judge, "judge_creative", record) if judge is not None else None
            parsed = parse_creative_judgement(text) if text is not None else None
            verdict.rationale = (text or "").strip()
            if parsed is None:
                verdict.scored = False
            else:
                verdict.correctness, verdict.meaningfulness, verdict.creativeness = parsed
        if not verdict.scored and judge is not None:
            judge.warn(f"unscored verdict for {record.method}/{record.problem_id}")
        verdicts.append(verdict)
    return verdicts


def _ask(judge: Gateway, template: str, record: ResultRecord) -> str | None:
    try:
        return judge.ask(
            "judge",
            template,
            problem=record.statement,
            reference=record.reference_answer or "(not provided)",
            answer=record.final_answer or "(empty)",
        )
    except ProviderError as exc:
        judge.warn(f"judge call failed for {record.method}/{record.problem_id}: {exc}")
        return None


def write_verdicts(verdicts: list[JudgeVerdict], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(v.to_json() + "\n" for v in verdicts), encoding="utf-8")
    return path


def load_verdicts(path: str | Path) -> list[JudgeVerdict]:
    verdicts = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        data: dict[str, Any] = json.loads(line)
        if data.pop("schema_version", None) != VERDICT_SCHEMA_VERSION:
            raise ValueError(f"{path}:{lineno}: unsupported verdict schema_version")
        verdicts.append(JudgeVerdict(**data))
    return verdicts
