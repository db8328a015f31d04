"""Line-delimited JSON datasets of problems."""

from __future__ import annotations

import json
from collections.abc import Iterable
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from retreval.errors import DatasetError
from retreval.model import DOMAINS, Problem

DATASET_SCHEMA_VERSION = 1


@dataclass
class DatasetRecord:
    id: str
    statement: str
    domain: str = "math"
    reference_answer: str | None = None
    source: str = ""
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_problem(self) -> Problem:
        return Problem(self.id, self.statement, self.domain, self.reference_answer, dict(self.metadata))  # type: ignore[arg-type]

    def to_json(self) -> str:
        return json.dumps({"schema_version": DATASET_SCHEMA_VERSION, **asdict(self)}, ensure_ascii=False)


def _record(data: Any, where: str) -> DatasetRecord:
    if not isinstance(data, dict):
        raise DatasetError(f"{where}: expected a JSON object")
    version = data.get("schema_version", DATASET_SCHEMA_VERSION)
    if version != DATASET_SCHEMA_VERSION:
        raise DatasetError(f"{where}: unsupported schema_version {version!r}")
    for key in ("id", "statement"):
        if not isinstance(data.get(key), str) or not data[key].strip():
            raise DatasetError(f"{where}: missing or empty {key!r}")
    domain = data.get("domain", "math")
    if domain not in DOMAINS:
        raise DatasetError(f"{where}: unknown domain {domain!r}")
    reference = data.get("reference_answer")
    if reference is not None and not isinstance(reference, str):
        reference = str(reference)
    return DatasetRecord(
        id=data["id"],
        statement=data["statement"],
        domain=domain,
        reference_answer=reference,
        source=str(data.get("source", "")),
        metadata=dict(data.get("metadata") or {}),
    )


def load_dataset(path: str | Path) -> list[DatasetRecord]:
    """Parse and validate a JSONL dataset; errors name the offending line."""
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"dataset not found: {path}")
    records: list[DatasetRecord] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{where}: invalid JSON ({exc.msg})") from None
            record = _record(data, where)
            if record.id in seen:
                raise DatasetError(f"{where}: duplicate id {record.id!r}")
            seen.add(record.id)
            records.append(record)
    if not records:
        raise DatasetError(f"{path}: dataset is empty")
    return records


def write_dataset(records: Iterable[DatasetRecord], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(r.to_json() + "\n" for r in records), encoding="utf-8")
    return path
