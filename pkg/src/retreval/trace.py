"""Replayable per-episode record of prompts, responses, scores and decisions."""

from __future__ import annotations

import json
import logging
import threading
from collections import Counter
from pathlib import Path
from typing import Any

TRACE_SCHEMA_VERSION = 1

log = logging.getLogger(__name__)


class RunTrace:
    """Append-only event log for one episode.

    Events are plain dicts with a ``type`` key: ``call``, ``warning``,
    ``expand``, ``score``, ``prune``, ``iteration``, ``converged`` and so on.
    Nothing time-of-day dependent is stored, so scripted runs serialize to
    identical bytes.
    """

    def __init__(self, method: str = "retreval", problem_id: str | None = None) -> None:
        self.method = method
        self.problem_id = problem_id
        self.events: list[dict[str, Any]] = []
        self.meta: dict[str, Any] = {}
        self.result: dict[str, Any] | None = None
        self._lock = threading.Lock()

    def event(self, type_: str, **data: Any) -> dict[str, Any]:
        with self._lock:
            record = {"seq": len(self.events), "type": type_, **data}
            self.events.append(record)
        return record

    def warn(self, message: str, **data: Any) -> None:
        log.warning("%s [%s/%s]", message, self.method, self.problem_id)
        self.event("warning", message=message, **data)

    @property
    def calls(self) -> list[dict[str, Any]]:
        return [e for e in self.events if e["type"] == "call"]

    @property
    def warnings(self) -> list[str]:
        return [e["message"] for e in self.events if e["type"] == "warning"]

    def of_type(self, type_: str) -> list[dict[str, Any]]:
        return [e for e in self.events if e["type"] == type_]

    def calls_by_role(self) -> dict[str, int]:
        return dict(sorted(Counter(e["role"] for e in self.calls).items()))

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": TRACE_SCHEMA_VERSION,
            "method": self.method,
            "problem_id": self.problem_id,
            "meta": self.meta,
            "events": self.events,
            "result": self.result,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(self.dumps(), encoding="utf-8")
        tmp.replace(path)
        return path

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunTrace:
        version = data.get("schema_version")
        if version != TRACE_SCHEMA_VERSION:
            raise ValueError(f"unsupported trace schema_version {version!r}")
        trace = cls(data["method"], data.get("problem_id"))
        trace.meta = dict(data.get("meta") or {})
        trace.events = list(data["events"])
        trace.result = data.get("result")
        return trace

    @classmethod
    def load(cls, path: str | Path) -> RunTrace:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
