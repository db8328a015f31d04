"""Cross-problem reflexion memory: bounded insight/failure queues and best paths."""

from __future__ import annotations

import json
import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from retreval.errors import ProviderError
from retreval.llm.gateway import Gateway
from retreval.llm.parsing import parse_list
from retreval.model import Problem, ReasoningNode, ReasoningTree

MEMORY_SCHEMA_VERSION = 1
QUEUE_CAPACITY = 10
STRATEGY_REFERENCES = 3
SUMMARY_CHARS = 400

log = logging.getLogger(__name__)


@dataclass
class BestPath:
    problem_id: str
    node_ids: list[str]
    score: float
    summary: str = ""

    def reference(self) -> str:
        return f"[{self.problem_id}, score {self.score:.2f}] {self.summary}"


@dataclass
class MemoryContext:
    insight_list: list[str] = field(default_factory=list)
    failure_constraints: list[str] = field(default_factory=list)
    strategy_references: list[str] = field(default_factory=list)


class ReflexionMemory:
    """FIFO insight and failure queues (oldest evicted first) plus best paths."""

    def __init__(self, capacity: int = QUEUE_CAPACITY) -> None:
        self.capacity = capacity
        self.insights: deque[str] = deque(maxlen=capacity)
        self.failures: deque[str] = deque(maxlen=capacity)
        self.best_paths: list[BestPath] = []
        self.iteration_counter = 0

    def push_insight(self, text: str, gateway: Gateway | None = None) -> ReflexionMemory:
        return self._push(self.insights, text, "insight", gateway)

    def push_failure(self, text: str, gateway: Gateway | None = None) -> ReflexionMemory:
        return self._push(self.failures, text, "failure", gateway)

    def _push(self, queue: deque[str], text: str, kind: str, gateway: Gateway | None) -> ReflexionMemory:
        if not text or not text.strip():
            message = f"ignored empty {kind}"
            if gateway is not None:
                gateway.warn(message)
            else:
                log.warning(message)
            return self
        queue.append(text.strip())
        return self

    def retrieval_context(self) -> MemoryContext:
        return MemoryContext(
            insight_list=list(self.insights),
            failure_constraints=list(self.failures),
            strategy_references=[p.reference() for p in self.best_paths[-STRATEGY_REFERENCES:]],
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": MEMORY_SCHEMA_VERSION,
            "capacity": self.capacity,
            "insights": list(self.insights),
            "failures": list(self.failures),
            "best_paths": [vars(p).copy() for p in self.best_paths],
            "iteration_counter": self.iteration_counter,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ReflexionMemory:
        if data.get("schema_version") != MEMORY_SCHEMA_VERSION:
            raise ValueError(f"unsupported memory schema_version {data.get('schema_version')!r}")
        memory = cls(capacity=int(data.get("capacity", QUEUE_CAPACITY)))
        memory.insights.extend(data.get("insights", []))
        memory.failures.extend(data.get("failures", []))
        memory.best_paths = [BestPath(**p) for p in data.get("best_paths", [])]
        memory.iteration_counter = int(data.get("iteration_counter", 0))
        return memory

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        tmp.replace(path)
        return path

    @classmethod
    def load(cls, path: str | Path) -> ReflexionMemory:
        """Load from ``path``; a missing file gives an empty memory."""
        path = Path(path)
        if not path.exists():
            return cls()
        return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ReflexionMemory) and self.to_dict() == other.to_dict()


def push_insight(memory: ReflexionMemory, text: str) -> ReflexionMemory:
    return memory.push_insight(text)


def push_failure(memory: ReflexionMemory, text: str) -> ReflexionMemory:
    return memory.push_failure(text)


def retrieval_context(memory: ReflexionMemory) -> MemoryContext:
    return memory.retrieval_context()


def _steps(nodes: list[ReasoningNode]) -> str:
    return "\n".join(f"- ({n.combined_score:.2f}) {n.thought}" for n in nodes)


def record_episode(
    memory: ReflexionMemory,
    tree: ReasoningTree,
    problem: Problem,
    best_path: list[ReasoningNode],
    best_score: float,
    gateway: Gateway,
    iterations: int = 0,
    high_threshold: float = 0.8,
    low_threshold: float = 0.4,
    max_items: int = 2,
) -> ReflexionMemory:
    """Distill insights/failures from the scored nodes and store the best path.

    Both extraction calls run before anything is written, so a provider
    failure leaves the memory exactly as it was.
    """
    scored = sorted((n for n in tree.non_root() if n.scored), key=lambda n: n.created_seq)
    high = [n for n in scored if n.combined_score >= high_threshold]
    low = [n for n in scored if n.combined_score < low_threshold]
    try:
        insights: list[str] = []
        failures: list[str] = []
        if high:
            text = gateway.ask(
                "insight_extract", "insight_extract", problem=problem.statement, steps=_steps(high), limit=max_items
            )
            insights = parse_list(text, max_items)
        if low:
            text = gateway.ask(
                "insight_extract", "failure_extract", problem=problem.statement, steps=_steps(low), limit=max_items
            )
            failures = parse_list(text, max_items)
    except ProviderError as exc:
        gateway.warn(f"memory update skipped: {exc}")
        return memory

    for item in insights:
        memory.push_insight(item, gateway)
    for item in failures:
        memory.push_failure(item, gateway)
    path_nodes = [n for n in best_path if n.parent_id is not None]
    if path_nodes:
        summary = " -> ".join(n.thought for n in path_nodes)
        if len(summary) > SUMMARY_CHARS:
            summary = summary[: SUMMARY_CHARS - 3] + "..."
        memory.best_paths.append(BestPath(problem.id, [n.id for n in best_path], best_score, summary))
    memory.iteration_counter += iterations
    gateway.trace.event("memory_update", insights=insights, failures=failures, iteration_counter=memory.iteration_counter)
    return memory
