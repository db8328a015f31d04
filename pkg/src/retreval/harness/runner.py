"""Resumable batch execution of (problem, method) pairs with per-pair traces."""

from __future__ import annotations

import json
import logging
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from retreval.baselines import BASELINE_METHODS, run_baseline
from retreval.controller import solve
from retreval.harness.dataset import DatasetRecord
from retreval.harness.judge import ResultRecord
from retreval.llm.gateway import Gateway
from retreval.llm.prompts import DEFAULT_LIBRARY, PromptLibrary
from retreval.llm.providers import ChatProvider
from retreval.memory import ReflexionMemory
from retreval.trace import RunTrace

MANIFEST_SCHEMA_VERSION = 1
METHODS: tuple[str, ...] = ("retreval", *BASELINE_METHODS)

log = logging.getLogger(__name__)


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name)


def trace_path(out_dir: Path, method: str, problem_id: str) -> Path:
    return out_dir / "traces" / method / f"{_safe(problem_id)}.json"


@dataclass
class RunSettings:
    """Everything shared by every pair in a run, so all methods see identical model settings."""

    provider: ChatProvider
    critic: ChatProvider | None = None
    prompts: PromptLibrary = field(default_factory=lambda: DEFAULT_LIBRARY)
    temperature: float = 0.7
    max_tokens: int = 2048
    workers: int = 1
    parallel_baselines: bool = False
    config_overrides: dict[str, Any] = field(default_factory=dict)
    max_cycles: int = 3

    def gateway(self, trace: RunTrace) -> Gateway:
        return Gateway(self.provider, trace, self.prompts, self.critic, self.temperature, self.max_tokens)


def _load_manifest(path: Path) -> dict[str, Any]:
    if path.exists():
        data = json.loads(path.read_text(encoding="utf-8"))
        if data.get("schema_version") != MANIFEST_SCHEMA_VERSION:
            raise ValueError(f"{path}: unsupported manifest schema_version")
        return data
    return {"schema_version": MANIFEST_SCHEMA_VERSION, "entries": {}}


def _save_manifest(path: Path, manifest: dict[str, Any]) -> None:
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    tmp.replace(path)


def run_benchmark(
    dataset: list[DatasetRecord],
    methods: list[str],
    settings: RunSettings,
    out_dir: str | Path,
    memory_path: str | Path | None = None,
) -> dict[str, Any]:
    """Run every (problem, method) pair, skipping pairs already completed in ``out_dir``.

    Tree-search (``retreval``) pairs run serially in dataset order against one memory file,
    saved after each episode. Baseline pairs may run in a thread pool when
    ``settings.parallel_baselines`` is set. Failures are recorded in the
    manifest and the run carries on; a rerun retries them.
    """
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ValueError(f"unknown methods: {unknown}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest_file = out / "manifest.json"
    manifest = _load_manifest(manifest_file)
    manifest["methods"] = sorted(set(manifest.get("methods", [])) | set(methods), key=METHODS.index)
    manifest["problems"] = [r.id for r in dataset]
    memory_file = Path(memory_path) if memory_path else out / "memory.json"
    manifest["memory_path"] = str(memory_file)
    memory = ReflexionMemory.load(memory_file)
    entries: dict[str, dict[str, Any]] = manifest["entries"]

    def done(method: str, record: DatasetRecord) -> bool:
        entry = entries.get(f"{method}/{record.id}")
        return bool(entry and entry["status"] == "ok" and trace_path(out, method, record.id).exists())

    def execute(method: str, seq: int, record: DatasetRecord) -> dict[str, Any]:
        trace = RunTrace(method, record.id)
        trace.meta["problem"] = {
            "id": record.id,
            "statement": record.statement,
            "domain": record.domain,
            "reference_answer": record.reference_answer,
            "seq": seq,
        }
        gateway = settings.gateway(trace)
        problem = record.to_problem()
        started = time.perf_counter()
        entry: dict[str, Any] = {"method": method, "problem_id": record.id, "seq": seq}
        try:
            if method == "retreval":
                result = solve(problem, memory, gateway, settings.config_overrides, workers=settings.workers)
            else:
                result = run_baseline(method, problem, gateway, settings.max_cycles)
            entry.update(status="ok", final_answer=result.final_answer)
        except Exception as exc:  # recorded per pair; the batch continues
            log.exception("pair %s/%s failed", method, record.id)
            trace.event("aborted", error=type(exc).__name__, detail=str(exc))
            entry.update(status="failed", error=f"{type(exc).__name__}: {exc}")
        entry["calls"] = len(trace.calls)
        entry["wall_time"] = round(time.perf_counter() - started, 3)
        entry["trace"] = str(trace_path(out, method, record.id).relative_to(out))
        trace.write(out / entry["trace"])
        return entry

    pending = [(m, i, r) for i, r in enumerate(dataset) for m in methods if not done(m, r)]
    executed = 0
    serial = [p for p in pending if p[0] == "retreval" or not settings.parallel_baselines]
    parallel = [p for p in pending if p not in serial]
    for method, seq, record in serial:
        entries[f"{method}/{record.id}"] = execute(method, seq, record)
        executed += 1
        if method == "retreval" and entries[f"{method}/{record.id}"]["status"] == "ok":
            memory.save(memory_file)
        _save_manifest(manifest_file, manifest)
    if parallel:
        with ThreadPoolExecutor(max_workers=max(1, settings.workers)) as pool:
            for entry in pool.map(lambda p: execute(*p), parallel):
                entries[f"{entry['method']}/{entry['problem_id']}"] = entry
                executed += 1
        _save_manifest(manifest_file, manifest)

    manifest["executed_last_run"] = executed
    manifest["failed"] = sorted(k for k, e in entries.items() if e["status"] != "ok")
    _save_manifest(manifest_file, manifest)
    return manifest


def load_results(run_dir: str | Path) -> list[ResultRecord]:
    """Completed pairs of a run directory as judge inputs, in dataset order."""
    run = Path(run_dir)
    manifest = _load_manifest(run / "manifest.json")
    records = []
    for entry in manifest["entries"].values():
        if entry["status"] != "ok":
            continue
        trace = RunTrace.load(run / entry["trace"])
        problem = trace.meta["problem"]
        records.append(
            ResultRecord(
                problem_id=problem["id"],
                method=trace.method,
                domain=problem["domain"],
                statement=problem["statement"],
                final_answer=(trace.result or {}).get("final_answer", ""),
                reference_answer=problem.get("reference_answer"),
                seq=problem.get("seq", 0),
            )
        )
    records.sort(key=lambda r: (r.seq, METHODS.index(r.method) if r.method in METHODS else 99))
    return records
