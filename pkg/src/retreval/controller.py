"""The search episode: estimate -> expand -> refine -> score -> prune -> converge -> answer."""

from __future__ import annotations

import time
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Literal, TypeVar

from retreval.errors import InvalidState, ProviderError
from retreval.llm.gateway import Gateway, estimate_complexity
from retreval.llm.parsing import extract_final_answer, parse_candidates
from retreval.llm.prompts import build_generation_prompt
from retreval.memory import ReflexionMemory, record_episode
from retreval.model import (
    Problem,
    ReasoningNode,
    ReasoningTree,
    TreeConfig,
    add_child,
    best_leaf,
    config_for_complexity,
    frontier,
    new_tree,
)
from retreval.refinement import RefinementContext, refine_node
from retreval.scoring import score_node

ConvergedReason = Literal["max_depth", "plateau", "high_confidence", "iteration_limit"]

# roles that count against the per-episode call budget
LOOP_ROLES = frozenset({"generate", "self_critique", "refine", "cross_score"})
DEFAULT_WORKERS = 4

T = TypeVar("T")
R = TypeVar("R")


@dataclass
class EpisodeState:
    tree: ReasoningTree
    config: TreeConfig
    iteration: int = 0
    best_score_history: list[float] = field(default_factory=list)
    call_count: int = 0
    converged_reason: ConvergedReason | None = None


@dataclass
class SolutionResult:
    problem_id: str
    method: str
    final_answer: str
    response: str = ""
    best_path: list[ReasoningNode] = field(default_factory=list)
    best_score: float | None = None
    converged_reason: str | None = None
    steps: list[str] = field(default_factory=list)
    stats: dict[str, Any] = field(default_factory=dict)

    def to_dict(self, include_timing: bool = True) -> dict[str, Any]:
        stats = dict(self.stats)
        if not include_timing:
            stats.pop("wall_time", None)
        return {
            "problem_id": self.problem_id,
            "method": self.method,
            "final_answer": self.final_answer,
            "response": self.response,
            "best_path": [{"id": n.id, "thought": n.thought, "combined_score": n.combined_score} for n in self.best_path],
            "best_score": self.best_score,
            "converged_reason": self.converged_reason,
            "steps": self.steps,
            "stats": stats,
        }


def call_budget(config: TreeConfig) -> int:
    """Loop-phase call estimate ``k * d_max * (r + 2)``; soft, warning only."""
    return config.prune_k * config.max_depth * (config.max_refinements + 2)


def prune_level(tree: ReasoningTree, depth: int, k: int) -> list[str]:
    """Keep the ``k`` best unpruned nodes at ``depth``; mark the rest pruned.

    Ranking is by combined score, ties going to the earlier-created node.
    Returns retained ids best-first.
    """
    level = tree.level(depth)
    unscored = [n.id for n in level if n.combined_score is None]
    if unscored:
        raise InvalidState(f"cannot prune depth {depth}: unscored nodes {unscored}")
    ranked = sorted(level, key=lambda n: (-n.combined_score, n.created_seq))
    for node in ranked[k:]:
        node.pruned = True
    return [n.id for n in ranked[:k]]


def check_convergence(state: EpisodeState) -> ConvergedReason | None:
    """First matching stop reason, checked in a fixed order.

    high_confidence, then max_depth (nothing left to expand), then plateau
    (best score failed to improve by ``plateau_eps`` for ``plateau_window``
    consecutive iterations), then iteration_limit.
    """
    history = state.best_score_history
    if not history:
        raise InvalidState("check_convergence needs at least one completed iteration")
    cfg = state.config
    if history[-1] >= cfg.convergence_score:
        return "high_confidence"
    if not frontier(state.tree, cfg.max_depth):
        return "max_depth"
    window = cfg.plateau_window
    if len(history) > window and all(
        history[-i] - history[-i - 1] < cfg.plateau_eps for i in range(1, window + 1)
    ):
        return "plateau"
    if state.iteration >= cfg.max_iterations:
        return "iteration_limit"
    return None


def _map(fn: Callable[[T], R], items: Iterable[T], workers: int) -> list[R]:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def _loop_calls(gateway: Gateway) -> int:
    return sum(1 for e in gateway.trace.calls if e["role"] in LOOP_ROLES)


def _expand(state: EpisodeState, problem: Problem, gateway: Gateway, memory_ctx, workers: int) -> list[str]:
    tree, cfg = state.tree, state.config
    parents = frontier(tree, cfg.max_depth)
    requests = [
        build_generation_prompt(
            tree.chain_text(pid),
            memory_ctx,
            problem,
            cfg.branching,
            suggestions=tree.get(pid).critic_suggestions,
            library=gateway.prompts,
        )
        for pid in parents
    ]
    responses = _map(gateway.send, requests, workers)
    created: list[str] = []
    for pid, text in zip(parents, responses):
        thoughts = parse_candidates(text, cfg.branching)
        if not thoughts:
            tree.get(pid).exhausted = True
            gateway.trace.event("dead_end", node=pid)
            continue
        children = [add_child(tree, pid, thought) for thought in thoughts]
        gateway.trace.event("expand", parent=pid, children=children)
        created.extend(children)
    return created


def solve(
    problem: Problem,
    memory: ReflexionMemory,
    gateway: Gateway,
    config_overrides: dict[str, Any] | None = None,
    workers: int = DEFAULT_WORKERS,
    update_memory: bool = True,
) -> SolutionResult:
    """Run one full episode for ``problem`` and update ``memory``.

    ``workers=1`` issues every request sequentially, which is required for
    reproducible traces with a scripted provider. On a provider error the
    partial trace stays on ``gateway.trace`` and the error propagates.
    """
    started = time.perf_counter()
    trace = gateway.trace
    trace.problem_id = problem.id
    try:
        estimate = estimate_complexity(gateway, problem)
        config = config_for_complexity(estimate.level, **(config_overrides or {}))
        budget = call_budget(config)
        trace.meta.update({"complexity": estimate.level, "config": config.to_dict(), "call_budget": budget})

        tree = new_tree(problem, namespace=problem.id)
        memory_ctx = memory.retrieval_context()
        trace.event(
            "memory_context",
            insights=memory_ctx.insight_list,
            failures=memory_ctx.failure_constraints,
            strategies=memory_ctx.strategy_references,
        )
        state = EpisodeState(tree=tree, config=config)
        over_budget = False

        def process(node_id: str) -> None:
            node = tree.get(node_id)
            chain = tree.chain_text(node.parent_id)
            refine_node(
                node,
                RefinementContext(problem, chain),
                gateway,
                config.max_refinements,
                config.quality_threshold,
            )
            score_node(node, problem, gateway, chain, config.local_weight)

        while state.converged_reason is None:
            state.iteration += 1
            created = _expand(state, problem, gateway, memory_ctx, workers)
            _map(process, created, workers)
            for depth in sorted({tree.get(c).depth for c in created}):
                retained = prune_level(tree, depth, config.prune_k)
                pruned = [n.id for n in tree.level(depth, include_pruned=True) if n.pruned]
                trace.event("prune", depth=depth, k=config.prune_k, retained=retained, pruned=pruned)

            leaf = best_leaf(tree)
            state.best_score_history.append(leaf.combined_score if leaf else 0.0)
            state.call_count = len(trace.calls)
            trace.event(
                "iteration",
                iteration=state.iteration,
                created=len(created),
                best_node=leaf.id if leaf else None,
                best_score=state.best_score_history[-1],
            )
            if not over_budget and _loop_calls(gateway) > budget:
                over_budget = True
                trace.warn(f"loop-phase calls exceeded budget {budget}")
            state.converged_reason = check_convergence(state)

        trace.event("converged", reason=state.converged_reason, iteration=state.iteration)

        leaf = best_leaf(tree)
        if leaf is None:
            trace.warn("no scored leaf; answering from the problem statement alone")
            best_path = [tree.root]
        else:
            best_path = tree.path_to(leaf.id)
        best_score = leaf.combined_score if leaf else 0.0
        response = gateway.ask(
            "final_answer", "final_answer", problem=problem.statement, chain=tree.chain_text(best_path[-1].id)
        )
        if update_memory:
            record_episode(memory, tree, problem, best_path, best_score, gateway, iterations=state.iteration)
    except ProviderError as exc:
        trace.event("aborted", error=type(exc).__name__, detail=str(exc))
        raise

    nodes = tree.non_root()
    result = SolutionResult(
        problem_id=problem.id,
        method="retreval",
        final_answer=extract_final_answer(response),
        response=response,
        best_path=best_path,
        best_score=best_score,
        converged_reason=state.converged_reason,
        steps=[n.thought for n in best_path[1:]],
        stats={
            "complexity": estimate.level,
            "iterations": state.iteration,
            "nodes_created": len(nodes),
            "nodes_pruned": sum(n.pruned for n in nodes),
            "loop_calls": _loop_calls(gateway),
            "call_budget": budget,
            "calls_by_role": trace.calls_by_role(),
            "best_score_history": state.best_score_history,
            "wall_time": round(time.perf_counter() - started, 4),
        },
    )
    trace.meta["tree"] = [n.summary() for n in sorted(tree.nodes.values(), key=lambda n: n.created_seq)]
    trace.result = result.to_dict(include_timing=False)
    return result
