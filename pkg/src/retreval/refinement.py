"""Per-node critique -> rewrite loop."""

from __future__ import annotations

from dataclasses import dataclass

from retreval.errors import InvalidState
from retreval.llm.gateway import Gateway
from retreval.llm.parsing import parse_critique
from retreval.model import CritiqueReport, Problem, ReasoningNode

GENERIC_FEEDBACK = "Improve the rigor and clarity of this step."
NO_IMPROVEMENT_EPS = 0.01


@dataclass
class RefinementContext:
    problem: Problem
    parent_chain: str


def extract_actionable_feedback(critique: CritiqueReport, gateway: Gateway | None = None) -> str:
    if critique.suggestions:
        return "\n".join(f"- {s}" for s in critique.suggestions)
    if critique.rationale.strip():
        return critique.rationale.strip()
    if gateway is not None:
        gateway.warn("critique had neither suggestions nor rationale; using generic feedback")
    return GENERIC_FEEDBACK


def critique_node(node: ReasoningNode, context: RefinementContext, gateway: Gateway) -> CritiqueReport:
    text = gateway.ask(
        "self_critique",
        "self_critique",
        problem=context.problem.statement,
        chain=context.parent_chain,
        thought=node.thought,
    )
    return parse_critique(text, gateway.warn)


def refine_node(
    node: ReasoningNode,
    context: RefinementContext,
    gateway: Gateway,
    max_refinements: int = 3,
    quality_threshold: float = 0.8,
) -> ReasoningNode:
    """Critique, and rewrite while below ``quality_threshold``.

    At most ``max_refinements`` rewrites. After the last permitted rewrite
    the new thought is critiqued once more, so ``r`` rewrites cost up to
    ``r + 1`` critiques; that final critique becomes the node's local score.
    Stops early when a rewrite reproduces the previous text and the score
    moved by less than 0.01.
    """
    if node.pruned:
        raise InvalidState(f"cannot refine pruned node {node.id}")
    if max_refinements <= 0:
        return node

    previous_score: float | None = None
    while True:
        critique = critique_node(node, context, gateway)
        node.critique_history.append(critique)
        if critique.quality_score >= quality_threshold:
            critique.met_threshold = True
            break
        if node.refinement_count >= max_refinements:
            break
        feedback = extract_actionable_feedback(critique, gateway)
        rewritten = gateway.ask(
            "refine",
            "refine",
            problem=context.problem.statement,
            chain=context.parent_chain,
            thought=node.thought,
            feedback=feedback,
        ).strip()
        unchanged = rewritten == node.thought.strip()
        if rewritten:
            node.thought = rewritten
        else:
            gateway.warn(f"empty rewrite for {node.id}; keeping previous thought")
            unchanged = True
        node.refinement_count += 1
        stagnant = previous_score is not None and abs(critique.quality_score - previous_score) < NO_IMPROVEMENT_EPS
        if unchanged and stagnant:
            gateway.trace.event("refine_stop", node=node.id, reason="no_improvement")
            break
        previous_score = critique.quality_score

    gateway.trace.event(
        "refined",
        node=node.id,
        rewrites=node.refinement_count,
        critiques=len(node.critique_history),
        last_quality=node.critique_history[-1].quality_score,
    )
    return node
