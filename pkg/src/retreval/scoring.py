"""Dual (self + critic) scoring of refined nodes."""

from __future__ import annotations

from dataclasses import dataclass, field

from retreval.errors import InvalidArgument
from retreval.llm.gateway import Gateway
from retreval.llm.parsing import parse_critique
from retreval.model import Problem, ReasoningNode
from retreval.refinement import RefinementContext, critique_node

LOCAL_WEIGHT = 0.6


@dataclass
class DualScore:
    local: float
    cross: float
    combined: float
    critic_rationale: str = ""
    critic_suggestions: list[str] = field(default_factory=list)


def combined_score(local: float, cross: float, local_weight: float = LOCAL_WEIGHT) -> float:
    """``local_weight * local + (1 - local_weight) * cross``; defaults 0.6 / 0.4."""
    for name, value in (("local", local), ("cross", cross), ("local_weight", local_weight)):
        if not 0.0 <= value <= 1.0:
            raise InvalidArgument(f"{name} must lie in [0, 1], got {value!r}")
    # same value as w*local + (1-w)*cross, but exact when local == cross
    combined = cross + local_weight * (local - cross)
    return min(1.0, max(0.0, combined))


def score_node(
    node: ReasoningNode,
    problem: Problem,
    gateway: Gateway,
    parent_chain: str = "",
    local_weight: float = LOCAL_WEIGHT,
) -> DualScore:
    """Local score from the last self-critique, cross score from the critic.

    Nodes refined with ``max_refinements=0`` have no critique yet; they get
    one dedicated self-evaluation call first.
    """
    if not node.critique_history:
        node.critique_history.append(critique_node(node, RefinementContext(problem, parent_chain), gateway))
    local = node.critique_history[-1].quality_score

    text = gateway.ask(
        "cross_score",
        "cross_score",
        problem=problem.statement,
        chain=parent_chain,
        thought=node.thought,
    )
    critic = parse_critique(text, gateway.warn)
    combined = combined_score(local, critic.quality_score, local_weight)

    node.local_score = local
    node.cross_score = critic.quality_score
    node.combined_score = combined
    node.critic_suggestions = list(critic.suggestions)
    gateway.trace.event("score", node=node.id, local=local, cross=critic.quality_score, combined=combined)
    return DualScore(local, critic.quality_score, combined, critic.rationale, list(critic.suggestions))
