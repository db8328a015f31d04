"""Scripted-provider builders shared by the test modules."""

from __future__ import annotations

from retreval.llm.gateway import Gateway
from retreval.llm.providers import ScriptedProvider, ScriptedRule
from retreval.model import Problem
from retreval.trace import RunTrace

PROBLEM = Problem("p1", "What is 6 * 7?", "math", reference_answer="42")


def rule(role: str, response: str, pattern: str | None = None, once: bool = False) -> ScriptedRule:
    return ScriptedRule(role=role, response=response, pattern=pattern, consume_once=once)


def fallback(response: str = "score: 0.5") -> ScriptedRule:
    return ScriptedRule(role="*", response=response)


def thoughts(level: int, n: int, tag: str = "") -> str:
    return "\n".join(f"Thought {i}: step-L{level}{tag} option {i} reasoning" for i in range(1, n + 1))


def leveled_rules(
    complexity: int,
    depth: int,
    branching: int,
    self_scores: dict[int, float],
    cross_scores: dict[int, float],
    answer: str = "Final Answer: 42",
    tag: str = "",
) -> list[ScriptedRule]:
    """Scores keyed by tree level. Every prompt about a level-L node contains
    ``step-L<L><tag>``, and deeper prompts also contain shallower markers, so
    rules are listed deepest level first. Give consecutive episodes distinct
    tags when memory carries thoughts from one episode into the next."""
    rules = [rule("complexity", f"complexity: {complexity}")]
    for level in range(depth, 1, -1):
        rules.append(rule("generate", thoughts(level, branching, tag), pattern=f"step-L{level - 1}{tag}"))
    rules.append(rule("generate", thoughts(1, branching, tag)))
    for level in range(depth, 0, -1):
        marker = f"step-L{level}{tag}"
        rules.append(rule("self_critique", f"score: {self_scores[level]:.2f}\nRationale: ok\nSuggestions:\n- tighten {marker}", pattern=marker))
        rules.append(rule("refine", f"{marker} refined reasoning", pattern=marker))
        rules.append(rule("cross_score", f"score: {cross_scores[level]:.2f}\nRationale: fine\nSuggestions:\n- extend {marker}", pattern=marker))
    rules += [
        rule("final_answer", answer),
        rule("insight_extract", "- Break the product into known facts", pattern="High-scoring"),
        rule("insight_extract", "- Avoid guessing without checking", pattern="Low-scoring"),
        fallback(),
    ]
    return rules


def gateway_for(rules: list[ScriptedRule], method: str = "retreval", problem_id: str = "p1") -> Gateway:
    return Gateway(ScriptedProvider(rules), RunTrace(method, problem_id))


# complexity-3 scenarios (depth 3, branching 3, k 3): one per stop reason.
# combined = 0.6 * self + 0.4 * cross
CONVERGENCE_SCENARIOS: dict[str, dict] = {
    "high_confidence": {
        "self": {1: 0.97, 2: 0.97, 3: 0.97},
        "cross": {1: 0.96, 2: 0.96, 3: 0.96},
        "overrides": {},
    },
    "max_depth": {
        "self": {1: 0.9, 2: 0.9, 3: 0.9},
        "cross": {1: 0.5, 2: 0.6, 3: 0.7},
        "overrides": {},
    },
    "plateau": {
        "self": {1: 0.9, 2: 0.9, 3: 0.9, 4: 0.9},
        "cross": {1: 0.5, 2: 0.5, 3: 0.5, 4: 0.5},
        "overrides": {"max_depth": 4},
    },
    "iteration_limit": {
        "self": {1: 0.9, 2: 0.9, 3: 0.9},
        "cross": {1: 0.5, 2: 0.6, 3: 0.7},
        "overrides": {"max_iterations": 2},
    },
}


def scenario_rules(name: str) -> list[ScriptedRule]:
    scenario = CONVERGENCE_SCENARIOS[name]
    depth = max(scenario["self"])
    return leveled_rules(3, depth, 3, scenario["self"], scenario["cross"])
