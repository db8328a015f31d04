"""ReAct, Reflexion and Self-Refine, configured for head-to-head comparison.

All three are stateless across problems: nothing outside the function call
survives, and none of them touches reflexion memory.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass
from typing import Literal

from retreval.controller import SolutionResult
from retreval.errors import InvalidArgument
from retreval.llm.gateway import Gateway
from retreval.llm.parsing import extract_final_answer, parse_verdict_yes
from retreval.llm.prompts import numbered
from retreval.model import Problem

Method = Literal["react", "reflexion", "self_refine"]
BASELINE_METHODS: tuple[str, ...] = ("react", "reflexion", "self_refine")

_FINISH = re.compile(r"\bfinish\s*\[", re.IGNORECASE)
_SATISFACTORY = re.compile(r"\bsatisfactory\b", re.IGNORECASE)
_UNSATISFACTORY = re.compile(r"\b(?:un|not\s+)satisfactory\b", re.IGNORECASE)


@dataclass(frozen=True)
class BaselineConfig:
    method: Method
    max_cycles: int = 3

    def __post_init__(self) -> None:
        if self.method not in BASELINE_METHODS:
            raise InvalidArgument(f"unknown baseline {self.method!r}")
        if self.max_cycles < 1:
            raise InvalidArgument("max_cycles must be >= 1")


def _result(problem: Problem, method: str, gateway: Gateway, response: str, steps: list[str], started: float, **stats) -> SolutionResult:
    result = SolutionResult(
        problem_id=problem.id,
        method=method,
        final_answer=extract_final_answer(response),
        response=response,
        steps=steps,
        stats={**stats, "calls_by_role": gateway.trace.calls_by_role(), "wall_time": round(time.perf_counter() - started, 4)},
    )
    gateway.trace.result = result.to_dict(include_timing=False)
    return result


def react_solve(problem: Problem, gateway: Gateway, config: BaselineConfig | None = None) -> SolutionResult:
    """Thought -> action -> observation cycles; ``Finish[...]`` ends the loop.

    Actions are declared in text and the model writes its own observation;
    no tools run. One answer call follows the last cycle.
    """
    config = config or BaselineConfig("react")
    started = time.perf_counter()
    gateway.trace.problem_id = problem.id
    history: list[str] = []
    cycles = 0
    finished = False
    for cycle in range(1, config.max_cycles + 1):
        cycles = cycle
        so_far = "\n".join(history) or "(none)"
        thought = gateway.ask("react_thought", "react_thought", problem=problem.statement, history=so_far).strip()
        action = gateway.ask(
            "react_action", "react_action", problem=problem.statement, history=so_far, thought=thought
        ).strip()
        observation = gateway.ask(
            "react_observation",
            "react_observation",
            problem=problem.statement,
            history=so_far,
            thought=thought,
            action=action,
        ).strip()
        history += [f"Thought {cycle}: {thought}", f"Action {cycle}: {action}", f"Observation {cycle}: {observation}"]
        gateway.trace.event("react_cycle", cycle=cycle, finished=bool(_FINISH.search(action)))
        if _FINISH.search(action):
            finished = True
            break
    response = gateway.ask("final_answer", "react_answer", problem=problem.statement, history="\n".join(history))
    return _result(problem, "react", gateway, response, history, started, cycles=cycles, finished=finished)


def reflexion_solve(problem: Problem, gateway: Gateway, config: BaselineConfig | None = None) -> SolutionResult:
    """Attempt, self-evaluate, reflect on failure, retry with reflections.

    Reflections live only for this problem. No reflection is written after
    the final attempt since nothing would read it.
    """
    config = config or BaselineConfig("reflexion")
    started = time.perf_counter()
    gateway.trace.problem_id = problem.id
    reflections: list[str] = []
    attempts: list[str] = []
    solved = False
    for attempt_no in range(1, config.max_cycles + 1):
        attempt = gateway.ask(
            "generate", "reflexion_attempt", problem=problem.statement, reflections=numbered(reflections)
        ).strip()
        attempts.append(attempt)
        evaluation = gateway.ask("self_critique", "reflexion_evaluate", problem=problem.statement, attempt=attempt)
        solved = parse_verdict_yes(evaluation)
        gateway.trace.event("reflexion_attempt", attempt=attempt_no, judged_correct=solved, reflections_in_prompt=len(reflections))
        if solved or attempt_no == config.max_cycles:
            break
        reflection = gateway.ask(
            "reflect", "reflexion_reflect", problem=problem.statement, attempt=attempt, evaluation=evaluation.strip()
        ).strip()
        reflections.append(reflection)
    return _result(
        problem, "reflexion", gateway, attempts[-1], attempts, started,
        attempts=len(attempts), reflections=len(reflections), judged_correct=solved,
    )


def self_refine_solve(problem: Problem, gateway: Gateway, config: BaselineConfig | None = None) -> SolutionResult:
    """One solution, then feedback -> refine until satisfactory or out of cycles."""
    config = config or BaselineConfig("self_refine")
    started = time.perf_counter()
    gateway.trace.problem_id = problem.id
    solution = gateway.ask("generate", "self_refine_initial", problem=problem.statement).strip()
    versions = [solution]
    refines = 0
    satisfied = False
    while refines < config.max_cycles:
        feedback = gateway.ask("self_critique", "self_refine_feedback", problem=problem.statement, solution=solution)
        if _SATISFACTORY.search(feedback) and not _UNSATISFACTORY.search(feedback):
            satisfied = True
            break
        solution = gateway.ask(
            "refine", "self_refine_refine", problem=problem.statement, solution=solution, feedback=feedback.strip()
        ).strip()
        versions.append(solution)
        refines += 1
        gateway.trace.event("self_refine_cycle", cycle=refines)
    return _result(problem, "self_refine", gateway, solution, versions, started, refines=refines, satisfied=satisfied)


SOLVERS = {
    "react": react_solve,
    "reflexion": reflexion_solve,
    "self_refine": self_refine_solve,
}


def run_baseline(method: str, problem: Problem, gateway: Gateway, max_cycles: int = 3) -> SolutionResult:
    config = BaselineConfig(method, max_cycles)  # type: ignore[arg-type]
    return SOLVERS[method](problem, gateway, config)
