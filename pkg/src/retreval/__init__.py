"""Tree-of-thoughts search with per-node self-refinement, dual critique
scoring, top-k pruning and cross-problem reflexion memory."""

from retreval.baselines import react_solve, reflexion_solve, self_refine_solve
from retreval.controller import SolutionResult, call_budget, check_convergence, prune_level, solve
from retreval.llm import Gateway, OpenAIChatProvider, ProviderConfig, ScriptedProvider
from retreval.memory import ReflexionMemory
from retreval.model import (
    Problem,
    ReasoningNode,
    ReasoningTree,
    TreeConfig,
    add_child,
    config_for_complexity,
    frontier,
    max_node_bound,
    new_tree,
    trace_best_path,
)
from retreval.scoring import combined_score
from retreval.trace import RunTrace

__version__ = "0.1.0"

__all__ = [
    "Gateway",
    "OpenAIChatProvider",
    "Problem",
    "ProviderConfig",
    "ReasoningNode",
    "ReasoningTree",
    "ReflexionMemory",
    "RunTrace",
    "ScriptedProvider",
    "SolutionResult",
    "TreeConfig",
    "add_child",
    "call_budget",
    "check_convergence",
    "combined_score",
    "config_for_complexity",
    "frontier",
    "max_node_bound",
    "new_tree",
    "prune_level",
    "react_solve",
    "reflexion_solve",
    "self_refine_solve",
    "solve",
    "trace_best_path",
]
