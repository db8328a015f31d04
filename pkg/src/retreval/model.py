"""Problems, reasoning nodes/trees, and the complexity -> tree-shape mapping."""

from __future__ import annotations

import dataclasses
import uuid
from dataclasses import dataclass, field
from typing import Any, Literal

from retreval.errors import InvalidArgument, InvalidState, NotFound

Domain = Literal["math", "creative", "other"]
DOMAINS: tuple[str, ...] = ("math", "creative", "other")


@dataclass
class Problem:
    id: str
    statement: str
    domain: Domain = "math"
    reference_answer: str | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.statement or not self.statement.strip():
            raise InvalidArgument(f"problem {self.id!r} has an empty statement")
        if self.domain not in DOMAINS:
            raise InvalidArgument(f"unknown domain {self.domain!r}")


@dataclass(frozen=True)
class ComplexityEstimate:
    level: int
    rationale: str = ""

    def __post_init__(self) -> None:
        if self.level not in (1, 2, 3, 4, 5):
            raise InvalidArgument(f"complexity level must be in 1..5, got {self.level}")


@dataclass(frozen=True)
class TreeConfig:
    """Search shape and stopping parameters for one episode.

    ``local_weight`` is the self-evaluation share of the combined score; the
    critic gets the remainder.
    """

    max_depth: int = 3
    branching: int = 3
    prune_k: int = 3
    max_refinements: int = 3
    quality_threshold: float = 0.8
    convergence_score: float = 0.95
    max_iterations: int = 5
    local_weight: float = 0.6
    plateau_window: int = 2
    plateau_eps: float = 1e-6

    def __post_init__(self) -> None:
        for name in ("max_depth", "branching", "prune_k", "max_iterations", "plateau_window"):
            if getattr(self, name) < 1:
                raise InvalidArgument(f"{name} must be >= 1")
        if self.max_refinements < 0:
            raise InvalidArgument("max_refinements must be >= 0")
        if not 0.0 <= self.quality_threshold <= 1.0:
            raise InvalidArgument("quality_threshold must lie in [0, 1]")
        if not 0.0 < self.convergence_score <= 1.0:
            raise InvalidArgument("convergence_score must lie in (0, 1]")
        if not 0.0 <= self.local_weight <= 1.0:
            raise InvalidArgument("local_weight must lie in [0, 1]")

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


# complexity level -> (max_depth, branching, prune_k)
_SHAPES: dict[int, tuple[int, int, int]] = {
    1: (2, 2, 3),
    2: (2, 2, 3),
    3: (3, 3, 3),
    4: (4, 4, 4),
    5: (5, 4, 4),
}


def config_for_complexity(level: int, **overrides: Any) -> TreeConfig:
    """Tree shape for an estimated complexity level, with optional overrides.

    ``max_iterations`` defaults to ``max_depth + 2`` (computed after any
    depth override) unless given explicitly.
    """
    if level not in _SHAPES:
        raise InvalidArgument(f"complexity level must be in 1..5, got {level!r}")
    depth, branching, k = _SHAPES[level]
    values: dict[str, Any] = {"max_depth": depth, "branching": branching, "prune_k": k}
    unknown = set(overrides) - {f.name for f in dataclasses.fields(TreeConfig)}
    if unknown:
        raise InvalidArgument(f"unknown config fields: {sorted(unknown)}")
    values.update({key: val for key, val in overrides.items() if val is not None})
    values.setdefault("max_iterations", values["max_depth"] + 2)
    return TreeConfig(**values)


def max_node_bound(config: TreeConfig) -> int:
    """Worst-case number of non-root nodes: sum of branching**d for d = 1..max_depth."""
    return sum(config.branching**d for d in range(1, config.max_depth + 1))


@dataclass
class CritiqueReport:
    quality_score: float
    rationale: str = ""
    suggestions: list[str] = field(default_factory=list)
    # keys among logical_coherence, correctness, completeness, clarity
    dimension_notes: dict[str, str] = field(default_factory=dict)
    met_threshold: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.quality_score <= 1.0:
            raise InvalidArgument(f"quality_score out of [0, 1]: {self.quality_score}")

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


@dataclass
class ReasoningNode:
    id: str
    thought: str
    depth: int
    created_seq: int
    parent_id: str | None = None
    refinement_count: int = 0
    critique_history: list[CritiqueReport] = field(default_factory=list)
    local_score: float | None = None
    cross_score: float | None = None
    combined_score: float | None = None
    critic_suggestions: list[str] = field(default_factory=list)
    children: list[str] = field(default_factory=list)
    pruned: bool = False
    # set when expansion produced no parseable candidates
    exhausted: bool = False

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def scored(self) -> bool:
        return self.combined_score is not None

    def summary(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "parent_id": self.parent_id,
            "depth": self.depth,
            "created_seq": self.created_seq,
            "thought": self.thought,
            "refinement_count": self.refinement_count,
            "critiques": len(self.critique_history),
            "local_score": self.local_score,
            "cross_score": self.cross_score,
            "combined_score": self.combined_score,
            "children": list(self.children),
            "pruned": self.pruned,
            "exhausted": self.exhausted,
        }


@dataclass
class ReasoningTree:
    nodes: dict[str, ReasoningNode]
    root_id: str
    namespace: str
    next_seq: int = 1

    @property
    def root(self) -> ReasoningNode:
        return self.nodes[self.root_id]

    def get(self, node_id: str) -> ReasoningNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise NotFound(f"no node {node_id!r} in tree") from None

    def path_to(self, node_id: str) -> list[ReasoningNode]:
        """Nodes from the root down to ``node_id`` inclusive."""
        path = [self.get(node_id)]
        while path[-1].parent_id is not None:
            path.append(self.nodes[path[-1].parent_id])
        path.reverse()
        return path

    def chain_text(self, node_id: str) -> str:
        lines = []
        for node in self.path_to(node_id):
            label = "Problem" if node.parent_id is None else f"Step {node.depth}"
            lines.append(f"{label}: {node.thought}")
        return "\n".join(lines)

    def level(self, depth: int, include_pruned: bool = False) -> list[ReasoningNode]:
        return sorted(
            (n for n in self.nodes.values() if n.depth == depth and (include_pruned or not n.pruned)),
            key=lambda n: n.created_seq,
        )

    def non_root(self) -> list[ReasoningNode]:
        return [n for n in self.nodes.values() if n.parent_id is not None]

    def active_leaves(self) -> list[ReasoningNode]:
        return sorted(
            (n for n in self.nodes.values() if n.is_leaf and not n.pruned),
            key=lambda n: n.created_seq,
        )

    def check_invariants(self) -> None:
        roots = [n for n in self.nodes.values() if n.parent_id is None]
        if len(roots) != 1 or roots[0].id != self.root_id or roots[0].depth != 0:
            raise InvalidState("tree must have exactly one depth-0 root")
        for node in self.nodes.values():
            for child_id in node.children:
                child = self.nodes.get(child_id)
                if child is None or child.parent_id != node.id:
                    raise InvalidState(f"broken link {node.id} -> {child_id}")
                if child.depth != node.depth + 1:
                    raise InvalidState(f"depth mismatch at {child_id}")
            if node.parent_id is not None and node.id not in self.nodes[node.parent_id].children:
                raise InvalidState(f"{node.id} missing from its parent's children")


def new_tree(problem: Problem, namespace: str | None = None) -> ReasoningTree:
    """Single-node tree whose root thought is the problem statement.

    Node ids are ``<namespace>/<seq>``; without an explicit namespace a random
    one is drawn so separate trees never share ids.
    """
    namespace = namespace or uuid.uuid4().hex[:12]
    root = ReasoningNode(id=f"{namespace}/0", thought=problem.statement, depth=0, created_seq=0)
    return ReasoningTree(nodes={root.id: root}, root_id=root.id, namespace=namespace)


def add_child(tree: ReasoningTree, parent_id: str, thought: str) -> str:
    parent = tree.get(parent_id)
    if parent.pruned:
        raise InvalidState(f"cannot expand pruned node {parent_id}")
    seq = tree.next_seq
    tree.next_seq += 1
    node = ReasoningNode(
        id=f"{tree.namespace}/{seq}",
        thought=thought,
        depth=parent.depth + 1,
        created_seq=seq,
        parent_id=parent_id,
    )
    tree.nodes[node.id] = node
    parent.children.append(node.id)
    return node.id


def frontier(tree: ReasoningTree, max_depth: int) -> list[str]:
    """Unexpanded, unpruned leaves shallower than ``max_depth``, in creation order."""
    return [
        n.id
        for n in tree.active_leaves()
        if n.depth < max_depth and not n.exhausted
    ]


def best_leaf(tree: ReasoningTree) -> ReasoningNode | None:
    best: ReasoningNode | None = None
    for node in tree.active_leaves():  # creation order, so strict > keeps the earliest on ties
        if node.combined_score is None:
            continue
        if best is None or node.combined_score > best.combined_score:
            best = node
    return best


def trace_best_path(tree: ReasoningTree) -> list[ReasoningNode]:
    leaf = best_leaf(tree)
    if leaf is None:
        raise InvalidState("tree has no scored, unpruned leaf")
    return tree.path_to(leaf.id)
