"""
Base Solver Interface for multicast routing
Defines the contract that all solvers (exact, heuristic and learned) follow.
"""
import json
import logging
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Tuple

from ..core.codec import tree_from_document, tree_to_document
from ..core.errors import InstanceFormatError
from ..core.flow_tree import FlowAssignment, MulticastTree, compute_flows, tree_cost
from ..core.graph import NetworkGraph, ProblemInstance, solver_graph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Solution:
    """Routing produced by one solver on one instance"""
    # None only for overlays whose flow support is not a tree
    tree: Optional[MulticastTree]
    flows: FlowAssignment
    cost: float
    solver_tag: str
    runtime: float = 0.0
    # best-ever cost after each generation / iteration (population solvers)
    trace: Tuple[float, ...] = field(default=(), compare=False)

    @classmethod
    def from_tree(cls, graph: NetworkGraph, tree: MulticastTree, instance: ProblemInstance,
                  solver_tag: str, trace: Tuple[float, ...] = ()) -> "Solution":
        flows = compute_flows(tree, instance.demands)
        return cls(tree=tree, flows=flows, cost=tree_cost(graph, tree, instance.demands),
                   solver_tag=solver_tag, trace=tuple(trace))

    def with_runtime(self, runtime: float) -> "Solution":
        return replace(self, runtime=runtime)


class BaseSolver(ABC):
    """
    Abstract base class for solvers

    Subclasses set `tag` and implement `solve_instance`; `solve` adds timing.
    """
    tag: str = ""

    def __init__(self, use_hub: bool = False):
        """
        Args:
            use_hub: Route over virtual hub edges when the instance has a hub
        """
        self.use_hub = use_hub

    def graph_for(self, instance: ProblemInstance) -> NetworkGraph:
        return solver_graph(instance, self.use_hub)

    @abstractmethod
    def solve_instance(self, instance: ProblemInstance) -> Solution:
        """
        Route every destination of the instance

        Args:
            instance: Problem to solve

        Returns:
            Solution (runtime left at 0; `solve` fills it in)

        Raises:
            InfeasibleError: a destination cannot be reached
        """
        pass

    def solve(self, instance: ProblemInstance) -> Solution:
        """Solve and record wall-clock time of the solver call only"""
        start = time.perf_counter()
        solution = self.solve_instance(instance)
        elapsed = time.perf_counter() - start
        logger.debug("%s: cost %.4f in %.4fs", self.tag, solution.cost, elapsed)
        return solution.with_runtime(elapsed)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(tag={self.tag!r}, use_hub={self.use_hub})"


def solution_to_document(solution: Solution) -> Dict[str, Any]:
    return {
        "solver": solution.solver_tag,
        "cost": solution.cost,
        "runtime": solution.runtime,
        "tree": tree_to_document(solution.tree) if solution.tree is not None else None,
        "flows": [[p, c, f] for (p, c), f in solution.flows.flows.items()],
    }


def serialize_solution(solution: Solution) -> str:
    return json.dumps(solution_to_document(solution))


def parse_solution(text: str) -> Solution:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(document, dict):
        raise InstanceFormatError("solution document must be a JSON object")
    for name in ("solver", "cost", "flows"):
        if name not in document:
            raise InstanceFormatError(f"missing field: {name}")
    tree = document.get("tree")
    try:
        flows = {(int(p), int(c)): float(f) for p, c, f in document["flows"]}
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError("field flows: entries must be [parent, child, flow]") from exc
    return Solution(
        tree=tree_from_document(tree) if tree is not None else None,
        flows=FlowAssignment(flows),
        cost=float(document["cost"]),
        solver_tag=str(document["solver"]),
        runtime=float(document.get("runtime", 0.0)),
    )
