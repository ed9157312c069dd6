"""
Exact solvers: edge-subset enumeration and a demand-weighted Dreyfus-Wagner DP

The DP state (terminal subset S, anchor v) holds the cheapest tree joining
v to every terminal in S, where each edge is charged at the largest demand
in S. Any tree edge that separates S from the root carries exactly that
maximum, so the subset recurrence stays exact under max-demand flows.
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Set, Tuple

import numpy as np

from ..core.errors import BudgetExceededError, InfeasibleError
from ..core.flow_tree import MulticastTree, tree_cost, tree_from_edges
from ..core.graph import EdgeKey, NetworkGraph, ProblemInstance, edge_key
from .base_solver import BaseSolver, Solution
from .paths import NO_PRED, TIE_TOLERANCE, grow

logger = logging.getLogger(__name__)

MAX_BRUTE_FORCE_EDGES = 20
MAX_DP_TERMINALS = 16


def _check_reachable(graph: NetworkGraph, instance: ProblemInstance):
    component = graph.component_of(instance.source)
    for node in instance.destinations:
        if node not in component:
            raise InfeasibleError(
                f"destination {node} is unreachable from source {instance.source}", node=node)


class _UnionFind:
    def __init__(self):
        self.parent: Dict[int, int] = {}

    def find(self, x: int) -> int:
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def _is_steiner_tree(subset: Tuple[EdgeKey, ...], source: int, required: Set[int]) -> bool:
    """Subset is a tree containing source and all destinations, leaves all destinations"""
    if not subset:
        return not required
    uf = _UnionFind()
    degree: Dict[int, int] = {}
    for u, v in subset:
        if not uf.union(u, v):
            return False
        degree[u] = degree.get(u, 0) + 1
        degree[v] = degree.get(v, 0) + 1
    # acyclic with |nodes| = |edges| + 1 means connected
    if len(degree) != len(subset) + 1 or source not in degree:
        return False
    if not required.issubset(degree):
        return False
    return all(node in required for node, d in degree.items() if d == 1 and node != source)


def brute_force(instance: ProblemInstance, use_hub: bool = False) -> Solution:
    """
    Enumerate every edge subset and keep the cheapest valid multicast tree

    Ties go to fewer edges, then the lexicographically smallest edge list.

    Raises:
        BudgetExceededError: more than 20 edges
        InfeasibleError: a destination is unreachable
    """
    graph = instance.graph if use_hub else instance.graph.without_hub()
    if graph.edge_count > MAX_BRUTE_FORCE_EDGES:
        raise BudgetExceededError(
            f"brute force enumerates 2^|E| subsets; |E|={graph.edge_count} exceeds "
            f"{MAX_BRUTE_FORCE_EDGES}, use dreyfus_wagner instead")
    _check_reachable(graph, instance)

    required = set(instance.destinations)
    edges = sorted(graph.edges)
    best_key = None
    best_tree = MulticastTree.single(instance.source)
    # a tree on n nodes has at most n - 1 edges
    for size in range(0, min(len(edges), graph.node_count - 1) + 1):
        for subset in itertools.combinations(edges, size):
            if not _is_steiner_tree(subset, instance.source, required):
                continue
            tree = tree_from_edges(instance.source, subset, required)
            key = (tree_cost(graph, tree, instance.demands), size, subset)
            if best_key is None or key < best_key:
                best_key, best_tree = key, tree
    return Solution.from_tree(graph, best_tree, instance, "bruteforce")


@dataclass
class DpTable:
    """Filled Dreyfus-Wagner table; cost[mask][v] per terminal subset"""
    terminals: Tuple[int, ...]
    demands: Tuple[float, ...]
    cost: Dict[int, np.ndarray]
    grow_pred: Dict[int, np.ndarray]
    merge_split: Dict[int, np.ndarray]

    @property
    def full_mask(self) -> int:
        return (1 << len(self.terminals)) - 1

    def subtree_edges(self, mask: int, anchor: int) -> Set[EdgeKey]:
        """Edges of the table's tree for (mask, anchor)"""
        edges: Set[EdgeKey] = set()
        stack = [(mask, anchor)]
        while stack:
            m, v = stack.pop()
            u = int(self.grow_pred[m][v])
            if u != NO_PRED:
                edges.add(edge_key(u, v))
                stack.append((m, u))
                continue
            split = int(self.merge_split[m][v])
            if split > 0:
                stack.append((split, v))
                stack.append((m ^ split, v))
        return edges


def dreyfus_wagner_table(instance: ProblemInstance, graph: NetworkGraph) -> DpTable:
    """Fill the subset DP for all nonempty terminal subsets"""
    terminals = tuple(instance.destinations)
    demands = tuple(d for _, d in instance.demands)
    k = len(terminals)
    n = graph.node_count
    cost: Dict[int, np.ndarray] = {}
    grow_pred: Dict[int, np.ndarray] = {}
    merge_split: Dict[int, np.ndarray] = {}
    edge_counts: Dict[int, np.ndarray] = {}

    # submasks are numerically smaller, so plain numeric order is a valid schedule
    for mask in range(1, 1 << k):
        dist = np.full(n, np.inf)
        counts = np.zeros(n, dtype=np.int64)
        split_choice = np.zeros(n, dtype=np.int64)
        if mask & (mask - 1) == 0:
            dist[terminals[mask.bit_length() - 1]] = 0.0
        else:
            low = mask & -mask
            sub = (mask - 1) & mask
            while sub:
                # each unordered split once: the part holding the lowest terminal
                if sub & low:
                    candidate = cost[sub] + cost[mask ^ sub]
                    candidate_counts = edge_counts[sub] + edge_counts[mask ^ sub]
                    tie = np.isfinite(dist) & np.isclose(candidate, dist, rtol=TIE_TOLERANCE,
                                                         atol=TIE_TOLERANCE)
                    # equal cost goes to the split with fewer edges
                    better = np.where(tie, candidate_counts < counts, candidate < dist)
                    dist = np.where(better, np.minimum(candidate, dist), dist)
                    counts = np.where(better, candidate_counts, counts)
                    split_choice = np.where(better, sub, split_choice)
                sub = (sub - 1) & mask
        multiplier = max(d for i, d in enumerate(demands) if mask >> i & 1)
        grow_pred[mask] = grow(graph, dist, multiplier, edge_counts=counts)
        cost[mask] = dist
        merge_split[mask] = split_choice
        edge_counts[mask] = counts
    return DpTable(terminals=terminals, demands=demands, cost=cost,
                   grow_pred=grow_pred, merge_split=merge_split)


def dreyfus_wagner(instance: ProblemInstance, use_hub: bool = False) -> Solution:
    """
    Optimal multicast tree by the demand-weighted subset DP

    Equal-cost alternatives go to the one with fewer edges.

    Raises:
        BudgetExceededError: more than 16 destinations
        InfeasibleError: a destination is unreachable (names the node)
    """
    graph = instance.graph if use_hub else instance.graph.without_hub()
    k = instance.user_count
    if k > MAX_DP_TERMINALS:
        raise BudgetExceededError(
            f"DP state space is 3^K; K={k} exceeds {MAX_DP_TERMINALS}")
    if k == 0:
        return Solution.from_tree(graph, MulticastTree.single(instance.source), instance, "dp")
    _check_reachable(graph, instance)

    table = dreyfus_wagner_table(instance, graph)
    optimum = float(table.cost[table.full_mask][instance.source])
    edges = table.subtree_edges(table.full_mask, instance.source)
    tree = tree_from_edges(instance.source, edges, instance.destinations)
    solution = Solution.from_tree(graph, tree, instance, "dp")
    if solution.cost > optimum * (1 + 1e-9) + 1e-12:
        logger.warning("reconstructed tree costs %.6f, table optimum %.6f", solution.cost, optimum)
    return solution


class BruteForceSolver(BaseSolver):
    tag = "bruteforce"

    def solve_instance(self, instance: ProblemInstance) -> Solution:
        return brute_force(instance, use_hub=self.use_hub)


class DpSolver(BaseSolver):
    tag = "dp"

    def solve_instance(self, instance: ProblemInstance) -> Solution:
        return dreyfus_wagner(instance, use_hub=self.use_hub)

