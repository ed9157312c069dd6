"""
Multicast tree model and flow semantics
Per-edge flow is the largest demand found downstream of the edge; the
objective is the cost-weighted sum of those flows
"""
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .errors import CycleError, TreeError
from .graph import DemandVector, NetworkGraph, edge_key

DirectedEdge = Tuple[int, int]  # (parent, child)


@dataclass(frozen=True)
class MulticastTree:
    """
    Source-rooted tree stored as a child -> parent map

    The constructor accepts any map so that broken trees can be
    represented and reported by `validate`.
    """
    root: int
    parent: Dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "parent", {int(c): int(p) for c, p in sorted(self.parent.items())})

    @classmethod
    def single(cls, root: int) -> "MulticastTree":
        return cls(root=root)

    def nodes(self) -> Set[int]:
        included = {self.root}
        included.update(self.parent.keys())
        included.update(self.parent.values())
        return included

    def __contains__(self, node: int) -> bool:
        return node == self.root or node in self.parent or node in self.parent.values()

    @property
    def edge_count(self) -> int:
        return len(self.parent)

    def edges(self) -> List[DirectedEdge]:
        """(parent, child) pairs sorted by child"""
        return [(p, c) for c, p in self.parent.items()]

    def undirected_edges(self) -> List[Tuple[int, int]]:
        return sorted(edge_key(p, c) for p, c in self.edges())

    def children(self) -> Dict[int, List[int]]:
        result: Dict[int, List[int]] = {v: [] for v in self.nodes()}
        for c, p in self.parent.items():
            result[p].append(c)
        for kids in result.values():
            kids.sort()
        return result

    def leaves(self) -> List[int]:
        """Non-root nodes without children"""
        kids = self.children()
        return sorted(v for v, ch in kids.items() if not ch and v != self.root)

    def path_to_root(self, node: int) -> List[int]:
        """Nodes from `node` up to the root, both included"""
        path = [node]
        seen = {node}
        current = node
        while current != self.root:
            if current not in self.parent:
                raise TreeError(f"node {current} has no route to root {self.root}")
            current = self.parent[current]
            if current in seen:
                raise CycleError(f"cycle through node {current}")
            seen.add(current)
            path.append(current)
        return path


@dataclass(frozen=True)
class FlowAssignment:
    """Flow carried on each directed (parent, child) edge"""
    flows: Dict[DirectedEdge, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "flows", dict(sorted(self.flows.items())))

    def inflow(self, node: int) -> float:
        return max((f for (_, c), f in self.flows.items() if c == node), default=0.0)

    def max_outflow(self, node: int) -> float:
        return max((f for (p, _), f in self.flows.items() if p == node), default=0.0)

    def __len__(self) -> int:
        return len(self.flows)


@dataclass
class ValidationReport:
    """Outcome of a feasibility / structure check"""
    is_tree: bool = True
    is_rooted_connected: bool = True
    leaves_are_destinations: bool = True
    demands_satisfied: bool = True
    conservation_holds: bool = True
    edges_exist: bool = True
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def fail(self, flag: str, message: str):
        setattr(self, flag, False)
        self.violations.append(message)


def compute_flows(tree: MulticastTree, demands: DemandVector) -> FlowAssignment:
    """
    Flow on (p -> c) is the max demand among destinations in c's subtree;
    edges with no destination below them carry nothing and are left out

    Raises:
        TreeError: a destination is not in the tree
    """
    members = tree.nodes()
    missing = [node for node in demands.destinations if node not in members]
    if missing:
        raise TreeError(f"destinations missing from tree: {missing}")

    flows: Dict[DirectedEdge, float] = {}
    for node, demand in demands:
        path = tree.path_to_root(node)
        for child, parent in zip(path, path[1:]):
            key = (parent, child)
            if flows.get(key, 0.0) < demand:
                flows[key] = demand
    return FlowAssignment(flows)


def _check_edges(graph: NetworkGraph, tree: MulticastTree):
    for p, c in tree.edges():
        if not graph.has_edge(p, c):
            raise TreeError(f"tree edge ({p}, {c}) is not in the graph")


def tree_cost(graph: NetworkGraph, tree: MulticastTree, demands: DemandVector) -> float:
    """Sum of e(p, c) * flow(p, c) over the tree (hub edges cost 10)"""
    _check_edges(graph, tree)
    flows = compute_flows(tree, demands)
    return flow_cost(graph, flows)


def flow_cost(graph: NetworkGraph, flows: FlowAssignment) -> float:
    return math.fsum(graph.cost(p, c) * f for (p, c), f in flows.flows.items())


def level_decomposition_cost(graph: NetworkGraph, tree: MulticastTree,
                             demands: DemandVector) -> float:
    """
    Independent evaluation of the tree cost: for each distinct demand level,
    pay the level increment on every edge of the subtree that reaches all
    destinations at or above that level

    Both this and tree_cost sum exact products with fsum, so for demand
    levels whose increments are powers of two the results agree bit for bit.
    """
    _check_edges(graph, tree)
    members = tree.nodes()
    missing = [node for node in demands.destinations if node not in members]
    if missing:
        raise TreeError(f"destinations missing from tree: {missing}")

    terms: List[float] = []
    previous = 0.0
    for level in sorted({d for _, d in demands}):
        edges: Set[DirectedEdge] = set()
        for node, demand in demands:
            if demand >= level:
                path = tree.path_to_root(node)
                edges.update((p, c) for c, p in zip(path, path[1:]))
        step = level - previous
        terms.extend(step * graph.cost(p, c) for p, c in edges)
        previous = level
    return math.fsum(terms)


def merge_path(tree: MulticastTree, path: Sequence[int]) -> MulticastTree:
    """
    Attach a path [new node, ..., tree node] to the tree; every path node
    takes the next one as its parent

    Raises:
        TreeError: path is empty, does not end on the tree, or touches the
            tree before its last node
    """
    if not path:
        raise TreeError("cannot merge an empty path")
    attach = path[-1]
    if attach not in tree:
        raise TreeError(f"path must end on the tree, ends at {attach}")
    if len(path) == 1:
        return tree

    seen: Set[int] = set()
    for node in path[:-1]:
        if node in tree:
            raise TreeError(f"path touches the tree at node {node} before its last node")
        if node in seen:
            raise TreeError(f"path visits node {node} twice")
        seen.add(node)

    parent = dict(tree.parent)
    for child, up in zip(path, path[1:]):
        parent[child] = up
    return MulticastTree(root=tree.root, parent=parent)


def tree_from_edges(root: int, edges: Iterable[Tuple[int, int]],
                    destinations: Iterable[int]) -> MulticastTree:
    """
    Orient an undirected edge set away from `root` (BFS, lowest id first) and
    prune branches that end in a non-destination
    """
    adjacency: Dict[int, Set[int]] = {}
    for u, v in edges:
        adjacency.setdefault(u, set()).add(v)
        adjacency.setdefault(v, set()).add(u)

    parent: Dict[int, int] = {}
    visited = {root}
    queue = deque([root])
    while queue:
        node = queue.popleft()
        for nxt in sorted(adjacency.get(node, ())):
            if nxt not in visited:
                visited.add(nxt)
                parent[nxt] = node
                queue.append(nxt)
    return prune_relay_leaves(MulticastTree(root=root, parent=parent), destinations)


def prune_relay_leaves(tree: MulticastTree, destinations: Iterable[int]) -> MulticastTree:
    """Repeatedly drop leaves that are not destinations"""
    keep = set(destinations)
    parent = dict(tree.parent)
    child_count: Dict[int, int] = {}
    for p in parent.values():
        child_count[p] = child_count.get(p, 0) + 1

    stack = [c for c in parent if child_count.get(c, 0) == 0 and c not in keep]
    while stack:
        leaf = stack.pop()
        up = parent.pop(leaf)
        child_count[up] -= 1
        if child_count[up] == 0 and up != tree.root and up not in keep:
            stack.append(up)
    return MulticastTree(root=tree.root, parent=parent)


def _lenient_flows(tree: MulticastTree, demands: DemandVector) -> FlowAssignment:
    """Downstream-max flows over the destinations that do reach the root"""
    flows: Dict[DirectedEdge, float] = {}
    for node, demand in demands:
        if node not in tree:
            continue
        try:
            path = tree.path_to_root(node)
        except TreeError:
            continue
        for child, parent in zip(path, path[1:]):
            if flows.get((parent, child), 0.0) < demand:
                flows[(parent, child)] = demand
    return FlowAssignment(flows)


def validate(graph: NetworkGraph, tree: MulticastTree, source: int, demands: DemandVector,
             flows: Optional[FlowAssignment] = None) -> ValidationReport:
    """
    Check structure and feasibility of a tree; never raises

    When `flows` is omitted the flows implied by the tree are used, so the
    flow checks then only fail for structural reasons.
    """
    report = ValidationReport()
    destinations = set(demands.destinations)

    if tree.root in tree.parent:
        report.fail("is_tree", f"root {tree.root} has a parent")

    # cycle / root reachability
    for node in sorted(tree.nodes()):
        try:
            tree.path_to_root(node)
        except CycleError as exc:
            if report.is_tree:
                report.fail("is_tree", f"parent map is cyclic ({exc})")
        except TreeError as exc:
            report.fail("is_rooted_connected", str(exc))
    if tree.root != source:
        report.fail("is_rooted_connected", f"tree is rooted at {tree.root}, source is {source}")
    if not report.is_tree:
        report.is_rooted_connected = False if tree.parent else report.is_rooted_connected

    for p, c in tree.edges():
        if not graph.has_edge(p, c):
            report.fail("edges_exist", f"edge ({p}, {c}) is not in the graph")

    for leaf in tree.leaves():
        if leaf not in destinations:
            report.fail("leaves_are_destinations", f"leaf {leaf} is a relay node")

    if flows is None:
        flows = _lenient_flows(tree, demands)

    members = tree.nodes()
    for node, demand in demands:
        if node not in members:
            report.fail("demands_satisfied", f"destination {node} is not in the tree")
        elif flows.inflow(node) < demand:
            report.fail("demands_satisfied",
                        f"destination {node} receives {flows.inflow(node)} < demand {demand}")
    if len(demands) and flows.max_outflow(source) < demands.max_demand:
        report.fail("demands_satisfied",
                    f"source outflow {flows.max_outflow(source)} below max demand {demands.max_demand}")

    for (p, c), f in flows.flows.items():
        if not f > 0:
            report.fail("conservation_holds", f"non-positive flow {f} on ({p}, {c})")
        if tree.parent.get(c) != p:
            report.fail("conservation_holds", f"flow on ({p}, {c}) which is not a tree edge")
    for node in sorted(members - {source}):
        outflow = flows.max_outflow(node)
        if outflow > flows.inflow(node):
            report.fail("conservation_holds",
                        f"node {node} sends {outflow} but receives {flows.inflow(node)}")
    return report


def validate_overlay(graph: NetworkGraph, flows: FlowAssignment, source: int,
                     demands: DemandVector) -> ValidationReport:
    """
    Validate a flow support that may not be a tree; `is_tree` is reported
    but callers decide whether it is required
    """
    report = ValidationReport()
    incoming: Dict[int, List[int]] = {}
    outgoing: Dict[int, List[int]] = {}
    for (p, c), f in flows.flows.items():
        if not graph.has_edge(p, c):
            report.fail("edges_exist", f"edge ({p}, {c}) is not in the graph")
        if not f > 0:
            report.fail("conservation_holds", f"non-positive flow {f} on ({p}, {c})")
        incoming.setdefault(c, []).append(p)
        outgoing.setdefault(p, []).append(c)

    nodes = set(incoming) | set(outgoing) | {source}
    reached = {source}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        for nxt in sorted(outgoing.get(node, ())):
            if nxt not in reached:
                reached.add(nxt)
                queue.append(nxt)
    unreached = sorted(nodes - reached)
    if unreached:
        report.fail("is_rooted_connected", f"nodes not reachable from source: {unreached}")

    shared = sorted(v for v, ps in incoming.items() if len(ps) > 1)
    if shared or source in incoming or len(flows) != len(reached) - 1:
        report.fail("is_tree", f"flow support is not a tree (multi-parent nodes: {shared})")

    destinations = set(demands.destinations)
    for node in sorted(nodes - {source}):
        if node not in outgoing and node not in destinations:
            report.fail("leaves_are_destinations", f"leaf {node} is a relay node")
        if flows.max_outflow(node) > flows.inflow(node):
            report.fail("conservation_holds", f"node {node} sends more than it receives")
    for node, demand in demands:
        if flows.inflow(node) < demand:
            report.fail("demands_satisfied",
                        f"destination {node} receives {flows.inflow(node)} < demand {demand}")
    return report
