"""
Network instances for demand-aware multicast routing
Graph model, demand vectors, seeded instance generation and the virtual hub
"""
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Set, Tuple, Union

import networkx as nx
import numpy as np

from .errors import GenerationError, InvalidConfigError

EdgeKey = Tuple[int, int]

# Demand levels for high / medium / low quality users
DEMAND_LEVELS: Tuple[float, ...] = (1.0, 0.5, 0.25)
HUB_EDGE_COST = 10.0
EDGE_COST_RANGE = (0.1, 1.0)
MAX_REGULAR_RETRIES = 1000

TOPOLOGIES = ("random-regular", "erdos-renyi", "average-degree")


def edge_key(u: int, v: int) -> EdgeKey:
    """Canonical (low, high) key of an undirected edge"""
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class NetworkGraph:
    """
    Undirected weighted graph with dense integer node ids 0..node_count-1

    `edges` maps canonical (low, high) pairs to the unit transmission cost.
    When `hub_id` is set, that node is the virtual hub and is adjacent to
    every other node.
    """
    node_count: int
    edges: Dict[EdgeKey, float]
    hub_id: Optional[int] = None
    _adjacency: Tuple[Tuple[int, ...], ...] = field(
        init=False, repr=False, compare=False, default=())

    def __post_init__(self):
        if self.node_count < 1:
            raise InvalidConfigError(f"node_count must be positive, got {self.node_count}")

        normalized: Dict[EdgeKey, float] = {}
        neighbors: List[Set[int]] = [set() for _ in range(self.node_count)]
        for (u, v), cost in sorted(self.edges.items()):
            if u == v:
                raise InvalidConfigError(f"self-loop on node {u}")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise InvalidConfigError(f"edge ({u}, {v}) references an unknown node")
            key = edge_key(u, v)
            if key in normalized:
                raise InvalidConfigError(f"duplicate edge {key}")
            cost = float(cost)
            if not math.isfinite(cost) or cost < 0:
                raise InvalidConfigError("negative edge cost" if cost < 0 else f"non-finite edge cost on {key}")
            normalized[key] = cost
            neighbors[u].add(v)
            neighbors[v].add(u)

        if self.hub_id is not None:
            if self.hub_id != self.node_count - 1:
                raise InvalidConfigError(
                    f"hub must be the highest node id {self.node_count - 1}, got {self.hub_id}")
            if len(neighbors[self.hub_id]) != self.node_count - 1:
                raise InvalidConfigError("virtual hub must be adjacent to every other node")

        object.__setattr__(self, "edges", dict(sorted(normalized.items())))
        object.__setattr__(self, "_adjacency", tuple(tuple(sorted(n)) for n in neighbors))

    @property
    def has_virtual_hub(self) -> bool:
        return self.hub_id is not None

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def nodes(self) -> range:
        return range(self.node_count)

    def neighbors(self, node: int) -> Tuple[int, ...]:
        """Sorted neighbors of a node"""
        return self._adjacency[node]

    def degree(self, node: int) -> int:
        return len(self._adjacency[node])

    def has_edge(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self.edges

    def cost(self, u: int, v: int) -> float:
        """Unit transmission cost of edge (u, v); KeyError if absent"""
        return self.edges[edge_key(u, v)]

    def is_hub(self, node: int) -> bool:
        return self.hub_id is not None and node == self.hub_id

    def without_hub(self) -> "NetworkGraph":
        """Same graph with the virtual hub (and its edges) removed"""
        if self.hub_id is None:
            return self
        hub = self.hub_id
        kept = {key: cost for key, cost in self.edges.items() if hub not in key}
        # the hub is always the highest id, so the remaining ids stay dense
        return NetworkGraph(node_count=self.node_count - 1, edges=kept)

    def to_networkx(self) -> nx.Graph:
        """networkx view with the edge cost under the `cost` attribute"""
        graph = nx.Graph()
        graph.add_nodes_from(range(self.node_count))
        graph.add_weighted_edges_from(((u, v, c) for (u, v), c in self.edges.items()), weight="cost")
        return graph

    def component_of(self, node: int) -> Set[int]:
        """Nodes connected to `node`"""
        return set(nx.node_connected_component(self.to_networkx(), node))


@dataclass(frozen=True)
class DemandVector:
    """Ordered (destination, demand) pairs"""
    entries: Tuple[Tuple[int, float], ...] = ()

    def __post_init__(self):
        entries = tuple((int(node), float(demand)) for node, demand in self.entries)
        seen: Set[int] = set()
        for node, demand in entries:
            if node in seen:
                raise InvalidConfigError(f"destination {node} listed twice")
            if not demand > 0 or not math.isfinite(demand):
                raise InvalidConfigError(f"demand of destination {node} must be positive, got {demand}")
            seen.add(node)
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Tuple[int, float]]:
        return iter(self.entries)

    @property
    def destinations(self) -> Tuple[int, ...]:
        return tuple(node for node, _ in self.entries)

    def as_dict(self) -> Dict[int, float]:
        return dict(self.entries)

    def demand_of(self, node: int) -> float:
        for dest, demand in self.entries:
            if dest == node:
                return demand
        raise KeyError(node)

    @property
    def max_demand(self) -> float:
        return max((d for _, d in self.entries), default=0.0)

    def scaled(self, factor: float) -> "DemandVector":
        return DemandVector(tuple((node, demand * factor) for node, demand in self.entries))


@dataclass(frozen=True)
class ProblemInstance:
    """A routing problem: graph, source node and per-destination demands"""
    graph: NetworkGraph
    source: int
    demands: DemandVector
    seed: int = 0

    def __post_init__(self):
        n = self.graph.node_count
        if not 0 <= self.source < n:
            raise InvalidConfigError(f"source {self.source} is not a node")
        if self.graph.is_hub(self.source):
            raise InvalidConfigError("the virtual hub cannot be the source")
        for node in self.demands.destinations:
            if not 0 <= node < n:
                raise InvalidConfigError(f"destination {node} is not a node")
            if node == self.source:
                raise InvalidConfigError("a destination cannot be the source")
            if self.graph.is_hub(node):
                raise InvalidConfigError("the virtual hub cannot be a destination")

    @property
    def destinations(self) -> Tuple[int, ...]:
        return self.demands.destinations

    @property
    def user_count(self) -> int:
        return len(self.demands)

    def relay_nodes(self) -> List[int]:
        """Nodes that are neither source, destination nor hub"""
        used = set(self.demands.destinations) | {self.source}
        return [v for v in self.graph.nodes() if v not in used and not self.graph.is_hub(v)]

    def with_added_users(self, extra: Sequence[Tuple[int, float]]) -> "ProblemInstance":
        """Copy of the instance with more destinations appended"""
        demands = DemandVector(self.demands.entries + tuple(extra))
        return replace(self, demands=demands)

    def with_demands(self, demands: DemandVector) -> "ProblemInstance":
        return replace(self, demands=demands)


@dataclass(frozen=True)
class GenConfig:
    """
    Random instance recipe

    topology is one of:
      random-regular  every node has exactly `degree` neighbors
      erdos-renyi     each pair is an edge with probability `p`
      average-degree  Erdos-Renyi with p = avg_degree / (n - 1)
    """
    topology: str = "random-regular"
    node_count: int = 30
    user_count: int = 12
    degree: Optional[int] = 4
    p: Optional[float] = None
    avg_degree: Optional[float] = None
    demand_rule: Union[str, Tuple[float, ...]] = "thirds"
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.demand_rule, list):
            object.__setattr__(self, "demand_rule", tuple(self.demand_rule))
        self.validate()

    def validate(self):
        if self.topology not in TOPOLOGIES:
            raise InvalidConfigError(f"unknown topology {self.topology!r}; expected one of {TOPOLOGIES}")
        n = self.node_count
        if n < 1:
            raise InvalidConfigError("node_count must be positive")
        if not 1 <= self.user_count <= n - 1:
            raise InvalidConfigError(f"user_count must be in [1, {n - 1}] for {n} nodes, got {self.user_count}")
        if self.topology == "random-regular":
            d = self.degree
            if d is None or not 0 <= d < n:
                raise InvalidConfigError(f"random-regular needs 0 <= degree < node_count, got degree={d}")
            if (n * d) % 2 != 0:
                raise InvalidConfigError(
                    f"random-regular graph needs node_count * degree even (got {n} * {d} = {n * d})")
        elif self.topology == "erdos-renyi":
            if self.p is None or not 0 < self.p <= 1:
                raise InvalidConfigError(f"erdos-renyi needs p in (0, 1], got {self.p}")
        else:
            if self.avg_degree is None or self.avg_degree < 2:
                raise InvalidConfigError(f"average-degree needs avg_degree >= 2, got {self.avg_degree}")
            if n < 2 or self.avg_degree / (n - 1) > 1:
                raise InvalidConfigError(f"avg_degree {self.avg_degree} is too large for {n} nodes")
        if isinstance(self.demand_rule, str):
            if self.demand_rule != "thirds":
                raise InvalidConfigError(f"unknown demand rule {self.demand_rule!r}")
        else:
            if len(self.demand_rule) != self.user_count:
                raise InvalidConfigError(
                    f"explicit demand list has {len(self.demand_rule)} entries for {self.user_count} users")
            if any(not d > 0 for d in self.demand_rule):
                raise InvalidConfigError("explicit demands must be positive")

    @property
    def edge_probability(self) -> Optional[float]:
        if self.topology == "erdos-renyi":
            return self.p
        if self.topology == "average-degree":
            return float(self.avg_degree) / (self.node_count - 1)
        return None


def assign_demands(user_count: int) -> List[float]:
    """
    Demand levels by thirds: 1.0 for the first third of users, 0.5 for the
    middle third and 0.25 for the rest (boundaries rounded up)

    Args:
        user_count: Number of users K (>= 1)

    Returns:
        List of K demand levels
    """
    if user_count < 1:
        raise InvalidConfigError("user_count must be at least 1")
    first = math.ceil(user_count / 3)
    second = math.ceil(2 * user_count / 3)
    levels = []
    for i in range(user_count):
        if i < first:
            levels.append(DEMAND_LEVELS[0])
        elif i < second:
            levels.append(DEMAND_LEVELS[1])
        else:
            levels.append(DEMAND_LEVELS[2])
    return levels


def _random_regular_edges(n: int, d: int, rng: np.random.Generator) -> List[EdgeKey]:
    """Pairing model; leftover stubs are re-paired until a simple graph forms"""
    if d == 0:
        return []

    def suitable(edges: Set[EdgeKey], potential: Mapping[int, int]) -> bool:
        if not potential:
            return True
        for s1 in potential:
            for s2 in potential:
                if s1 == s2:
                    break
                if edge_key(s1, s2) not in edges:
                    return True
        return False

    def try_creation() -> Optional[Set[EdgeKey]]:
        edges: Set[EdgeKey] = set()
        stubs = list(range(n)) * d
        while stubs:
            potential: Dict[int, int] = defaultdict(int)
            rng.shuffle(stubs)
            it = iter(stubs)
            for s1, s2 in zip(it, it):
                key = edge_key(s1, s2)
                if s1 != s2 and key not in edges:
                    edges.add(key)
                else:
                    potential[s1] += 1
                    potential[s2] += 1
            if not suitable(edges, potential):
                return None
            stubs = [node for node, count in potential.items() for _ in range(count)]
        return edges

    for _ in range(MAX_REGULAR_RETRIES):
        edges = try_creation()
        if edges is not None:
            return sorted(edges)
    raise GenerationError(
        f"random-regular sampler failed after {MAX_REGULAR_RETRIES} retries (n={n}, d={d})")


def _gnp_edges(n: int, p: float, rng: np.random.Generator) -> List[EdgeKey]:
    rows, cols = np.triu_indices(n, k=1)
    keep = rng.random(rows.shape[0]) < p
    return [(int(u), int(v)) for u, v in zip(rows[keep], cols[keep])]


def generate_instance(config: GenConfig) -> ProblemInstance:
    """
    Sample a problem instance; a pure function of `config` (seed included)

    Source is node 0, destinations are drawn without replacement from the
    remaining nodes and edge costs are uniform on [0.1, 1.0].
    """
    rng = np.random.default_rng(config.seed)
    n = config.node_count

    if config.topology == "random-regular":
        keys = _random_regular_edges(n, int(config.degree), rng)
    else:
        keys = _gnp_edges(n, float(config.edge_probability), rng)

    low, high = EDGE_COST_RANGE
    costs = rng.uniform(low, high, size=len(keys))
    graph = NetworkGraph(node_count=n, edges={key: float(c) for key, c in zip(keys, costs)})

    source = 0
    chosen = rng.choice(np.arange(1, n), size=config.user_count, replace=False)
    if isinstance(config.demand_rule, str):
        levels = assign_demands(config.user_count)
    else:
        levels = list(config.demand_rule)
    demands = DemandVector(tuple((int(node), float(level)) for node, level in zip(chosen, levels)))
    return ProblemInstance(graph=graph, source=source, demands=demands, seed=int(config.seed))


def attach_virtual_hub(instance: ProblemInstance) -> ProblemInstance:
    """
    Add a node adjacent to every existing node with edge cost 10

    Raises:
        InvalidConfigError: the instance already has a hub
    """
    graph = instance.graph
    if graph.has_virtual_hub:
        raise InvalidConfigError("virtual hub already attached")
    hub = graph.node_count
    edges = dict(graph.edges)
    for v in graph.nodes():
        edges[(v, hub)] = HUB_EDGE_COST
    hub_graph = NetworkGraph(node_count=graph.node_count + 1, edges=edges, hub_id=hub)
    return replace(instance, graph=hub_graph)


def solver_graph(instance: ProblemInstance, use_hub: bool) -> NetworkGraph:
    """Graph a solver works on: hub edges are dropped unless `use_hub`"""
    if use_hub:
        return instance.graph
    return instance.graph.without_hub()


def sample_added_users(instance: ProblemInstance, count: int,
                       rng: np.random.Generator) -> List[Tuple[int, float]]:
    """Draw `count` new destinations among relay nodes, demand levels uniform"""
    relays = instance.relay_nodes()
    if count > len(relays):
        raise GenerationError(f"cannot add {count} users: only {len(relays)} relay nodes left")
    nodes = rng.choice(np.asarray(relays), size=count, replace=False)
    levels = rng.choice(np.asarray(DEMAND_LEVELS), size=count)
    return [(int(v), float(x)) for v, x in zip(nodes, levels)]
