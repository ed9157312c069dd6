"""
Heuristic baselines: Dijkstra with node reuse, sequential greedy attachment,
a permutation genetic algorithm and bee-colony optimization
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import InvalidConfigError
from ..core.flow_tree import (FlowAssignment, MulticastTree, compute_flows, flow_cost,
                              merge_path, validate_overlay)
from ..core.graph import DemandVector, NetworkGraph, ProblemInstance, solver_graph
from .base_solver import BaseSolver, Solution
from .paths import attach_path, shortest_path

logger = logging.getLogger(__name__)


def demand_order(instance: ProblemInstance) -> List[int]:
    """Destinations by demand descending, ties by node id"""
    return [node for node, _ in sorted(instance.demands, key=lambda item: (-item[1], item[0]))]


def dijkstra_reuse(instance: ProblemInstance, use_hub: bool = False) -> Solution:
    """
    Route each user on its own cheapest path from the source and overlay the
    paths; an edge is charged once at the largest demand crossing it

    The overlay is only reported as a tree when its support is one.
    """
    graph = solver_graph(instance, use_hub)
    flows: Dict[Tuple[int, int], float] = {}
    for node, demand in instance.demands:
        _, path = shortest_path(graph, node, instance.source)
        path.reverse()
        for parent, child in zip(path, path[1:]):
            flows[(parent, child)] = max(flows.get((parent, child), 0.0), demand)

    assignment = FlowAssignment(flows)
    tree: Optional[MulticastTree] = None
    report = validate_overlay(graph, assignment, instance.source, instance.demands)
    if report.is_tree:
        tree = MulticastTree(root=instance.source, parent={c: p for p, c in flows})
    else:
        logger.debug("overlay for seed %d is not a tree", instance.seed)
    return Solution(tree=tree, flows=assignment, cost=flow_cost(graph, assignment),
                    solver_tag="dijkstra")


def _upgrade_offsets(graph: NetworkGraph, tree: MulticastTree,
                     flows: FlowAssignment, demand: float) -> Dict[int, float]:
    """Cost of raising every edge above each tree node to `demand`"""
    offsets: Dict[int, float] = {tree.root: 0.0}
    pending = [tree.root]
    children = tree.children()
    while pending:
        node = pending.pop()
        for child in children[node]:
            current = flows.flows.get((node, child), 0.0)
            offsets[child] = offsets[node] + graph.cost(node, child) * max(0.0, demand - current)
            pending.append(child)
    return offsets


def greedy_tree(graph: NetworkGraph, instance: ProblemInstance, order: Sequence[int],
                initial_tree: Optional[MulticastTree] = None) -> MulticastTree:
    """Attach users one by one in `order` at the cheapest incremental cost"""
    tree = initial_tree or MulticastTree.single(instance.source)
    demands = instance.demands.as_dict()
    for node in order:
        if node in tree:
            continue
        served = [(v, demands[v]) for v in tree.nodes() if v in demands]
        flows = compute_flows(tree, DemandVector(tuple(sorted(served))))
        offsets = _upgrade_offsets(graph, tree, flows, demands[node])
        _, path = attach_path(graph, offsets, node, multiplier=demands[node])
        tree = merge_path(tree, path)
    return tree


def sequential_greedy(instance: ProblemInstance, order: Optional[Sequence[int]] = None,
                      initial_tree: Optional[MulticastTree] = None,
                      use_hub: bool = False) -> Solution:
    """
    Sequential attachment under the incremental metric e * max(0, x_k - f)

    Args:
        order: Attachment order (default: demand descending, ties by id)
        initial_tree: Frozen tree to extend; its edges are never changed
    """
    graph = solver_graph(instance, use_hub)
    if order is None:
        order = demand_order(instance)
    tree = greedy_tree(graph, instance, order, initial_tree)
    return Solution.from_tree(graph, tree, instance, "greedy")


@dataclass(frozen=True)
class GaConfig:
    """Permutation GA; the fitness of an order is its greedy attachment cost"""
    population: int = 50
    generations: int = 200
    crossover_rate: float = 0.9
    mutation_rate: float = 0.2
    tournament_size: int = 3
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.population < 2:
            raise InvalidConfigError(f"GA population must be >= 2, got {self.population}")
        if self.generations < 0:
            raise InvalidConfigError(f"GA generations must be >= 0, got {self.generations}")
        for name in ("crossover_rate", "mutation_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidConfigError(f"GA {name} must be in [0, 1], got {value}")
        if self.tournament_size < 1:
            raise InvalidConfigError(f"GA tournament_size must be >= 1, got {self.tournament_size}")


@dataclass(frozen=True)
class BcoConfig:
    """Employed / onlooker / scout bee colony over attachment orders"""
    colony_size: int = 30
    employed_fraction: float = 0.5
    scout_limit: int = 20
    iterations: int = 200
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.colony_size < 2:
            raise InvalidConfigError(f"BCO colony_size must be >= 2, got {self.colony_size}")
        if not 0.0 < self.employed_fraction < 1.0:
            raise InvalidConfigError(f"BCO employed_fraction must be in (0, 1), got {self.employed_fraction}")
        if self.scout_limit < 1:
            raise InvalidConfigError(f"BCO scout_limit must be >= 1, got {self.scout_limit}")
        if self.iterations < 0:
            raise InvalidConfigError(f"BCO iterations must be >= 0, got {self.iterations}")

    @property
    def employed(self) -> int:
        return min(self.colony_size - 1, max(1, round(self.colony_size * self.employed_fraction)))


class OrderFitness:
    """Memoized greedy cost of a destination order"""

    def __init__(self, instance: ProblemInstance, graph: NetworkGraph):
        self.instance = instance
        self.graph = graph
        self.destinations = list(instance.destinations)
        self._cache: Dict[Tuple[int, ...], Tuple[float, MulticastTree]] = {}
        self.evaluations = 0

    def __call__(self, perm: Sequence[int]) -> float:
        return self.evaluate(perm)[0]

    def evaluate(self, perm: Sequence[int]) -> Tuple[float, MulticastTree]:
        key = tuple(int(i) for i in perm)
        if key not in self._cache:
            self.evaluations += 1
            order = [self.destinations[i] for i in key]
            tree = greedy_tree(self.graph, self.instance, order)
            flows = compute_flows(tree, self.instance.demands)
            self._cache[key] = (flow_cost(self.graph, flows), tree)
        return self._cache[key]


def order_crossover(p1: np.ndarray, p2: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """OX: keep a slice of p1, fill the rest in p2's order starting after the slice"""
    k = len(p1)
    i, j = sorted(rng.choice(k + 1, size=2, replace=False))
    child = np.full(k, -1, dtype=np.int64)
    child[i:j] = p1[i:j]
    kept = set(child[i:j].tolist())
    fill = [g for g in np.roll(p2, -j) if g not in kept]
    slots = [(j + t) % k for t in range(k - (j - i))]
    for slot, gene in zip(slots, fill):
        child[slot] = gene
    return child


def swap_move(perm: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    out = perm.copy()
    a, b = rng.choice(len(perm), size=2, replace=False)
    out[a], out[b] = out[b], out[a]
    return out


def insert_move(perm: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    a, b = rng.choice(len(perm), size=2, replace=False)
    items = perm.tolist()
    gene = items.pop(a)
    items.insert(b, gene)
    return np.asarray(items, dtype=np.int64)


def _tournament(costs: List[float], size: int, rng: np.random.Generator) -> int:
    entrants = rng.choice(len(costs), size=min(size, len(costs)), replace=False)
    return int(min(entrants, key=lambda idx: (costs[idx], idx)))


def genetic_algorithm(instance: ProblemInstance, config: GaConfig = GaConfig(),
                      use_hub: bool = False) -> Solution:
    """Order-encoded GA with tournament selection, OX, swap mutation and elitism of 1"""
    graph = solver_graph(instance, use_hub)
    if instance.user_count <= 1:
        tree = greedy_tree(graph, instance, demand_order(instance))
        return Solution.from_tree(graph, tree, instance, "ga")

    rng = np.random.default_rng(config.seed)
    fitness = OrderFitness(instance, graph)
    k = instance.user_count
    population = [rng.permutation(k) for _ in range(config.population)]
    costs = [fitness(p) for p in population]
    best_idx = int(np.argmin(costs))
    best = population[best_idx].copy()
    best_cost = costs[best_idx]
    trace = [best_cost]

    for generation in range(config.generations):
        elite = population[int(np.argmin(costs))]
        offspring = [elite.copy()]
        while len(offspring) < config.population:
            p1 = population[_tournament(costs, config.tournament_size, rng)]
            p2 = population[_tournament(costs, config.tournament_size, rng)]
            child = order_crossover(p1, p2, rng) if rng.random() < config.crossover_rate else p1.copy()
            if rng.random() < config.mutation_rate:
                child = swap_move(child, rng)
            offspring.append(child)
        population = offspring
        costs = [fitness(p) for p in population]
        gen_best = int(np.argmin(costs))
        if costs[gen_best] < best_cost:
            best_cost = costs[gen_best]
            best = population[gen_best].copy()
        trace.append(best_cost)

    logger.debug("GA: %d generations, %d distinct evaluations, best %.4f",
                 config.generations, fitness.evaluations, best_cost)
    _, tree = fitness.evaluate(best)
    return Solution.from_tree(graph, tree, instance, "ga", trace=tuple(trace))


def exhausted_sources(trials: Sequence[int], scout_limit: int) -> List[int]:
    """Food sources abandoned to scouts: `scout_limit` stagnant trials reached"""
    return [i for i, count in enumerate(trials) if count >= scout_limit]


def bee_colony(instance: ProblemInstance, config: BcoConfig = BcoConfig(),
               use_hub: bool = False) -> Solution:
    """
    Bee colony over attachment orders

    Employed bees try one swap/insert neighbor of their food source, onlookers
    pick sources by inverse-cost roulette, and sources that fail to improve
    for `scout_limit` trials are replaced by random orders.
    """
    graph = solver_graph(instance, use_hub)
    if instance.user_count <= 1:
        tree = greedy_tree(graph, instance, demand_order(instance))
        return Solution.from_tree(graph, tree, instance, "bco")

    rng = np.random.default_rng(config.seed)
    fitness = OrderFitness(instance, graph)
    k = instance.user_count
    sources = [rng.permutation(k) for _ in range(config.employed)]
    costs = [fitness(s) for s in sources]
    trials = [0] * len(sources)
    best_idx = int(np.argmin(costs))
    best, best_cost = sources[best_idx].copy(), costs[best_idx]
    trace = [best_cost]

    def explore(i: int):
        move = swap_move if rng.random() < 0.5 else insert_move
        candidate = move(sources[i], rng)
        cost = fitness(candidate)
        if cost < costs[i]:
            sources[i], costs[i], trials[i] = candidate, cost, 0
        else:
            trials[i] += 1

    for _ in range(config.iterations):
        for i in range(len(sources)):
            explore(i)

        weights = 1.0 / (np.asarray(costs) + 1e-12)
        probs = weights / weights.sum()
        for _ in range(config.colony_size - config.employed):
            explore(int(rng.choice(len(sources), p=probs)))

        current = int(np.argmin(costs))
        if costs[current] < best_cost:
            best, best_cost = sources[current].copy(), costs[current]

        for i in exhausted_sources(trials, config.scout_limit):
            sources[i] = rng.permutation(k)
            costs[i] = fitness(sources[i])
            trials[i] = 0
        trace.append(best_cost)

    logger.debug("BCO: %d iterations, %d distinct evaluations, best %.4f",
                 config.iterations, fitness.evaluations, best_cost)
    _, tree = fitness.evaluate(best)
    return Solution.from_tree(graph, tree, instance, "bco", trace=tuple(trace))


class DijkstraSolver(BaseSolver):
    tag = "dijkstra"

    def solve_instance(self, instance: ProblemInstance) -> Solution:
        return dijkstra_reuse(instance, use_hub=self.use_hub)


class GreedySolver(BaseSolver):
    tag = "greedy"

    def __init__(self, use_hub: bool = False, initial_tree: Optional[MulticastTree] = None):
        super().__init__(use_hub)
        self.initial_tree = initial_tree

    def solve_instance(self, instance: ProblemInstance) -> Solution:
        return sequential_greedy(instance, initial_tree=self.initial_tree, use_hub=self.use_hub)


class GaSolver(BaseSolver):
    tag = "ga"

    def __init__(self, config: GaConfig = GaConfig(), use_hub: bool = False):
        super().__init__(use_hub)
        self.config = config

    def solve_instance(self, instance: ProblemInstance) -> Solution:
        return genetic_algorithm(instance, self.config, use_hub=self.use_hub)


class BcoSolver(BaseSolver):
    tag = "bco"

    def __init__(self, config: BcoConfig = BcoConfig(), use_hub: bool = False):
        super().__init__(use_hub)
        self.config = config

    def solve_instance(self, instance: ProblemInstance) -> Solution:
        return bee_colony(instance, self.config, use_hub=self.use_hub)
