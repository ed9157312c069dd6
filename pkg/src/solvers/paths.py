"""
Priority-queue shortest paths over a NetworkGraph
Multi-source with per-source start offsets and a uniform edge multiplier
"""
import heapq
from typing import Collection, List, Mapping, Optional, Tuple

import numpy as np

from ..core.errors import InfeasibleError
from ..core.graph import NetworkGraph

NO_PRED = -1
TIE_TOLERANCE = 1e-12


def is_tie(a: float, b: float) -> bool:
    """Equal costs up to summation-order rounding"""
    return abs(a - b) <= TIE_TOLERANCE * max(1.0, abs(a), abs(b))


def grow(graph: NetworkGraph, dist: np.ndarray, multiplier: float = 1.0,
         start_only: Optional[Collection[int]] = None,
         edge_counts: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Relax `dist` in place: dist[v] <- min(dist[v], dist[u] + multiplier * e(u, v))

    Every finite entry is a start. Nodes in `start_only` keep their start
    value and are never entered from a neighbor. With `edge_counts` (edges
    behind each start, updated in place) equal-cost routes prefer fewer edges.

    Returns:
        Predecessor array; NO_PRED where the start value survived
    """
    pred = np.full(graph.node_count, NO_PRED, dtype=np.int64)
    blocked = set(start_only or ())
    heap: List[Tuple[float, int]] = [(float(d), v) for v, d in enumerate(dist) if np.isfinite(d)]
    heapq.heapify(heap)
    done = np.zeros(graph.node_count, dtype=bool)

    while heap:
        d, u = heapq.heappop(heap)
        if done[u] or d > dist[u]:
            continue
        done[u] = True
        for v in graph.neighbors(u):
            if done[v] or v in blocked:
                continue
            candidate = d + multiplier * graph.cost(u, v)
            if edge_counts is not None and np.isfinite(dist[v]) and is_tie(candidate, dist[v]):
                if edge_counts[u] + 1 < edge_counts[v]:
                    edge_counts[v] = edge_counts[u] + 1
                    pred[v] = u
                    if candidate < dist[v]:
                        dist[v] = candidate
                        heapq.heappush(heap, (candidate, v))
                continue
            if candidate < dist[v]:
                dist[v] = candidate
                pred[v] = u
                if edge_counts is not None:
                    edge_counts[v] = edge_counts[u] + 1
                heapq.heappush(heap, (candidate, v))
    return pred


def walk_back(pred: np.ndarray, node: int) -> List[int]:
    """[node, pred[node], ...] up to the start the node was reached from"""
    path = [node]
    while pred[path[-1]] != NO_PRED:
        path.append(int(pred[path[-1]]))
    return path


def shortest_path(graph: NetworkGraph, start: int, target: int,
                  multiplier: float = 1.0) -> Tuple[float, List[int]]:
    """
    Cheapest path from `start` to `target`

    Returns:
        (cost, [start, ..., target])

    Raises:
        InfeasibleError: target unreachable
    """
    dist = np.full(graph.node_count, np.inf)
    dist[start] = 0.0
    pred = grow(graph, dist, multiplier)
    if not np.isfinite(dist[target]):
        raise InfeasibleError(f"node {target} is unreachable from {start}", node=target)
    return float(dist[target]), walk_back(pred, target)[::-1]


def attach_path(graph: NetworkGraph, offsets: Mapping[int, float], target: int,
                multiplier: float = 1.0) -> Tuple[float, List[int]]:
    """
    Cheapest way to connect `target` to any node in `offsets`, each start
    charged its offset; starts are never used as intermediate hops

    Returns:
        (cost, [target, ..., attachment node])
    """
    if target in offsets:
        return float(offsets[target]), [target]
    dist = np.full(graph.node_count, np.inf)
    for node, offset in offsets.items():
        dist[node] = offset
    pred = grow(graph, dist, multiplier, start_only=offsets.keys())
    if not np.isfinite(dist[target]):
        raise InfeasibleError(f"destination {target} cannot reach the tree", node=target)
    return float(dist[target]), walk_back(pred, target)
