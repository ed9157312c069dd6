"""
Node features exposing the routing state to a policy

Columns (all in [0, 1]):
  0 is_source           4 on_partial_path      8 user_index / max_user
  1 is_destination      5 is_current_node      9 degree / max degree
  2 own demand          6 is_active_user      10 is_virtual_hub
  3 in_inflow_set       7 active demand (broadcast)
Demands are divided by max(1, largest demand of the instance).
"""
from typing import Dict, Tuple

import numpy as np

from ..core.graph import NetworkGraph
from .env import RoutingState

FEATURE_NAMES: Tuple[str, ...] = (
    "is_source", "is_destination", "demand", "in_inflow", "on_path", "is_current",
    "is_active_user", "active_demand", "user_index", "degree", "is_hub",
)
FEATURE_DIM = len(FEATURE_NAMES)
MAX_USER = 20

_COL: Dict[str, int] = {name: i for i, name in enumerate(FEATURE_NAMES)}


def node_features(state: RoutingState, max_user: int = MAX_USER) -> np.ndarray:
    """(n, 11) float32 feature matrix for `state`"""
    graph = state.graph
    instance = state.instance
    n = graph.node_count
    x = np.zeros((n, FEATURE_DIM), dtype=np.float32)
    scale = max(1.0, instance.demands.max_demand)

    x[instance.source, _COL["is_source"]] = 1.0
    for node, demand in instance.demands:
        x[node, _COL["is_destination"]] = 1.0
        x[node, _COL["demand"]] = demand / scale
    x[list(state.inflow_set), _COL["in_inflow"]] = 1.0
    if not state.done:
        x[list(state.partial_path), _COL["on_path"]] = 1.0
        x[state.current_node, _COL["is_current"]] = 1.0
        x[state.active_user[0], _COL["is_active_user"]] = 1.0
        x[:, _COL["active_demand"]] = state.active_user[1] / scale
    x[:, _COL["user_index"]] = min(1.0, max(0, state.user_index) / max_user)

    degrees = np.array([graph.degree(v) for v in range(n)], dtype=np.float32)
    if degrees.max() > 0:
        x[:, _COL["degree"]] = degrees / degrees.max()
    if graph.hub_id is not None:
        x[graph.hub_id, _COL["is_hub"]] = 1.0
    return x


def adjacency_matrix(graph: NetworkGraph) -> np.ndarray:
    """Dense symmetric 0/1 adjacency without self loops"""
    adj = np.zeros((graph.node_count, graph.node_count), dtype=np.float32)
    if graph.edges:
        keys = np.array(list(graph.edges), dtype=np.int64)
        adj[keys[:, 0], keys[:, 1]] = 1.0
        adj[keys[:, 1], keys[:, 0]] = 1.0
    return adj
