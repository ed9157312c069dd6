"""
RoutingPolicy backed by the graph policy network
Decisions run without autograd; `replay_log_probs` recomputes them with
gradients from a recorded trajectory
"""
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch

from ..core.graph import NetworkGraph
from ..rl.env import RoutingState
from ..rl.features import adjacency_matrix, node_features
from ..rl.policy import RoutingPolicy
from ..rl.rollout import PolicyStep
from .model import GpnModel


class StateTensors:
    """Feature / adjacency tensors for states; only the latest graph's adjacency is cached"""

    def __init__(self, model: GpnModel):
        self.model = model
        self._cached: Optional[Tuple[NetworkGraph, torch.Tensor]] = None

    @property
    def dtype(self) -> torch.dtype:
        return next(self.model.parameters()).dtype

    def adjacency(self, graph: NetworkGraph) -> torch.Tensor:
        if self._cached is None or self._cached[0] is not graph:
            self._cached = (graph, torch.as_tensor(adjacency_matrix(graph), dtype=self.dtype))
        return self._cached[1]

    def features(self, state: RoutingState) -> torch.Tensor:
        return torch.as_tensor(node_features(state, self.model.config.max_user), dtype=self.dtype)

    def embeddings(self, state: RoutingState) -> torch.Tensor:
        return self.model.encode(self.features(state), self.adjacency(state.graph))

    def probabilities(self, state: RoutingState, actions: Sequence[int],
                      embeddings: Optional[torch.Tensor] = None) -> torch.Tensor:
        if embeddings is None:
            embeddings = self.embeddings(state)
        mask = torch.ones(state.graph.node_count, dtype=torch.bool)
        mask[list(actions)] = False
        path = torch.as_tensor(state.partial_path, dtype=torch.long)
        h, _ = self.model.aggregate(embeddings[path])
        return self.model.pointer(h, embeddings, mask)


class GpnPolicy(RoutingPolicy):
    """
    Greedy: argmax over valid actions (lowest id on ties); sample: draw from the rollout rng

    Holds per-episode embeddings, so one instance serves one rollout at a time.
    """

    def __init__(self, model: GpnModel):
        self.model = model
        self.tensors = StateTensors(model)
        self._episode_embeddings: Optional[torch.Tensor] = None

    def begin_episode(self, state: RoutingState):
        if self.model.config.encode_per_step:
            self._episode_embeddings = None
            return
        with torch.no_grad():
            self._episode_embeddings = self.tensors.embeddings(state)

    def select(self, state: RoutingState, actions: Sequence[int], greedy: bool,
               rng: np.random.Generator) -> Tuple[int, Optional[Any]]:
        with torch.no_grad():
            probs = self.tensors.probabilities(state, actions, self._episode_embeddings)
        valid = probs[list(actions)].double().numpy()
        if greedy:
            index = int(np.argmax(valid))
        else:
            index = int(rng.choice(len(actions), p=valid / valid.sum()))
        action = actions[index]
        return action, float(np.log(probs[action].item()))


def replay_log_probs(model: GpnModel, steps: List[PolicyStep]) -> List[torch.Tensor]:
    """log pi(a_t | s_t) for recorded decisions, with autograd"""
    tensors = StateTensors(model)
    episode_embeddings: Dict[int, torch.Tensor] = {}
    out: List[torch.Tensor] = []
    for step in steps:
        embeddings = None
        if not model.config.encode_per_step:
            if step.episode not in episode_embeddings:
                # the first recorded decision of an episode sees its start state
                episode_embeddings[step.episode] = tensors.embeddings(step.state)
            embeddings = episode_embeddings[step.episode]
        probs = tensors.probabilities(step.state, step.actions, embeddings)
        out.append(torch.log(probs[step.action]))
    return out
