"""
Routing Policy Interface
Defines the contract that all policies driving the routing environment follow.
"""
import math
from abc import ABC, abstractmethod
from typing import Any, Optional, Sequence, Tuple

import numpy as np

from .env import RoutingState


class RoutingPolicy(ABC):
    """Abstract base class for next-hop policies"""

    def begin_episode(self, state: RoutingState):
        """Hook called when a new user becomes active"""

    @abstractmethod
    def select(self, state: RoutingState, actions: Sequence[int], greedy: bool,
               rng: np.random.Generator) -> Tuple[int, Optional[Any]]:
        """
        Choose the next hop

        Args:
            state: Current environment state
            actions: Valid actions (nonempty, sorted)
            greedy: Take the most probable action instead of sampling
            rng: Sampling stream owned by the rollout

        Returns:
            (action, log-probability of the action, or None when untracked)
        """
        pass


class RandomPolicy(RoutingPolicy):
    """Uniform over valid actions; greedy mode takes the lowest node id"""

    def select(self, state: RoutingState, actions: Sequence[int], greedy: bool,
               rng: np.random.Generator) -> Tuple[int, Optional[Any]]:
        if greedy:
            return actions[0], 0.0
        choice = int(rng.integers(len(actions)))
        return actions[choice], -math.log(len(actions))
