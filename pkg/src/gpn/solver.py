"""
Greedy GPN inference behind the solver interface
"""
import logging
from pathlib import Path
from typing import Optional, Union

from ..core.errors import InfeasibleError
from ..core.flow_tree import MulticastTree
from ..core.graph import ProblemInstance
from ..rl.env import EnvConfig
from ..rl.rollout import rollout
from ..solvers.base_solver import BaseSolver, Solution
from .checkpoint import load_model
from .model import GpnModel
from .policy import GpnPolicy

logger = logging.getLogger(__name__)


class GpnSolver(BaseSolver):
    tag = "gpn"

    def __init__(self, model: GpnModel, use_hub: bool = True,
                 initial_tree: Optional[MulticastTree] = None, mode: str = "greedy", seed: int = 0):
        """
        Args:
            model: Trained network, switched to eval mode
            use_hub: Let the environment fall back on virtual hub edges
            initial_tree: Frozen tree for incremental routing
            mode: "greedy" (deterministic) or "sample"
        """
        super().__init__(use_hub)
        self.model = model.eval()
        self.env_config = EnvConfig(use_virtual_hub=use_hub)
        self.initial_tree = initial_tree
        self.mode = mode
        self.seed = seed

    @classmethod
    def from_checkpoint(cls, path: Union[str, Path], **kwargs) -> "GpnSolver":
        return cls(load_model(path), **kwargs)

    def solve_instance(self, instance: ProblemInstance) -> Solution:
        # policies carry episode state, one per solve
        result = rollout(GpnPolicy(self.model), instance, self.env_config, mode=self.mode, seed=self.seed,
                         initial_tree=self.initial_tree)
        if not result.feasible:
            raise InfeasibleError("GPN rollout hit a dead end")
        if result.forced_episodes:
            logger.debug("%d episodes finished through the hub", result.forced_episodes)
        return Solution.from_tree(result.instance.graph, result.tree, result.instance, self.tag)
