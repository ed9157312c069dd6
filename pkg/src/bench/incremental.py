"""
Incremental user arrival: extend a frozen tree (warm) versus re-solving the
enlarged instance from scratch (cold)
"""
import logging
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..core.errors import InfeasibleError, InvalidConfigError, TreeError
from ..core.flow_tree import MulticastTree
from ..core.graph import ProblemInstance, sample_added_users
from ..gpn.solver import GpnSolver
from ..solvers import BaseSolver, GreedySolver
from .runner import ResultRow, SuiteRunner, attempt_solve, solve_row
from .suites import SuiteConfig, SuitePoint, point_instances, suite_points

logger = logging.getLogger(__name__)

WARM_CAPABLE = ("greedy", "gpn")
# keeps added-user draws apart from instance seeds
ADDED_USERS_STREAM = 1_000_003


def assert_tree_preserved(before: MulticastTree, after: MulticastTree):
    """
    Raises:
        TreeError: a pre-existing tree edge was removed or re-parented
    """
    if after.root != before.root:
        raise TreeError(f"root changed from {before.root} to {after.root}")
    for parent, child in before.edges():
        if after.parent.get(child) != parent:
            raise TreeError(f"pre-existing edge ({parent}, {child}) was modified")


def warm_solver(solver: BaseSolver, base_tree: MulticastTree) -> BaseSolver:
    """Same solver, routing only users that are not yet on `base_tree`"""
    if isinstance(solver, GpnSolver):
        return GpnSolver(solver.model, use_hub=solver.use_hub, initial_tree=base_tree,
                         mode=solver.mode, seed=solver.seed)
    if isinstance(solver, GreedySolver):
        return GreedySolver(use_hub=solver.use_hub, initial_tree=base_tree)
    raise InvalidConfigError(f"{solver.tag} cannot extend an existing tree")


class IncrementalRunner(SuiteRunner):
    """
    Per base instance: solve the base users once with each warm-capable
    solver, then for every added-user count record `<tag>-warm` rows (only the
    new users are routed onto the frozen tree) and `<tag>-cold` rows (full
    re-solve of the enlarged instance)

    Every point shares the same base instances and added-user draws; a point
    with k added users uses the first k draws.
    """

    def __init__(self, config: SuiteConfig, solvers: Optional[Mapping[str, BaseSolver]] = None,
                 out_dir: Optional[Union[str, Path]] = None):
        if config.suite != "incremental":
            raise InvalidConfigError(f"incremental runs need suite 'incremental', got {config.suite!r}")
        super().__init__(config, solvers=solvers, out_dir=out_dir)
        self.warm_tags = [tag for tag in self.solvers if tag in WARM_CAPABLE]
        self.base_point = suite_points(config)[0]
        self._base_instances: Optional[List[ProblemInstance]] = None
        self._base_trees: Dict[Tuple[str, int], Optional[MulticastTree]] = {}

    def points(self) -> List[SuitePoint]:
        return [SuitePoint(i, f"added={added}", self.base_point.recipe)
                for i, added in enumerate(self.config.added_users)]

    def row_labels(self) -> List[str]:
        return [f"{tag}-warm" for tag in self.warm_tags] + [f"{tag}-cold" for tag in self.solvers]

    def instances_for(self, point: SuitePoint) -> List[ProblemInstance]:
        if self._base_instances is None:
            self._base_instances = point_instances(self.config, self.base_point)
        return self._base_instances

    def added_users(self, instance: ProblemInstance, index: int) -> List[Tuple[int, float]]:
        rng = np.random.default_rng([self.config.seed, ADDED_USERS_STREAM, index])
        return sample_added_users(instance, max(self.config.added_users), rng)

    def base_tree(self, tag: str, index: int, instance: ProblemInstance) -> Optional[MulticastTree]:
        key = (tag, index)
        if key not in self._base_trees:
            try:
                self._base_trees[key] = self.solvers[tag].solve_instance(instance).tree
            except InfeasibleError as exc:
                logger.warning("%s could not route the base users of instance %d: %s", tag, index, exc)
                self._base_trees[key] = None
        return self._base_trees[key]

    def solve_instance_rows(self, point: SuitePoint, index: int,
                            instance: ProblemInstance) -> List[ResultRow]:
        added = self.config.added_users[point.index]
        extended = instance.with_added_users(self.added_users(instance, index)[:added])
        suite = self.config.suite
        rows = []
        for tag in self.warm_tags:
            label = f"{tag}-warm"
            base = self.base_tree(tag, index, instance)
            if base is None:
                rows.append(ResultRow.infeasible(suite, point, index, instance.seed, label, 0.0))
                continue
            row, solution = attempt_solve(suite, point, index, extended, label,
                                          warm_solver(self.solvers[tag], base))
            if solution is not None:
                assert_tree_preserved(base, solution.tree)
            rows.append(row)
        for tag, solver in self.solvers.items():
            rows.append(solve_row(suite, point, index, extended, f"{tag}-cold", solver))
        return rows

    def run(self, points: Optional[Sequence[SuitePoint]] = None, task=None) -> pd.DataFrame:
        return super().run(self.points() if points is None else points, task)


def incremental_run(config: SuiteConfig, out_dir: Optional[Union[str, Path]] = None,
                    solvers: Optional[Mapping[str, BaseSolver]] = None) -> pd.DataFrame:
    return IncrementalRunner(config, solvers=solvers, out_dir=out_dir).run()
