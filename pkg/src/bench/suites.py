"""
Benchmark suites: which instances each experiment runs on
"""
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..core.errors import InvalidConfigError
from ..core.graph import GenConfig, ProblemInstance, generate_instance
from ..solvers import SOLVER_TAGS
from ..solvers.baselines import BcoConfig, GaConfig

SUITES = ("node-sweep", "degree-sweep", "user-sweep", "incremental", "ablation")
DEGREE_MODES = ("fixed", "average")


@dataclass(frozen=True)
class SuitePoint:
    """One x-axis value of a suite and the recipe its instances are drawn from"""
    index: int
    label: str
    recipe: GenConfig


@dataclass(frozen=True)
class SuiteConfig:
    suite: str = "node-sweep"
    instances: int = 100
    solvers: Tuple[str, ...] = ("dp", "dijkstra", "ga", "bco")
    seed: int = 0
    checkpoint: Optional[str] = None
    # degree-sweep only: fixed degree 3-7 or average degree 3-6
    degree_mode: str = "fixed"
    base_users: int = 9
    added_users: Tuple[int, ...] = (1, 2, 3)
    # ablation only: variant -> checkpoint path
    checkpoints: Dict[str, str] = field(default_factory=dict)
    ga: GaConfig = field(default_factory=GaConfig)
    bco: BcoConfig = field(default_factory=BcoConfig)
    threads: Optional[int] = None
    resume: bool = True

    def __post_init__(self):
        if isinstance(self.solvers, list):
            object.__setattr__(self, "solvers", tuple(self.solvers))
        self.validate()

    def validate(self):
        if self.suite not in SUITES:
            raise InvalidConfigError(f"unknown suite {self.suite!r}; expected one of {SUITES}")
        if self.instances < 1:
            raise InvalidConfigError(f"instances must be >= 1, got {self.instances}")
        if self.suite != "ablation" and not self.solvers:
            raise InvalidConfigError("solver list must not be empty")
        unknown = [tag for tag in self.solvers if tag not in SOLVER_TAGS]
        if unknown:
            raise InvalidConfigError(f"unknown solvers {unknown}; expected tags from {SOLVER_TAGS}")
        if self.degree_mode not in DEGREE_MODES:
            raise InvalidConfigError(f"degree_mode must be one of {DEGREE_MODES}, got {self.degree_mode!r}")
        if self.base_users < 1 or any(a < 1 for a in self.added_users):
            raise InvalidConfigError("base_users and added_users must be positive")
        if self.threads is not None and self.threads < 1:
            raise InvalidConfigError(f"threads must be >= 1, got {self.threads}")


def _regular(n: int, users: int, degree: int = 4) -> GenConfig:
    return GenConfig(topology="random-regular", node_count=n, user_count=users, degree=degree)


def suite_points(config: SuiteConfig) -> List[SuitePoint]:
    if config.suite == "node-sweep":
        recipes = [(f"n={n}", _regular(n, 12)) for n in range(30, 51, 5)]
    elif config.suite == "degree-sweep":
        if config.degree_mode == "fixed":
            recipes = [(f"degree={d}", _regular(50, 12, d)) for d in range(3, 8)]
        else:
            recipes = [(f"avg_degree={d}", GenConfig(topology="average-degree", node_count=50,
                                                     user_count=12, degree=None, avg_degree=float(d)))
                       for d in range(3, 7)]
    elif config.suite == "user-sweep":
        users = list(range(1, 7)) + list(range(9, 16, 3))
        recipes = [(f"users={k}", _regular(50, k)) for k in users]
    elif config.suite == "incremental":
        recipes = [(f"users={config.base_users}", _regular(50, config.base_users))]
    else:
        recipes = [("n=30", _regular(30, 12))]
    return [SuitePoint(i, label, recipe) for i, (label, recipe) in enumerate(recipes)]


def instance_seed(suite_seed: int, point: int, index: int) -> int:
    """Seed of one instance; depends only on (suite seed, point, instance index)"""
    return int(np.random.SeedSequence([suite_seed, point, index]).generate_state(1)[0])


def point_instances(config: SuiteConfig, point: SuitePoint) -> List[ProblemInstance]:
    return [generate_instance(replace(point.recipe, seed=instance_seed(config.seed, point.index, i)))
            for i in range(config.instances)]
