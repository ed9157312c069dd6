"""Multicast routing solvers: exact, heuristic and (via src.gpn) learned"""
from typing import Any, Optional

from ..core.errors import InvalidConfigError
from .base_solver import BaseSolver, Solution, parse_solution, serialize_solution
from .baselines import (BcoConfig, BcoSolver, DijkstraSolver, GaConfig, GaSolver, GreedySolver,
                        bee_colony, demand_order, dijkstra_reuse, genetic_algorithm,
                        sequential_greedy)
from .exact import BruteForceSolver, DpSolver, brute_force, dreyfus_wagner

SOLVER_TAGS = ("bruteforce", "dp", "dijkstra", "greedy", "ga", "bco", "gpn")


def make_solver(tag: str, use_hub: bool = False, ga_config: Optional[GaConfig] = None,
                bco_config: Optional[BcoConfig] = None, checkpoint: Optional[str] = None,
                **extra: Any) -> BaseSolver:
    """
    Build a solver by tag

    The gpn solver needs `checkpoint` and imports torch lazily.
    """
    if tag == "bruteforce":
        return BruteForceSolver(use_hub=use_hub)
    if tag == "dp":
        return DpSolver(use_hub=use_hub)
    if tag == "dijkstra":
        return DijkstraSolver(use_hub=use_hub)
    if tag == "greedy":
        return GreedySolver(use_hub=use_hub, **extra)
    if tag == "ga":
        return GaSolver(config=ga_config or GaConfig(), use_hub=use_hub)
    if tag == "bco":
        return BcoSolver(config=bco_config or BcoConfig(), use_hub=use_hub)
    if tag == "gpn":
        from ..gpn.solver import GpnSolver
        if checkpoint is None:
            raise InvalidConfigError("the gpn solver needs --checkpoint")
        return GpnSolver.from_checkpoint(checkpoint, **extra)
    raise InvalidConfigError(f"unknown solver {tag!r}; expected one of {SOLVER_TAGS}")


__all__ = [
    'BaseSolver', 'Solution', 'parse_solution', 'serialize_solution',
    'BcoConfig', 'BcoSolver', 'DijkstraSolver', 'GaConfig', 'GaSolver', 'GreedySolver',
    'bee_colony', 'demand_order', 'dijkstra_reuse', 'genetic_algorithm', 'sequential_greedy',
    'BruteForceSolver', 'DpSolver', 'brute_force', 'dreyfus_wagner',
    'SOLVER_TAGS', 'make_solver',
]
