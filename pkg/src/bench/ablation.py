"""
Ablation comparison: every model variant on the same instance set, with DP as
the reference
"""
import logging
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

import pandas as pd

from ..core.errors import CheckpointError, InvalidConfigError
from ..gpn.checkpoint import load_checkpoint
from ..gpn.model import VARIANTS
from ..gpn.solver import GpnSolver
from ..solvers import BaseSolver, DpSolver
from .runner import SuiteRunner
from .suites import SuiteConfig

logger = logging.getLogger(__name__)


def load_variants(checkpoints: Mapping[str, Union[str, Path]]) -> Dict[str, BaseSolver]:
    """
    One GPN solver per variant, labelled `gpn-<variant>`

    Raises:
        FileNotFoundError: a checkpoint is missing
        CheckpointError: a checkpoint holds a different variant than its key
    """
    missing = [v for v in VARIANTS if v not in checkpoints]
    if missing:
        raise InvalidConfigError(f"ablation needs checkpoints for every variant; missing {missing}")
    solvers: Dict[str, BaseSolver] = {}
    for variant in VARIANTS:
        checkpoint = load_checkpoint(checkpoints[variant])
        if checkpoint.config.variant != variant:
            raise CheckpointError(
                f"{checkpoints[variant]} holds the {checkpoint.config.variant} variant, not {variant}")
        solvers[f"gpn-{variant}"] = GpnSolver(checkpoint.build_model())
    return solvers


def variant_means(frame: pd.DataFrame) -> pd.Series:
    """Mean feasible cost per solver label"""
    feasible = frame[frame["feasible"].astype(bool)]
    return feasible.groupby("solver")["cost"].mean().sort_index()


def ablation_run(config: SuiteConfig, out_dir: Optional[Union[str, Path]] = None,
                 checkpoints: Optional[Mapping[str, Union[str, Path]]] = None) -> pd.DataFrame:
    if config.suite != "ablation":
        raise InvalidConfigError(f"ablation runs need suite 'ablation', got {config.suite!r}")
    solvers = {"dp": DpSolver()}
    solvers.update(load_variants(checkpoints if checkpoints is not None else config.checkpoints))
    frame = SuiteRunner(config, solvers=solvers, out_dir=out_dir).run()
    for label, cost in variant_means(frame).items():
        logger.info("%s: mean cost %.4f", label, cost)
    return frame
