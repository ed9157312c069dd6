"""
Finite-difference verification of the policy-gradient backward pass
Runs on a float64 copy of the model so the comparison is not limited by
single-precision rounding
"""
import copy
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Collection, Dict, Optional

import numpy as np
import torch

from ..core.graph import GenConfig, ProblemInstance, generate_instance
from ..rl.env import EnvConfig
from ..rl.rollout import RolloutResult, rollout
from .model import GpnModel, ModelConfig
from .policy import GpnPolicy
from .trainer import policy_loss

logger = logging.getLogger(__name__)

SMALL_MODEL = ModelConfig(hidden_dim=8, heads=2)
ERROR_FLOOR = 1e-4


@dataclass
class GradCheckReport:
    tolerance: float
    errors: Dict[str, float] = field(default_factory=dict)
    checked_entries: int = 0

    @property
    def max_error(self) -> float:
        return max(self.errors.values(), default=0.0)

    @property
    def worst_parameter(self) -> Optional[str]:
        if not self.errors:
            return None
        return max(self.errors, key=self.errors.get)

    @property
    def passed(self) -> bool:
        return self.max_error < self.tolerance


def small_instance(seed: int = 0) -> ProblemInstance:
    """6 nodes, degree 3, two users"""
    return generate_instance(GenConfig(topology="random-regular", node_count=6, user_count=2,
                                       degree=3, seed=seed))


def relative_error(analytic, numeric, floor: float = ERROR_FLOOR) -> float:
    """
    ||a - n|| / max(||a||, ||n||, floor) over a tensor's checked entries

    The floor only matters for gradients that vanish altogether; it sits just
    above the rounding noise of a central difference in float64.
    """
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = max(float(np.linalg.norm(analytic)), float(np.linalg.norm(numeric)), floor)
    return float(np.linalg.norm(analytic - numeric)) / scale


def compare_gradients(model: GpnModel, loss_value: Callable[[], float],
                      gradients: Dict[str, torch.Tensor], rng: np.random.Generator,
                      step: float = 1e-4, tolerance: float = 1e-5, entries_per_tensor: int = 6,
                      names: Optional[Collection[str]] = None) -> GradCheckReport:
    """
    Central differences of `loss_value` against `gradients`, per parameter tensor

    Args:
        gradients: Claimed gradient per parameter name
        names: Restrict the check to these parameters
    """
    report = GradCheckReport(tolerance=tolerance)
    for name, param in model.named_parameters():
        if names is not None and name not in names:
            continue
        flat = param.data.view(-1)
        flat_grad = gradients[name].reshape(-1)
        count = flat.numel()
        picks = (np.arange(count) if count <= entries_per_tensor
                 else rng.choice(count, size=entries_per_tensor, replace=False))
        analytic, numeric = [], []
        for index in picks:
            original = flat[index].item()
            values = {}
            for offset in (-2, -1, 1, 2):
                flat[index] = original + offset * step
                values[offset] = loss_value()
            flat[index] = original
            analytic.append(flat_grad[index].item())
            # five-point central stencil, truncation error O(step^4)
            numeric.append((8 * (values[1] - values[-1]) - (values[2] - values[-2])) / (12 * step))
        report.errors[name] = relative_error(analytic, numeric)
        report.checked_entries += len(picks)
    return report


def check_gradients(model: Optional[GpnModel] = None, instance: Optional[ProblemInstance] = None,
                    seed: int = 0, step: float = 1e-4, tolerance: float = 1e-5,
                    entries_per_tensor: int = 6, baseline: float = 0.0,
                    env_config: EnvConfig = EnvConfig()) -> GradCheckReport:
    """
    Compare autograd gradients of the REINFORCE loss with central differences

    A trajectory is sampled once; the loss is then a deterministic function of
    the parameters, evaluated at theta +/- step for a random subset of entries
    of every parameter tensor.

    Args:
        model: Copied and cast to float64; defaults to a fresh small model
        entries_per_tensor: Sampled entries per tensor (all entries if smaller)
    """
    torch.manual_seed(seed)
    if model is None:
        model = GpnModel(replace(SMALL_MODEL))
    model = copy.deepcopy(model).double()
    instance = small_instance(seed) if instance is None else instance
    result: RolloutResult = rollout(GpnPolicy(model), instance, env_config, mode="sample", seed=seed)
    gamma = env_config.gamma

    def loss_value() -> float:
        with torch.no_grad():
            return float(policy_loss(model, [result], baseline, gamma))

    model.zero_grad()
    policy_loss(model, [result], baseline, gamma).backward()
    gradients = {name: param.grad.detach().clone() if param.grad is not None else torch.zeros_like(param)
                 for name, param in model.named_parameters()}

    report = compare_gradients(model, loss_value, gradients, np.random.default_rng(seed), step=step,
                               tolerance=tolerance, entries_per_tensor=entries_per_tensor)
    logger.info("gradient check: %d entries, max relative error %.3e (%s)",
                report.checked_entries, report.max_error, report.worst_parameter)
    return report
