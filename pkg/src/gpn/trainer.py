"""
Policy-gradient training for the graph policy network
REINFORCE on discounted return-to-go with a moving-average baseline
"""
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd
import torch
from torch.optim.lr_scheduler import MultiStepLR

from ..core.errors import InvalidConfigError, NonFiniteError, TrainingDivergedError
from ..core.flow_tree import tree_cost
from ..core.graph import GenConfig, ProblemInstance, attach_virtual_hub, generate_instance
from ..rl.env import EnvConfig
from ..rl.rollout import RolloutResult, rollout
from ..solvers.exact import dreyfus_wagner
from .checkpoint import save_checkpoint
from .model import GpnModel, ModelConfig
from .policy import GpnPolicy, replay_log_probs

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ("step", "lr", "mean_batch_cost", "baseline", "grad_norm", "val_cost_ratio")


def _train_spec() -> GenConfig:
    return GenConfig(topology="erdos-renyi", node_count=30, user_count=9, p=0.10)


def _validation_spec() -> GenConfig:
    return GenConfig(topology="erdos-renyi", node_count=30, user_count=9, p=0.08)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    grad_clip: float = 1.0
    milestone_interval: int = 500
    lr_decay: float = 0.96
    batch_size: int = 16
    epochs: int = 20
    steps_per_epoch: int = 2500
    baseline_decay: float = 0.9
    gamma: float = 0.99
    seed: int = 0
    train_spec: GenConfig = field(default_factory=_train_spec)
    validation_spec: GenConfig = field(default_factory=_validation_spec)
    validation_instances: int = 8
    validation_interval: int = 100
    log_interval: int = 50
    divergence_factor: float = 10.0
    divergence_patience: int = 3
    use_virtual_hub: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.learning_rate > 0:
            raise InvalidConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not self.grad_clip > 0:
            raise InvalidConfigError(f"grad_clip must be > 0, got {self.grad_clip}")
        if self.batch_size < 1:
            raise InvalidConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1 or self.steps_per_epoch < 1:
            raise InvalidConfigError("epochs and steps_per_epoch must be >= 1")
        if self.milestone_interval < 1:
            raise InvalidConfigError(f"milestone_interval must be >= 1, got {self.milestone_interval}")
        if not 0 < self.lr_decay <= 1:
            raise InvalidConfigError(f"lr_decay must be in (0, 1], got {self.lr_decay}")
        if not 0 <= self.baseline_decay < 1:
            raise InvalidConfigError(f"baseline_decay must be in [0, 1), got {self.baseline_decay}")
        if not 0 < self.gamma < 1:
            raise InvalidConfigError(f"gamma must be in (0, 1), got {self.gamma}")
        if self.validation_instances < 1 or self.validation_interval < 1:
            raise InvalidConfigError("validation_instances and validation_interval must be >= 1")

    @property
    def total_steps(self) -> int:
        return self.epochs * self.steps_per_epoch

    @property
    def milestones(self) -> List[int]:
        return list(range(self.milestone_interval, self.total_steps + 1, self.milestone_interval))

    @property
    def env_config(self) -> EnvConfig:
        return EnvConfig(gamma=self.gamma, use_virtual_hub=self.use_virtual_hub)


def learning_rate_at(step: int, config: TrainConfig) -> float:
    """Step-decay schedule: lr * decay^(milestones passed)"""
    return config.learning_rate * config.lr_decay ** (step // config.milestone_interval)


class MovingAverageBaseline:
    """Exponential moving average; the first update sets the value"""

    def __init__(self, decay: float = 0.9, value: Optional[float] = None):
        self.decay = decay
        self.value = value

    def update(self, observation: float) -> float:
        if self.value is None:
            self.value = float(observation)
        else:
            self.value = self.decay * self.value + (1.0 - self.decay) * float(observation)
        return self.value

    def get(self) -> float:
        return 0.0 if self.value is None else self.value


def policy_loss(model: GpnModel, results: Sequence[RolloutResult], baseline: float,
                gamma: float) -> torch.Tensor:
    """
    -sum_t (G_t - b) log pi(a_t | s_t), averaged over the rollouts

    Only policy decisions contribute; forced hub moves still count in G_t.
    """
    dtype = next(model.parameters()).dtype
    total = torch.zeros((), dtype=dtype)
    for result in results:
        returns = result.returns_to_go(gamma)
        log_probs = replay_log_probs(model, result.trajectory)
        for step, log_prob in zip(result.trajectory, log_probs):
            advantage = returns[step.episode][step.position] - baseline
            total = total - advantage * log_prob
    return total / max(1, len(results))


def mean_return(results: Sequence[RolloutResult], gamma: float) -> float:
    """Mean G_t over all recorded decisions"""
    values = [returns[step.episode][step.position]
              for result in results
              for returns in [result.returns_to_go(gamma)]
              for step in result.trajectory]
    return float(np.mean(values)) if values else 0.0


def backward(model: GpnModel, results: Sequence[RolloutResult], baseline: float,
             gamma: float) -> torch.Tensor:
    """
    Populate .grad for every parameter

    Raises:
        NonFiniteError: a gradient holds NaN/Inf (names the parameter)
    """
    loss = policy_loss(model, results, baseline, gamma)
    if not torch.isfinite(loss):
        raise NonFiniteError("loss")
    if not loss.requires_grad:
        # no recorded decisions in the batch
        return loss
    loss.backward()
    for name, param in model.named_parameters():
        if param.grad is not None and not torch.isfinite(param.grad).all():
            raise NonFiniteError(name, "gradient")
    return loss


def rollout_cost(result: RolloutResult) -> float:
    return tree_cost(result.instance.graph, result.tree, result.instance.demands)


@dataclass
class TrainResult:
    model: GpnModel
    steps: int
    metrics: pd.DataFrame
    checkpoint: Optional[Path] = None


def _sample_instances(spec: GenConfig, count: int, rng: np.random.Generator) -> List[ProblemInstance]:
    seeds = rng.integers(0, 2**31 - 1, size=count)
    return [generate_instance(replace(spec, seed=int(s))) for s in seeds]


class Validator:
    """Greedy GPN cost over fixed instances, relative to the DP optimum with hub"""

    def __init__(self, config: TrainConfig, rng: np.random.Generator):
        self.config = config
        self.instances = [attach_virtual_hub(inst) for inst in
                          _sample_instances(config.validation_spec, config.validation_instances, rng)]
        self.optimum = float(np.mean([dreyfus_wagner(inst, use_hub=True).cost for inst in self.instances]))
        self.strikes = 0

    def evaluate(self, model: GpnModel) -> float:
        policy = GpnPolicy(model)
        costs = [rollout_cost(rollout(policy, inst, self.config.env_config, mode="greedy"))
                 for inst in self.instances]
        ratio = float(np.mean(costs)) / self.optimum if self.optimum > 0 else math.nan
        if ratio > self.config.divergence_factor:
            self.strikes += 1
        else:
            self.strikes = 0
        if self.strikes >= self.config.divergence_patience:
            raise TrainingDivergedError(
                f"validation cost stayed above {self.config.divergence_factor}x DP for "
                f"{self.strikes} evaluations (last ratio {ratio:.2f})")
        return ratio


def train(train_config: TrainConfig, model_config: ModelConfig = ModelConfig(),
          seed: Optional[int] = None, checkpoint_path: Optional[Union[str, Path]] = None,
          metrics_path: Optional[Union[str, Path]] = None,
          max_steps: Optional[int] = None) -> TrainResult:
    """
    Train from scratch

    Args:
        seed: Overrides train_config.seed
        checkpoint_path: Written at the end of training
        metrics_path: Per-step CSV (step, lr, mean_batch_cost, baseline, grad_norm, val_cost_ratio)
        max_steps: Stop early after this many steps (schedule unchanged)
    """
    seed = train_config.seed if seed is None else seed
    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    model = GpnModel(model_config)
    optimizer = torch.optim.Adam(model.parameters(), lr=train_config.learning_rate,
                                 betas=(train_config.beta1, train_config.beta2),
                                 eps=train_config.adam_eps)
    scheduler = MultiStepLR(optimizer, milestones=train_config.milestones, gamma=train_config.lr_decay)
    baseline = MovingAverageBaseline(train_config.baseline_decay)
    validator = Validator(train_config, np.random.default_rng([seed, 1]))
    policy = GpnPolicy(model)
    env_config = train_config.env_config

    total = train_config.total_steps if max_steps is None else min(max_steps, train_config.total_steps)
    logger.info("training %s variant for %d steps (batch %d)", model_config.variant, total,
                train_config.batch_size)
    rows = []
    for step in range(total):
        lr = optimizer.param_groups[0]["lr"]
        instances = _sample_instances(train_config.train_spec, train_config.batch_size, rng)
        rollout_seeds = rng.integers(0, 2**31 - 1, size=len(instances))
        results = [rollout(policy, inst, env_config, mode="sample", seed=int(s))
                   for inst, s in zip(instances, rollout_seeds)]
        results = [r for r in results if r.feasible]
        batch_cost = float(np.mean([rollout_cost(r) for r in results])) if results else math.nan

        optimizer.zero_grad()
        b = baseline.get() if baseline.value is not None else mean_return(results, train_config.gamma)
        backward(model, results, b, train_config.gamma)
        grad_norm = float(torch.nn.utils.clip_grad_norm_(model.parameters(), train_config.grad_clip))
        optimizer.step()
        scheduler.step()
        baseline.update(mean_return(results, train_config.gamma))

        val_ratio = math.nan
        if (step + 1) % train_config.validation_interval == 0 or step + 1 == total:
            val_ratio = validator.evaluate(model)
            logger.info("step %d: validation cost ratio %.4f", step + 1, val_ratio)
        if (step + 1) % train_config.log_interval == 0:
            logger.info("step %d: lr %.3e, cost %.4f, baseline %.4f, grad norm %.4f",
                        step + 1, lr, batch_cost, baseline.get(), grad_norm)
        rows.append({"step": step + 1, "lr": lr, "mean_batch_cost": batch_cost,
                     "baseline": baseline.get(), "grad_norm": grad_norm,
                     "val_cost_ratio": val_ratio})

    metrics = pd.DataFrame(rows, columns=list(METRIC_COLUMNS))
    if metrics_path is not None:
        Path(metrics_path).parent.mkdir(parents=True, exist_ok=True)
        metrics.to_csv(metrics_path, index=False)
    written = None
    if checkpoint_path is not None:
        written = Path(checkpoint_path)
        save_checkpoint(written, model, step=total, rng_state={"numpy": rng.bit_generator.state})
        logger.info("saved checkpoint to %s", written)
    return TrainResult(model=model, steps=total, metrics=metrics, checkpoint=written)
