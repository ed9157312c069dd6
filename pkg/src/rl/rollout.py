"""
Running a policy through all episodes of an instance
"""
import logging
from dataclasses import dataclass, field
from typing import Any, List, Optional, Tuple

import numpy as np

from ..core.errors import InfeasibleError
from ..core.flow_tree import MulticastTree
from ..core.graph import ProblemInstance
from ..utils.trajectory_logger import TrajectoryLogger
from .env import EnvConfig, RoutingEnv, RoutingState, StepOutcome
from .policy import RoutingPolicy

logger = logging.getLogger(__name__)

MODES = ("sample", "greedy")


@dataclass(frozen=True)
class PolicyStep:
    """A decision taken by the policy (forced hub moves are not recorded)"""
    state: RoutingState
    actions: Tuple[int, ...]
    action: int
    episode: int
    position: int


@dataclass
class RolloutResult:
    tree: MulticastTree
    instance: ProblemInstance
    episode_rewards: List[List[float]] = field(default_factory=list)
    # aligned with episode_rewards; None for forced moves
    log_probs: List[List[Optional[Any]]] = field(default_factory=list)
    trajectory: List[PolicyStep] = field(default_factory=list)
    feasible: bool = True
    forced_episodes: int = 0

    @property
    def total_reward(self) -> float:
        return float(sum(sum(rewards) for rewards in self.episode_rewards))

    def returns_to_go(self, gamma: float) -> List[List[float]]:
        return [discounted_returns(rewards, gamma) for rewards in self.episode_rewards]


def discounted_returns(rewards: List[float], gamma: float) -> List[float]:
    """G_t = r_t + gamma * G_{t+1} within one episode"""
    returns = [0.0] * len(rewards)
    running = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        running = rewards[t] + gamma * running
        returns[t] = running
    return returns


def rollout(policy: RoutingPolicy, instance: ProblemInstance, config: EnvConfig = EnvConfig(),
            mode: str = "sample", seed: int = 0, initial_tree: Optional[MulticastTree] = None,
            trajectory_logger: Optional[TrajectoryLogger] = None) -> RolloutResult:
    """
    Route every user with `policy`

    Episodes that reach the step limit or run out of moves are finished
    through the hub. A dead end with no hub stops the rollout with
    feasible=False.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    env = RoutingEnv(config)
    rng = np.random.default_rng(seed)
    state = env.reset(instance, initial_tree)
    result = RolloutResult(tree=state.tree, instance=state.instance)
    greedy = mode == "greedy"
    episode = -1

    def record(outcome: StepOutcome, log_prob: Optional[Any], masked: int, forced: bool,
               action: int, before: RoutingState):
        result.episode_rewards[episode].append(outcome.reward)
        result.log_probs[episode].append(log_prob)
        if trajectory_logger is not None:
            trajectory_logger.log_step(before.active_user[0], before.current_node, action,
                                       outcome.reward, masked, forced=forced)

    while not state.done:
        if episode < 0 or state.step_count == 0:
            episode += 1
            result.episode_rewards.append([])
            result.log_probs.append([])
            policy.begin_episode(state)

        if env.step_limit_reached(state) or (env.is_dead_end(state) and state.graph.has_virtual_hub):
            try:
                outcomes = env.force_completion(state)
            except InfeasibleError as exc:
                logger.debug("rollout aborted: %s", exc)
                result.feasible = False
                break
            result.forced_episodes += 1
            before = state
            for action, outcome in outcomes:
                record(outcome, None, 0, True, action, before)
                before = outcome.next_state
            state = outcomes[-1][1].next_state
            continue

        actions = env.valid_actions(state)
        if not actions:
            logger.debug("dead end at node %d for user %d", state.current_node, state.active_user[0])
            if trajectory_logger is not None:
                trajectory_logger.mark("dead_end", user=state.active_user[0], node=state.current_node)
            result.feasible = False
            break

        action, log_prob = policy.select(state, actions, greedy, rng)
        result.trajectory.append(PolicyStep(state=state, actions=actions, action=action,
                                            episode=episode,
                                            position=len(result.episode_rewards[episode])))
        outcome = env.step(state, action)
        masked = state.graph.degree(state.current_node) - len(actions)
        record(outcome, log_prob, masked, False, action, state)
        state = outcome.next_state

    result.tree = state.tree
    return result
