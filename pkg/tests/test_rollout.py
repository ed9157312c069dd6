"""
Rollouts with the random policy, returns and trajectory dumps
"""
import json

import pytest

from conftest import make_instance
from src.core import tree_cost, validate
from src.rl import EnvConfig, RandomPolicy, discounted_returns, rollout
from src.utils import TrajectoryLogger


def test_discounted_returns():
    assert discounted_returns([-1.0, -1.0, -1.0], 0.5) == [-1.75, -1.5, -1.0]
    assert discounted_returns([], 0.9) == []


def test_random_rollout_builds_a_valid_tree(regular_instance):
    for seed in range(5):
        result = rollout(RandomPolicy(), regular_instance, mode="sample", seed=seed)
        assert result.feasible
        instance = result.instance
        report = validate(instance.graph, result.tree, instance.source, instance.demands)
        assert report.ok, report.violations
        # rewards charge each hop at the user's own demand, the tree at max downstream demand
        assert -result.total_reward >= tree_cost(instance.graph, result.tree, instance.demands) - 1e-9


def test_rewards_match_tree_cost_on_a_path_graph():
    instance = make_instance(4, {(0, 1): 1.0, (1, 2): 0.5, (2, 3): 0.25}, [(3, 1.0), (2, 0.5)])
    result = rollout(RandomPolicy(), instance, EnvConfig(use_virtual_hub=False), mode="greedy")
    assert result.feasible
    assert -result.total_reward == tree_cost(instance.graph, result.tree, instance.demands) == 1.75
    assert len(result.episode_rewards) == 1


def test_greedy_is_deterministic(regular_instance):
    first = rollout(RandomPolicy(), regular_instance, mode="greedy", seed=1)
    second = rollout(RandomPolicy(), regular_instance, mode="greedy", seed=2)
    assert first.tree == second.tree


def test_sampling_depends_on_seed_only(regular_instance):
    a = rollout(RandomPolicy(), regular_instance, mode="sample", seed=4)
    b = rollout(RandomPolicy(), regular_instance, mode="sample", seed=4)
    assert a.tree == b.tree
    assert a.episode_rewards == b.episode_rewards


def test_trajectory_positions_line_up(regular_instance):
    result = rollout(RandomPolicy(), regular_instance, mode="sample", seed=0)
    for step in result.trajectory:
        assert result.log_probs[step.episode][step.position] is not None
        assert step.action in step.actions
    assert len(result.returns_to_go(0.99)) == len(result.episode_rewards)


def test_step_limit_forces_hub_completion():
    instance = make_instance(4, {(0, 1): 1.0, (1, 2): 0.5, (2, 3): 0.25}, [(3, 1.0)])
    result = rollout(RandomPolicy(), instance, EnvConfig(max_steps_per_episode=1), mode="greedy")
    assert result.feasible
    assert result.forced_episodes == 1
    hubbed = result.instance
    assert result.tree.path_to_root(3) == [3, 2, 4, 0]
    assert validate(hubbed.graph, result.tree, hubbed.source, hubbed.demands).ok
    assert result.log_probs == [[0.0, None, None]]
    assert result.episode_rewards == [[-0.25, -10.0, -10.0]]


def test_dead_end_without_hub_is_infeasible():
    instance = make_instance(4, {(0, 3): 1.0, (3, 2): 1.0, (2, 1): 1.0}, [(2, 1.0)])
    result = rollout(RandomPolicy(), instance, EnvConfig(use_virtual_hub=False), mode="greedy")
    assert not result.feasible


def test_unknown_mode(regular_instance):
    with pytest.raises(ValueError):
        rollout(RandomPolicy(), regular_instance, mode="beam")


def test_trajectory_logger(tmp_path, regular_instance):
    path = tmp_path / "run.jsonl"
    with TrajectoryLogger(path) as trajectory:
        result = rollout(RandomPolicy(), regular_instance, mode="sample", seed=0,
                         trajectory_logger=trajectory)
        written = trajectory.records_written
    steps = sum(len(rewards) for rewards in result.episode_rewards)
    assert written == steps
    records = [json.loads(line) for line in path.read_text().splitlines()]
    assert len(records) == steps
    assert set(records[0]) >= {"user", "node", "action", "reward", "masked", "forced"}


def test_disabled_trajectory_logger(tmp_path):
    trajectory = TrajectoryLogger(tmp_path / "never.jsonl", enabled=False)
    trajectory.log_step(1, 2, 3, -1.0, 0)
    assert trajectory.records_written == 0
    assert not (tmp_path / "never.jsonl").exists()
