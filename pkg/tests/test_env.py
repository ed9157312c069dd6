"""
Routing environment: episodes, rewards, masking, warm starts and hub fallback
"""
import numpy as np
import pytest

from conftest import make_instance
from src.core import (DemandVector, InfeasibleError, InvalidActionError, InvalidConfigError,
                      MulticastTree, tree_cost, validate)
from src.rl import FEATURE_DIM, EnvConfig, RoutingEnv, adjacency_matrix, node_features, user_order

NO_HUB = EnvConfig(use_virtual_hub=False)


def test_users_come_by_demand_then_id(illustrative):
    swapped = illustrative.with_added_users([(2, 4.0)])
    assert [node for node, _ in user_order(swapped)] == [2, 3, 4, 5]


def test_reset(illustrative):
    env = RoutingEnv(NO_HUB)
    state = env.reset(illustrative)
    assert state.active_user == (3, 4.0)
    assert state.partial_path == (3,)
    assert state.inflow_set == frozenset({0})
    assert state.tree.edge_count == 0
    assert env.valid_actions(state) == (1,)


def test_hub_is_attached_by_default(illustrative):
    state = RoutingEnv().reset(illustrative)
    assert state.graph.hub_id == 6
    assert RoutingEnv().valid_actions(state) == (1, 6)


def test_illustrative_episodes(illustrative):
    """Rewards are -demand * edge cost and sum to minus the tree cost"""
    env = RoutingEnv(NO_HUB)
    state = env.reset(illustrative)
    rewards = []

    outcome = env.step(state, 1)
    assert (outcome.reward, outcome.episode_done) == (-8.0, False)
    rewards.append(outcome.reward)
    outcome = env.step(outcome.next_state, 0)
    assert outcome.episode_done and not outcome.all_done
    rewards.append(outcome.reward)
    state = outcome.next_state
    assert state.active_user == (4, 2.0)
    assert state.inflow_set == frozenset({0, 1, 3})

    # u2 touches the inflow set at a after one hop
    outcome = env.step(state, 1)
    assert outcome.reward == -2.0 and outcome.episode_done
    rewards.append(outcome.reward)
    state = outcome.next_state

    for action in (2, 0):
        outcome = env.step(state, action)
        rewards.append(outcome.reward)
        state = outcome.next_state
    assert outcome.all_done and state.done
    assert rewards == [-8.0, -8.0, -2.0, -1.0, -2.0]
    assert -sum(rewards) == tree_cost(illustrative.graph, state.tree, illustrative.demands) == 21.0
    assert validate(illustrative.graph, state.tree, 0, illustrative.demands).ok
    assert state.completed == (3, 4, 5)


def test_states_are_not_mutated(illustrative):
    env = RoutingEnv(NO_HUB)
    state = env.reset(illustrative)
    env.step(state, 1)
    assert state.partial_path == (3,)
    assert state.step_count == 0


def test_invalid_actions(illustrative):
    env = RoutingEnv(NO_HUB)
    state = env.reset(illustrative)
    with pytest.raises(InvalidActionError):
        env.step(state, 0)
    state = env.step(state, 1).next_state
    # back onto the partial path
    with pytest.raises(InvalidActionError):
        env.step(state, 3)
    assert env.valid_actions(state) == (0, 4)


def test_warm_start_skips_users_on_the_tree(illustrative):
    base = MulticastTree(root=0, parent={1: 0, 3: 1, 4: 1})
    env = RoutingEnv(NO_HUB)
    state = env.reset(illustrative, initial_tree=base)
    assert state.active_user == (5, 1.0)
    assert state.completed == (3, 4)
    state = env.step(env.step(state, 2).next_state, 0).next_state
    assert state.done
    for child, parent in base.parent.items():
        assert state.tree.parent[child] == parent


def test_warm_start_with_every_user_routed(illustrative):
    tree = MulticastTree(root=0, parent={1: 0, 3: 1, 4: 1, 2: 0, 5: 2})
    state = RoutingEnv(NO_HUB).reset(illustrative, initial_tree=tree)
    assert state.done
    assert state.tree == tree


def test_reset_rejects_foreign_root(illustrative):
    with pytest.raises(InvalidConfigError):
        RoutingEnv(NO_HUB).reset(illustrative, initial_tree=MulticastTree.single(1))


def test_dead_end_detection():
    # user 2 can wander into leaf 1 and get stuck
    instance = make_instance(4, {(0, 3): 1.0, (3, 2): 1.0, (2, 1): 1.0}, [(2, 1.0)])
    env = RoutingEnv(NO_HUB)
    state = env.step(env.reset(instance), 1).next_state
    assert env.is_dead_end(state)


def test_force_completion_through_hub(illustrative):
    env = RoutingEnv(EnvConfig(max_steps_per_episode=1))
    state = env.step(env.reset(illustrative), 1).next_state
    assert env.step_limit_reached(state)
    outcomes = env.force_completion(state)
    assert [action for action, _ in outcomes] == [6, 0]
    assert outcomes[0][1].reward == -4.0 * 10.0
    assert outcomes[-1][1].episode_done
    tree = outcomes[-1][1].next_state.tree
    assert tree.path_to_root(3) == [3, 1, 6, 0]


def test_force_completion_needs_a_hub(illustrative):
    env = RoutingEnv(EnvConfig(use_virtual_hub=False, max_steps_per_episode=1))
    state = env.step(env.reset(illustrative), 1).next_state
    with pytest.raises(InfeasibleError) as excinfo:
        env.force_completion(state)
    assert excinfo.value.node == 3


def test_env_config_validation():
    with pytest.raises(InvalidConfigError):
        EnvConfig(gamma=1.0)
    with pytest.raises(InvalidConfigError):
        EnvConfig(max_steps_per_episode=0)


def test_features(illustrative):
    env = RoutingEnv()
    state = env.step(env.reset(illustrative), 1).next_state
    x = node_features(state)
    assert x.shape == (7, FEATURE_DIM)
    assert x.dtype == np.float32
    assert x.min() >= 0.0 and x.max() <= 1.0
    assert x[0, 0] == 1.0 and x[:, 0].sum() == 1.0
    assert x[3, 2] == 1.0 and x[4, 2] == 0.5 and x[5, 2] == 0.25
    assert x[1, 5] == 1.0 and x[3, 6] == 1.0
    assert set(np.flatnonzero(x[:, 4])) == {1, 3}
    assert np.all(x[:, 7] == 1.0)
    assert x[6, 10] == 1.0


def test_adjacency(illustrative):
    adj = adjacency_matrix(illustrative.graph)
    assert adj.shape == (6, 6)
    assert np.array_equal(adj, adj.T)
    assert adj.sum() == 10
    assert np.all(np.diag(adj) == 0)


def test_reset_needs_destinations(illustrative):
    with pytest.raises(InvalidConfigError):
        RoutingEnv(NO_HUB).reset(illustrative.with_demands(DemandVector(())))
