"""Routing environment, policy interface and rollouts"""
from .env import EnvConfig, RoutingEnv, RoutingState, StepOutcome, user_order
from .features import FEATURE_DIM, FEATURE_NAMES, MAX_USER, adjacency_matrix, node_features
from .policy import RandomPolicy, RoutingPolicy
from .rollout import PolicyStep, RolloutResult, discounted_returns, rollout

__all__ = [
    'EnvConfig', 'RoutingEnv', 'RoutingState', 'StepOutcome', 'user_order',
    'FEATURE_DIM', 'FEATURE_NAMES', 'MAX_USER', 'adjacency_matrix', 'node_features',
    'RandomPolicy', 'RoutingPolicy',
    'PolicyStep', 'RolloutResult', 'discounted_returns', 'rollout',
]
