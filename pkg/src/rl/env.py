"""
Sequential multicast construction as an episodic MDP
One episode per user: the path grows from the user until it touches the
inflow set (nodes already connected to the source), then it is merged
"""
import logging
from dataclasses import dataclass, field, replace
from typing import FrozenSet, List, Optional, Tuple

from ..core.errors import InfeasibleError, InvalidActionError, InvalidConfigError
from ..core.flow_tree import MulticastTree, merge_path
from ..core.graph import NetworkGraph, ProblemInstance, attach_virtual_hub

logger = logging.getLogger(__name__)

User = Tuple[int, float]


@dataclass(frozen=True)
class EnvConfig:
    """
    Environment settings

    max_steps_per_episode defaults to 2 * node count when left as None.
    """
    gamma: float = 0.99
    max_steps_per_episode: Optional[int] = None
    use_virtual_hub: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not 0.0 < self.gamma < 1.0:
            raise InvalidConfigError(f"gamma must be in (0, 1), got {self.gamma}")
        if self.max_steps_per_episode is not None and self.max_steps_per_episode < 1:
            raise InvalidConfigError(
                f"max_steps_per_episode must be >= 1, got {self.max_steps_per_episode}")

    def max_steps(self, graph: NetworkGraph) -> int:
        if self.max_steps_per_episode is not None:
            return self.max_steps_per_episode
        return 2 * graph.node_count


@dataclass(frozen=True)
class RoutingState:
    """Snapshot of the construction; states are never mutated"""
    instance: ProblemInstance
    tree: MulticastTree
    inflow_set: FrozenSet[int]
    partial_path: Tuple[int, ...]
    user_queue: Tuple[User, ...]
    active_user: Optional[User]
    step_count: int = 0
    user_index: int = 0
    # users finished so far (including ones already on the tree)
    completed: Tuple[int, ...] = field(default=())

    @property
    def graph(self) -> NetworkGraph:
        return self.instance.graph

    @property
    def current_node(self) -> int:
        return self.partial_path[-1]

    @property
    def done(self) -> bool:
        return self.active_user is None


@dataclass(frozen=True)
class StepOutcome:
    next_state: RoutingState
    reward: float
    episode_done: bool
    all_done: bool


def user_order(instance: ProblemInstance) -> Tuple[User, ...]:
    """Users by demand descending, ties by ascending node id"""
    return tuple(sorted(instance.demands, key=lambda item: (-item[1], item[0])))


class RoutingEnv:
    """
    Functional environment: `reset` builds a state, `step` returns a new one

    Users whose node is already on the tree when they come up are completed
    at once with zero reward.
    """

    def __init__(self, config: EnvConfig = EnvConfig()):
        self.config = config

    def prepare_instance(self, instance: ProblemInstance) -> ProblemInstance:
        """Attach or drop the virtual hub to match the config"""
        if self.config.use_virtual_hub and not instance.graph.has_virtual_hub:
            return attach_virtual_hub(instance)
        if not self.config.use_virtual_hub and instance.graph.has_virtual_hub:
            return replace(instance, graph=instance.graph.without_hub())
        return instance

    def reset(self, instance: ProblemInstance,
              initial_tree: Optional[MulticastTree] = None) -> RoutingState:
        """
        Start a construction; with `initial_tree` the tree is frozen and only
        users not yet on it are routed

        Raises:
            InvalidConfigError: the instance has no destinations
        """
        if instance.user_count == 0:
            raise InvalidConfigError("instance has no destinations to route")
        instance = self.prepare_instance(instance)
        tree = initial_tree or MulticastTree.single(instance.source)
        if tree.root != instance.source:
            raise InvalidConfigError(f"initial tree is rooted at {tree.root}, source is {instance.source}")
        state = RoutingState(
            instance=instance,
            tree=tree,
            inflow_set=frozenset(tree.nodes()),
            partial_path=(instance.source,),
            user_queue=user_order(instance),
            active_user=None,
            user_index=-1,
        )
        return self._next_user(state)

    def _next_user(self, state: RoutingState) -> RoutingState:
        completed = list(state.completed)
        queue = state.user_queue
        index = state.user_index
        while queue:
            user, queue = queue[0], queue[1:]
            index += 1
            if user[0] in state.inflow_set:
                completed.append(user[0])
                continue
            return replace(state, partial_path=(user[0],), user_queue=queue, active_user=user,
                           step_count=0, user_index=index, completed=tuple(completed))
        return replace(state, partial_path=(state.instance.source,), user_queue=(),
                       active_user=None, step_count=0, user_index=index, completed=tuple(completed))

    def valid_actions(self, state: RoutingState) -> Tuple[int, ...]:
        """Neighbors of the current node that are not on the partial path"""
        if state.done:
            return ()
        on_path = set(state.partial_path)
        return tuple(v for v in state.graph.neighbors(state.current_node) if v not in on_path)

    def is_dead_end(self, state: RoutingState) -> bool:
        return not state.done and not self.valid_actions(state)

    def step_limit_reached(self, state: RoutingState) -> bool:
        return not state.done and state.step_count >= self.config.max_steps(state.graph)

    def step(self, state: RoutingState, action: int) -> StepOutcome:
        """
        Move the active user's path to `action`

        Raises:
            InvalidActionError: action not in valid_actions(state)
        """
        if state.done:
            raise InvalidActionError("all users are already routed")
        if action not in self.valid_actions(state):
            raise InvalidActionError(
                f"node {action} is not a valid move from {state.current_node} "
                f"(user {state.active_user[0]})")

        demand = state.active_user[1]
        reward = -demand * state.graph.cost(state.current_node, action)
        path = state.partial_path + (action,)

        if action not in state.inflow_set:
            next_state = replace(state, partial_path=path, step_count=state.step_count + 1)
            return StepOutcome(next_state, reward, episode_done=False, all_done=False)

        tree = merge_path(state.tree, list(path))
        merged = replace(state, tree=tree, inflow_set=state.inflow_set | frozenset(path),
                         step_count=state.step_count + 1,
                         completed=state.completed + (state.active_user[0],))
        next_state = self._next_user(merged)
        return StepOutcome(next_state, reward, episode_done=True, all_done=next_state.done)

    def force_completion(self, state: RoutingState) -> List[Tuple[int, StepOutcome]]:
        """
        Finish the active episode through the virtual hub: current node ->
        hub -> source; a path that already holds the hub is cut back to it.
        Returns (action, outcome) pairs

        Raises:
            InfeasibleError: no virtual hub to fall back on
        """
        hub = state.graph.hub_id
        if hub is None:
            raise InfeasibleError(
                f"user {state.active_user[0]} hit the step limit without a virtual hub",
                node=state.active_user[0])
        logger.debug("forcing hub completion for user %d after %d steps",
                     state.active_user[0], state.step_count)
        outcomes: List[Tuple[int, StepOutcome]] = []
        if hub in state.partial_path:
            cut = state.partial_path.index(hub)
            state = replace(state, partial_path=state.partial_path[:cut + 1])
        else:
            outcome = self.step(state, hub)
            outcomes.append((hub, outcome))
            if outcome.episode_done:
                return outcomes
            state = outcome.next_state
        source = state.instance.source
        outcomes.append((source, self.step(state, source)))
        return outcomes
