"""
Flow semantics, cost evaluation and tree validation
"""
import pytest

from conftest import make_instance, small_random_instances
from src.core import (DEMAND_LEVELS, CycleError, FlowAssignment, InfeasibleError, MulticastTree, TreeError,
                      compute_flows, level_decomposition_cost, merge_path, tree_cost, validate,
                      validate_overlay)
from src.core.flow_tree import prune_relay_leaves, tree_from_edges

ILLUSTRATIVE_TREE = MulticastTree(root=0, parent={1: 0, 3: 1, 4: 1, 2: 0, 5: 2})


def test_flows_are_max_downstream_demand(illustrative):
    flows = compute_flows(ILLUSTRATIVE_TREE, illustrative.demands)
    assert flows.flows == {(0, 1): 4.0, (1, 3): 4.0, (1, 4): 2.0, (0, 2): 1.0, (2, 5): 1.0}
    assert flows.inflow(1) == 4.0
    assert flows.max_outflow(0) == 4.0


def test_illustrative_cost(illustrative):
    assert tree_cost(illustrative.graph, ILLUSTRATIVE_TREE, illustrative.demands) == 21.0


def test_unit_costs_sum_flows(illustrative):
    unit = make_instance(6, {key: 1.0 for key in illustrative.graph.edges}, illustrative.demands)
    assert tree_cost(unit.graph, ILLUSTRATIVE_TREE, unit.demands) == 12.0


def test_level_decomposition_matches(illustrative):
    assert level_decomposition_cost(illustrative.graph, ILLUSTRATIVE_TREE, illustrative.demands) == 21.0


def test_cost_scales_with_demands(illustrative):
    doubled = illustrative.demands.scaled(2.0)
    assert tree_cost(illustrative.graph, ILLUSTRATIVE_TREE, doubled) == 42.0


def test_cost_rejects_foreign_edge(illustrative):
    tree = MulticastTree(root=0, parent={3: 0, 4: 3, 5: 0})
    with pytest.raises(TreeError):
        tree_cost(illustrative.graph, tree, illustrative.demands)


def test_flows_need_every_destination(illustrative):
    partial = MulticastTree(root=0, parent={1: 0, 3: 1})
    with pytest.raises(TreeError, match="missing"):
        compute_flows(partial, illustrative.demands)


def test_tree_queries():
    tree = ILLUSTRATIVE_TREE
    assert tree.nodes() == set(range(6))
    assert tree.leaves() == [3, 4, 5]
    assert tree.children()[1] == [3, 4]
    assert tree.path_to_root(4) == [4, 1, 0]
    assert tree.edge_count == 5
    assert tree.undirected_edges() == [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5)]


def test_merge_path():
    tree = MulticastTree.single(0)
    tree = merge_path(tree, [3, 1, 0])
    tree = merge_path(tree, [4, 1])
    assert tree.parent == {1: 0, 3: 1, 4: 1}
    assert merge_path(tree, [1]) is tree


@pytest.mark.parametrize("path", [[], [5, 2], [2, 1, 0], [5, 2, 5, 0]])
def test_merge_path_rejects(path):
    tree = MulticastTree(root=0, parent={1: 0})
    with pytest.raises(TreeError):
        merge_path(tree, path)


def test_tree_from_edges_prunes_relay_branches():
    tree = tree_from_edges(0, [(0, 1), (1, 3), (0, 2)], destinations=[3])
    assert tree.parent == {1: 0, 3: 1}
    pruned = prune_relay_leaves(MulticastTree(root=0, parent={1: 0, 2: 1, 3: 0}), [3])
    assert pruned.parent == {3: 0}


def test_validate_accepts_illustrative(illustrative):
    report = validate(illustrative.graph, ILLUSTRATIVE_TREE, 0, illustrative.demands)
    assert report.ok, report.violations


def test_validate_flags_relay_leaf(illustrative):
    graph = make_instance(7, {**illustrative.graph.edges, (2, 6): 1.0}, illustrative.demands).graph
    tree = MulticastTree(root=0, parent={**ILLUSTRATIVE_TREE.parent, 6: 2})
    report = validate(graph, tree, 0, illustrative.demands)
    assert not report.leaves_are_destinations
    assert report.is_tree


def test_validate_flags_missing_destination(illustrative):
    tree = MulticastTree(root=0, parent={1: 0, 3: 1, 4: 1})
    report = validate(illustrative.graph, tree, 0, illustrative.demands)
    assert not report.demands_satisfied
    assert not report.ok


def test_validate_flags_cycle(illustrative):
    tree = MulticastTree(root=0, parent={1: 2, 2: 1, 3: 1, 4: 1, 5: 2})
    report = validate(illustrative.graph, tree, 0, illustrative.demands)
    assert not report.is_tree
    assert not report.ok


def test_cycles_and_orphans_are_told_apart(illustrative):
    with pytest.raises(CycleError):
        MulticastTree(root=0, parent={1: 2, 2: 1}).path_to_root(1)
    orphan = MulticastTree(root=0, parent={1: 0, 3: 1, 4: 1, 5: 2})
    with pytest.raises(TreeError) as excinfo:
        orphan.path_to_root(5)
    assert not isinstance(excinfo.value, CycleError)
    report = validate(illustrative.graph, orphan, 0, illustrative.demands)
    assert report.is_tree
    assert not report.is_rooted_connected


def test_validate_flags_missing_edge(illustrative):
    tree = MulticastTree(root=0, parent={1: 0, 3: 1, 4: 1, 5: 1})
    report = validate(illustrative.graph, tree, 0, illustrative.demands)
    assert not report.edges_exist


def test_validate_flags_low_flow(illustrative):
    flows = compute_flows(ILLUSTRATIVE_TREE, illustrative.demands).flows
    starved = FlowAssignment({**flows, (1, 3): 1.0})
    report = validate(illustrative.graph, ILLUSTRATIVE_TREE, 0, illustrative.demands, flows=starved)
    assert not report.demands_satisfied


def test_validate_wrong_root(illustrative):
    tree = MulticastTree(root=1, parent={0: 1, 3: 1, 4: 1, 2: 0, 5: 2})
    report = validate(illustrative.graph, tree, 0, illustrative.demands)
    assert not report.is_rooted_connected


def test_overlay_with_shared_node_is_not_a_tree():
    # diamond: 0 -> 1 -> 3 and 0 -> 2 -> 3, 3 -> 4
    instance = make_instance(5, {(0, 1): 1.0, (0, 2): 1.0, (1, 3): 1.0, (2, 3): 1.0, (3, 4): 1.0},
                             [(4, 1.0)])
    flows = FlowAssignment({(0, 1): 1.0, (0, 2): 1.0, (1, 3): 1.0, (2, 3): 1.0, (3, 4): 1.0})
    report = validate_overlay(instance.graph, flows, 0, instance.demands)
    assert not report.is_tree
    assert report.demands_satisfied


def test_overlay_tree_passes(illustrative):
    flows = compute_flows(ILLUSTRATIVE_TREE, illustrative.demands)
    report = validate_overlay(illustrative.graph, flows, 0, illustrative.demands)
    assert report.ok, report.violations


def test_adding_a_path_never_lowers_the_cost():
    from src.solvers import dreyfus_wagner

    checked = 0
    for instance in small_random_instances(15, node_count=10, user_count=3, p=0.4, first_seed=70):
        try:
            tree = dreyfus_wagner(instance).tree
        except InfeasibleError:
            continue
        graph = instance.graph
        base = tree_cost(graph, tree, instance.demands)
        members = tree.nodes()
        for u in sorted(members):
            for v in graph.neighbors(u):
                if v in members:
                    continue
                grown = merge_path(tree, [v, u])
                for level in DEMAND_LEVELS:
                    extended = instance.with_added_users([(v, level)])
                    assert tree_cost(graph, grown, extended.demands) >= base
                    checked += 1
    assert checked > 0
