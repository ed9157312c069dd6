"""
Graphviz DOT documents for routing trees
"""
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import graphviz

from ..core.errors import TreeError
from ..core.flow_tree import MulticastTree, compute_flows, tree_cost
from ..core.graph import ProblemInstance

logger = logging.getLogger(__name__)

# destination shapes from the highest demand level down
DEMAND_SHAPES = ("doublecircle", "circle", "ellipse", "oval")
SOURCE_STYLE = {"shape": "box", "style": "filled", "fillcolor": "gold"}


def _demand_shapes(instance: ProblemInstance) -> Dict[float, str]:
    levels = sorted({d for _, d in instance.demands}, reverse=True)
    return {level: DEMAND_SHAPES[min(i, len(DEMAND_SHAPES) - 1)] for i, level in enumerate(levels)}


def tree_to_dot(instance: ProblemInstance, tree: MulticastTree, label: str = "tree") -> str:
    """
    One DOT document: bold tree edges labelled with their flow, destinations
    shaped by demand level, the source highlighted

    Raises:
        TreeError: the tree does not belong to the instance
    """
    graph = instance.graph
    if tree.root != instance.source:
        raise TreeError(f"tree is rooted at {tree.root}, the source is {instance.source}")
    outside = sorted(v for v in tree.nodes() if not 0 <= v < graph.node_count)
    if outside:
        raise TreeError(f"tree nodes {outside} are not in the graph")
    if tree.edge_count:
        tree_cost(graph, tree, instance.demands)
    flows = compute_flows(tree, instance.demands) if tree.edge_count else None

    demands = instance.demands.as_dict()
    shapes = _demand_shapes(instance)
    dot = graphviz.Digraph(name=label, comment=f"{label}: {tree.edge_count} edges")
    dot.attr(rankdir="TB")
    for v in sorted(graph.nodes()):
        if graph.is_hub(v) and v not in tree:
            continue
        if v == instance.source:
            dot.node(str(v), f"{v} (source)", **SOURCE_STYLE)
        elif v in demands:
            dot.node(str(v), f"{v} ({demands[v]:g})", shape=shapes[demands[v]])
        elif graph.is_hub(v):
            dot.node(str(v), "hub", shape="diamond")
        else:
            dot.node(str(v), str(v), shape="point")
    for parent, child in tree.edges():
        flow = flows.flows.get((parent, child), 0.0) if flows is not None else 0.0
        dot.edge(str(parent), str(child), label=f"{flow:g}", style="bold")
    return dot.source


def export_dot(instance: ProblemInstance,
               solutions: Sequence[Tuple[str, MulticastTree]]) -> Dict[str, str]:
    """DOT text per labelled tree, in input order"""
    return {label: tree_to_dot(instance, tree, label) for label, tree in solutions}


def write_dot_files(instance: ProblemInstance, solutions: Sequence[Tuple[str, MulticastTree]],
                    out_dir: Union[str, Path]) -> List[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for label, text in export_dot(instance, solutions).items():
        path = out_dir / f"{label}.dot"
        path.write_text(text, encoding="utf-8")
        written.append(path)
        logger.debug("wrote %s", path)
    return written
