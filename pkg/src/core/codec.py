"""
JSON documents for instances and trees
Instance: {version, n, source, edges: [[u, v, cost]], demands: [[node, level]], hub, seed}
Tree: {root, edges: [[child, parent]]}
"""
import json
from pathlib import Path
from typing import Any, Dict, List, Union

from .errors import InstanceFormatError, InvalidConfigError
from .flow_tree import MulticastTree
from .graph import DemandVector, NetworkGraph, ProblemInstance

FORMAT_VERSION = 1


def serialize_instance(instance: ProblemInstance) -> str:
    """Deterministic JSON text; floats keep full precision"""
    graph = instance.graph
    document = {
        "version": FORMAT_VERSION,
        "n": graph.node_count,
        "source": instance.source,
        "edges": [[u, v, cost] for (u, v), cost in graph.edges.items()],
        "demands": [[node, demand] for node, demand in instance.demands],
        "hub": graph.hub_id,
        "seed": instance.seed,
    }
    return json.dumps(document)


def read_document(path: Union[str, Path]) -> str:
    """
    UTF-8 text of an instance or tree file

    Raises:
        InstanceFormatError: the file is not valid UTF-8
    """
    try:
        return Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise InstanceFormatError(f"{path}: not UTF-8 text (byte {exc.start}: {exc.reason})") from exc


def _load(text: str) -> Dict[str, Any]:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid JSON: {exc.msg} (line {exc.lineno})") from exc
    if not isinstance(document, dict):
        raise InstanceFormatError("document must be a JSON object")
    return document


def _field(document: Dict[str, Any], name: str) -> Any:
    if name not in document:
        raise InstanceFormatError(f"missing field: {name}")
    return document[name]


def _as_int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceFormatError(f"field {name} must be an integer, got {value!r}")
    return value


def _as_number(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceFormatError(f"field {name} must be a number, got {value!r}")
    return float(value)


def _rows(value: Any, name: str, width: int) -> List[list]:
    if not isinstance(value, list):
        raise InstanceFormatError(f"field {name} must be a list")
    for row in value:
        if not isinstance(row, list) or len(row) != width:
            raise InstanceFormatError(f"field {name}: every entry needs {width} values, got {row!r}")
    return value


def parse_instance(text: str) -> ProblemInstance:
    """
    Parse an instance document

    Raises:
        InstanceFormatError: malformed document; the message names the field
    """
    document = _load(text)
    version = _as_int(_field(document, "version"), "version")
    if version != FORMAT_VERSION:
        raise InstanceFormatError(f"unsupported instance version {version}")
    n = _as_int(_field(document, "n"), "n")
    source = _as_int(_field(document, "source"), "source")

    edges: Dict = {}
    for u, v, cost in _rows(_field(document, "edges"), "edges", 3):
        cost = _as_number(cost, "edges")
        if cost < 0:
            raise InstanceFormatError("negative edge cost")
        key = (_as_int(u, "edges"), _as_int(v, "edges"))
        if key in edges or (key[1], key[0]) in edges:
            raise InstanceFormatError(f"field edges: duplicate edge {key}")
        edges[key] = cost

    demands = [(_as_int(node, "demands"), _as_number(level, "demands"))
               for node, level in _rows(_field(document, "demands"), "demands", 2)]

    hub = document.get("hub")
    if hub is not None:
        hub = _as_int(hub, "hub")
        if hub != n - 1:
            raise InstanceFormatError(f"field hub: must be the highest node id {n - 1}, got {hub}")
    seed = _as_int(document.get("seed", 0), "seed")

    try:
        graph = NetworkGraph(node_count=n, edges=edges, hub_id=hub)
        return ProblemInstance(graph=graph, source=source, demands=DemandVector(tuple(demands)), seed=seed)
    except InvalidConfigError as exc:
        raise InstanceFormatError(str(exc)) from exc


def tree_to_document(tree: MulticastTree) -> Dict[str, Any]:
    return {"root": tree.root, "edges": [[c, p] for p, c in tree.edges()]}


def tree_from_document(document: Any) -> MulticastTree:
    if not isinstance(document, dict):
        raise InstanceFormatError("tree document must be a JSON object")
    root = _as_int(_field(document, "root"), "root")
    parent: Dict[int, int] = {}
    for child, up in _rows(_field(document, "edges"), "edges", 2):
        child = _as_int(child, "edges")
        if child in parent:
            raise InstanceFormatError(f"field edges: node {child} has two parents")
        parent[child] = _as_int(up, "edges")
    return MulticastTree(root=root, parent=parent)


def serialize_tree(tree: MulticastTree) -> str:
    return json.dumps(tree_to_document(tree))


def parse_tree(text: str) -> MulticastTree:
    return tree_from_document(_load(text))
