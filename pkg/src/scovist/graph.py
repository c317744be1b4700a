"""Heterogeneous story graph: node/edge model, DAG validation and (de)serialization."""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Iterator

from .errors import (
    CycleError,
    DataError,
    DuplicateEdgeError,
    DuplicateNodeError,
    InvalidNodeError,
    InvariantViolationError,
    MissingEndpointError,
    ParseError,
)


class NodeKind(str, Enum):
    THEME = "Theme"
    CAPTION = "Caption"
    BEFORE = "CommonsenseBefore"
    AFTER = "CommonsenseAfter"
    DUMMY_END = "DummyEnd"


BEFORE_RELATIONS = ("xNeed", "xIntent")
AFTER_RELATIONS = ("xEffect", "xWant")
RELATIONS = BEFORE_RELATIONS + AFTER_RELATIONS

ID_PREFIX = {
    NodeKind.THEME: "T",
    NodeKind.CAPTION: "C",
    NodeKind.BEFORE: "ckB",
    NodeKind.AFTER: "ckA",
}
DUMMY_END_ID = "DE"

# palette: grey themes, blue captions, yellow BEFORE, red AFTER.
KIND_COLORS = {
    NodeKind.THEME: "grey",
    NodeKind.CAPTION: "lightblue",
    NodeKind.BEFORE: "yellow",
    NodeKind.AFTER: "salmon",
    NodeKind.DUMMY_END: "white",
}


def make_node_id(kind: NodeKind, image_index: int, counter: int) -> str:
    """Creation-order id such as ``ckB3_2`` (second BEFORE node of image 3)."""
    return f"{ID_PREFIX[kind]}{image_index}_{counter}"


@dataclass(frozen=True)
class StoryNode:
    """One plot point.

    Theme nodes keep their concepts as a tuple in ``text``; ``phrase`` gives
    the space-joined form used wherever a single string is needed.
    """

    id: str
    kind: NodeKind
    text: str | tuple[str, ...] = ""
    image_index: int | None = None
    relation: str | None = None
    embedding: tuple[float, ...] | None = None

    @property
    def phrase(self) -> str:
        if isinstance(self.text, tuple):
            return " ".join(self.text)
        return self.text

    @property
    def is_event(self) -> bool:
        return self.kind in (NodeKind.CAPTION, NodeKind.BEFORE, NodeKind.AFTER)

    def with_embedding(self, vector: Iterable[float]) -> StoryNode:
        return replace(self, embedding=tuple(float(x) for x in vector))

    def check(self, n_images: int | None = None) -> None:
        """Raise InvalidNodeError naming the first violated invariant."""
        if not isinstance(self.id, str) or not self.id:
            raise InvalidNodeError("node id must be a non-empty string")
        if not isinstance(self.kind, NodeKind):
            raise InvalidNodeError(f"{self.id}: unknown kind {self.kind!r}")

        if self.kind is NodeKind.BEFORE and self.relation not in BEFORE_RELATIONS:
            raise InvalidNodeError(
                f"{self.id}: CommonsenseBefore requires relation in {BEFORE_RELATIONS}, got {self.relation!r}"
            )
        if self.kind is NodeKind.AFTER and self.relation not in AFTER_RELATIONS:
            raise InvalidNodeError(
                f"{self.id}: CommonsenseAfter requires relation in {AFTER_RELATIONS}, got {self.relation!r}"
            )
        if self.kind not in (NodeKind.BEFORE, NodeKind.AFTER) and self.relation is not None:
            raise InvalidNodeError(f"{self.id}: relation is only allowed on commonsense nodes")

        if self.kind is NodeKind.DUMMY_END:
            if self.image_index is not None:
                raise InvalidNodeError(f"{self.id}: DummyEnd must not carry an image_index")
        else:
            if isinstance(self.image_index, bool) or not isinstance(self.image_index, int) or self.image_index < 1:
                raise InvalidNodeError(f"{self.id}: image_index must be a positive integer")
            if n_images is not None and self.image_index > n_images:
                raise InvalidNodeError(f"{self.id}: image_index {self.image_index} exceeds sequence length {n_images}")
            if isinstance(self.text, tuple):
                if self.kind is not NodeKind.THEME:
                    raise InvalidNodeError(f"{self.id}: only Theme nodes hold a concept list")
                if not self.text or not all(isinstance(c, str) and c.strip() for c in self.text):
                    raise InvalidNodeError(f"{self.id}: text must be non-empty")
            elif not isinstance(self.text, str) or not self.text.strip():
                raise InvalidNodeError(f"{self.id}: text must be non-empty")

        if self.embedding is not None:
            if not self.embedding or not all(math.isfinite(x) for x in self.embedding):
                raise InvalidNodeError(f"{self.id}: embedding must be a non-empty finite vector")


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    weight: float | None = None


def _clean_weight(weight: float | None) -> float | None:
    if weight is None:
        return None
    weight = float(weight)
    if not math.isfinite(weight):
        raise InvariantViolationError(f"edge weight must be finite, got {weight!r}")
    # -0.0 and 0.0 compare equal but serialize differently
    return 0.0 if weight == 0 else weight


class StoryGraph:
    """Directed story graph; nodes and edges keep insertion order.

    Acyclicity is checked lazily by :func:`validate_dag`, since wiring inserts
    edges in bulk.
    """

    def __init__(self, weighted: bool = False):
        self.nodes: dict[str, StoryNode] = {}
        self.edges: dict[tuple[str, str], Edge] = {}
        self.weighted = weighted
        self._succ: dict[str, list[str]] = {}
        self._pred: dict[str, list[str]] = {}

    def __eq__(self, other) -> bool:
        if not isinstance(other, StoryGraph):
            return NotImplemented
        return self.weighted == other.weighted and self.nodes == other.nodes and self.edges == other.edges

    def __repr__(self) -> str:
        return f"StoryGraph(nodes={len(self.nodes)}, edges={len(self.edges)}, weighted={self.weighted})"

    def add_node(self, node: StoryNode) -> StoryGraph:
        if node.id in self.nodes:
            raise DuplicateNodeError(f"node id {node.id!r} already present")
        node.check()
        self.nodes[node.id] = node
        self._succ[node.id] = []
        self._pred[node.id] = []
        return self

    def add_edge(self, source: str, target: str, weight: float | None = None) -> StoryGraph:
        for end in (source, target):
            if end not in self.nodes:
                raise MissingEndpointError(f"edge endpoint {end!r} is not a node")
        if source == target:
            raise InvariantViolationError(f"self-loop on {source!r}")
        if (source, target) in self.edges:
            raise DuplicateEdgeError(f"edge {source!r} -> {target!r} already present")
        self.edges[(source, target)] = Edge(source, target, _clean_weight(weight))
        self._succ[source].append(target)
        self._pred[target].append(source)
        return self

    def set_weight(self, source: str, target: str, weight: float) -> None:
        self.edges[(source, target)] = Edge(source, target, _clean_weight(weight))

    def replace_node(self, node: StoryNode) -> None:
        """Swap in a node with the same id (e.g. to cache an embedding)."""
        if node.id not in self.nodes:
            raise MissingEndpointError(f"no node {node.id!r}")
        node.check()
        self.nodes[node.id] = node

    def successors(self, node_id: str) -> list[str]:
        return list(self._succ[node_id])

    def predecessors(self, node_id: str) -> list[str]:
        return list(self._pred[node_id])

    def out_degree(self, node_id: str) -> int:
        return len(self._succ[node_id])

    def in_degree(self, node_id: str) -> int:
        return len(self._pred[node_id])

    def sinks(self) -> list[str]:
        return [n for n in self.nodes if not self._succ[n]]

    def weight(self, source: str, target: str) -> float | None:
        return self.edges[(source, target)].weight

    def nodes_of_kind(self, kind: NodeKind) -> list[StoryNode]:
        return [n for n in self.nodes.values() if n.kind is kind]

    def start_node(self) -> StoryNode | None:
        """The theme node of image 1, if exactly one exists."""
        starts = [n for n in self.nodes.values() if n.kind is NodeKind.THEME and n.image_index == 1]
        return starts[0] if len(starts) == 1 else None

    def iter_edges(self) -> Iterator[Edge]:
        return iter(self.edges.values())

    def copy(self) -> StoryGraph:
        g = StoryGraph(weighted=self.weighted)
        for node in self.nodes.values():
            g.add_node(node)
        for e in self.edges.values():
            g.add_edge(e.source, e.target, e.weight)
        return g

    def __len__(self) -> int:
        return len(self.nodes)


def validate_dag(graph: StoryGraph) -> list[str]:
    """Return a topological order, ties broken by ascending node id.

    Raises CycleError carrying one offending cycle when the graph is cyclic.
    """
    indeg = {n: graph.in_degree(n) for n in graph.nodes}
    heap = [n for n, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order: list[str] = []
    while heap:
        u = heapq.heappop(heap)
        order.append(u)
        for v in graph.successors(u):
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, v)
    if len(order) != len(graph.nodes):
        raise CycleError(_find_cycle(graph, {n for n, d in indeg.items() if d > 0}))
    if graph.weighted:
        missing = [e for e in graph.edges.values() if e.weight is None]
        if missing:
            raise InvariantViolationError(
                f"weighted graph has unweighted edge {missing[0].source!r} -> {missing[0].target!r}"
            )
    return order


def _find_cycle(graph: StoryGraph, remaining: set[str]) -> list[str]:
    # every leftover node has a leftover predecessor, so walking backwards must loop
    u = min(remaining)
    seen: dict[str, int] = {}
    walk: list[str] = []
    while u not in seen:
        seen[u] = len(walk)
        walk.append(u)
        u = min(p for p in graph.predecessors(u) if p in remaining)
    cycle = walk[seen[u]:][::-1]
    k = cycle.index(min(cycle))
    return cycle[k:] + cycle[:k]


# -- serialization ----------------------------------------------------------


def node_to_dict(node: StoryNode) -> dict:
    d: dict = {"id": node.id, "kind": node.kind.value}
    d["text"] = list(node.text) if isinstance(node.text, tuple) else node.text
    if node.image_index is not None:
        d["image_index"] = node.image_index
    if node.relation is not None:
        d["relation"] = node.relation
    if node.embedding is not None:
        d["embedding"] = list(node.embedding)
    return d


def graph_to_dict(graph: StoryGraph) -> dict:
    edges = []
    for e in graph.edges.values():
        d: dict = {"source": e.source, "target": e.target}
        if e.weight is not None:
            d["weight"] = e.weight
        edges.append(d)
    return {
        "nodes": [node_to_dict(n) for n in graph.nodes.values()],
        "edges": edges,
        "weighted": graph.weighted,
    }


def dumps_json(obj) -> bytes:
    # repr-based float output is the shortest string that round-trips bit-exactly
    return (json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n").encode("utf-8")


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def to_dot(graph: StoryGraph) -> str:
    lines = ["digraph story {", "  rankdir=LR;"]
    for node in graph.nodes.values():
        label = node.phrase if node.kind is not NodeKind.DUMMY_END else "END"
        attrs = [
            f"label={_dot_quote(label)}",
            f"kind={_dot_quote(node.kind.value)}",
            "style=filled",
            f"fillcolor={_dot_quote(KIND_COLORS[node.kind])}",
        ]
        lines.append(f"  {_dot_quote(node.id)} [{', '.join(attrs)}];")
    for e in graph.edges.values():
        attr = f" [label={_dot_quote(repr(e.weight))}]" if e.weight is not None else ""
        lines.append(f"  {_dot_quote(e.source)} -> {_dot_quote(e.target)}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_graph(graph: StoryGraph, format: str = "json") -> bytes:
    validate_dag(graph)
    if format == "json":
        return dumps_json(graph_to_dict(graph))
    if format == "dot":
        return to_dot(graph).encode("utf-8")
    raise ValueError(f"unsupported export format {format!r}")


def node_from_dict(nd: dict) -> StoryNode:
    if not isinstance(nd, dict) or "id" not in nd or "kind" not in nd:
        raise InvariantViolationError("node record needs 'id' and 'kind'")
    try:
        kind = NodeKind(nd["kind"])
    except ValueError:
        raise InvalidNodeError(f"{nd['id']}: unknown kind {nd['kind']!r}") from None
    text = nd.get("text", "")
    if isinstance(text, list):
        text = tuple(text)
    emb = nd.get("embedding")
    node = StoryNode(
        id=nd["id"],
        kind=kind,
        text=text,
        image_index=nd.get("image_index"),
        relation=nd.get("relation"),
        embedding=tuple(float(x) for x in emb) if emb is not None else None,
    )
    node.check()
    return node


def graph_from_dict(data) -> StoryGraph:
    if not isinstance(data, dict):
        raise InvariantViolationError("graph document must be a JSON object")
    for key in ("nodes", "edges", "weighted"):
        if key not in data:
            raise InvariantViolationError(f"graph document lacks {key!r}")
    if not isinstance(data["weighted"], bool):
        raise InvariantViolationError("'weighted' must be a boolean")

    graph = StoryGraph(weighted=data["weighted"])
    try:
        for nd in data["nodes"]:
            graph.add_node(node_from_dict(nd))
        for i, ed in enumerate(data["edges"]):
            if not isinstance(ed, dict) or "source" not in ed or "target" not in ed:
                raise InvariantViolationError(f"edges[{i}] needs 'source' and 'target'")
            graph.add_edge(ed["source"], ed["target"], ed.get("weight"))
    except InvariantViolationError:
        raise
    except (DataError, TypeError) as exc:
        raise InvariantViolationError(str(exc)) from exc
    validate_dag(graph)
    return graph


def import_graph(data: bytes | str, format: str = "json") -> StoryGraph:
    if format != "json":
        raise ValueError(f"unsupported import format {format!r}")
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"invalid UTF-8 at byte {exc.start}") from exc
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
    return graph_from_dict(doc)
