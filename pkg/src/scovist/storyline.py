"""Storyline extraction: negate, attach the dummy end, all-pairs shortest paths, serialize."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    AlreadyAttachedError,
    EmptyTextError,
    InvariantViolationError,
    MissingStartError,
    SeparatorInEventError,
    UnreachableError,
    UnweightedGraphError,
)
from .graph import DUMMY_END_ID, NodeKind, StoryGraph, StoryNode, validate_dag

DEFAULT_DUMMY_WEIGHT = -99.0
DEFAULT_SEPARATOR = "</s>"


@dataclass(frozen=True)
class StoryEvent:
    node_id: str
    kind: NodeKind
    text: str
    relation: str | None = None


@dataclass
class Storyline:
    """Ordered events plus the full audited path.

    ``total_weight`` sums the original (pre-negation) weights along the path,
    dummy edges excluded; ``exact_total`` is the same sum without rounding.
    """

    events: list[StoryEvent]
    path: list[str]
    total_weight: float
    exact_total: Fraction = field(default=Fraction(0), repr=False)

    @property
    def texts(self) -> list[str]:
        return [e.text for e in self.events]

    @property
    def node_ids(self) -> list[str]:
        return [e.node_id for e in self.events]

    def __len__(self) -> int:
        return len(self.events)


def _require_weighted(graph: StoryGraph) -> None:
    if not graph.weighted:
        raise UnweightedGraphError("graph has no edge weights")


def negate_weights(graph: StoryGraph) -> StoryGraph:
    _require_weighted(graph)
    out = StoryGraph(weighted=True)
    for node in graph.nodes.values():
        out.add_node(node)
    for e in graph.edges.values():
        out.add_edge(e.source, e.target, -e.weight)
    return out


def dummy_end(graph: StoryGraph) -> StoryNode | None:
    ends = graph.nodes_of_kind(NodeKind.DUMMY_END)
    return ends[0] if ends else None


def attach_dummy_end(graph: StoryGraph, dummy_weight: float = DEFAULT_DUMMY_WEIGHT) -> StoryGraph:
    """Copy of ``graph`` with one sink ``DE`` fed by every current sink."""
    if dummy_end(graph) is not None:
        raise AlreadyAttachedError("graph already has a dummy end node")
    validate_dag(graph)
    sinks = graph.sinks()
    if not sinks:
        raise InvariantViolationError("graph has no sink to attach the dummy end to")
    out = graph.copy()
    out.add_node(StoryNode(id=DUMMY_END_ID, kind=NodeKind.DUMMY_END))
    for s in sinks:
        out.add_edge(s, DUMMY_END_ID, dummy_weight)
    return out


# -- Floyd-Warshall ----------------------------------------------------------


def _to_fixed_point(weights: list[float]) -> int:
    """Common power-of-two denominator turning every float weight into an integer."""
    scale = 1
    for w in weights:
        scale = max(scale, Fraction(w).denominator)
    return scale


@dataclass(frozen=True)
class PathMatrices:
    """All-pairs distances and next-hop table.

    Path costs are accumulated as exact integers (weights scaled by a common
    power-of-two ``scale``), so comparisons and ties never depend on rounding.
    Unreachable pairs are simply absent from ``dist``.
    """

    dist: dict[str, dict[str, int]]
    next_hop: dict[str, dict[str, str]]
    scale: int

    def reachable(self, u: str, v: str) -> bool:
        return v in self.dist[u]

    def exact_distance(self, u: str, v: str) -> Fraction | None:
        d = self.dist[u].get(v)
        return None if d is None else Fraction(d, self.scale)

    def distance(self, u: str, v: str) -> float:
        d = self.exact_distance(u, v)
        return math.inf if d is None else float(d)

    def path(self, u: str, v: str) -> list[str]:
        if not self.reachable(u, v):
            raise UnreachableError(f"{v!r} is not reachable from {u!r}")
        out = [u]
        while u != v:
            u = self.next_hop[u][v]
            out.append(u)
        return out


def floyd_warshall(graph: StoryGraph) -> PathMatrices:
    """All-pairs shortest paths with deterministic tie-breaking.

    Among equal-cost alternatives the next hop with the smaller node id wins,
    so the reconstructed path is the lexicographically smallest optimal one.
    Negative weights are fine; the graph is acyclic so no negative cycles exist.
    """
    _require_weighted(graph)
    ids = sorted(graph.nodes)
    scale = _to_fixed_point([e.weight for e in graph.edges.values()])

    dist: dict[str, dict[str, int]] = {u: {u: 0} for u in ids}
    nxt: dict[str, dict[str, str]] = {u: {u: u} for u in ids}
    for e in graph.edges.values():
        dist[e.source][e.target] = int(Fraction(e.weight) * scale)
        nxt[e.source][e.target] = e.target

    for k in ids:
        dk = dist[k]
        for i in ids:
            di = dist[i]
            if i == k or k not in di:
                continue
            dik = di[k]
            ni = nxt[i]
            hop = ni[k]
            for j, dkj in dk.items():
                if j == k:
                    continue
                cand = dik + dkj
                cur = di.get(j)
                if cur is None or cand < cur:
                    di[j] = cand
                    ni[j] = hop
                elif cand == cur and hop < ni[j]:
                    ni[j] = hop
    return PathMatrices(dist=dist, next_hop=nxt, scale=scale)


def _endpoints(graph: StoryGraph) -> tuple[str, str]:
    start = graph.start_node()
    if start is None:
        raise MissingStartError("graph needs exactly one theme node for image 1")
    end = dummy_end(graph)
    if end is None:
        raise InvariantViolationError("graph has no dummy end node")
    return start.id, end.id


def _storyline_from_path(graph: StoryGraph, path: list[str], original_sign: int) -> Storyline:
    weights = [
        original_sign * graph.weight(u, v)
        for u, v in zip(path, path[1:])
        if graph.nodes[v].kind is not NodeKind.DUMMY_END
    ]
    events = []
    for node_id in path:
        node = graph.nodes[node_id]
        if node.is_event:
            events.append(StoryEvent(node.id, node.kind, node.phrase, node.relation))
    if not events:
        raise InvariantViolationError("path carries no caption or commonsense events")
    return Storyline(
        events=events,
        path=path,
        total_weight=math.fsum(weights) + 0.0,
        exact_total=sum((Fraction(w) for w in weights), Fraction(0)),
    )


def extract_storyline(graph: StoryGraph, matrices: PathMatrices) -> Storyline:
    """Events on the optimal T_1 -> DE path, theme and dummy nodes dropped.

    ``graph`` is the negated graph with the dummy end attached.
    """
    start, end = _endpoints(graph)
    if not matrices.reachable(start, end):
        raise UnreachableError(f"dummy end is not reachable from {start!r}")
    return _storyline_from_path(graph, matrices.path(start, end), original_sign=-1)


def plan_storyline(weighted: StoryGraph, dummy_weight: float = DEFAULT_DUMMY_WEIGHT) -> Storyline:
    """negate -> attach dummy end -> Floyd-Warshall -> extract."""
    final = attach_dummy_end(negate_weights(weighted), dummy_weight)
    return extract_storyline(final, floyd_warshall(final))


def dag_longest_path_oracle(graph: StoryGraph) -> Storyline:
    """Maximum-weight T_1 -> DE path by dynamic programming over a topological order.

    Expects the un-negated weighted graph with the dummy end attached using a
    positive weight. Ties go to the smaller next-hop id, matching
    :func:`floyd_warshall`. Sums are exact rationals.
    """
    _require_weighted(graph)
    start, end = _endpoints(graph)
    order = validate_dag(graph)

    best: dict[str, Fraction | None] = {}
    for u in reversed(order):
        if u == end:
            best[u] = Fraction(0)
            continue
        vals = [Fraction(graph.weight(u, v)) + best[v] for v in graph.successors(u) if best[v] is not None]
        best[u] = max(vals) if vals else None
    if best[start] is None:
        raise UnreachableError(f"dummy end is not reachable from {start!r}")

    path = [start]
    u = start
    while u != end:
        u = min(
            v
            for v in graph.successors(u)
            if best[v] is not None and Fraction(graph.weight(u, v)) + best[v] == best[u]
        )
        path.append(u)
    return _storyline_from_path(graph, path, original_sign=1)


# -- serialization -------------------------------------------------------------


def serialize_storyline(storyline: Storyline, separator: str = DEFAULT_SEPARATOR) -> str:
    if not storyline.events:
        raise EmptyTextError("storyline has no events")
    for e in storyline.events:
        if separator in e.text:
            raise SeparatorInEventError(f"event {e.node_id!r} contains the separator {separator!r}")
    return separator.join(storyline.texts)


def storyline_to_dict(storyline: Storyline, sequence_id: str, separator: str = DEFAULT_SEPARATOR) -> dict:
    events = []
    for e in storyline.events:
        d = {"node_id": e.node_id, "kind": e.kind.value}
        if e.relation is not None:
            d["relation"] = e.relation
        d["text"] = e.text
        events.append(d)
    return {
        "sequence_id": sequence_id,
        "events": events,
        "serialized": serialize_storyline(storyline, separator),
        "total_weight": storyline.total_weight,
        "path": list(storyline.path),
    }


def storyline_from_dict(data: dict) -> Storyline:
    try:
        events = [
            StoryEvent(d["node_id"], NodeKind(d["kind"]), d["text"], d.get("relation"))
            for d in data["events"]
        ]
        total = float(data["total_weight"])
        path = list(data["path"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvariantViolationError(f"malformed storyline document: {exc}") from exc
    return Storyline(events=events, path=path, total_weight=total, exact_total=Fraction(total))
