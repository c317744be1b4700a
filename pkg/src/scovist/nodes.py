"""Stage 1: caption, commonsense and theme nodes, dedup, and causal wiring."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import EmptyTextError, IndexGapError, InvariantViolationError, ParseError
from .graph import (
    AFTER_RELATIONS,
    BEFORE_RELATIONS,
    NodeKind,
    StoryGraph,
    StoryNode,
    make_node_id,
    node_from_dict,
    node_to_dict,
    validate_dag,
)
from .weighting import cosine

DEFAULT_PER_RELATION = 5
DEFAULT_THEME_CONCEPTS = 20
DEFAULT_DEDUP_THRESHOLD = 0.50


@dataclass(frozen=True)
class PhotoSequenceRecord:
    sequence_id: str
    images: tuple[str, ...]
    album_id: str | None = None

    def __post_init__(self):
        if not self.sequence_id:
            raise InvariantViolationError("sequence_id must be non-empty")
        if not self.images:
            raise InvariantViolationError(f"sequence {self.sequence_id!r} has no images")

    @classmethod
    def from_dict(cls, data: dict) -> PhotoSequenceRecord:
        try:
            images = data["images"]
            if not isinstance(images, list) or not all(isinstance(i, str) for i in images):
                raise TypeError("'images' must be a list of strings")
            return cls(str(data["sequence_id"]), tuple(images), data.get("album_id"))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed photo sequence record: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> PhotoSequenceRecord:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc.msg}", exc.lineno, exc.colno) from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        d = {"sequence_id": self.sequence_id, "images": list(self.images)}
        if self.album_id is not None:
            d["album_id"] = self.album_id
        return d


@dataclass
class CommonsenseGroup:
    caption_node_id: str
    before: list[StoryNode] = field(default_factory=list)
    after: list[StoryNode] = field(default_factory=list)


def build_caption_nodes(record: PhotoSequenceRecord, captioner) -> list[StoryNode]:
    nodes = []
    for i, ref in enumerate(record.images, start=1):
        text = captioner.caption(ref)
        if not isinstance(text, str) or not text.strip():
            raise EmptyTextError(f"empty caption for image {i} ({ref!r})")
        nodes.append(StoryNode(make_node_id(NodeKind.CAPTION, i, 1), NodeKind.CAPTION, text, image_index=i))
    return nodes


def build_commonsense_nodes(caption: StoryNode, provider, k: int = DEFAULT_PER_RELATION) -> CommonsenseGroup:
    """Query the four causal relations with the caption as head.

    xNeed/xIntent tails become BEFORE nodes, xEffect/xWant tails AFTER nodes.
    Duplicates are kept here; :func:`dedup_commonsense` filters them.
    """
    if caption.kind is not NodeKind.CAPTION:
        raise InvariantViolationError(f"{caption.id} is not a caption node")
    if k < 1:
        raise ValueError("k must be >= 1")
    i = caption.image_index
    group = CommonsenseGroup(caption.id)
    for kind, relations, bucket in (
        (NodeKind.BEFORE, BEFORE_RELATIONS, group.before),
        (NodeKind.AFTER, AFTER_RELATIONS, group.after),
    ):
        for relation in relations:
            for tail in provider.commonsense(caption.phrase, relation, k):
                node_id = make_node_id(kind, i, len(bucket) + 1)
                bucket.append(StoryNode(node_id, kind, tail, image_index=i, relation=relation))
    return group


def _greedy_keep_first(nodes: list[StoryNode], threshold: float) -> list[StoryNode]:
    kept: list[StoryNode] = []
    for cand in nodes:
        if all(cosine(cand.embedding, k.embedding) <= threshold for k in kept):
            kept.append(cand)
    return kept


def dedup_commonsense(group: CommonsenseGroup, embedder, threshold: float = DEFAULT_DEDUP_THRESHOLD) -> CommonsenseGroup:
    """Drop a candidate iff its cosine with an already-kept member exceeds ``threshold``.

    BEFORE and AFTER are filtered independently, in generation order. Kept
    nodes come back with their embeddings cached.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"dedup threshold must be in (0, 1], got {threshold}")
    members = group.before + group.after
    pending = [n for n in members if n.embedding is None]
    if pending:
        vectors = embedder.embed([n.phrase for n in pending])
        done = {n.id: n.with_embedding(v) for n, v in zip(pending, vectors)}
    else:
        done = {}
    before = [done.get(n.id, n) for n in group.before]
    after = [done.get(n.id, n) for n in group.after]
    return CommonsenseGroup(
        group.caption_node_id,
        _greedy_keep_first(before, threshold),
        _greedy_keep_first(after, threshold),
    )


def build_theme_nodes(record: PhotoSequenceRecord, concept_provider, k: int = DEFAULT_THEME_CONCEPTS) -> list[StoryNode]:
    if k < 1:
        raise ValueError("k must be >= 1")
    nodes = []
    for i, ref in enumerate(record.images, start=1):
        found = list(concept_provider.concepts(ref, k))[:k]
        if not found:
            raise EmptyTextError(f"no concepts detected for image {i} ({ref!r})")
        nodes.append(StoryNode(make_node_id(NodeKind.THEME, i, 1), NodeKind.THEME, tuple(found), image_index=i))
    return nodes


def _by_index(nodes: Sequence[StoryNode], what: str) -> list[StoryNode]:
    ordered = sorted(nodes, key=lambda n: n.image_index)
    indices = [n.image_index for n in ordered]
    if indices != list(range(1, len(ordered) + 1)):
        raise IndexGapError(f"{what} image indices must run 1..N without gaps, got {indices}")
    return ordered


def wire_story_graph(
    captions: Sequence[StoryNode],
    groups: Sequence[CommonsenseGroup],
    themes: Sequence[StoryNode],
) -> StoryGraph:
    """Causal wiring per image i: T_i -> BEFORE -> C_i -> AFTER -> T_{i+1}.

    An empty BEFORE group falls back to T_i -> C_i, an empty AFTER group to
    C_i -> T_{i+1}; an empty AFTER group on the last image leaves C_N a sink.
    """
    captions = _by_index(captions, "caption")
    themes = _by_index(themes, "theme")
    n = len(captions)
    if len(themes) != n:
        raise IndexGapError(f"{len(themes)} theme nodes for {n} captions")
    by_caption = {g.caption_node_id: g for g in groups}
    if len(by_caption) != len(groups) or set(by_caption) != {c.id for c in captions}:
        raise InvariantViolationError("need exactly one commonsense group per caption")

    ordered_groups = [by_caption[c.id] for c in captions]
    graph = StoryGraph()
    for i in range(n):
        group = ordered_groups[i]
        for node in [themes[i], *group.before, captions[i], *group.after]:
            if node.image_index != i + 1:
                raise InvariantViolationError(f"{node.id} belongs to image {node.image_index}, not {i + 1}")
            node.check(n_images=n)
            graph.add_node(node)

    for i in range(n):
        t, c, group = themes[i].id, captions[i].id, ordered_groups[i]
        if group.before:
            for b in group.before:
                graph.add_edge(t, b.id)
            for b in group.before:
                graph.add_edge(b.id, c)
        else:
            graph.add_edge(t, c)
        for a in group.after:
            graph.add_edge(c, a.id)
        if i + 1 < n:
            nxt = themes[i + 1].id
            if group.after:
                for a in group.after:
                    graph.add_edge(a.id, nxt)
            else:
                graph.add_edge(c, nxt)

    validate_dag(graph)
    if graph.start_node() is None:
        raise InvariantViolationError("wired graph needs exactly one theme node for image 1")
    return graph


# -- persistence of the node-construction stage --------------------------------


def nodes_to_dict(sequence_id: str, captions, groups, themes) -> dict:
    return {
        "sequence_id": sequence_id,
        "captions": [node_to_dict(n) for n in captions],
        "groups": [
            {
                "caption_node_id": g.caption_node_id,
                "before": [node_to_dict(n) for n in g.before],
                "after": [node_to_dict(n) for n in g.after],
            }
            for g in groups
        ],
        "themes": [node_to_dict(n) for n in themes],
    }


def nodes_from_dict(data: dict):
    """Inverse of :func:`nodes_to_dict`: ``(sequence_id, captions, groups, themes)``."""
    try:
        captions = [node_from_dict(d) for d in data["captions"]]
        groups = [
            CommonsenseGroup(
                g["caption_node_id"],
                [node_from_dict(d) for d in g["before"]],
                [node_from_dict(d) for d in g["after"]],
            )
            for g in data["groups"]
        ]
        themes = [node_from_dict(d) for d in data["themes"]]
        return data["sequence_id"], captions, groups, themes
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed node document: {exc}") from exc
