import random
from pathlib import Path

import pytest

from scovist.graph import NodeKind, StoryGraph, StoryNode
from scovist.nodes import PhotoSequenceRecord
from scovist.providers import FixtureProvider, ProviderHub

FIXTURES = Path(__file__).parent / "fixtures"
WEDDING_FIXTURE = FIXTURES / "wedding_fixture.json"
WEDDING_RECORD = FIXTURES / "wedding_record.json"
WEDDING_CORPUS = FIXTURES / "wedding_corpus.txt"


@pytest.fixture
def wedding_provider():
    return FixtureProvider.load(WEDDING_FIXTURE)


@pytest.fixture
def wedding_hub(wedding_provider):
    return ProviderHub.single(wedding_provider)


@pytest.fixture
def wedding_record():
    return PhotoSequenceRecord.load(WEDDING_RECORD)


def random_layered_graph(rng: random.Random, max_nodes: int = 12) -> StoryGraph:
    """Random weighted layered DAG rooted at a theme node for image 1.

    Layers after the root cycle through BEFORE / CAPTION / AFTER / THEME kinds.
    Every node has a predecessor in the previous layer and a successor in the
    next; occasional skip edges jump one layer so paths differ in length.
    """
    kinds = [NodeKind.BEFORE, NodeKind.CAPTION, NodeKind.AFTER, NodeKind.THEME]
    layers = [[StoryNode("T1_1", NodeKind.THEME, ("start",), image_index=1)]]
    total = 1
    image = 1
    layer_no = 0
    while total < max_nodes:
        kind = kinds[layer_no % 4]
        if kind is NodeKind.THEME:
            image += 1
        size = min(rng.randint(1, 3), max_nodes - total)
        if kind in (NodeKind.CAPTION, NodeKind.THEME):
            size = 1
        layer = []
        for n in range(size):
            rel = None
            if kind is NodeKind.BEFORE:
                rel = rng.choice(["xNeed", "xIntent"])
            elif kind is NodeKind.AFTER:
                rel = rng.choice(["xEffect", "xWant"])
            text = ("c",) if kind is NodeKind.THEME else f"event {layer_no} {n}"
            prefix = {NodeKind.BEFORE: "ckB", NodeKind.CAPTION: "C", NodeKind.AFTER: "ckA", NodeKind.THEME: "T"}[kind]
            layer.append(StoryNode(f"{prefix}{image}_{n + 1}", kind, text, image_index=image, relation=rel))
        layers.append(layer)
        total += size
        layer_no += 1
        if rng.random() < 0.25 and layer_no >= 3:
            break

    g = StoryGraph(weighted=True)
    for layer in layers:
        for node in layer:
            g.add_node(node)

    def w():
        return rng.uniform(-1.0, 1.0)

    for prev, nxt in zip(layers, layers[1:]):
        for v in nxt:
            g.add_edge(rng.choice(prev).id, v.id, w())
        for u in prev:
            if not g.successors(u.id):
                g.add_edge(u.id, rng.choice(nxt).id, w())
        for u in prev:
            for v in nxt:
                if (u.id, v.id) not in g.edges and rng.random() < 0.4:
                    g.add_edge(u.id, v.id, w())
    for a, c in zip(layers, layers[2:]):
        for u in a:
            for v in c:
                if rng.random() < 0.15:
                    g.add_edge(u.id, v.id, w())
    return g
