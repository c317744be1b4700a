"""Build the story graph for a five-photo wedding album from the bundled fixture.

Run from the repository root: ``python3 demos/01_build_graph.py``
"""

# %%
from collections import Counter
from pathlib import Path

from scovist.graph import to_dot
from scovist.nodes import (
    PhotoSequenceRecord,
    build_caption_nodes,
    build_commonsense_nodes,
    build_theme_nodes,
    dedup_commonsense,
    wire_story_graph,
)
from scovist.providers import FixtureProvider, ProviderHub

HERE = Path(__file__).resolve().parent
FIXTURES = HERE.parent / "tests" / "fixtures"

hub = ProviderHub.single(FixtureProvider.load(FIXTURES / "wedding_fixture.json"))
record = PhotoSequenceRecord.load(FIXTURES / "wedding_record.json")
print(record)

# %% One caption per photo
captions = build_caption_nodes(record, hub)
for c in captions:
    print(c.id, "|", c.text)

# %% Five tails for each of xNeed/xIntent (before) and xEffect/xWant (after)
group = build_commonsense_nodes(captions[0], hub, k=5)
for node in group.before[:3] + group.after[:3]:
    print(f"{node.id:8s} {node.relation:8s} {node.text}")

# %% Near-duplicate tails are dropped (cosine > 0.5 against a kept one)
groups = [dedup_commonsense(build_commonsense_nodes(c, hub), hub, 0.5) for c in captions]
print("kept per image:", [(len(g.before), len(g.after)) for g in groups])

# %% Themes: 20 detected concepts per photo
themes = build_theme_nodes(record, hub, k=20)
print(themes[0].id, themes[0].phrase)

# %% Wire it up
graph = wire_story_graph(captions, groups, themes)
print(len(graph.nodes), "nodes,", len(graph.edges), "edges")
print(Counter(n.kind.value for n in graph.nodes.values()))

# %% DOT for graphviz (first lines)
print("\n".join(to_dot(graph).splitlines()[:6]))
