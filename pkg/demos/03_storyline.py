"""Pick the storyline: the maximum-weight path from the first theme node.

Weights are negated, every sink is tied to a dummy end node, and
Floyd-Warshall finds the cheapest route. A direct longest-path DP agrees.
"""

# %%
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from conftest import random_layered_graph  # noqa: E402

from scovist.storyline import (  # noqa: E402
    attach_dummy_end,
    dag_longest_path_oracle,
    extract_storyline,
    floyd_warshall,
    negate_weights,
    serialize_storyline,
)

g = random_layered_graph(random.Random(7))
for (u, v), e in g.edges.items():
    print(f"{u:>7s} -> {v:<7s} {e.weight:+.3f}")

# %% Negate, attach the dummy end, run all-pairs shortest paths
final = attach_dummy_end(negate_weights(g), -99.0)
fw = floyd_warshall(final)
story = extract_storyline(final, fw)
print("path:", " -> ".join(story.path))
print("total:", story.total_weight, " dist(T1, DE):", fw.distance("T1_1", "DE"))

# %% Same answer from the DP
dp = dag_longest_path_oracle(attach_dummy_end(g, 99.0))
print("dp path matches:", dp.path == story.path, " exact totals match:", dp.exact_total == story.exact_total)

# %% What the generator sees
print(serialize_storyline(story))
