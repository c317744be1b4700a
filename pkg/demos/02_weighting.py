"""Edge weights three ways: sentence-embedding cosine, corpus NPMI, learned vectors."""

# %%
from pathlib import Path

import numpy as np

from scovist.graph import NodeKind, StoryGraph, StoryNode
from scovist.weighting import (
    WeightingStrategy,
    assign_weights,
    build_corpus_index,
    cosine,
    edge_weight_npmi,
    embedding_table,
    npmi,
    read_corpus,
)

CORPUS = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "wedding_corpus.txt"

# %% Cosine ignores vector length
rng = np.random.default_rng(0)
u, v = rng.normal(size=8), rng.normal(size=8)
print(cosine(u, v), cosine(3 * u, 0.01 * v), cosine(u, u))

# %% NPMI on a toy corpus
toy = build_corpus_index(["the bride smiles", "the groom smiles", "the cake is cut"])
print("smiles/bride:", npmi("smiles", "bride", toy))
print("bride/groom: ", npmi("bride", "groom", toy))  # never together
print("the/smiles:  ", npmi("the", "smiles", toy))
print("unseen:      ", npmi("bride", "zebra", toy))  # no evidence

# %% Phrase-level weight: best word pair
index = read_corpus(CORPUS)
print(index.total_sentences, "sentences,", len(index.word_counts), "words")
print(edge_weight_npmi("to kiss the bride", "the bride and groom cutting a cake", index))

# %% The same toy graph under two strategies
g = StoryGraph()
g.add_node(StoryNode("T1_1", NodeKind.THEME, ("wedding", "cake"), image_index=1))
g.add_node(StoryNode("C1_1", NodeKind.CAPTION, "the bride cuts the cake", image_index=1))
g.add_node(StoryNode("ckA1_1", NodeKind.AFTER, "guests cheer", image_index=1, relation="xEffect"))
g.add_edge("T1_1", "C1_1").add_edge("C1_1", "ckA1_1")

w = assign_weights(g, WeightingStrategy.npmi(index))
print({e: round(x.weight, 3) for e, x in w.edges.items()})

table = embedding_table({nid: rng.normal(size=4) for nid in g.nodes})
w = assign_weights(g, WeightingStrategy.learned(table))
print({e: round(x.weight, 3) for e, x in w.edges.items()})
