"""Storyline planning over commonsense story graphs for photo sequences.

Stage 1 builds a directed acyclic graph of theme, caption and commonsense
nodes; Stage 2 weights its edges (cosine, NPMI or learned embeddings);
Stage 3 finds the maximum-weight path with Floyd-Warshall on negated weights
and serializes the resulting events for a story generator.
"""

from .graph import (
    Edge,
    NodeKind,
    StoryGraph,
    StoryNode,
    export_graph,
    import_graph,
    validate_dag,
)
from .nodes import (
    CommonsenseGroup,
    PhotoSequenceRecord,
    build_caption_nodes,
    build_commonsense_nodes,
    build_theme_nodes,
    dedup_commonsense,
    wire_story_graph,
)
from .pipeline import PipelineConfig, RunManifest, run_pipeline
from .storyline import (
    PathMatrices,
    Storyline,
    attach_dummy_end,
    dag_longest_path_oracle,
    extract_storyline,
    floyd_warshall,
    negate_weights,
    plan_storyline,
    serialize_storyline,
)
from .weighting import (
    CorpusIndex,
    WeightingStrategy,
    assign_weights,
    build_corpus_index,
    cosine,
    edge_weight_npmi,
    import_learned_embeddings,
    npmi,
)

__version__ = "0.1.0"
