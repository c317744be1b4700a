"""Edge weighting: cosine similarity, sentence-level NPMI, and learned embeddings."""

from __future__ import annotations

import json
import math
import string
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionError,
    EmptyIndexError,
    EmptyTextError,
    MissingEmbeddingError,
    ParseError,
    ZeroVectorError,
)
from .graph import StoryGraph, validate_dag

PAIR_SEP = "\u0001"

# Small closed-class list; only used when an index is built with drop_stopwords=True.
STOPWORDS = frozenset(
    """a an the and or but if of at by for with about to from in on into onto over
    under up down out off is are was were be been being am do does did has have had
    i me my we our you your he him his she her it its they them their this that these
    those there here as so than too very just not no can will would should could""".split()
)


def tokenize(text: str, drop_stopwords: bool = False) -> list[str]:
    """Lowercase, split on whitespace, strip edge punctuation. No stemming."""
    tokens = []
    for raw in text.lower().split():
        tok = raw.strip(string.punctuation)
        if tok and not (drop_stopwords and tok in STOPWORDS):
            tokens.append(tok)
    return tokens


def cosine(u: Sequence[float], v: Sequence[float]) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 1 or u.shape != v.shape:
        raise DimensionError(f"cannot compare vectors of shape {u.shape} and {v.shape}")
    uu = float(u @ u)
    vv = float(v @ v)
    if uu == 0.0 or vv == 0.0:
        raise ZeroVectorError("cosine is undefined for an all-zero vector")
    # sqrt(x*x) == x exactly, so a vector against itself scores exactly 1.0
    denom = math.sqrt(uu * vv)
    if denom == 0.0 or math.isinf(denom):
        denom = math.sqrt(uu) * math.sqrt(vv)
    return min(1.0, max(-1.0, float(u @ v) / denom))


# -- corpus statistics -------------------------------------------------------


@dataclass
class CorpusIndex:
    """Sentence-level occurrence and co-occurrence counts.

    ``pair_counts`` is keyed by lexicographically ordered word pairs and only
    holds pairs that were actually observed together.
    """

    total_sentences: int = 0
    word_counts: Counter = field(default_factory=Counter)
    pair_counts: Counter = field(default_factory=Counter)
    drop_stopwords: bool = False

    @property
    def tokenizer_fingerprint(self) -> str:
        return f"lower|whitespace|strip-punct|no-stem|stopwords={'drop' if self.drop_stopwords else 'keep'}"

    def tokens(self, text: str) -> list[str]:
        return tokenize(text, self.drop_stopwords)

    def add_sentence(self, sentence: str) -> None:
        words = sorted(set(self.tokens(sentence)))
        self.total_sentences += 1
        self.word_counts.update(words)
        self.pair_counts.update(combinations(words, 2))

    def count(self, word: str) -> int:
        return self.word_counts.get(word, 0)

    def pair_count(self, i: str, j: str) -> int:
        if i == j:
            return self.count(i)
        return self.pair_counts.get((i, j) if i < j else (j, i), 0)

    def merge(self, other: CorpusIndex) -> CorpusIndex:
        """Combine two shards; associative and commutative."""
        if other.drop_stopwords != self.drop_stopwords:
            raise ValueError("cannot merge indexes built with different tokenizers")
        return CorpusIndex(
            total_sentences=self.total_sentences + other.total_sentences,
            word_counts=self.word_counts + other.word_counts,
            pair_counts=self.pair_counts + other.pair_counts,
            drop_stopwords=self.drop_stopwords,
        )

    def to_dict(self) -> dict:
        return {
            "total": self.total_sentences,
            "words": dict(sorted(self.word_counts.items())),
            "pairs": {PAIR_SEP.join(k): c for k, c in sorted(self.pair_counts.items())},
            "tokenizer": self.tokenizer_fingerprint,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> CorpusIndex:
        try:
            pairs = Counter()
            for key, c in data["pairs"].items():
                a, b = key.split(PAIR_SEP)
                pairs[(a, b) if a < b else (b, a)] = int(c)
            return cls(
                total_sentences=int(data["total"]),
                word_counts=Counter({w: int(c) for w, c in data["words"].items()}),
                pair_counts=pairs,
                drop_stopwords="stopwords=drop" in data.get("tokenizer", ""),
            )
        except (KeyError, ValueError, AttributeError, TypeError) as exc:
            raise ParseError(f"malformed corpus index: {exc}") from exc

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1, ensure_ascii=False) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> CorpusIndex:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
        return cls.from_dict(data)


def build_corpus_index(sentences: Iterable[str], drop_stopwords: bool = False) -> CorpusIndex:
    index = CorpusIndex(drop_stopwords=drop_stopwords)
    for sentence in sentences:
        index.add_sentence(sentence)
    return index


def read_corpus(path: str | Path, drop_stopwords: bool = False) -> CorpusIndex:
    """Index a UTF-8 one-sentence-per-line file, or load a saved ``.json`` index."""
    path = Path(path)
    if path.suffix == ".json":
        return CorpusIndex.load(path)
    with path.open(encoding="utf-8") as fh:
        return build_corpus_index((line for line in fh if line.strip()), drop_stopwords)


def npmi(i: str, j: str, index: CorpusIndex) -> float | None:
    """Normalized PMI of two words over sentence counts.

    Returns None when either word never occurs (the pair carries no evidence),
    -1.0 when both occur but never together, and +1.0 when the pair occurs in
    every sentence (where -log p(i,j) is zero).
    """
    n = index.total_sentences
    if n == 0:
        raise EmptyIndexError("corpus index holds no sentences")
    ci, cj = index.count(i), index.count(j)
    if ci == 0 or cj == 0:
        return None
    cij = index.pair_count(i, j)
    if cij == 0:
        return -1.0
    if cij == n:
        return 1.0
    p_ij = cij / n
    pmi = math.log(p_ij / ((ci / n) * (cj / n)))
    return min(1.0, max(-1.0, pmi / -math.log(p_ij)))


def edge_weight_npmi(p_u: str, p_v: str, index: CorpusIndex, fallback: float = 0.0) -> float:
    """Maximum NPMI over all word pairs drawn from the two phrases."""
    tok_u = set(index.tokens(p_u))
    tok_v = set(index.tokens(p_v))
    if not tok_u or not tok_v:
        raise EmptyTextError(f"phrase has no tokens: {p_u!r} / {p_v!r}")
    best = None
    for i in tok_u:
        for j in tok_v:
            s = npmi(i, j, index)
            if s is not None and (best is None or s > best):
                best = s
    return fallback if best is None else best


# -- learned embeddings ------------------------------------------------------


@dataclass
class EmbeddingTable:
    vectors: dict[str, tuple[float, ...]] = field(default_factory=dict)
    dim: int | None = None

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.vectors

    def __getitem__(self, node_id: str) -> tuple[float, ...]:
        return self.vectors[node_id]

    def __len__(self) -> int:
        return len(self.vectors)


def embedding_table(mapping: Mapping[str, Sequence[float]]) -> EmbeddingTable:
    dims = {len(v) for v in mapping.values()}
    if len(dims) > 1:
        raise DimensionError(f"ragged embedding table: dimensions {sorted(dims)}")
    return EmbeddingTable(
        vectors={k: tuple(float(x) for x in v) for k, v in mapping.items()},
        dim=dims.pop() if dims else None,
    )


def import_learned_embeddings(path: str | Path) -> EmbeddingTable:
    """Load ``{node_id: [floats]}`` produced by an external graph learner."""
    raw = Path(path).read_text(encoding="utf-8")
    if not raw.strip():
        return EmbeddingTable()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(data, dict) or not all(isinstance(v, list) for v in data.values()):
        raise ParseError("embedding table must be an object of node id -> list of numbers")
    try:
        return embedding_table(data)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DimensionError):
            raise
        raise ParseError(f"non-numeric embedding value: {exc}") from exc


# -- strategies --------------------------------------------------------------

STRATEGIES = ("cosine", "npmi", "learned_cosine")


@dataclass
class WeightingStrategy:
    """Which weighting to apply and the resource it needs.

    cosine         -> ``embedder`` (anything with ``embed(texts)``)
    npmi           -> ``index``
    learned_cosine -> ``table`` covering every node id
    """

    kind: str
    embedder: object | None = None
    index: CorpusIndex | None = None
    table: EmbeddingTable | None = None

    def __post_init__(self):
        if self.kind == "learned":
            self.kind = "learned_cosine"
        if self.kind not in STRATEGIES:
            raise ValueError(f"unknown weighting strategy {self.kind!r}")

    @classmethod
    def cosine(cls, embedder) -> WeightingStrategy:
        return cls("cosine", embedder=embedder)

    @classmethod
    def npmi(cls, index: CorpusIndex) -> WeightingStrategy:
        return cls("npmi", index=index)

    @classmethod
    def learned(cls, table: EmbeddingTable) -> WeightingStrategy:
        return cls("learned_cosine", table=table)


def _embed_missing(graph: StoryGraph, embedder) -> None:
    pending = [n for n in graph.nodes.values() if n.embedding is None]
    texts = list(dict.fromkeys(n.phrase for n in pending))
    if not texts:
        return
    if any(not t.strip() for t in texts):
        raise EmptyTextError("cannot embed a node without text")
    vectors = dict(zip(texts, embedder.embed(texts)))
    for node in pending:
        graph.replace_node(node.with_embedding(vectors[node.phrase]))


def assign_weights(graph: StoryGraph, strategy: WeightingStrategy) -> StoryGraph:
    """Return a weighted copy of ``graph``; the input is left untouched."""
    validate_dag(graph)
    out = graph.copy()

    if strategy.kind == "cosine":
        if strategy.embedder is None:
            raise ValueError("cosine weighting needs an embedder")
        _embed_missing(out, strategy.embedder)
        for (u, v) in list(out.edges):
            out.set_weight(u, v, cosine(out.nodes[u].embedding, out.nodes[v].embedding))
    elif strategy.kind == "npmi":
        if strategy.index is None:
            raise ValueError("npmi weighting needs a corpus index")
        for (u, v) in list(out.edges):
            out.set_weight(u, v, edge_weight_npmi(out.nodes[u].phrase, out.nodes[v].phrase, strategy.index))
    else:
        table = strategy.table
        if table is None:
            raise ValueError("learned_cosine weighting needs an embedding table")
        for node_id in out.nodes:
            if node_id not in table:
                raise MissingEmbeddingError(f"no learned embedding for node {node_id!r}")
        for (u, v) in list(out.edges):
            out.set_weight(u, v, cosine(table[u], table[v]))

    out.weighted = True
    return out
