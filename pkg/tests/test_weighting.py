import json
import math
import random

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scovist.errors import (
    DimensionError,
    EmptyIndexError,
    EmptyTextError,
    MissingEmbeddingError,
    ParseError,
    ZeroVectorError,
)
from scovist.graph import NodeKind, StoryGraph, StoryNode
from scovist.weighting import (
    CorpusIndex,
    WeightingStrategy,
    assign_weights,
    build_corpus_index,
    cosine,
    edge_weight_npmi,
    import_learned_embeddings,
    npmi,
    read_corpus,
    tokenize,
)

from conftest import WEDDING_CORPUS


def brute_npmi(i, j, sentences):
    """NPMI straight from the definitions, counting over raw token sets."""
    sets = [set(tokenize(s)) for s in sentences]
    n = len(sets)
    ci = sum(i in s for s in sets)
    cj = sum(j in s for s in sets)
    cij = sum(i in s and j in s for s in sets)
    if ci == 0 or cj == 0:
        return None
    if cij == 0:
        return -1.0
    if cij == n:
        return 1.0
    p_i, p_j, p_ij = ci / n, cj / n, cij / n
    return math.log(p_ij / (p_i * p_j)) / -math.log(p_ij)


# -- cosine ------------------------------------------------------------------------


def test_cosine_identity_and_orthogonality():
    v = [0.3, -1.7, 2.2]
    assert cosine(v, v) == 1.0
    assert cosine([1, 0], [0, 1]) == 0.0


def test_cosine_against_high_precision():
    mpmath.mp.dps = 50
    expected = float(mpmath.mpf(1) / mpmath.sqrt(2))
    assert abs(cosine([1, 0], [1, 1]) - expected) <= 1e-12
    assert abs(cosine([1, 0], [1, 1]) - 0.7071067811865475) <= 1e-12


def test_cosine_errors():
    with pytest.raises(DimensionError):
        cosine([1, 0], [1, 0, 0])
    with pytest.raises(ZeroVectorError):
        cosine([0, 0], [1, 0])


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-10, 10), min_size=2, max_size=8),
    st.floats(0.01, 100),
    st.floats(0.01, 100),
    st.randoms(use_true_random=False),
)
def test_cosine_scale_invariance_and_symmetry(u, alpha, beta, rnd):
    v = [rnd.uniform(-10, 10) for _ in u]
    if np.linalg.norm(u) < 1e-3 or np.linalg.norm(v) < 1e-3:
        return
    c = cosine(u, v)
    assert -1.0 <= c <= 1.0
    assert cosine(v, u) == pytest.approx(c, abs=1e-12)
    assert cosine([alpha * x for x in u], [beta * x for x in v]) == pytest.approx(c, abs=1e-12)


# -- corpus index --------------------------------------------------------------------


def test_tokenizer_rules():
    assert tokenize("The Bride, smiled!  'happily'") == ["the", "bride", "smiled", "happily"]
    assert tokenize("the cake", drop_stopwords=True) == ["cake"]
    assert tokenize("...") == []


def test_two_sentence_corpus_counts():
    idx = build_corpus_index(["the bride smiled", "the cake"])
    assert idx.total_sentences == 2
    assert idx.count("bride") == 1
    assert idx.count("the") == 2
    assert idx.pair_count("bride", "cake") == 0
    assert idx.pair_count("smiled", "bride") == idx.pair_count("bride", "smiled") == 1


def test_sentence_level_counting():
    idx = build_corpus_index(["cake cake cake"])
    assert idx.count("cake") == 1


def test_empty_corpus():
    idx = build_corpus_index([])
    assert idx.total_sentences == 0
    with pytest.raises(EmptyIndexError):
        npmi("a", "b", idx)


def test_merge_is_associative_and_commutative():
    rng = random.Random(3)
    vocab = "a b c d e f".split()
    shards = [[" ".join(rng.sample(vocab, rng.randint(1, 4))) for _ in range(5)] for _ in range(3)]
    a, b, c = (build_corpus_index(s) for s in shards)
    whole = build_corpus_index(shards[0] + shards[1] + shards[2])
    assert a.merge(b).merge(c) == whole
    assert a.merge(b.merge(c)) == whole
    assert c.merge(a).merge(b) == whole


def test_index_monotonic_under_added_sentences():
    idx = build_corpus_index(["the bride smiled", "the cake"])
    before = (idx.total_sentences, dict(idx.word_counts), dict(idx.pair_counts))
    idx.add_sentence("the bride ate cake")
    assert idx.total_sentences > before[0]
    assert all(idx.word_counts[w] >= c for w, c in before[1].items())
    assert all(idx.pair_counts[p] >= c for p, c in before[2].items())


def test_index_json_persistence(tmp_path):
    idx = build_corpus_index(["the bride smiled", "the cake", "bride and cake"])
    path = tmp_path / "index.json"
    idx.save(path)
    doc = json.loads(path.read_text())
    assert doc["total"] == 3
    assert doc["pairs"]["bride\u0001cake"] == 1
    assert all(k.split("\u0001")[0] < k.split("\u0001")[1] for k in doc["pairs"])
    assert CorpusIndex.load(path) == idx
    assert read_corpus(path) == idx


def test_index_load_rejects_garbage(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"total": 1}')
    with pytest.raises(ParseError):
        CorpusIndex.load(path)


# -- npmi ------------------------------------------------------------------------------


def test_npmi_perfect_cooccurrence():
    idx = build_corpus_index(["a b", "c"])
    assert npmi("a", "b", idx) == 1.0
    assert brute_npmi("a", "b", ["a b", "c"]) == pytest.approx(1.0, abs=1e-12)


def test_npmi_independence_is_zero():
    sentences = ["w x", "w", "x", "y"]
    idx = build_corpus_index(sentences)
    assert (idx.count("w"), idx.count("x"), idx.pair_count("w", "x")) == (2, 2, 1)
    assert npmi("w", "x", idx) == pytest.approx(0.0, abs=1e-15)


def test_npmi_conventions():
    idx = build_corpus_index(["a b", "c d", "a c"])
    assert npmi("b", "d", idx) == -1.0  # both seen, never together
    assert npmi("a", "zebra", idx) is None  # unseen word: no evidence
    every = build_corpus_index(["a b", "a b x"])
    assert npmi("a", "b", every) == 1.0  # pair in every sentence


@settings(max_examples=80, deadline=None)
@given(st.lists(st.lists(st.sampled_from("abcdefgh"), min_size=1, max_size=5), min_size=1, max_size=12))
def test_npmi_matches_brute_force_and_is_bounded(raw):
    sentences = [" ".join(s) for s in raw]
    idx = build_corpus_index(sentences)
    for i in "abcdefghz":
        for j in "abcdefghz":
            got = npmi(i, j, idx)
            want = brute_npmi(i, j, sentences)
            if want is None:
                assert got is None
                continue
            assert abs(got - want) < 1e-12
            assert -1.0 <= got <= 1.0
            assert got == npmi(j, i, idx)


# -- edge_weight_npmi --------------------------------------------------------------


def test_self_pair_weight():
    idx = build_corpus_index(["the bride", "a cake"])
    # p(bride)=0.5, p(bride,bride)=0.5: PMI = log 2, -log p = log 2
    assert edge_weight_npmi("bride", "bride", idx) == pytest.approx(1.0, abs=1e-12)


def test_no_shared_corpus_words_falls_back_to_zero():
    idx = build_corpus_index(["the bride", "a cake"])
    assert edge_weight_npmi("zebra", "unicorn", idx) == 0.0


def test_max_of_pairs():
    # npmi(a,b) = -1 (never together); npmi(a,c) = 0 (independent)
    idx = build_corpus_index(["a c", "a", "c", "b"])
    assert npmi("a", "b", idx) == -1.0
    assert npmi("a", "c", idx) == pytest.approx(0.0, abs=1e-15)
    assert edge_weight_npmi("a", "b c", idx) == pytest.approx(0.0, abs=1e-15)


def test_empty_phrase():
    idx = build_corpus_index(["a b"])
    with pytest.raises(EmptyTextError):
        edge_weight_npmi("", "a", idx)
    with pytest.raises(EmptyTextError):
        edge_weight_npmi("a", "?!", idx)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.sampled_from("abcdef"), min_size=1, max_size=4),
    st.lists(st.sampled_from("abcdefz"), min_size=1, max_size=4),
    st.randoms(use_true_random=False),
)
def test_edge_weight_invariant_under_reordering(pu, pv, rnd):
    idx = build_corpus_index(["a b c", "d e", "a f", "b d f", "c"])
    w = edge_weight_npmi(" ".join(pu), " ".join(pv), idx)
    rnd.shuffle(pu)
    rnd.shuffle(pv)
    assert edge_weight_npmi(" ".join(pu), " ".join(pv), idx) == w


def test_stopword_flag_changes_tokens():
    idx = build_corpus_index(["the bride", "the cake"], drop_stopwords=True)
    assert idx.count("the") == 0
    assert "stopwords=drop" in idx.tokenizer_fingerprint
    assert edge_weight_npmi("the bride", "the cake", idx) == -1.0


# -- assign_weights -----------------------------------------------------------------


class DictEmbedder:
    def __init__(self, table):
        self.table = table
        self.calls = 0

    def embed(self, texts):
        self.calls += 1
        return [self.table[t] for t in texts]


def small_graph():
    g = StoryGraph()
    g.add_node(StoryNode("T1_1", NodeKind.THEME, ("bride", "cake"), image_index=1))
    g.add_node(StoryNode("ckB1_1", NodeKind.BEFORE, "to order a cake", image_index=1, relation="xNeed"))
    g.add_node(StoryNode("C1_1", NodeKind.CAPTION, "the bride cuts the cake", image_index=1))
    g.add_node(StoryNode("ckA1_1", NodeKind.AFTER, "the bride cuts the cake", image_index=1, relation="xEffect"))
    g.add_edge("T1_1", "ckB1_1").add_edge("ckB1_1", "C1_1").add_edge("C1_1", "ckA1_1")
    return g


def test_cosine_strategy():
    rng = np.random.default_rng(0)
    texts = ["bride cake", "to order a cake", "the bride cuts the cake"]
    emb = DictEmbedder({t: list(rng.standard_normal(8)) for t in texts})
    g = small_graph()
    out = assign_weights(g, WeightingStrategy.cosine(emb))
    assert out.weighted and not g.weighted
    assert emb.calls == 1
    for e in out.edges.values():
        assert -1.0 <= e.weight <= 1.0
        want = cosine(emb.table[out.nodes[e.source].phrase], emb.table[out.nodes[e.target].phrase])
        assert e.weight == want
    # identical endpoint texts weigh exactly 1
    assert out.weight("C1_1", "ckA1_1") == pytest.approx(1.0, abs=1e-9)


def test_npmi_strategy_matches_per_edge_calls():
    idx = read_corpus(WEDDING_CORPUS)
    out = assign_weights(small_graph(), WeightingStrategy.npmi(idx))
    for (u, v), e in out.edges.items():
        assert e.weight == edge_weight_npmi(out.nodes[u].phrase, out.nodes[v].phrase, idx)


def test_learned_strategy(tmp_path):
    g = small_graph()
    rng = np.random.default_rng(1)
    table = {n: list(rng.standard_normal(768)) for n in g.nodes}
    path = tmp_path / "emb.json"
    path.write_text(json.dumps(table))
    loaded = import_learned_embeddings(path)
    assert loaded.dim == 768 and len(loaded) == 4
    out = assign_weights(g, WeightingStrategy.learned(loaded))
    assert out.weight("T1_1", "ckB1_1") == cosine(table["T1_1"], table["ckB1_1"])

    del table["C1_1"]
    path.write_text(json.dumps(table))
    with pytest.raises(MissingEmbeddingError, match="C1_1"):
        assign_weights(g, WeightingStrategy.learned(import_learned_embeddings(path)))


def test_import_learned_embeddings_shapes(tmp_path):
    rng = np.random.default_rng(2)
    path = tmp_path / "emb.json"
    path.write_text(json.dumps({f"n{i}": list(rng.standard_normal(768)) for i in range(110)}))
    table = import_learned_embeddings(path)
    assert len(table) == 110 and table.dim == 768

    path.write_text(json.dumps({"a": [1.0, 2.0], "b": [1.0]}))
    with pytest.raises(DimensionError):
        import_learned_embeddings(path)

    path.write_text("")
    assert len(import_learned_embeddings(path)) == 0

    path.write_text('{"a": [1.0,')
    with pytest.raises(ParseError):
        import_learned_embeddings(path)
