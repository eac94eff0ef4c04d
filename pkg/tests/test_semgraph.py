import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semrerank.corpus import Corpus, NormalizeConfig, make_document
from semrerank.embedding import EmbeddingModel, RelatednessIndex, build_relrank
from semrerank.semgraph import (
    PageRankParams,
    SemanticImportance,
    WordGraph,
    activate,
    build_graph,
    compute_smi,
    personalized_pagerank,
    pswa_stats,
    semantic_importance,
)

from oracles import brute_graph, dense_pagerank

CFG = NormalizeConfig(stopwords=frozenset({"the", "of"}))


def doc(doc_id, words):
    return make_document(doc_id, words, CFG)


def graph(nodes, edges):
    return WordGraph.from_edges("g", nodes, edges)


def test_empty_intersection_gives_empty_graph():
    idx = RelatednessIndex({"a": [("b", 0.9)], "b": [("a", 0.9)]})
    g = build_graph(doc("d", ["zzz", "yyy"]), {"a", "b"}, idx)
    assert g.nodes == [] and g.edges() == set()


def test_hand_trace_four_words():
    # rel_top 0.5 of 3 others -> 2 neighbors kept per word
    idx = RelatednessIndex(
        {
            "aa": [("bb", 0.8), ("cc", 0.49), ("dd", 0.1)],
            "bb": [("aa", 0.8), ("dd", 0.6), ("cc", 0.2)],
            "cc": [("dd", 0.51), ("aa", 0.49), ("bb", 0.2)],
            "dd": [("bb", 0.6), ("cc", 0.51), ("aa", 0.1)],
        },
        rel_min=0.5,
        rel_top=1.0,
    )
    g = build_graph(doc("d", ["aa", "cc"]), {"aa", "bb", "cc", "dd"}, idx, rel_top=0.5)
    assert g.edges() == {("aa", "bb"), ("cc", "dd")}
    assert g.nodes == ["aa", "bb", "cc", "dd"]
    g.check()


def test_index_with_smaller_fraction_rejected():
    idx = RelatednessIndex({"a": [], "b": []}, rel_top=0.1)
    with pytest.raises(ValueError):
        build_graph(doc("d", ["a"]), {"a", "b"}, idx, rel_top=0.5)


@pytest.mark.parametrize("seed", range(4))
def test_random_graph_edges_satisfy_postcondition(seed):
    rng = np.random.default_rng(seed)
    words = [f"w{i:02d}" for i in range(60)]
    m = EmbeddingModel(words, rng.normal(size=(60, 3)).astype(np.float32))
    idx = build_relrank(m, words)
    d = doc("d", list(rng.choice(words, 15)))
    g = build_graph(d, set(words), idx)
    g.check()
    nodes, edges = brute_graph(d.norm_stream(), words, {w: m.vector(w) for w in words})
    assert set(g.nodes) == nodes and g.edges() == edges
    for a, b in g.edges():
        strong_a = dict(idx.neighbors[a])
        strong_b = dict(idx.neighbors[b])
        assert (strong_a.get(b, -2) >= 0.5) or (strong_b.get(a, -2) >= 0.5)


def test_activate_cases():
    g = graph(["a", "b", "c"], [("a", "b")])
    v, fb = activate(g, {"a"})
    assert v.tolist() == [1.0, 0.0, 0.0] and not fb
    v, fb = activate(g, {"zz"})
    assert np.allclose(v, 1 / 3) and fb
    v, _ = activate(g, {"a", "b"})
    assert v.tolist() == [0.5, 0.5, 0.0]
    with pytest.raises(ValueError):
        activate(graph([], []), {"a"})


def test_pagerank_examples():
    g = graph(["a", "b"], [("a", "b")])
    res = personalized_pagerank(g, np.array([0.5, 0.5]))
    assert np.allclose(res.scores, [0.5, 0.5], atol=1e-12) and res.converged
    path = graph(["a", "b", "c"], [("a", "b"), ("b", "c")])
    v = np.array([1.0, 0, 0])
    res = personalized_pagerank(path, v, PageRankParams(0.85))
    assert np.max(np.abs(res.scores - dense_pagerank(path.nodes, path.edges(), v, dangling_fix=False))) < 1e-8
    single = graph(["a"], [])
    assert personalized_pagerank(single, np.array([1.0])).scores.tolist() == [1.0]


def test_pagerank_flags_non_convergence():
    path = graph(["a", "b", "c"], [("a", "b"), ("b", "c")])
    res = personalized_pagerank(path, np.array([1.0, 0, 0]), PageRankParams(max_iter=2))
    assert not res.converged and res.iterations == 2
    assert res.scores.sum() == pytest.approx(1.0, abs=1e-9)


def random_graph(rng, n_max=8):
    n = int(rng.integers(1, n_max + 1))
    nodes = [f"n{i}" for i in range(n)]
    edges = [(nodes[i], nodes[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.35]
    return graph(nodes, edges)


def random_v(rng, n):
    v = rng.random(n) * (rng.random(n) < 0.6)
    if v.sum() == 0:
        v[int(rng.integers(n))] = 1.0
    return v / v.sum()


def test_pagerank_matches_linear_solve_with_dangling_nodes():
    rng = np.random.default_rng(11)
    for _ in range(200):
        g = random_graph(rng)
        v = random_v(rng, len(g))
        pr = personalized_pagerank(g, v).scores
        assert np.max(np.abs(pr - dense_pagerank(g.nodes, g.edges(), v))) < 1e-8
        assert pr.min() >= 0 and abs(pr.sum() - 1) < 1e-9


def test_personalization_monotone():
    rng = np.random.default_rng(5)
    for _ in range(200):
        g = random_graph(rng)
        n = len(g)
        v = random_v(rng, n)
        i = int(rng.integers(n))
        bumped = v.copy()
        bumped[i] += rng.random() + 0.01
        bumped /= bumped.sum()
        before = personalized_pagerank(g, v).scores[i]
        after = personalized_pagerank(g, bumped).scores[i]
        assert after >= before - 1e-12


def test_semantic_importance_sums():
    one = semantic_importance([("d1", ["a", "b"], np.array([0.4, 0.6]))])
    assert one.scores == {"a": 0.4, "b": 0.6}
    two = semantic_importance([("d2", ["a"], np.array([0.3])), ("d1", ["a", "b"], np.array([0.2, 0.8]))], vocabulary=["z"])
    assert two.get("a") == pytest.approx(0.5) and two.get("z") == 0.0 and two.get("never") == 0.0


def toy_setup(n_docs=5, seed=0):
    rng = np.random.default_rng(seed)
    words = [f"w{i:02d}" for i in range(40)]
    m = EmbeddingModel(words, rng.normal(size=(40, 3)).astype(np.float32))
    docs = [doc(f"d{i}", list(rng.choice(words, 12)) + ["the"]) for i in range(n_docs)]
    docs.append(doc("empty", ["the", "of"]))
    corpus = Corpus.from_documents(docs, CFG)
    return corpus, set(words), build_relrank(m, words)


def test_total_importance_equals_graphed_documents():
    corpus, vocab, idx = toy_setup()
    smi = compute_smi(corpus, vocab, idx, {"w01", "w02"})
    assert sum(smi.scores.values()) == pytest.approx(5, abs=1e-6)
    assert smi.fallback_docs == sorted(smi.fallback_docs)


def test_importance_thread_independent():
    corpus, vocab, idx = toy_setup(12, 3)
    a = compute_smi(corpus, vocab, idx, {"w05"}, threads=1)
    b = compute_smi(corpus, vocab, idx, {"w05"}, threads=4)
    assert a.scores == b.scores


def test_importance_roundtrip(tmp_path):
    s = SemanticImportance({"b": 0.25, "a": 1 / 3})
    s.write(tmp_path / "s.tsv")
    assert SemanticImportance.read(tmp_path / "s.tsv").scores == s.scores


def test_pswa_degenerate_and_monotone():
    m = EmbeddingModel(["a", "b", "c"], np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=np.float32))
    rows = pswa_stats(m, ["a", "b", "c"])
    assert all(r.isolated_fraction == 1.0 for r in rows)
    rng = np.random.default_rng(0)
    words = [f"w{i}" for i in range(200)]
    m = EmbeddingModel(words, rng.normal(size=(200, 6)).astype(np.float32))
    rows = pswa_stats(m, words, block=33)
    fracs = [r.isolated_fraction for r in rows]
    assert [r.rel_min for r in rows] == [0.9, 0.8, 0.7, 0.6, 0.5]
    assert all(a >= b for a, b in zip(fracs, fracs[1:]))
    for r in rows:
        assert list(r.quartiles) == sorted(r.quartiles)
    assert rows == pswa_stats(m, words, threads=3, block=17)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.data())
def test_graph_symmetry_property(n, data):
    nodes = [f"n{i}" for i in range(n)]
    pairs = [(a, b) for a in nodes for b in nodes]
    edges = data.draw(st.lists(st.sampled_from(pairs), max_size=12))
    g = graph(nodes, edges)
    g.check()
    for a, b in g.edges():
        assert a in g.adj[b] and b in g.adj[a]
