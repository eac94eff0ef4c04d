"""Co-occurrence graph comparator: TextRank scores summed over documents."""

from __future__ import annotations

from typing import Iterable, Mapping

from .candidates import CandidateSet
from .corpus import Corpus, Document, words_of
from .rerank import RevisedList, revise_scores
from .scorers import ScoredList
from .semgraph import PageRankParams, SemanticImportance, WordGraph, graph_importance


def build_cooccurrence_graph(doc: Document, vocabulary: Iterable[str] | object, window: int = 2) -> WordGraph:
    """Link candidate words that fall within ``window`` positions of each other.

    The window slides over the document's normalized stream after dropping
    every word outside the candidate vocabulary.
    """
    if window < 2:
        raise ValueError("window must be >= 2")
    vocab = vocabulary if isinstance(vocabulary, (set, frozenset)) else words_of(vocabulary)
    stream = [w for w in doc.norm_stream() if w in vocab]
    edges = []
    for i, a in enumerate(stream):
        for b in stream[i + 1 : i + window]:
            edges.append((a, b))
    return WordGraph.from_edges(doc.id, stream, edges)


def ctextrank(
    corpus: Corpus,
    cs: CandidateSet | Iterable[str],
    seeds: Iterable[str] | object,
    window: int = 2,
    params: PageRankParams = PageRankParams(),
    threads: int = 1,
    keep_per_doc: bool = False,
) -> SemanticImportance:
    vocab = words_of(cs)
    return graph_importance(
        corpus,
        lambda d: build_cooccurrence_graph(d, vocab, window),
        seeds,
        params,
        vocab,
        threads,
        keep_per_doc,
    )


def revise_with_ctextrank(base: ScoredList, ctr: Mapping[str, float] | object, cs: CandidateSet) -> RevisedList:
    return revise_scores(base, ctr, cs, method=f"adp-textrank({base.method})")
