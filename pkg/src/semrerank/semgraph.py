"""Per-document word graphs, personalized PageRank and corpus-level importance."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np
from scipy import sparse

from .artifacts import atomic_write, fmt_float, read_tsv
from .corpus import Corpus, Document, words_of
from .embedding import EmbeddingModel, RelatednessIndex, truncation_size
from .errors import DataError

log = logging.getLogger(__name__)

PSWA_GRID = (0.9, 0.8, 0.7, 0.6, 0.5)


@dataclass
class WordGraph:
    doc_id: str
    nodes: list[str]
    adj: dict[str, set[str]]

    def __len__(self) -> int:
        return len(self.nodes)

    def edges(self) -> set[tuple[str, str]]:
        """Undirected edges as ordered pairs ``(a, b)`` with ``a < b``."""
        return {(a, b) for a in self.adj for b in self.adj[a] if a < b}

    def check(self) -> None:
        for a, nbrs in self.adj.items():
            if a in nbrs:
                raise AssertionError(f"self-loop on {a!r}")
            for b in nbrs:
                if a not in self.adj.get(b, ()):
                    raise AssertionError(f"asymmetric edge {a!r}-{b!r}")

    @classmethod
    def from_edges(cls, doc_id: str, nodes: Iterable[str], edges: Iterable[tuple[str, str]]) -> "WordGraph":
        adj: dict[str, set[str]] = {n: set() for n in nodes}
        for a, b in edges:
            if a == b:
                continue
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
        return cls(doc_id, sorted(adj), adj)


@dataclass(frozen=True)
class PageRankParams:
    damping: float = 0.85
    tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not 0 < self.damping < 1:
            raise ValueError("damping must be in (0, 1)")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class PageRankResult:
    scores: np.ndarray
    iterations: int
    converged: bool


def build_graph(
    doc: Document,
    vocabulary: Iterable[str] | object,
    idx: RelatednessIndex,
    rel_min: float | None = None,
    rel_top: float | None = None,
) -> WordGraph:
    """Link every candidate word of ``doc`` to its strongly related words.

    ``vocabulary`` is the candidate word set (or anything :func:`words_of`
    accepts).  A neighbor is strong when it sits in the word's top
    ``rel_top`` fraction and scores at least ``rel_min``.  Neighbors join
    the graph even if the document does not contain them.
    """
    vocab = vocabulary if isinstance(vocabulary, (set, frozenset)) else words_of(vocabulary)
    rel_min = idx.rel_min if rel_min is None else rel_min
    rel_top = idx.rel_top if rel_top is None else rel_top
    if rel_top > idx.rel_top:
        raise ValueError(f"index only holds the top {idx.rel_top} fraction, asked for {rel_top}")
    k = truncation_size(rel_top, len(idx.neighbors)) if len(idx.neighbors) > 1 else 0
    present = sorted(words_of(doc) & vocab)
    nodes = set(present)
    edges = []
    for w in present:
        for nb, score in idx.neighbors.get(w, ())[:k]:
            if score >= rel_min:
                nodes.add(nb)
                edges.append((w, nb))
    return WordGraph.from_edges(doc.id, nodes, edges)


def activate(g: WordGraph, seed_words: Iterable[str] | object) -> tuple[np.ndarray, bool]:
    """Personalization vector over ``g.nodes``: uniform over seed words.

    Returns ``(v, fallback)``; ``fallback`` is true when no node is a seed
    word and ``v`` is uniform over all nodes.
    """
    if not g.nodes:
        raise ValueError("cannot personalize an empty graph")
    seeds = seed_words.words if hasattr(seed_words, "words") else set(seed_words)
    v = np.array([1.0 if n in seeds else 0.0 for n in g.nodes])
    total = v.sum()
    if total == 0:
        return np.full(len(g.nodes), 1.0 / len(g.nodes)), True
    return v / total, False


def transition_matrix(g: WordGraph) -> tuple[sparse.csr_matrix, np.ndarray]:
    """Column-stochastic matrix of the graph plus a dangling-node mask."""
    pos = {n: i for i, n in enumerate(g.nodes)}
    rows, cols, vals = [], [], []
    deg = np.array([len(g.adj[n]) for n in g.nodes], dtype=np.float64)
    for n in g.nodes:
        j = pos[n]
        for nb in sorted(g.adj[n]):
            rows.append(pos[nb])
            cols.append(j)
            vals.append(1.0 / deg[j])
    m = sparse.csr_matrix((vals, (rows, cols)), shape=(len(g.nodes), len(g.nodes)))
    return m, deg == 0


def personalized_pagerank(g: WordGraph, v: np.ndarray, p: PageRankParams = PageRankParams()) -> PageRankResult:
    """Power iteration for ``Pr = c M Pr + (1 - c) v``.

    Mass sitting on nodes without edges is handed back in proportion to
    ``v`` so the result stays a distribution.
    """
    n = len(g.nodes)
    if n == 0:
        raise ValueError("cannot rank an empty graph")
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (n,):
        raise ValueError("personalization vector does not match the graph")
    m, dangling = transition_matrix(g)
    c = p.damping
    x = np.full(n, 1.0 / n)
    converged = False
    it = 0
    for it in range(1, p.max_iter + 1):
        nxt = c * (m @ x + x[dangling].sum() * v) + (1.0 - c) * v
        nxt /= nxt.sum()
        delta = np.abs(nxt - x).sum()
        x = nxt
        if delta < p.tol:
            converged = True
            break
    if not converged:
        log.warning("pagerank on %s did not converge in %d iterations", g.doc_id, p.max_iter)
    return PageRankResult(x, it, converged)


@dataclass
class SemanticImportance:
    scores: dict[str, float]
    per_doc: dict[str, dict[str, float]] = field(default_factory=dict)
    unconverged: list[str] = field(default_factory=list)
    fallback_docs: list[str] = field(default_factory=list)

    def get(self, word: str) -> float:
        return self.scores.get(word, 0.0)

    def write(self, path: str | Path, header: str = "") -> None:
        rows = [f"{w}\t{fmt_float(s)}" for w, s in sorted(self.scores.items())]
        atomic_write(path, header + "\n".join(rows) + ("\n" if rows else ""))

    @classmethod
    def read(cls, path: str | Path) -> "SemanticImportance":
        scores = {}
        for lineno, row in read_tsv(path, ncols=2):
            try:
                scores[row[0]] = float(row[1])
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad score {row[1]!r}") from None
        return cls(scores)


GraphBuilder = Callable[[Document], WordGraph]


def semantic_importance(
    ranked: Iterable[tuple[str, list[str], np.ndarray]],
    vocabulary: Iterable[str] = (),
    keep_per_doc: bool = False,
) -> SemanticImportance:
    """Sum per-document PageRank scores word by word.

    ``ranked`` yields ``(doc_id, nodes, scores)``.  Summation runs in
    document-id order so the result does not depend on scheduling.
    """
    total = {w: 0.0 for w in vocabulary}
    per_doc = {}
    for doc_id, nodes, pr in sorted(ranked, key=lambda r: r[0]):
        for w, s in zip(nodes, pr):
            total[w] = total.get(w, 0.0) + float(s)
        if keep_per_doc:
            per_doc[doc_id] = dict(zip(nodes, map(float, pr)))
    return SemanticImportance(total, per_doc)


def graph_importance(
    corpus: Corpus,
    builder: GraphBuilder,
    seed_words: Iterable[str] | object,
    params: PageRankParams = PageRankParams(),
    vocabulary: Iterable[str] = (),
    threads: int = 1,
    keep_per_doc: bool = False,
) -> SemanticImportance:
    """Build one graph per document, rank it and sum the scores corpus-wide."""

    def run(doc: Document):
        g = builder(doc)
        g.check()
        if not g.nodes:
            return doc.id, [], np.zeros(0), True, False
        v, fallback = activate(g, seed_words)
        res = personalized_pagerank(g, v, params)
        return doc.id, g.nodes, res.scores, res.converged, fallback

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(run, corpus.docs))
    smi = semantic_importance(((d, n, s) for d, n, s, _, _ in results), vocabulary, keep_per_doc)
    smi.unconverged = sorted(d for d, _, _, ok, _ in results if not ok)
    smi.fallback_docs = sorted(d for d, n, _, _, fb in results if fb and n)
    if smi.fallback_docs:
        log.info("%d documents had no seed word on their graph; used uniform personalization", len(smi.fallback_docs))
    return smi


def compute_smi(
    corpus: Corpus,
    vocabulary: Iterable[str] | object,
    idx: RelatednessIndex,
    seed_words: Iterable[str] | object,
    params: PageRankParams = PageRankParams(),
    rel_min: float | None = None,
    rel_top: float | None = None,
    threads: int = 1,
    keep_per_doc: bool = False,
) -> SemanticImportance:
    vocab = vocabulary if isinstance(vocabulary, (set, frozenset)) else words_of(vocabulary)
    return graph_importance(
        corpus,
        lambda d: build_graph(d, vocab, idx, rel_min, rel_top),
        seed_words,
        params,
        vocab,
        threads,
        keep_per_doc,
    )


@dataclass
class PswaRow:
    rel_min: float
    isolated_fraction: float
    quartiles: tuple[float, float, float, float, float]


def pswa_stats(
    m: EmbeddingModel,
    vocabulary: Iterable[str],
    grid: Iterable[float] = PSWA_GRID,
    threads: int = 1,
    block: int = 512,
) -> list[PswaRow]:
    """Share of strongly related words per word, for several thresholds.

    For each threshold, a word's PSWA is the fraction of the other
    vocabulary words whose relatedness reaches it.  A word with PSWA 0 is
    isolated.  Quartiles are (min, q1, median, q3, max).
    """
    grid = tuple(grid)
    words = sorted(w for w in set(vocabulary) if w in m)
    n = len(words)
    if n < 2:
        raise DataError("PSWA needs at least 2 in-vocabulary words")
    unit = m.unit_vectors(words)
    thresholds = np.array(grid)

    def run(lo: int) -> np.ndarray:
        sims = np.clip(unit[lo : lo + block] @ unit.T, -1.0, 1.0)
        for r in range(sims.shape[0]):
            sims[r, lo + r] = -np.inf
        return (sims[:, :, None] >= thresholds[None, None, :]).sum(axis=1)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        counts = np.vstack(list(pool.map(run, range(0, n, block))))
    rows = []
    for j, t in enumerate(grid):
        pswa = counts[:, j] / (n - 1)
        q = np.percentile(pswa, [0, 25, 50, 75, 100])
        rows.append(PswaRow(t, float(np.mean(counts[:, j] == 0)), tuple(float(x) for x in q)))
    return rows


def write_pswa(rows: list[PswaRow], path: str | Path, header: str = "") -> None:
    lines = ["rel_min\tisolated_fraction\tmin\tq1\tmedian\tq3\tmax"]
    for r in rows:
        lines.append("\t".join(fmt_float(x) for x in (r.rel_min, r.isolated_fraction, *r.quartiles)))
    atomic_write(path, header + "\n".join(lines) + "\n")
