"""Word embeddings and pairwise relatedness.

Training is a minibatch skip-gram with negative sampling written against
numpy.  It is single-threaded and fully determined by ``rng_seed``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable

import numpy as np

from .artifacts import atomic_write, fmt_float, read_tsv
from .corpus import Corpus, NormalizeConfig, normalize_word
from .errors import DataError

log = logging.getLogger(__name__)

DEFAULT_DIM = 100
DEFAULT_WINDOW = 3
DEFAULT_REL_MIN = 0.5
DEFAULT_REL_TOP = 0.15


@dataclass
class EmbeddingModel:
    words: list[str]
    vectors: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.words):
            raise ValueError("vectors must be (vocab, dim)")
        self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise DataError("duplicate word in embedding vocabulary")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[self.index[word]]

    def unit_vectors(self, words: list[str]) -> np.ndarray:
        m = np.asarray(self.vectors[[self.index[w] for w in words]], dtype=np.float64)
        norms = np.linalg.norm(m, axis=1)
        norms[norms == 0] = 1.0
        return m / norms[:, None]

    def save(self, path: str | Path) -> None:
        lines = [f"{len(self.words)} {self.dim}"]
        for w, v in zip(self.words, self.vectors):
            lines.append(w + " " + " ".join("%.9g" % x for x in v))
        atomic_write(path, "\n".join(lines) + "\n")


def load_embeddings(path: str | Path) -> EmbeddingModel:
    """Read the word2vec text format: ``vocab_size dim`` then ``word v1 .. vd``."""
    p = Path(path)
    if not p.is_file():
        raise DataError(f"embedding file not found: {p}")
    with p.open(encoding="utf-8") as fh:
        head = fh.readline().split()
        if len(head) != 2:
            raise DataError(f"{p}:1: expected header 'vocab_size dim'")
        try:
            n, dim = int(head[0]), int(head[1])
        except ValueError:
            raise DataError(f"{p}:1: non-integer header") from None
        words, rows, seen = [], [], set()
        for lineno, line in enumerate(fh, 2):
            parts = line.rstrip("\n").split(" ")
            if not parts or parts == [""]:
                continue
            w, vals = parts[0], parts[1:]
            if len(vals) != dim:
                raise DataError(f"{p}:{lineno}: expected {dim} values for {w!r}, got {len(vals)}")
            if w in seen:
                raise DataError(f"{p}:{lineno}: duplicate word {w!r}")
            seen.add(w)
            words.append(w)
            rows.append([float(x) for x in vals])
    if len(words) != n:
        raise DataError(f"{p}: header declares {n} words, found {len(words)}")
    vectors = np.asarray(rows, dtype=np.float32).reshape(n, dim)
    return EmbeddingModel(words, vectors, {"source": str(p)})


def _streams(corpus: Corpus, cfg: NormalizeConfig | None) -> list[list[str]]:
    if cfg is None or cfg == corpus.normalize:
        return [d.norm_stream() for d in corpus.docs]
    out = []
    for d in corpus.docs:
        words = (normalize_word(t.surface, cfg) for t in d.tokens)
        out.append([w for w in words if w is not None])
    return out


def _skipgram_pairs(streams: list[np.ndarray], window: int) -> tuple[np.ndarray, np.ndarray]:
    centers, contexts = [], []
    for ids in streams:
        for off in range(1, window + 1):
            if len(ids) <= off:
                break
            a, b = ids[:-off], ids[off:]
            centers += [a, b]
            contexts += [b, a]
    if not centers:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(centers), np.concatenate(contexts)


def train_embeddings(
    corpus: Corpus,
    cfg: NormalizeConfig | None = None,
    dim: int = DEFAULT_DIM,
    window: int = DEFAULT_WINDOW,
    epochs: int = 15,
    neg_samples: int = 5,
    rng_seed: int = 1,
    lr: float = 0.025,
    min_lr: float = 0.0001,
    batch_size: int = 512,
) -> EmbeddingModel:
    """Train skip-gram vectors with negative sampling on the corpus word streams.

    Every surviving word gets a vector (no frequency cutoff, no
    subsampling).  The learning rate decays linearly from ``lr`` to
    ``min_lr`` over all updates.
    """
    streams = _streams(corpus, cfg)
    counts: dict[str, int] = {}
    for s in streams:
        for w in s:
            counts[w] = counts.get(w, 0) + 1
    if not counts:
        raise DataError("no words left to train embeddings on")
    vocab = sorted(counts, key=lambda w: (-counts[w], w))
    index = {w: i for i, w in enumerate(vocab)}
    id_streams = [np.array([index[w] for w in s], dtype=np.int64) for s in streams]
    centers, contexts = _skipgram_pairs(id_streams, window)

    rng = np.random.default_rng(rng_seed)
    n_vocab = len(vocab)
    syn0 = ((rng.random((n_vocab, dim)) - 0.5) / dim).astype(np.float32)
    syn1 = np.zeros((n_vocab, dim), dtype=np.float32)
    freq = np.array([counts[w] for w in vocab], dtype=np.float64) ** 0.75
    cdf = np.cumsum(freq / freq.sum())
    cdf[-1] = 1.0

    n_pairs = len(centers)
    n_batches = math.ceil(n_pairs / batch_size) if n_pairs else 0
    total = max(1, n_batches * epochs)
    step = 0
    for _ in range(epochs):
        if n_pairs == 0:
            break
        order = rng.permutation(n_pairs)
        for lo in range(0, n_pairs, batch_size):
            sel = order[lo : lo + batch_size]
            alpha = np.float32(max(min_lr, lr - (lr - min_lr) * step / total))
            step += 1
            c, o = centers[sel], contexts[sel]
            neg = np.searchsorted(cdf, rng.random((len(sel), neg_samples)), side="right")
            np.minimum(neg, n_vocab - 1, out=neg)
            v = syn0[c]
            u_pos = syn1[o]
            u_neg = syn1[neg]
            s_pos = np.einsum("bd,bd->b", v, u_pos)
            s_neg = np.einsum("bd,bkd->bk", v, u_neg)
            g_pos = (1.0 - _sigmoid(s_pos)) * alpha
            g_neg = -_sigmoid(s_neg) * alpha
            dv = g_pos[:, None] * u_pos + np.einsum("bk,bkd->bd", g_neg, u_neg)
            np.add.at(syn1, o, g_pos[:, None] * v)
            np.add.at(syn1, neg.ravel(), (g_neg[:, :, None] * v[:, None, :]).reshape(-1, dim))
            np.add.at(syn0, c, dv)

    meta = {"dim": dim, "window": window, "epochs": epochs, "neg_samples": neg_samples, "rng_seed": rng_seed, "lr": lr}
    return EmbeddingModel(vocab, syn0, meta)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return (1.0 / (1.0 + np.exp(-np.clip(x, -6.0, 6.0)))).astype(np.float32)


def relatedness(m: EmbeddingModel, wx: str, wy: str) -> float:
    """Cosine of the two word vectors; 0 when either vector is zero."""
    if wx not in m or wy not in m:
        missing = wx if wx not in m else wy
        raise KeyError(f"out-of-vocabulary word {missing!r}")
    x = np.asarray(m.vector(wx), dtype=np.float64)
    y = np.asarray(m.vector(wy), dtype=np.float64)
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        return 0.0
    if wx == wy:
        return 1.0
    return float(np.clip(np.dot(x, y) / (nx * ny), -1.0, 1.0))


def truncation_size(rel_top: float, vocab_size: int) -> int:
    """``ceil(rel_top * (vocab_size - 1))`` computed without float drift."""
    return min(vocab_size - 1, math.ceil(Fraction(str(rel_top)) * (vocab_size - 1)))


@dataclass
class RelatednessIndex:
    neighbors: dict[str, list[tuple[str, float]]]
    rel_min: float = DEFAULT_REL_MIN
    rel_top: float = DEFAULT_REL_TOP

    @property
    def words(self) -> list[str]:
        return sorted(self.neighbors)

    def __contains__(self, word: str) -> bool:
        return word in self.neighbors

    def strong(self, word: str, rel_min: float | None = None) -> list[str]:
        """Neighbors within the stored top fraction scoring at least ``rel_min``."""
        thr = self.rel_min if rel_min is None else rel_min
        return [w for w, s in self.neighbors.get(word, ()) if s >= thr]

    def write(self, path: str | Path, header: str = "") -> None:
        meta = f"#meta\trel_min={fmt_float(self.rel_min)}\trel_top={fmt_float(self.rel_top)}\n"
        rows = [f"{w}\t{n}\t{fmt_float(s)}" for w in self.words for n, s in self.neighbors[w]]
        atomic_write(path, header + meta + "\n".join(rows) + ("\n" if rows else ""))

    @classmethod
    def read(cls, path: str | Path) -> "RelatednessIndex":
        rel_min, rel_top = DEFAULT_REL_MIN, DEFAULT_REL_TOP
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.startswith("#meta"):
                    for part in line.rstrip("\n").split("\t")[1:]:
                        k, _, v = part.partition("=")
                        if k == "rel_min":
                            rel_min = float(v)
                        elif k == "rel_top":
                            rel_top = float(v)
                    break
        neighbors: dict[str, list[tuple[str, float]]] = {}
        for _, row in read_tsv(path, ncols=3):
            neighbors.setdefault(row[0], []).append((row[1], float(row[2])))
        return cls(neighbors, rel_min, rel_top)


def build_relrank(
    m: EmbeddingModel,
    vocabulary: Iterable[str],
    rel_min: float = DEFAULT_REL_MIN,
    rel_top: float = DEFAULT_REL_TOP,
    threads: int = 1,
    block: int = 256,
) -> RelatednessIndex:
    """Exact top-``rel_top`` neighbor lists for every in-vocabulary word.

    Scores are cosines of unit-normalized vectors.  Ties are ordered by
    word.  Words missing from the model are dropped.
    """
    if not 0 < rel_top <= 1:
        raise ValueError("rel_top must be in (0, 1]")
    vocab = sorted(set(vocabulary))
    kept = [w for w in vocab if w in m]
    dropped = len(vocab) - len(kept)
    if dropped:
        log.warning("relrank: %d words missing from the embedding model were dropped", dropped)
    if len(kept) < 2:
        raise DataError("relatedness index needs at least 2 in-vocabulary words")
    k = truncation_size(rel_top, len(kept))
    unit = m.unit_vectors(kept)

    def run(lo: int) -> list[list[tuple[str, float]]]:
        hi = min(len(kept), lo + block)
        sims = np.clip(unit[lo:hi] @ unit.T, -1.0, 1.0)
        out = []
        for r in range(hi - lo):
            row = sims[r]
            row[lo + r] = -np.inf
            cand = np.argpartition(-row, k - 1)[:k]
            thr = row[cand].min()
            sel = np.flatnonzero(row >= thr)
            sel = sel[np.lexsort((sel, -row[sel]))][:k]
            out.append([(kept[j], float(row[j])) for j in sel])
        return out

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        blocks = list(pool.map(run, range(0, len(kept), block)))
    neighbors = {}
    i = 0
    for rows in blocks:
        for lst in rows:
            neighbors[kept[i]] = lst
            i += 1
    return RelatednessIndex(neighbors, rel_min, rel_top)
