"""Base term-extraction scorers.

Each scorer maps a :class:`CandidateSet` to a :class:`ScoredList` covering
exactly the same candidates, sorted by descending score with ties broken by
canonical string.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .artifacts import atomic_write, fmt_float, read_tsv
from .candidates import CandidateSet, top_frequent
from .corpus import Corpus, NormalizeConfig, normalize_word
from .errors import DataError


@dataclass
class ScoredList:
    method: str
    entries: list[tuple[str, float]]
    rank: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.rank = {c: i + 1 for i, (c, _) in enumerate(self.entries)}
        if len(self.rank) != len(self.entries):
            raise ValueError("duplicate canonical in scored list")

    @classmethod
    def from_scores(cls, method: str, scores: dict[str, float]) -> "ScoredList":
        for c, s in scores.items():
            if not math.isfinite(s):
                raise ValueError(f"{method}: non-finite score for {c!r}")
        entries = sorted(((c, float(s)) for c, s in scores.items()), key=lambda e: (-e[1], e[0]))
        return cls(method, entries)

    def __len__(self) -> int:
        return len(self.entries)

    def canonicals(self) -> list[str]:
        return [c for c, _ in self.entries]

    def scores(self) -> dict[str, float]:
        return dict(self.entries)

    def write(self, path: str | Path, header: str = "") -> None:
        rows = [f"{i}\t{c}\t{fmt_float(s)}" for i, (c, s) in enumerate(self.entries, 1)]
        atomic_write(path, header + "\n".join(rows) + ("\n" if rows else ""))

    @classmethod
    def read(cls, path: str | Path, method: str | None = None) -> "ScoredList":
        entries = []
        for lineno, row in read_tsv(path, min_cols=3):
            try:
                entries.append((row[1], float(row[2])))
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad score {row[2]!r}") from None
        return cls(method or Path(path).stem, entries)


@dataclass
class RefCorpusStats:
    freq: dict[str, int]
    total: int

    def __post_init__(self):
        if self.freq and self.total < max(self.freq.values()):
            raise DataError("reference total is smaller than a single word frequency")

    @classmethod
    def from_tsv(cls, path: str | Path | None = None, cfg: NormalizeConfig | None = None) -> "RefCorpusStats":
        """Read ``word<TAB>count`` rows; a ``#total<TAB>N`` line declares the corpus size.

        With ``cfg`` given, counts are aggregated over normalized forms so
        they line up with lemmatized candidate words.
        """
        if path is None:
            ref = resources.files("semrerank.data").joinpath("reference_en.tsv")
            lines = ref.read_text("utf-8").splitlines()
            src = "bundled reference"
        else:
            p = Path(path)
            if not p.is_file():
                raise DataError(f"reference stats file not found: {p}")
            lines = p.read_text("utf-8").splitlines()
            src = str(p)
        freq: dict[str, int] = {}
        declared = None
        for lineno, line in enumerate(lines, 1):
            if not line.strip():
                continue
            parts = line.split("\t")
            if parts[0] == "#total":
                declared = int(parts[1])
                continue
            if line.startswith("#"):
                continue
            if len(parts) != 2:
                raise DataError(f"{src}:{lineno}: expected 'word<TAB>count'")
            word = parts[0].lower()
            if cfg is not None:
                word = normalize_word(word, cfg)
                if word is None:
                    continue
            freq[word] = freq.get(word, 0) + int(parts[1])
        total = declared if declared is not None else sum(freq.values())
        return cls(freq, total)


# ---------------------------------------------------------------------------
# nesting helpers


def containers(cs: CandidateSet) -> dict[str, set[str]]:
    """Map each candidate to the longer candidates containing it as a contiguous word run."""
    out: dict[str, set[str]] = {t.canonical: set() for t in cs.terms}
    for b in cs.terms:
        n = len(b.words)
        for i in range(n):
            for j in range(i + 1, n + 1):
                if j - i == n:
                    continue
                sub = " ".join(b.words[i:j])
                if sub in out:
                    out[sub].add(b.canonical)
    return out


def contained(cs: CandidateSet) -> dict[str, set[str]]:
    """Inverse of :func:`containers`: shorter candidates nested in each candidate."""
    out: dict[str, set[str]] = {t.canonical: set() for t in cs.terms}
    for a, bigger in containers(cs).items():
        for b in bigger:
            out[b].add(a)
    return out


def _require(cs: CandidateSet) -> None:
    if len(cs) == 0:
        raise DataError("empty candidate set")


# ---------------------------------------------------------------------------
# scorers


def score_tfidf(corpus: Corpus, cs: CandidateSet) -> ScoredList:
    """Total corpus frequency times idf.

    idf = log(N/df); a candidate present in every document uses
    log((N+1)/N) instead so that its frequency still matters.
    """
    _require(cs)
    n = corpus.n_docs
    scores = {}
    for t in cs.terms:
        df = t.doc_freq
        idf = math.log(n / df) if df < n else math.log((n + 1) / n)
        scores[t.canonical] = t.tf_total * idf
    return ScoredList.from_scores("tfidf", scores)


def score_cvalue(corpus: Corpus, cs: CandidateSet) -> ScoredList:
    _require(cs)
    nest = containers(cs)
    scores = {}
    for t in cs.terms:
        weight = math.log2(len(t.words) + 0.1)
        outer = nest[t.canonical]
        if not outer:
            scores[t.canonical] = weight * t.tf_total
        else:
            mean_outer = sum(cs[b].tf_total for b in outer) / len(outer)
            scores[t.canonical] = weight * (t.tf_total - mean_outer)
    return ScoredList.from_scores("cvalue", scores)


def score_combobasic(corpus: Corpus, cs: CandidateSet, alpha: float = 0.75, beta: float = 0.1, method: str = "combobasic") -> ScoredList:
    """``|t| log f(t) + alpha * #containing + beta * #contained``."""
    _require(cs)
    outer = containers(cs)
    inner = contained(cs) if beta else {}
    scores = {}
    for t in cs.terms:
        s = len(t.words) * math.log(t.tf_total) + alpha * len(outer[t.canonical])
        if beta:
            s += beta * len(inner[t.canonical])
        scores[t.canonical] = s
    return ScoredList.from_scores(method, scores)


def score_basic(corpus: Corpus, cs: CandidateSet, alpha: float = 3.5) -> ScoredList:
    return score_combobasic(corpus, cs, alpha=alpha, beta=0.0, method="basic")


def score_rake(corpus: Corpus, cs: CandidateSet) -> ScoredList:
    """Sum of deg(w)/freq(w) over the words of each candidate.

    Degree and frequency are accumulated over candidate occurrences: each
    occurrence of a candidate of length L adds L to the degree and 1 to the
    frequency of every word it contains.
    """
    _require(cs)
    deg: dict[str, float] = {}
    freq: dict[str, float] = {}
    for t in cs.terms:
        for w in t.words:
            deg[w] = deg.get(w, 0) + t.tf_total * len(t.words)
            freq[w] = freq.get(w, 0) + t.tf_total
    wscore = {w: deg[w] / freq[w] for w in deg}
    return ScoredList.from_scores("rake", {t.canonical: sum(wscore[w] for w in t.words) for t in cs.terms})


def word_weirdness(corpus: Corpus, ref: RefCorpusStats) -> Callable[[str], float]:
    n_target = corpus.n_words
    n_ref = ref.total

    def weird(w: str) -> float:
        return (corpus.tf.get(w, 0) / n_target) / ((ref.freq.get(w, 0) + 1) / n_ref)

    return weird


def _weirdness_aggregate(corpus: Corpus, cs: CandidateSet, ref: RefCorpusStats) -> dict[str, float]:
    weird = word_weirdness(corpus, ref)
    return {t.canonical: sum(weird(w) for w in t.words) / len(t.words) for t in cs.terms}


def score_weirdness(corpus: Corpus, cs: CandidateSet, ref: RefCorpusStats) -> ScoredList:
    _require(cs)
    return ScoredList.from_scores("weirdness", _weirdness_aggregate(corpus, cs, ref))


def score_relevance(corpus: Corpus, cs: CandidateSet, ref: RefCorpusStats) -> ScoredList:
    """``1 - 1/log2(2 + W(t) * df(t) / N)`` with W the word-level weirdness mean."""
    _require(cs)
    n = corpus.n_docs
    agg = _weirdness_aggregate(corpus, cs, ref)
    scores = {
        t.canonical: 1.0 - 1.0 / math.log2(2.0 + agg[t.canonical] * t.doc_freq / n)
        for t in cs.terms
    }
    return ScoredList.from_scores("relevance", scores)


def score_glossex(corpus: Corpus, cs: CandidateSet, ref: RefCorpusStats, alpha: float = 0.5, beta: float = 0.5) -> ScoredList:
    """Domain specificity (TD) and term cohesion (TC), linearly combined."""
    _require(cs)
    n_target = corpus.n_words
    n_ref = ref.total
    scores = {}
    for t in cs.terms:
        td = 0.0
        for w in t.words:
            p_d = (corpus.tf.get(w, 0) + 1) / n_target
            p_r = (ref.freq.get(w, 0) + 1) / n_ref
            td += math.log(p_d / p_r)
        td /= len(t.words)
        f = t.tf_total
        tc = len(t.words) * f * math.log10(f + 1) / sum(corpus.tf[w] for w in t.words)
        scores[t.canonical] = alpha * td + beta * tc
    return ScoredList.from_scores("glossex", scores)


def frequent_set_size(n_candidates: int, frac: float = 0.1, floor: int = 30) -> int:
    return min(n_candidates, max(math.ceil(frac * n_candidates), floor))


def chisquare_terms(corpus: Corpus, cs: CandidateSet, frac_frequent: float = 0.1, floor: int = 30, robust: bool = True, block: int = 2048) -> dict[str, float]:
    """Document-level co-occurrence chi-square against the frequent candidates.

    ``p_g`` is the document frequency of ``g`` as a share of the summed
    document frequencies of the frequent set; a candidate that is itself
    frequent is compared against the remaining frequent candidates.
    """
    doc_pos = {d.id: i for i, d in enumerate(corpus.docs)}
    terms = cs.terms
    incidence = np.zeros((len(doc_pos), len(terms)))
    for j, t in enumerate(terms):
        for d in t.tf_doc:
            incidence[doc_pos[d], j] = 1.0
    col = {t.canonical: j for j, t in enumerate(terms)}
    freq = top_frequent(cs, frequent_set_size(len(terms), frac_frequent, floor))
    g_idx = np.array([col[g.canonical] for g in freq])
    g_df = incidence[:, g_idx].sum(axis=0)
    g_total = g_df.sum()
    g_pos = {int(j): k for k, j in enumerate(g_idx)}

    out = {}
    for lo in range(0, len(terms), block):
        hi = min(len(terms), lo + block)
        co = incidence[:, lo:hi].T @ incidence[:, g_idx]
        mask = np.ones_like(co)
        denom = np.full(hi - lo, g_total)
        for r in range(lo, hi):
            k = g_pos.get(r)
            if k is not None:
                mask[r - lo, k] = 0.0
                denom[r - lo] -= g_df[k]
        co *= mask
        n_t = co.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            p = (g_df[None, :] * mask) / denom[:, None]
            expected = n_t[:, None] * p
            summand = np.where(expected > 0, (co - expected) ** 2 / expected, 0.0)
        chi = summand.sum(axis=1)
        if robust:
            chi = chi - summand.max(axis=1)
        for r in range(lo, hi):
            out[terms[r].canonical] = float(chi[r - lo]) if n_t[r - lo] > 0 else 0.0
    return out


def score_chisquare(corpus: Corpus, cs: CandidateSet, frac_frequent: float = 0.1, floor: int = 30, robust: bool = True) -> ScoredList:
    if len(cs) < 2:
        raise DataError("chi-square needs at least 2 candidates")
    return ScoredList.from_scores("chisquare", chisquare_terms(corpus, cs, frac_frequent, floor, robust))


def vote(lists: Sequence[ScoredList], method: str = "vote") -> ScoredList:
    """Uniform-weight rank voting: score is the negated mean rank."""
    if not lists:
        raise ValueError("vote needs at least one list")
    keys = set(lists[0].rank)
    for sl in lists[1:]:
        if set(sl.rank) != keys:
            raise DataError(f"vote: {sl.method} covers a different candidate set than {lists[0].method}")
    scores = {c: -sum(sl.rank[c] for sl in lists) / len(lists) for c in keys}
    return ScoredList.from_scores(method, scores)


SCORERS = {
    "tfidf": score_tfidf,
    "cvalue": score_cvalue,
    "basic": score_basic,
    "combobasic": score_combobasic,
    "rake": score_rake,
    "weirdness": score_weirdness,
    "relevance": score_relevance,
    "glossex": score_glossex,
    "chisquare": score_chisquare,
}
NEEDS_REFERENCE = frozenset({"weirdness", "relevance", "glossex"})


def run_scorer(name: str, corpus: Corpus, cs: CandidateSet, ref: RefCorpusStats | None = None, **params) -> ScoredList:
    if name not in SCORERS:
        raise KeyError(f"unknown scorer {name!r}")
    fn = SCORERS[name]
    if name in NEEDS_REFERENCE:
        if ref is None:
            raise DataError(f"{name} needs reference corpus statistics")
        return fn(corpus, cs, ref, **params)
    return fn(corpus, cs, **params)
