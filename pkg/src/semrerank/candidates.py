"""Candidate term extraction (n-gram and PoS-pattern modes)."""

from __future__ import annotations

import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .corpus import Corpus, Document
from .errors import ConfigError, DataError


@dataclass
class CandidateTerm:
    canonical: str
    words: tuple[str, ...]
    tf_total: int
    tf_doc: dict[str, int]
    surface_variants: set[str] = field(default_factory=set)

    @property
    def doc_freq(self) -> int:
        return len(self.tf_doc)

    def __len__(self) -> int:
        return len(self.words)


@dataclass(frozen=True)
class ExtractionConfig:
    mode: str = "ngram"
    minc: int = 2
    maxc: int | None = None
    minw: int = 1
    maxw: int = 5
    patterns: tuple[str, ...] = ()
    min_freq: int = 1

    def __post_init__(self):
        if self.mode not in ("ngram", "pos-pattern"):
            raise ConfigError(f"unknown extraction mode {self.mode!r}")
        if not 1 <= self.minw <= self.maxw:
            raise ConfigError("need 1 <= minw <= maxw")
        if self.maxc is not None and self.minc > self.maxc:
            raise ConfigError("need minc <= maxc")
        if self.min_freq < 1:
            raise ConfigError("min_freq must be >= 1")


# Candidate-extraction settings per dataset (minc, maxc, minw, maxw).
DATASET_PRESETS = {
    "genia": ExtractionConfig(minc=2, maxc=40, minw=1, maxw=5),
    "aclv2": ExtractionConfig(minc=2, maxc=40, minw=1, maxw=5),
    "ttcw": ExtractionConfig(minc=3, maxc=40, minw=1, maxw=4),
    "ttcm": ExtractionConfig(minc=3, maxc=40, minw=1, maxw=4),
}


@dataclass
class CandidateSet:
    terms: list[CandidateTerm]
    config: ExtractionConfig = field(default_factory=ExtractionConfig)

    def __post_init__(self):
        self._index = {t.canonical: t for t in self.terms}
        if len(self._index) != len(self.terms):
            raise DataError("duplicate canonical strings in candidate set")

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __contains__(self, canonical: str) -> bool:
        return canonical in self._index

    def __getitem__(self, canonical: str) -> CandidateTerm:
        return self._index[canonical]

    def canonicals(self) -> list[str]:
        return [t.canonical for t in self.terms]


def read_patterns(path: str | Path | None = None) -> tuple[str, ...]:
    """Read PoS regex patterns, one per line; ``#`` lines are comments."""
    if path is None:
        text = resources.files("semrerank.data").joinpath("patterns_np.txt").read_text("utf-8")
    else:
        p = Path(path)
        if not p.is_file():
            raise DataError(f"pattern file not found: {p}")
        text = p.read_text("utf-8")
    return tuple(ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#"))


def _accept(norms: list[str | None], start: int, end: int, cfg: ExtractionConfig) -> tuple[int, int] | None:
    while start < end and norms[start] is None:
        start += 1
    while end > start and norms[end - 1] is None:
        end -= 1
    n = end - start
    if n < cfg.minw or n > cfg.maxw:
        return None
    words = norms[start:end]
    if any(w is None or len(w) < cfg.minc for w in words):
        return None
    if cfg.maxc is not None and len(" ".join(words)) > cfg.maxc:
        return None
    return start, end


def _doc_spans(doc: Document, cfg: ExtractionConfig, compiled: list[re.Pattern]) -> set[tuple[int, int]]:
    norms = [t.norm for t in doc.tokens]
    n = len(norms)
    spans: set[tuple[int, int]] = set()
    if cfg.mode == "ngram":
        for i in range(n):
            if norms[i] is None:
                continue
            for j in range(i + 1, min(n, i + cfg.maxw) + 1):
                if norms[j - 1] is None:
                    break
                span = _accept(norms, i, j, cfg)
                if span:
                    spans.add(span)
        return spans
    tags = [(t.pos or "") + " " for t in doc.tokens]
    # two extra tokens leave room for stopwords trimmed off either edge
    reach = cfg.maxw + 2
    for i in range(n):
        tagstr = ""
        for j in range(i + 1, min(n, i + reach) + 1):
            tagstr += tags[j - 1]
            if any(p.fullmatch(tagstr) for p in compiled):
                span = _accept(norms, i, j, cfg)
                if span:
                    spans.add(span)
    return spans


def extract_candidates(corpus: Corpus, cfg: ExtractionConfig) -> CandidateSet:
    """Extract candidate terms from every document of ``corpus``.

    Every distinct token span that survives trimming and the length
    constraints counts as one occurrence, so nested candidates carry their
    own frequencies.
    """
    compiled: list[re.Pattern] = []
    if cfg.mode == "pos-pattern":
        if not corpus.tagged:
            raise ConfigError("pos-pattern extraction requires a tagged corpus")
        if not cfg.patterns:
            raise ConfigError("pos-pattern extraction requires at least one pattern")
        try:
            compiled = [re.compile(p) for p in cfg.patterns]
        except re.error as exc:
            raise ConfigError(f"invalid PoS pattern: {exc}") from exc

    tf_doc: dict[str, dict[str, int]] = defaultdict(dict)
    variants: dict[str, set[str]] = defaultdict(set)
    for doc in corpus.docs:
        counts: Counter[str] = Counter()
        for start, end in sorted(_doc_spans(doc, cfg, compiled)):
            toks = doc.tokens[start:end]
            canonical = " ".join(t.norm for t in toks)
            counts[canonical] += 1
            variants[canonical].add(" ".join(t.surface for t in toks))
        for canonical, c in counts.items():
            tf_doc[canonical][doc.id] = c

    terms = []
    for canonical in sorted(tf_doc):
        per_doc = tf_doc[canonical]
        total = sum(per_doc.values())
        if total < cfg.min_freq:
            continue
        terms.append(
            CandidateTerm(
                canonical=canonical,
                words=tuple(canonical.split(" ")),
                tf_total=total,
                tf_doc=per_doc,
                surface_variants=variants[canonical],
            )
        )
    corpus.ctf = {t.canonical: t.tf_total for t in terms}
    return CandidateSet(terms=terms, config=cfg)


def top_frequent(cs: CandidateSet, z: int) -> list[CandidateTerm]:
    """The ``z`` most frequent candidates, ties broken by canonical string."""
    if z < 1:
        raise ValueError("z must be >= 1")
    return sorted(cs.terms, key=lambda t: (-t.tf_total, t.canonical))[:z]


def write_candidates(cs: CandidateSet, path: Path, occurrences_path: Path | None = None, header: str = "") -> None:
    from .artifacts import atomic_write

    rows = [f"{t.canonical}\t{t.tf_total}\t{t.doc_freq}" for t in cs.terms]
    atomic_write(path, header + "\n".join(rows) + ("\n" if rows else ""))
    if occurrences_path is not None:
        occ = [f"{t.canonical}\t{d}\t{c}" for t in cs.terms for d, c in t.tf_doc.items()]
        atomic_write(occurrences_path, header + "\n".join(occ) + ("\n" if occ else ""))


def read_candidates(path: Path, occurrences_path: Path) -> CandidateSet:
    from .artifacts import read_tsv

    totals = {}
    for lineno, row in read_tsv(path, ncols=3):
        try:
            totals[row[0]] = int(row[1])
        except ValueError:
            raise DataError(f"{path}:{lineno}: bad frequency {row[1]!r}") from None
    per_doc: dict[str, dict[str, int]] = defaultdict(dict)
    for lineno, row in read_tsv(occurrences_path, ncols=3):
        if row[0] not in totals:
            raise DataError(f"{occurrences_path}:{lineno}: unknown candidate {row[0]!r}")
        per_doc[row[0]][row[1]] = int(row[2])
    terms = []
    for canonical in sorted(totals):
        t = CandidateTerm(canonical, tuple(canonical.split(" ")), totals[canonical], per_doc[canonical])
        if sum(t.tf_doc.values()) != t.tf_total:
            raise DataError(f"{path}: frequency mismatch for {canonical!r}")
        terms.append(t)
    return CandidateSet(terms)
