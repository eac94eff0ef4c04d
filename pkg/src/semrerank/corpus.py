"""Corpus loading, tokenization and word normalization."""

from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

from .errors import DataError
from .lemmatizer import RULESET_ID, lemmatize

log = logging.getLogger(__name__)

STOPWORDS_VERSION = "en-v1"


def default_stopwords() -> frozenset[str]:
    """The bundled English stopword list (182 entries)."""
    text = resources.files("semrerank.data").joinpath("stopwords_en.txt").read_text("utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


def read_stopwords(path: str | Path) -> frozenset[str]:
    """Read a stopword file, one word per line."""
    p = Path(path)
    if not p.is_file():
        raise DataError(f"stopword file not found: {p}")
    lines = p.read_text("utf-8").splitlines()
    return frozenset(w.strip().lower() for w in lines if w.strip() and not w.startswith("#"))


@dataclass(frozen=True)
class NormalizeConfig:
    stopwords: frozenset[str] = field(default_factory=default_stopwords)
    minc: int = 2
    lemmatizer: str = RULESET_ID
    alnum_only: bool = True

    def __post_init__(self):
        if self.minc < 1:
            raise ValueError("minc must be >= 1")
        if self.lemmatizer != RULESET_ID:
            raise ValueError(f"unknown lemmatizer {self.lemmatizer!r}")


@dataclass(frozen=True)
class Token:
    surface: str
    norm: str | None
    pos: str | None
    position: int


@dataclass
class Document:
    id: str
    tokens: list[Token]

    def norm_stream(self) -> list[str]:
        """Surviving normalized words in document order."""
        return [t.norm for t in self.tokens if t.norm is not None]


@dataclass
class Corpus:
    docs: list[Document]
    tf: dict[str, int]
    df: dict[str, int]
    ctf: dict[str, int] = field(default_factory=dict)
    tagged: bool = False
    normalize: NormalizeConfig = field(default_factory=NormalizeConfig)

    @classmethod
    def from_documents(cls, docs: list[Document], cfg: NormalizeConfig, tagged: bool = False) -> "Corpus":
        ids = [d.id for d in docs]
        if len(set(ids)) != len(ids):
            dup = sorted(k for k, v in Counter(ids).items() if v > 1)
            raise DataError(f"duplicate document ids: {dup[:5]}")
        tf: Counter[str] = Counter()
        df: Counter[str] = Counter()
        for d in docs:
            words = d.norm_stream()
            tf.update(words)
            df.update(set(words))
        return cls(docs=docs, tf=dict(tf), df=dict(df), tagged=tagged, normalize=cfg)

    @property
    def n_docs(self) -> int:
        return len(self.docs)

    @property
    def n_words(self) -> int:
        """Total number of surviving (normalized) word tokens."""
        return sum(self.tf.values())

    def doc(self, doc_id: str) -> Document:
        for d in self.docs:
            if d.id == doc_id:
                return d
        raise KeyError(doc_id)


def normalize_word(surface: str, cfg: NormalizeConfig) -> str | None:
    """Lowercase, lemmatize and filter a single word.

    Returns ``None`` for stopwords, words without any alphanumeric
    character (when ``cfg.alnum_only``) and lemmas shorter than ``cfg.minc``.
    """
    w = surface.lower()
    if not w or w in cfg.stopwords:
        return None
    if cfg.alnum_only and not any(ch.isalnum() for ch in w):
        return None
    lemma = lemmatize(w)
    if lemma in cfg.stopwords or len(lemma) < cfg.minc:
        return None
    return lemma


def _is_word_char(ch: str) -> bool:
    return ch.isalnum()


def split_chunk(chunk: str) -> list[str]:
    """Split one whitespace-delimited chunk into word and punctuation parts.

    Leading and trailing punctuation is detached; intra-word hyphens and
    other inner symbols stay, and a trailing ``+`` is kept ("CD45RA+").
    """
    i, j = 0, len(chunk)
    while i < j and not _is_word_char(chunk[i]):
        i += 1
    while j > i and not (_is_word_char(chunk[j - 1]) or chunk[j - 1] == "+"):
        j -= 1
    parts = []
    if i > 0:
        parts.append(chunk[:i])
    if j > i:
        parts.append(chunk[i:j])
    if j < len(chunk):
        parts.append(chunk[j:])
    return parts


def tokenize(text: str) -> list[str]:
    out: list[str] = []
    for chunk in text.split():
        out.extend(split_chunk(chunk))
    return out


def make_document(doc_id: str, words: Iterable[str], cfg: NormalizeConfig, tags: Iterable[str | None] | None = None) -> Document:
    words = list(words)
    tags = list(tags) if tags is not None else [None] * len(words)
    tokens = [
        Token(surface=w, norm=normalize_word(w, cfg), pos=tag, position=i)
        for i, (w, tag) in enumerate(zip(words, tags))
    ]
    return Document(id=doc_id, tokens=tokens)


def _read_plain(path: Path, cfg: NormalizeConfig) -> Document:
    return make_document(path.stem, tokenize(path.read_text("utf-8")), cfg)


def _read_tagged(path: Path, cfg: NormalizeConfig) -> Document:
    words, tags = [], []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise DataError(f"{path}:{lineno}: expected 'token<TAB>pos', got {line!r}")
            words.append(parts[0])
            tags.append(parts[1])
    return make_document(path.stem, words, cfg, tags)


def load_corpus(path: str | Path, format: str = "plain", cfg: NormalizeConfig | None = None, threads: int = 1) -> Corpus:
    """Load a directory of documents, one document per file.

    ``plain``: UTF-8 ``.txt`` files.  ``tagged``: ``.tsv`` files with one
    ``token<TAB>pos`` row per line.  Document ids are file stems.
    """
    cfg = cfg or NormalizeConfig()
    root = Path(path)
    if not root.exists():
        raise DataError(f"corpus path does not exist: {root}")
    if not root.is_dir():
        raise DataError(f"corpus path is not a directory: {root}")
    if format == "plain":
        suffix, reader = ".txt", _read_plain
    elif format == "tagged":
        suffix, reader = ".tsv", _read_tagged
    else:
        raise DataError(f"unknown corpus format {format!r}")
    files = sorted(p for p in root.iterdir() if p.is_file() and p.suffix == suffix)
    if not files:
        raise DataError(f"no {suffix} files in {root}")
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        docs = list(pool.map(lambda p: reader(p, cfg), files))
    log.info("loaded %d documents from %s", len(docs), root)
    return Corpus.from_documents(docs, cfg, tagged=(format == "tagged"))


def words_of(x) -> set[str]:
    """Set of normalized words of a document, candidate term, candidate set or term string."""
    if isinstance(x, str):
        return set(x.split())
    if hasattr(x, "tokens"):
        return {t.norm for t in x.tokens if t.norm is not None}
    if hasattr(x, "terms"):
        out: set[str] = set()
        for t in x.terms:
            out.update(t.words)
        return out
    if hasattr(x, "words"):
        return set(x.words)
    out = set()
    for item in x:
        out |= words_of(item)
    return out
