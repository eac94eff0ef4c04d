"""Seed terms and the semantic revision of base scores."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .artifacts import atomic_write, fmt_float, read_tsv
from .candidates import CandidateSet, top_frequent
from .errors import DataError
from .scorers import ScoredList

log = logging.getLogger(__name__)


@dataclass
class SeedSet:
    z: int
    terms: list[str]
    mode: str = "verified"
    words: set[str] = field(init=False)

    def __post_init__(self):
        if self.mode not in ("verified", "unsupervised"):
            raise ValueError(f"unknown seed mode {self.mode!r}")
        self.words = {w for t in self.terms for w in t.split(" ")}

    def __len__(self) -> int:
        return len(self.terms)

    def write(self, path: str | Path, header: str = "") -> None:
        body = f"#mode\t{self.mode}\n#z\t{self.z}\n" + "".join(t + "\n" for t in self.terms)
        atomic_write(path, header + body)

    @classmethod
    def read(cls, path: str | Path) -> "SeedSet":
        mode, z = "verified", 0
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.startswith("#mode\t"):
                    mode = line.split("\t", 1)[1].strip()
                elif line.startswith("#z\t"):
                    z = int(line.split("\t", 1)[1])
        terms = [row[0] for _, row in read_tsv(path, ncols=1)]
        return cls(z, terms, mode)


def write_proposal(cs: CandidateSet, z: int, path: str | Path, header: str = "") -> None:
    """The top-``z`` frequent candidates with an empty label column to fill in."""
    rows = [f"{t.canonical}\t{t.tf_total}\t" for t in top_frequent(cs, z)]
    atomic_write(path, header + "\n".join(rows) + ("\n" if rows else ""))


def propose_and_verify(cs: CandidateSet, z: int, annotation_file: str | Path) -> SeedSet:
    """Seeds are the proposals labelled ``1`` in ``annotation_file``.

    The file has ``canonical<TAB>tf_total<TAB>label`` rows.  Every label
    must be 0 or 1 and every row must name one of the top-``z`` proposals.
    """
    proposed = [t.canonical for t in top_frequent(cs, z)]
    allowed = set(proposed)
    chosen = set()
    for lineno, row in read_tsv(annotation_file, min_cols=3):
        canonical, label = row[0], row[2].strip()
        if canonical not in allowed:
            raise DataError(f"{annotation_file}:{lineno}: {canonical!r} is not among the top-{z} proposals")
        if label not in ("0", "1"):
            raise DataError(f"{annotation_file}:{lineno}: label must be 0 or 1, got {label!r}")
        if label == "1":
            chosen.add(canonical)
    seeds = SeedSet(z, [c for c in proposed if c in chosen], "verified")
    if not seeds.terms:
        log.warning("no verified seed terms; personalization falls back to uniform")
    return seeds


def unsupervised_seeds(cs: CandidateSet, z: int) -> SeedSet:
    return SeedSet(z, [t.canonical for t in top_frequent(cs, z)], "unsupervised")


@dataclass
class RevisedList:
    scored: ScoredList
    nate: dict[str, float]
    mean_nsmi: dict[str, float]

    @property
    def method(self) -> str:
        return self.scored.method

    def write(self, path: str | Path, header: str = "") -> None:
        rows = [
            f"{i}\t{c}\t{fmt_float(s)}\t{fmt_float(self.nate[c])}\t{fmt_float(self.mean_nsmi[c])}"
            for i, (c, s) in enumerate(self.scored.entries, 1)
        ]
        atomic_write(path, header + "\n".join(rows) + ("\n" if rows else ""))

    @classmethod
    def read(cls, path: str | Path, method: str | None = None) -> "RevisedList":
        entries, nate, mean = [], {}, {}
        for lineno, row in read_tsv(path, ncols=5):
            try:
                entries.append((row[1], float(row[2])))
                nate[row[1]] = float(row[3])
                mean[row[1]] = float(row[4])
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad number") from None
        return cls(ScoredList(method or Path(path).stem, entries), nate, mean)


def normalize_base(base: ScoredList) -> dict[str, float]:
    """Base scores scaled to [0, 1]; shifted by the minimum first if any is negative."""
    scores = base.scores()
    lo = min(scores.values())
    shift = lo if lo < 0 else 0.0
    top = max(scores.values()) - shift
    if top <= 0 or all(s == lo for s in scores.values()):
        return {c: 1.0 for c in scores}
    return {c: (s - shift) / top for c, s in scores.items()}


def revise_scores(
    base: ScoredList,
    importance: Mapping[str, float] | object,
    cs: CandidateSet,
    method: str | None = None,
) -> RevisedList:
    """Boost each normalized base score by the mean importance of its words.

    ``srk = (1 + mean nsmi) * nate`` where ``nsmi`` is importance divided
    by its maximum over the candidate words.  Ties in ``srk`` keep the
    base order.
    """
    imp = importance.scores if hasattr(importance, "scores") else importance
    if set(base.canonicals()) != set(cs.canonicals()):
        raise DataError(f"{base.method}: scored list does not cover the candidate set")
    vocab = {w for t in cs for w in t.words}
    top = max((imp.get(w, 0.0) for w in vocab), default=0.0)
    nsmi = {w: (imp.get(w, 0.0) / top if top > 0 else 0.0) for w in vocab}
    nate = normalize_base(base)
    mean, srk = {}, {}
    for t in cs:
        ws = set(t.words)
        mean[t.canonical] = sum(nsmi[w] for w in sorted(ws)) / len(ws)
        srk[t.canonical] = (1.0 + mean[t.canonical]) * nate[t.canonical]
    order = sorted(base.canonicals(), key=lambda c: (-srk[c], base.rank[c]))
    name = method or f"semrerank({base.method})"
    return RevisedList(ScoredList(name, [(c, srk[c]) for c in order]), nate, mean)


def check_bounds(rev: RevisedList, eps: float = 1e-12) -> None:
    """Raise if any revised score leaves ``[nate, 2 * nate]``."""
    for c, s in rev.scored.entries:
        n = rev.nate[c]
        if not (n - eps <= s <= 2 * n + eps):
            raise AssertionError(f"revised score {s} for {c!r} outside [{n}, {2 * n}]")
