"""Ranking metrics against a ground-truth term list, and rank movement."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .artifacts import atomic_write, fmt_float, read_tsv
from .corpus import Corpus, NormalizeConfig, normalize_word, tokenize
from .errors import DataError
from .scorers import ScoredList

log = logging.getLogger(__name__)

DEFAULT_KS = (50, 100, 500, 1000, 2000)
RARE_TF = 5
N_STEPS = 20  # 5% bins on each side of zero


@dataclass
class GroundTruth:
    terms: frozenset[str]
    source: str = ""

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.terms


def normalize_term(text: str, cfg: NormalizeConfig) -> str | None:
    """Normalize a term the way candidates are normalized.

    Filtered words at either edge are trimmed.  Filtered words inside the
    term are kept lowercased, so such a term stays in the list but can never
    match a candidate.
    """
    toks = tokenize(text)
    norms = [normalize_word(t, cfg) for t in toks]
    lo, hi = 0, len(toks)
    while lo < hi and norms[lo] is None:
        lo += 1
    while hi > lo and norms[hi - 1] is None:
        hi -= 1
    if lo == hi:
        return None
    return " ".join(n if n is not None else t.lower() for t, n in zip(toks[lo:hi], norms[lo:hi]))


def load_ground_truth(path: str | Path, cfg: NormalizeConfig | None = None) -> GroundTruth:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"ground-truth file not found: {p}")
    cfg = cfg or NormalizeConfig()
    terms, skipped = set(), 0
    for line in p.read_text("utf-8").splitlines():
        if not line.strip():
            continue
        t = normalize_term(line.strip(), cfg)
        if t is None:
            skipped += 1
        else:
            terms.add(t)
    if skipped:
        log.warning("%s: %d ground-truth entries normalized to nothing", p, skipped)
    if not terms:
        raise DataError(f"ground-truth file {p} has no usable terms")
    return GroundTruth(frozenset(terms), str(p))


def _hits(lst: ScoredList | Sequence[str], gt: GroundTruth | Iterable[str], k: int) -> int:
    names = lst.canonicals() if isinstance(lst, ScoredList) else list(lst)
    truth = gt.terms if isinstance(gt, GroundTruth) else set(gt)
    return sum(1 for c in names[:k] if c in truth)


def precision_at_k(lst: ScoredList | Sequence[str], gt: GroundTruth | Iterable[str], k: int) -> float:
    """Hits in the top ``k`` divided by ``k`` (even when the list is shorter)."""
    if k < 1:
        raise ValueError("K must be >= 1")
    if len(lst) == 0:
        raise ValueError("empty ranked list")
    return _hits(lst, gt, k) / k


def avg_p_at_k(lst: ScoredList | Sequence[str], gt: GroundTruth | Iterable[str], ks: Sequence[int] = DEFAULT_KS) -> float:
    return sum(precision_at_k(lst, gt, k) for k in ks) / len(ks)


def rtp_and_prf(lst: ScoredList | Sequence[str], gt: GroundTruth | Iterable[str]) -> tuple[int, float, float, float]:
    """``(RTP, P, R, F1)`` with the cutoff placed at the number of recoverable positives."""
    names = lst.canonicals() if isinstance(lst, ScoredList) else list(lst)
    truth = gt.terms if isinstance(gt, GroundTruth) else frozenset(gt)
    if not truth:
        raise ValueError("empty ground truth")
    rtp = len(set(names) & truth)
    if rtp == 0:
        log.warning("no candidate matches the ground truth; metrics at RTP are 0")
        return 0, 0.0, 0.0, 0.0
    tp = _hits(names, truth, rtp)
    p, r = tp / rtp, tp / len(truth)
    f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return rtp, p, r, f1


@dataclass
class EvalReport:
    method: str
    p_at_k: dict[int, float]
    avg_p_at_k: float
    rtp: int
    p_at_rtp: float
    r_at_rtp: float
    f1_at_rtp: float

    def row(self) -> list[str]:
        vals = [self.p_at_k[k] for k in sorted(self.p_at_k)] + [self.avg_p_at_k]
        return [self.method, *map(fmt_float, vals), str(self.rtp), *map(fmt_float, (self.p_at_rtp, self.r_at_rtp, self.f1_at_rtp))]

    def write(self, path: str | Path, header: str = "") -> None:
        cols = ["method", *(f"p@{k}" for k in sorted(self.p_at_k)), "avg_p@k", "rtp", "p@rtp", "r@rtp", "f1@rtp"]
        atomic_write(path, header + "\t".join(cols) + "\n" + "\t".join(self.row()) + "\n")

    @classmethod
    def read(cls, path: str | Path) -> "EvalReport":
        rows = [r for _, r in read_tsv(path)]
        if len(rows) != 2:
            raise DataError(f"{path}: expected a column row and one value row")
        cols, vals = rows
        d = dict(zip(cols, vals))
        pk = {int(c[2:]): float(d[c]) for c in cols if c.startswith("p@") and c[2:].isdigit()}
        return cls(d["method"], pk, float(d["avg_p@k"]), int(d["rtp"]), float(d["p@rtp"]), float(d["r@rtp"]), float(d["f1@rtp"]))


def evaluate(lst: ScoredList, gt: GroundTruth, ks: Sequence[int] = DEFAULT_KS) -> EvalReport:
    pk = {k: precision_at_k(lst, gt, k) for k in ks}
    rtp, p, r, f1 = rtp_and_prf(lst, gt)
    return EvalReport(lst.method, pk, sum(pk.values()) / len(ks), rtp, p, r, f1)


def comparison_csv(reports: Sequence[EvalReport]) -> str:
    """Methods as rows, metrics as columns."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    ks = sorted(reports[0].p_at_k) if reports else list(DEFAULT_KS)
    w.writerow(["method", *(f"p@{k}" for k in ks), "avg_p@k", "rtp", "p@rtp", "r@rtp", "f1@rtp"])
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()


def movement_bin(rank_diff: int, n: int) -> int:
    """Signed 5% bin of a rank change: 0 only for no change, else ±1..±20.

    Bin ``k > 0`` holds movements in ``((k-1)/20, k/20]``; negative bins
    mirror it.  Integer arithmetic keeps boundaries exact.
    """
    if rank_diff == 0:
        return 0
    k = -(-N_STEPS * abs(rank_diff) // n)
    return k if rank_diff > 0 else -k


@dataclass
class MovementReport:
    n_total: int
    mov: dict[str, float]
    bins: dict[str, int]
    histogram: dict[int, int]

    def percentages(self) -> dict[int, float]:
        n = sum(self.histogram.values())
        return {k: (100.0 * c / n if n else 0.0) for k, c in self.histogram.items()}

    def write_terms(self, path: str | Path, header: str = "") -> None:
        rows = [f"{t}\t{fmt_float(self.mov[t])}\t{self.bins[t]}" for t in sorted(self.mov)]
        atomic_write(path, header + "term\tmov\tbin\n" + "\n".join(rows) + ("\n" if rows else ""))

    def write_histogram(self, path: str | Path, header: str = "") -> None:
        pct = self.percentages()
        lines = ["bin\tlow_pct\thigh_pct\tcount\tpercent"]
        for k in sorted(self.histogram):
            if k == 0:
                lo = hi = 0
            elif k > 0:
                lo, hi = 5 * (k - 1), 5 * k
            else:
                lo, hi = 5 * k, 5 * (k + 1)
            lines.append(f"{k}\t{lo}\t{hi}\t{self.histogram[k]}\t{fmt_float(pct[k])}")
        atomic_write(path, header + "\n".join(lines) + "\n")


def movement(base: ScoredList, revised: ScoredList, terms: Iterable[str] | None = None) -> MovementReport:
    """Relative rank movement ``(rank_base - rank_revised) / |T|`` per term."""
    if set(base.rank) != set(revised.rank):
        raise DataError("base and revised lists cover different candidates")
    n = len(base)
    selected = sorted(base.rank) if terms is None else sorted(set(terms))
    mov, bins = {}, {}
    hist = {k: 0 for k in range(-N_STEPS, N_STEPS + 1)}
    for t in selected:
        if t not in base.rank:
            raise DataError(f"term {t!r} missing from the ranked lists")
        diff = base.rank[t] - revised.rank[t]
        mov[t] = diff / n
        bins[t] = movement_bin(diff, n)
        hist[bins[t]] += 1
    return MovementReport(n, mov, bins, hist)


def rare_terms(terms: Iterable[str], corpus: Corpus, threshold: int = RARE_TF) -> set[str]:
    """Terms whose words all occur fewer than ``threshold`` times in the corpus."""
    return {t for t in terms if all(corpus.tf.get(w, 0) < threshold for w in t.split(" "))}

