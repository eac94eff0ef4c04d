"""Command-line pipeline.  Each subcommand reads its inputs from the output
directory, writes its artifacts there and appends a line to manifest.jsonl.

Exit codes: 0 ok, 2 configuration error, 3 data error, 4 finished with a
PageRank convergence warning.
"""

from __future__ import annotations

import functools
import hashlib
import logging
import sys
from pathlib import Path

import click

from .artifacts import append_manifest, atomic_write, make_header, read_header, read_tsv
from .candidates import ExtractionConfig, read_candidates, read_patterns, write_candidates, extract_candidates
from .config import RunConfig, load_config
from .corpus import Corpus, Document, NormalizeConfig, Token, default_stopwords, load_corpus, read_stopwords
from .embedding import RelatednessIndex, build_relrank, load_embeddings, train_embeddings
from .errors import ConfigError, DataError
from .evaluation import GroundTruth, EvalReport, comparison_csv, evaluate, load_ground_truth, movement, rare_terms
from .rerank import RevisedList, SeedSet, check_bounds, propose_and_verify, revise_scores, unsupervised_seeds, write_proposal
from .scorers import NEEDS_REFERENCE, RefCorpusStats, ScoredList, run_scorer, vote
from .semgraph import PageRankParams, SemanticImportance, compute_smi, pswa_stats, write_pswa
from .textrank import ctextrank, revise_with_ctextrank

log = logging.getLogger("semrerank")

EXIT_CONFIG, EXIT_DATA, EXIT_CONVERGENCE = 2, 3, 4

TOKENS = "tokens.tsv"
WORD_STATS = "corpus_stats.tsv"
CANDIDATES = "candidates.tsv"
OCCURRENCES = "candidate_occurrences.tsv"
EMBEDDINGS = "embeddings.txt"
EMBEDDINGS_META = "embeddings.meta"
RELINDEX = "relindex.tsv"
PROPOSAL = "seeds_proposal.tsv"
SEEDS = "seeds.tsv"
SMI = "smi.tsv"
CTEXTRANK = "ctextrank.tsv"
PSWA = "pswa.tsv"
COMPARISON = "comparison.csv"
BASE_DIR, SEM_DIR, TR_DIR = "scores", "semrerank", "adp-textrank"


class ConvergenceWarning(Exception):
    pass


def corpus_digest(root: Path, suffix: str) -> str:
    h = hashlib.sha256()
    for p in sorted(q for q in root.iterdir() if q.is_file() and q.suffix == suffix):
        h.update(p.name.encode() + b"\0")
        h.update(p.read_bytes() + b"\0")
    return h.hexdigest()[:16]


class Pipeline:
    def __init__(self, cfg: RunConfig, threads: int = 1):
        self.cfg = cfg
        self.threads = threads
        self.out = cfg.output_dir
        self._corpus: Corpus | None = None
        self._cs = None
        self._norm: NormalizeConfig | None = None

    # -- plumbing ---------------------------------------------------------

    def need(self, name: str, producer: str) -> Path:
        p = self.out / name
        if not p.exists():
            raise DataError(f"missing artifact {p}; run `semrerank {producer}` first")
        return p

    def corpus_hash(self) -> str:
        return read_header(self.need(TOKENS, "ingest")).get("corpus", "")

    def header(self, stage: str, **extra) -> str:
        corpus = extra.pop("corpus", None) or self.corpus_hash()
        return make_header(config=self.cfg.hash, corpus=corpus, seed=self.cfg["seed"], stage=stage, **extra)

    def record(self, command: str, outputs: list[Path]) -> None:
        append_manifest(self.out, command, self.cfg.hash, [str(p.relative_to(self.out)) for p in outputs])

    def norm_config(self) -> NormalizeConfig:
        if self._norm is None:
            sw_path = self.cfg.optional("corpus", "stopwords")
            sw = read_stopwords(sw_path) if sw_path else default_stopwords()
            self._norm = NormalizeConfig(stopwords=sw, minc=self.cfg["corpus"]["minc"])
        return self._norm

    def corpus(self) -> Corpus:
        if self._corpus is None:
            path = self.need(TOKENS, "ingest")
            tagged = read_header(path).get("format") == "tagged"
            docs: dict[str, list[Token]] = {}
            for lineno, row in read_tsv(path, ncols=5):
                try:
                    pos = int(row[1])
                except ValueError:
                    raise DataError(f"{path}:{lineno}: bad position") from None
                docs.setdefault(row[0], []).append(Token(row[2], row[3] or None, row[4] or None, pos))
            self._corpus = Corpus.from_documents([Document(d, t) for d, t in docs.items()], self.norm_config(), tagged)
        return self._corpus

    def candidates(self):
        if self._cs is None:
            self._cs = read_candidates(self.need(CANDIDATES, "extract"), self.need(OCCURRENCES, "extract"))
            self.corpus().ctf = {t.canonical: t.tf_total for t in self._cs}
        return self._cs

    def base_lists(self) -> list[ScoredList]:
        d = self.out / BASE_DIR
        names = [n for n in self.cfg["scorers"]["names"] if (d / f"{n}.tsv").exists()]
        if not names:
            raise DataError(f"no base score lists in {d}; run `semrerank score` first")
        return [ScoredList.read(d / f"{n}.tsv", n) for n in names]

    def pagerank_params(self) -> PageRankParams:
        p = self.cfg["pagerank"]
        return PageRankParams(p["damping"], p["tol"], p["max_iter"])

    # -- stages -------------------------------------------------------------

    def ingest(self) -> list[Path]:
        root = self.cfg.require("corpus", "path")
        fmt = self.cfg["corpus"]["format"]
        corpus = load_corpus(root, fmt, self.norm_config(), self.threads)
        digest = corpus_digest(root, ".txt" if fmt == "plain" else ".tsv")
        head = self.header("ingest", corpus=digest, format=fmt)
        rows = [
            f"{d.id}\t{t.position}\t{t.surface}\t{t.norm or ''}\t{t.pos or ''}"
            for d in corpus.docs
            for t in d.tokens
        ]
        tokens = self.out / TOKENS
        atomic_write(tokens, head + "\n".join(rows) + "\n")
        stats = self.out / WORD_STATS
        lines = [f"{w}\t{corpus.tf[w]}\t{corpus.df[w]}" for w in sorted(corpus.tf)]
        atomic_write(stats, head + "\n".join(lines) + ("\n" if lines else ""))
        self._corpus = None
        log.info("ingested %d documents, %d words", corpus.n_docs, corpus.n_words)
        return [tokens, stats]

    def extract(self) -> list[Path]:
        corpus = self.corpus()
        e = self.cfg["extraction"]
        patterns: tuple[str, ...] = ()
        if e["mode"] == "pos-pattern":
            patterns = read_patterns(self.cfg.optional("extraction", "patterns"))
        ecfg = ExtractionConfig(e["mode"], e["minc"], e["maxc"], e["minw"], e["maxw"], patterns, e["min_freq"])
        cs = extract_candidates(corpus, ecfg)
        if not len(cs):
            raise DataError("no candidate terms extracted")
        out, occ = self.out / CANDIDATES, self.out / OCCURRENCES
        write_candidates(cs, out, occ, self.header("extract"))
        self._cs = None
        log.info("extracted %d candidates", len(cs))
        return [out, occ]

    def embed(self) -> list[Path]:
        vectors = self.cfg.optional("embedding", "vectors")
        if vectors is not None:
            model = load_embeddings(vectors)
        else:
            e = self.cfg["embedding"]
            model = train_embeddings(
                self.corpus(), None, dim=e["dim"], window=e["window"], epochs=e["epochs"],
                neg_samples=e["negative"], rng_seed=self.cfg["seed"], lr=e["lr"],
            )
        out = self.out / EMBEDDINGS
        model.save(out)
        meta = self.out / EMBEDDINGS_META
        atomic_write(meta, self.header("embed", source="file" if vectors else "trained"))
        return [out, meta]

    def relindex(self) -> list[Path]:
        model = load_embeddings(self.need(EMBEDDINGS, "embed"))
        cs = self.candidates()
        r = self.cfg["relatedness"]
        vocab = {w for t in cs for w in t.words}
        idx = build_relrank(model, vocab, r["rel_min"], r["rel_top"], self.threads)
        out = self.out / RELINDEX
        idx.write(out, self.header("relindex"))
        return [out]

    def score(self) -> list[Path]:
        corpus, cs = self.corpus(), self.candidates()
        names = self.cfg["scorers"]["names"]
        params = self.cfg["scorers"]["params"]
        ref = None
        if any(n in NEEDS_REFERENCE for n in names):
            ref = RefCorpusStats.from_tsv(self.cfg.optional("scorers", "reference"), self.norm_config())
        lists = {}
        for n in names:
            if n == "vote":
                continue
            try:
                lists[n] = run_scorer(n, corpus, cs, ref, **params.get(n, {}))
            except TypeError as exc:
                raise ConfigError(f"scorers.params.{n}: {exc}") from exc
        if "vote" in names:
            lists["vote"] = vote([lists[n] for n in names if n != "vote"])
        outs = []
        for n in names:
            p = self.out / BASE_DIR / f"{n}.tsv"
            lists[n].write(p, self.header("score", method=n))
            outs.append(p)
        return outs

    def seeds_propose(self) -> list[Path]:
        out = self.out / PROPOSAL
        write_proposal(self.candidates(), self.cfg["seeds"]["z"], out, self.header("seeds-propose"))
        log.info("wrote %s; fill the label column with 1/0 and run `semrerank seeds-build`", out)
        return [out]

    def seeds_build(self, annotations: Path | None = None) -> list[Path]:
        s = self.cfg["seeds"]
        cs = self.candidates()
        if s["mode"] == "unsupervised":
            seeds = unsupervised_seeds(cs, s["z"])
        else:
            path = annotations or self.cfg.path("seeds", "annotations")
            if path is None:
                self.need(PROPOSAL, "seeds-propose")
                raise ConfigError("verified seeds need an annotation file (seeds.annotations or --annotations)")
            if not path.exists():
                raise ConfigError(f"annotation file not found: {path}")
            seeds = propose_and_verify(cs, s["z"], path)
        out = self.out / SEEDS
        seeds.write(out, self.header("seeds-build", mode=s["mode"]))
        log.info("%d seed terms (%s)", len(seeds), s["mode"])
        return [out]

    def _seeds(self) -> SeedSet:
        seeds = SeedSet.read(self.need(SEEDS, "seeds-build"))
        if not seeds.terms:
            log.warning("seed set is empty; every graph uses uniform personalization")
        return seeds

    def smi(self) -> tuple[list[Path], bool]:
        idx = RelatednessIndex.read(self.need(RELINDEX, "relindex"))
        cs, seeds = self.candidates(), self._seeds()
        r = self.cfg["relatedness"]
        smi = compute_smi(self.corpus(), cs, idx, seeds, self.pagerank_params(), r["rel_min"], r["rel_top"], self.threads)
        out = self.out / SMI
        smi.write(out, self.header("smi"))
        return [out], bool(smi.unconverged)

    def _revise(self, importance: SemanticImportance, folder: str, tagger) -> list[Path]:
        cs = self.candidates()
        outs = []
        zero = all(v == 0 for v in importance.scores.values())
        for base in self.base_lists():
            rev = tagger(base, importance, cs)
            check_bounds(rev)
            if zero and rev.scored.canonicals() != base.canonicals():
                raise AssertionError(f"{rev.method}: zero importance changed the base order")
            p = self.out / folder / f"{base.method}.tsv"
            rev.write(p, self.header(folder, method=rev.method))
            outs.append(p)
        return outs

    def rerank(self) -> list[Path]:
        smi = SemanticImportance.read(self.need(SMI, "smi"))
        return self._revise(smi, SEM_DIR, revise_scores)

    def textrank(self) -> tuple[list[Path], bool]:
        cs, seeds = self.candidates(), self._seeds()
        ctr = ctextrank(self.corpus(), cs, seeds, self.cfg["textrank"]["window"], self.pagerank_params(), self.threads)
        out = self.out / CTEXTRANK
        ctr.write(out, self.header("textrank"))
        return [out, *self._revise(ctr, TR_DIR, revise_with_ctextrank)], bool(ctr.unconverged)

    def evaluate(self) -> list[Path]:
        gt: GroundTruth = load_ground_truth(self.cfg.require("evaluation", "ground_truth"), self.norm_config())
        ks = tuple(self.cfg["evaluation"]["ks"])
        cs = self.candidates()
        recoverable = set(cs.canonicals()) & gt.terms
        rare = rare_terms(recoverable, self.corpus())
        outs = []
        for base in self.base_lists():
            report = evaluate(base, gt, ks)
            p = self.out / "eval" / f"{base.method}.tsv"
            report.write(p, self.header("eval", method=base.method))
            outs.append(p)
            for folder, tag in ((SEM_DIR, "semrerank"), (TR_DIR, "adp-textrank")):
                rp = self.out / folder / f"{base.method}.tsv"
                if not rp.exists():
                    continue
                rev = RevisedList.read(rp, f"{tag}({base.method})").scored
                stem = f"{tag}__{base.method}"
                p = self.out / "eval" / f"{stem}.tsv"
                evaluate(rev, gt, ks).write(p, self.header("eval", method=rev.method))
                outs.append(p)
                for label, terms in (("", recoverable), ("__rare", rare)):
                    mv = movement(base, rev, terms)
                    hp = self.out / "movement" / f"{stem}{label}.tsv"
                    mv.write_histogram(hp, self.header("eval", method=rev.method, terms=len(terms)))
                    tp = self.out / "movement" / f"{stem}{label}__terms.tsv"
                    mv.write_terms(tp, self.header("eval", method=rev.method, terms=len(terms)))
                    outs += [hp, tp]
        return outs

    def compare(self) -> list[Path]:
        folder = self.out / "eval"
        files = sorted(folder.glob("*.tsv")) if folder.is_dir() else []
        if not files:
            raise DataError(f"no evaluation reports in {folder}; run `semrerank eval` first")
        hashes = {read_header(f).get("corpus") for f in files}
        if len(hashes) != 1:
            raise DataError(f"evaluation reports come from different corpora: {sorted(map(str, hashes))}")
        reports = [EvalReport.read(f) for f in files]
        out = self.out / COMPARISON
        atomic_write(out, self.header("compare", corpus=hashes.pop()) + comparison_csv(reports))
        return [out]

    def diagnose(self) -> list[Path]:
        model = load_embeddings(self.need(EMBEDDINGS, "embed"))
        vocab = {w for t in self.candidates() for w in t.words}
        rows = pswa_stats(model, vocab, threads=self.threads)
        for a, b in zip(rows, rows[1:]):
            if b.isolated_fraction > a.isolated_fraction:
                raise AssertionError("isolated fraction grew as the threshold dropped")
        out = self.out / PSWA
        write_pswa(rows, out, self.header("diagnose"))
        return [out]


def _guard(fn):
    """Map library errors to exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except DataError as exc:
            click.echo(f"data error: {exc}", err=True)
            sys.exit(EXIT_DATA)
        except ConvergenceWarning as exc:
            click.echo(f"warning: {exc}", err=True)
            sys.exit(EXIT_CONVERGENCE)

    return wrapper


@click.group()
@click.option("-c", "--config", "config_path", required=True, type=click.Path(dir_okay=False), help="YAML run configuration.")
@click.option("--threads", default=1, show_default=True, type=click.IntRange(min=1), help="Worker threads for parallel stages.")
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
@click.pass_context
@_guard
def main(ctx: click.Context, config_path: str, threads: int, verbose: bool) -> None:
    """Re-rank term-extraction output with embedding-based word graphs."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    ctx.obj = Pipeline(load_config(config_path), threads)


def _stage(name: str, method: str, help_text: str):
    @main.command(name=name, help=help_text)
    @click.pass_obj
    @_guard
    def cmd(pipe: Pipeline) -> None:
        result = getattr(pipe, method)()
        outs, warn = result if isinstance(result, tuple) else (result, False)
        pipe.record(name, outs)
        if warn:
            raise ConvergenceWarning("PageRank did not converge on some documents; outputs were written")

    return cmd


_stage("ingest", "ingest", "Tokenize and normalize the corpus.")
_stage("extract", "extract", "Extract candidate terms.")
_stage("embed", "embed", "Train (or import) word vectors.")
_stage("relindex", "relindex", "Build the top-k relatedness index over candidate words.")
_stage("score", "score", "Run the base scorers.")
_stage("seeds-propose", "seeds_propose", "Write the top-z frequent candidates for annotation.")
_stage("smi", "smi", "Compute corpus-level semantic importance of words.")
_stage("rerank", "rerank", "Revise every base list with semantic importance.")
_stage("textrank", "textrank", "Revise every base list with summed co-occurrence TextRank.")
_stage("eval", "evaluate", "Evaluate base and revised lists against the ground truth.")
_stage("compare", "compare", "Join evaluation reports into one CSV.")
_stage("diagnose", "diagnose", "Report strongly-related-word statistics of the embeddings.")


@main.command("seeds-build")
@click.option("--annotations", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Labelled proposal file.")
@click.pass_obj
@_guard
def seeds_build_cmd(pipe: Pipeline, annotations: Path | None) -> None:
    """Build the seed set (verified labels or unsupervised top-z)."""
    pipe.record("seeds-build", pipe.seeds_build(annotations))


@main.command("run")
@click.pass_obj
@_guard
def run_cmd(pipe: Pipeline) -> None:
    """Run every stage in order (seeds must be annotated or unsupervised)."""
    warn = False
    steps = ["ingest", "extract", "embed", "relindex", "score", "seeds_propose", "seeds_build", "smi", "rerank", "textrank"]
    if pipe.cfg["evaluation"]["ground_truth"] is not None:
        steps += ["evaluate", "compare"]
    steps.append("diagnose")
    for step in steps:
        result = getattr(pipe, step)()
        outs, w = result if isinstance(result, tuple) else (result, False)
        warn = warn or w
        pipe.record(step.replace("_", "-").replace("evaluate", "eval"), outs)
    if warn:
        raise ConvergenceWarning("PageRank did not converge on some documents; outputs were written")


if __name__ == "__main__":
    main()
