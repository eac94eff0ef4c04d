from __future__ import annotations

import shutil
from importlib import resources
from pathlib import Path

import pytest

from semrerank.corpus import Corpus, NormalizeConfig, make_document, tokenize


def toy_dir() -> Path:
    return Path(str(resources.files("semrerank.data").joinpath("toy")))


def corpus_from_texts(texts: dict[str, str], cfg: NormalizeConfig | None = None) -> Corpus:
    cfg = cfg or NormalizeConfig()
    docs = [make_document(k, tokenize(v), cfg) for k, v in sorted(texts.items())]
    return Corpus.from_documents(docs, cfg)


@pytest.fixture
def toy_copy(tmp_path: Path) -> Path:
    """A writable copy of the bundled toy project."""
    dst = tmp_path / "toy"
    shutil.copytree(toy_dir(), dst, ignore=shutil.ignore_patterns("out"))
    return dst


ACCEPTANCE_LINES: list[str] = []


def verdict(criterion: str, ok: bool, detail: str = "") -> None:
    """Record one acceptance line, then fail the test if the criterion does not hold."""
    line = f"{'PASS' if ok else 'FAIL'}  {criterion}" + (f"  [{detail}]" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
