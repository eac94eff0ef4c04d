"""File artifacts: atomic writes, provenance headers, TSV parsing, manifest."""

from __future__ import annotations

import hashlib
import json
import os
import time
from pathlib import Path
from typing import Iterator

from .errors import DataError

PARTIAL_SUFFIX = ".partial"


def atomic_write(path: str | Path, text: str) -> None:
    """Write ``text`` to ``path`` via a ``.partial`` sibling and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + PARTIAL_SUFFIX)
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def make_header(**fields) -> str:
    """A single ``# key=value ...`` provenance line (keys sorted)."""
    parts = [f"{k}={fields[k]}" for k in sorted(fields) if fields[k] is not None]
    return "# " + " ".join(parts) + "\n"


def read_header(path: str | Path) -> dict[str, str]:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    if not first.startswith("# "):
        return {}
    out = {}
    for part in first[2:].split():
        k, _, v = part.partition("=")
        out[k] = v
    return out


def read_tsv(path: str | Path, ncols: int | None = None, min_cols: int | None = None) -> Iterator[tuple[int, list[str]]]:
    """Yield ``(line_number, fields)`` for each non-comment, non-blank row."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"missing file: {path}")
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            row = line.split("\t")
            if ncols is not None and len(row) != ncols:
                raise DataError(f"{path}:{lineno}: expected {ncols} columns, got {len(row)}")
            if min_cols is not None and len(row) < min_cols:
                raise DataError(f"{path}:{lineno}: expected at least {min_cols} columns")
            yield lineno, row


def fmt_float(x: float) -> str:
    """Shortest round-trip representation; stable across runs."""
    return repr(float(x))


def append_manifest(out_dir: str | Path, command: str, config_hash: str, outputs: list[str]) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entry = {
        "command": command,
        "config_hash": config_hash,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "outputs": outputs,
    }
    with open(out_dir / "manifest.jsonl", "a", encoding="utf-8") as fh:
        fh.write(json.dumps(entry, sort_keys=True) + "\n")
