"""Run configuration: YAML file, defaults, validation and hashing."""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import yaml

from .artifacts import sha256_text
from .errors import ConfigError

OUT_ENV = "SEMRERANK_OUT"

ALL_SCORERS = ("tfidf", "cvalue", "basic", "combobasic", "rake", "weirdness", "relevance", "glossex", "chisquare", "vote")

DEFAULTS: dict[str, Any] = {
    "seed": 1,
    "output_dir": "out",
    "corpus": {"path": None, "format": "plain", "stopwords": None, "minc": 2},
    "extraction": {"mode": "ngram", "minc": 2, "maxc": 40, "minw": 1, "maxw": 5, "patterns": None, "min_freq": 1},
    "scorers": {"names": list(ALL_SCORERS), "reference": None, "params": {}},
    "embedding": {"vectors": None, "dim": 100, "window": 3, "epochs": 15, "negative": 5, "lr": 0.025},
    "relatedness": {"rel_min": 0.5, "rel_top": 0.15},
    "seeds": {"z": 200, "mode": "verified", "annotations": None},
    "pagerank": {"damping": 0.85, "tol": 1e-10, "max_iter": 200},
    "textrank": {"window": 2},
    "evaluation": {"ground_truth": None, "ks": [50, 100, 500, 1000, 2000]},
}

_PATH_KEYS = [("corpus", "path"), ("corpus", "stopwords"), ("extraction", "patterns"), ("scorers", "reference"),
              ("embedding", "vectors"), ("seeds", "annotations"), ("evaluation", "ground_truth")]


def _merge(base: dict, extra: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if k not in base:
            raise ConfigError(f"unknown config key {where + k!r}")
        if isinstance(base[k], dict) and k != "params":
            if not isinstance(v, dict):
                raise ConfigError(f"config key {where + k!r} must be a mapping")
            out[k] = _merge(base[k], v, f"{where}{k}.")
        else:
            out[k] = v
    return out


@dataclass
class RunConfig:
    data: dict
    base_dir: Path
    source: Path | None = None

    def __getitem__(self, key: str) -> Any:
        return self.data[key]

    def path(self, section: str, key: str) -> Path | None:
        v = self.data[section][key]
        if v is None:
            return None
        p = Path(v)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def output_dir(self) -> Path:
        env = os.environ.get(OUT_ENV)
        if env:
            return Path(env)
        p = Path(self.data["output_dir"])
        return p if p.is_absolute() else self.base_dir / p

    @property
    def hash(self) -> str:
        """Digest of every setting that can change an artifact (not the output location)."""
        d = {k: v for k, v in self.data.items() if k != "output_dir"}
        return sha256_text(json.dumps(d, sort_keys=True))[:16]

    def require(self, section: str, key: str) -> Path:
        p = self.path(section, key)
        if p is None:
            raise ConfigError(f"config key {section}.{key} is required for this command")
        if not p.exists():
            raise ConfigError(f"{section}.{key}: path does not exist: {p}")
        return p

    def optional(self, section: str, key: str) -> Path | None:
        p = self.path(section, key)
        if p is not None and not p.exists():
            raise ConfigError(f"{section}.{key}: path does not exist: {p}")
        return p


def _validate(d: dict) -> None:
    def num(section, key, lo=None, hi=None, integer=False, lo_open=False):
        v = d[section][key]
        ok_type = isinstance(v, int) if integer else isinstance(v, (int, float))
        if isinstance(v, bool) or not ok_type:
            raise ConfigError(f"{section}.{key} must be {'an integer' if integer else 'a number'}")
        if lo is not None and (v <= lo if lo_open else v < lo):
            raise ConfigError(f"{section}.{key} out of range: {v}")
        if hi is not None and v > hi:
            raise ConfigError(f"{section}.{key} out of range: {v}")

    if not isinstance(d["seed"], int):
        raise ConfigError("seed must be an integer")
    if d["corpus"]["format"] not in ("plain", "tagged"):
        raise ConfigError("corpus.format must be 'plain' or 'tagged'")
    num("corpus", "minc", 1, integer=True)
    if d["extraction"]["mode"] not in ("ngram", "pos-pattern"):
        raise ConfigError("extraction.mode must be 'ngram' or 'pos-pattern'")
    for k in ("minc", "minw", "maxw", "min_freq"):
        num("extraction", k, 1, integer=True)
    if d["extraction"]["maxc"] is not None:
        num("extraction", "maxc", 1, integer=True)
    names = d["scorers"]["names"]
    if not isinstance(names, list) or not names:
        raise ConfigError("scorers.names must be a non-empty list")
    bad = [n for n in names if n not in ALL_SCORERS]
    if bad:
        raise ConfigError(f"unknown scorers: {bad}")
    if names == ["vote"]:
        raise ConfigError("vote needs at least one other scorer")
    if not isinstance(d["scorers"]["params"], dict):
        raise ConfigError("scorers.params must be a mapping")
    for k in ("dim", "window", "epochs", "negative"):
        num("embedding", k, 1, integer=True)
    num("embedding", "lr", 0, lo_open=True)
    num("relatedness", "rel_min", -1, 1)
    num("relatedness", "rel_top", 0, 1, lo_open=True)
    num("seeds", "z", 1, integer=True)
    if d["seeds"]["mode"] not in ("verified", "unsupervised"):
        raise ConfigError("seeds.mode must be 'verified' or 'unsupervised'")
    num("pagerank", "damping", 0, 1, lo_open=True)
    if d["pagerank"]["damping"] >= 1:
        raise ConfigError("pagerank.damping must be < 1")
    num("pagerank", "tol", 0, lo_open=True)
    num("pagerank", "max_iter", 1, integer=True)
    num("textrank", "window", 2, integer=True)
    ks = d["evaluation"]["ks"]
    if not isinstance(ks, list) or not ks or any(not isinstance(k, int) or k < 1 for k in ks):
        raise ConfigError("evaluation.ks must be a list of positive integers")


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = yaml.safe_load(p.read_text("utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{p}: invalid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{p}: top level must be a mapping")
    return from_dict(raw, p.resolve().parent, p)


def from_dict(raw: dict, base_dir: Path, source: Path | None = None) -> RunConfig:
    data = _merge(DEFAULTS, raw)
    _validate(data)
    return RunConfig(data, Path(base_dir), source)
