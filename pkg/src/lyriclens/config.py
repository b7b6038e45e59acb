"""Pipeline configuration: one JSON document drives every CLI step.

Precedence: built-in defaults < config file < environment (MODEL_DIR,
DATA_DIR) < explicit CLI flags.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .corpus import BaseFilterConfig, CurationConfig

DATA_DIR_ENV = "DATA_DIR"


@dataclass
class PipelineConfig:
    seed: int = 0
    corpus: str | None = None
    out: str = "runs"
    model_dir: str | None = None  # encoder checkpoint; falls back to $MODEL_DIR
    schema: dict = field(default_factory=dict)  # logical field -> CSV column
    base_filters: dict = field(default_factory=dict)
    curation: dict = field(default_factory=dict)
    split_ratios: list = field(default_factory=lambda: [0.8, 0.1, 0.1])
    eda_min_words: int = 100  # word floor applied before the EDA report
    eda_top_k: int = 20
    train: dict = field(default_factory=dict)  # TrainConfig overrides
    regressors: list = field(default_factory=list)  # [{kind, hyperparams, seed}]
    max_len: int = 256
    batch_size: int = 32  # encoder batch size

    def curation_config(self) -> CurationConfig:
        return CurationConfig(**self.curation)

    def base_filter_config(self) -> BaseFilterConfig:
        cfg = dict(self.base_filters)
        if "drop_tags" in cfg:
            cfg["drop_tags"] = tuple(cfg["drop_tags"])
        return BaseFilterConfig(**cfg)

    def resolve_corpus(self, explicit: str | None = None) -> Path:
        """Corpus path from flag or config, searched under $DATA_DIR when relative."""
        raw = explicit or self.corpus
        if not raw:
            raise ValueError("no corpus path given (flag --corpus or config key 'corpus')")
        path = Path(raw)
        if path.exists() or path.is_absolute():
            return path
        data_dir = os.environ.get(DATA_DIR_ENV)
        if data_dir and (Path(data_dir) / path).exists():
            return Path(data_dir) / path
        return path

    def digest(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(path: str | Path | None = None, **overrides) -> PipelineConfig:
    data: dict = {}
    if path:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    known = set(PipelineConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return PipelineConfig(**data)
