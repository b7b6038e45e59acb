"""Fine-tuned classifiers for the genre (5-way) and success (binary) tasks.

The backbone transformer and a linear softmax head are trained end-to-end
with AdamW and cross-entropy on the [CLS] representation. Artifacts are
directories holding the weights, config, class order, metrics snapshot,
and per-epoch training log; they are immutable after save and safe for
concurrent read-only prediction.
"""

from __future__ import annotations

import copy
import hashlib
import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import torch
import torch.nn as nn

from . import __version__
from .corpus import CuratedDataset, clean_lyrics
from .metrics import ClassificationReport, classification_report, confusion

log = logging.getLogger(__name__)


class NoContentError(ValueError):
    """Lyrics were empty after cleaning."""


class TrainingDivergedError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-5
    weight_decay: float = 0.01
    batch_size: int = 16
    epochs: int = 3
    seed: int = 0
    max_len: int = 256
    dropout: float = 0.1
    early_stop_patience: int | None = 1  # None disables early stopping
    grad_accum_steps: int = 1

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")
        if self.batch_size < 1 or self.epochs < 0 or self.grad_accum_steps < 1:
            raise ValueError("batch_size/epochs/grad_accum_steps out of range")
        if self.early_stop_patience is not None and self.early_stop_patience < 1:
            raise ValueError("early_stop_patience must be None or >= 1")

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "weight_decay": self.weight_decay,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "seed": self.seed,
            "max_len": self.max_len,
            "dropout": self.dropout,
            "early_stop_patience": self.early_stop_patience,
            "grad_accum_steps": self.grad_accum_steps,
        }


@dataclass(frozen=True)
class Distribution:
    """Softmax output: probability per class plus the argmax label."""

    classes: tuple
    probs: dict
    label: str


def softmax_distribution(logits: Sequence[float], classes: Sequence[str]) -> Distribution:
    """Numerically stable softmax over raw scores."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max()
    e = np.exp(z)
    p = e / e.sum()
    classes = tuple(classes)
    probs = {c: float(v) for c, v in zip(classes, p)}
    label = classes[int(np.argmax(p))]
    return Distribution(classes=classes, probs=probs, label=label)


class LyricClassifier(nn.Module):
    """Backbone transformer + dropout + zero-initialized linear head on [CLS].

    Zero init makes the untrained head produce a uniform distribution, the
    natural 1/C baseline.
    """

    def __init__(self, backbone, n_classes: int, dropout: float = 0.1):
        super().__init__()
        self.backbone = backbone
        self.dropout = nn.Dropout(dropout)
        self.head = nn.Linear(backbone.config.dim, n_classes)
        nn.init.zeros_(self.head.weight)
        nn.init.zeros_(self.head.bias)

    def forward(self, input_ids, attention_mask):
        hidden = self.backbone(input_ids=input_ids, attention_mask=attention_mask).last_hidden_state
        return self.head(self.dropout(hidden[:, 0]))


@dataclass
class ClassifierArtifact:
    """A trained classifier with its tokenizer, config, and metrics."""

    task: str
    classes: tuple
    train_config: dict
    checkpoint_id: str
    model: LyricClassifier = field(repr=False)
    tokenizer: object = field(repr=False)
    metrics: dict = field(default_factory=dict)
    history: list = field(default_factory=list)
    artifact_id: str = ""

    def __post_init__(self):
        if not self.artifact_id:
            self.artifact_id = f"{self.task}-{self._weights_digest()}"

    def _weights_digest(self) -> str:
        h = hashlib.sha256()
        for name, tensor in sorted(self.model.state_dict().items()):
            h.update(name.encode())
            h.update(tensor.detach().cpu().numpy().tobytes())
        return h.hexdigest()[:12]

    @property
    def hidden_size(self) -> int:
        return int(self.model.backbone.config.dim)

    @property
    def max_len(self) -> int:
        return int(self.train_config.get("max_len", 256))

    def predict_batch(self, texts: Sequence[str], batch_size: int = 32) -> list[Distribution]:
        cleaned = []
        for text in texts:
            c = clean_lyrics(text)
            if not c:
                raise NoContentError("no content: lyrics empty after cleaning")
            cleaned.append(c)
        self.model.eval()
        out: list[Distribution] = []
        with torch.no_grad():
            for start in range(0, len(cleaned), batch_size):
                chunk = cleaned[start : start + batch_size]
                enc = self.tokenizer(
                    chunk, truncation=True, max_length=self.max_len, padding="max_length", return_tensors="pt"
                )
                logits = self.model(enc["input_ids"], enc["attention_mask"])
                for row in logits.cpu().numpy():
                    out.append(softmax_distribution(row, self.classes))
        return out

    def predict(self, lyrics: str) -> Distribution:
        return self.predict_batch([lyrics])[0]

    # -- persistence --------------------------------------------------------

    def save(self, out_dir: str | Path) -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        torch.save(self.model.state_dict(), out_dir / "weights.pt")
        self.model.backbone.config.save_pretrained(out_dir)
        self.tokenizer.save_pretrained(out_dir / "tokenizer")
        meta = {
            "artifact_id": self.artifact_id,
            "task": self.task,
            "classes": list(self.classes),
            "train_config": self.train_config,
            "checkpoint_id": self.checkpoint_id,
            "hidden_size": self.hidden_size,
            "package_version": __version__,
        }
        (out_dir / "artifact.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
        (out_dir / "metrics.json").write_text(json.dumps(self.metrics, indent=2) + "\n", encoding="utf-8")
        with open(out_dir / "training_log.jsonl", "w", encoding="utf-8") as f:
            for record in self.history:
                f.write(json.dumps(record) + "\n")
        return out_dir

    @classmethod
    def load(cls, artifact_dir: str | Path) -> "ClassifierArtifact":
        from transformers import AutoTokenizer, DistilBertConfig, DistilBertModel

        artifact_dir = Path(artifact_dir)
        meta_path = artifact_dir / "artifact.json"
        if not meta_path.exists():
            raise FileNotFoundError(f"not a classifier artifact: {artifact_dir}")
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        config = DistilBertConfig.from_pretrained(artifact_dir)
        model = LyricClassifier(
            DistilBertModel(config),
            n_classes=len(meta["classes"]),
            dropout=meta["train_config"].get("dropout", 0.1),
        )
        state = torch.load(artifact_dir / "weights.pt", map_location="cpu", weights_only=True)
        model.load_state_dict(state)
        model.eval()
        tokenizer = AutoTokenizer.from_pretrained(artifact_dir / "tokenizer")
        metrics = {}
        metrics_path = artifact_dir / "metrics.json"
        if metrics_path.exists():
            metrics = json.loads(metrics_path.read_text(encoding="utf-8"))
        history = []
        log_path = artifact_dir / "training_log.jsonl"
        if log_path.exists():
            history = [json.loads(line) for line in log_path.read_text(encoding="utf-8").splitlines() if line]
        return cls(
            task=meta["task"],
            classes=tuple(meta["classes"]),
            train_config=meta["train_config"],
            checkpoint_id=meta["checkpoint_id"],
            model=model,
            tokenizer=tokenizer,
            metrics=metrics,
            history=history,
            artifact_id=meta["artifact_id"],
        )


def _encode_split(tokenizer, texts: list[str], max_len: int):
    enc = tokenizer(texts, truncation=True, max_length=max_len, padding="max_length", return_tensors="pt")
    return enc["input_ids"], enc["attention_mask"]


def _eval_split(model, ids, mask, y, batch_size: int) -> tuple[float, float]:
    """Eval-mode mean loss and accuracy over one split."""
    lossf = nn.CrossEntropyLoss(reduction="sum")
    model.eval()
    total_loss, correct = 0.0, 0
    with torch.no_grad():
        for start in range(0, len(y), batch_size):
            sl = slice(start, start + batch_size)
            logits = model(ids[sl], mask[sl])
            total_loss += float(lossf(logits, y[sl]))
            correct += int((logits.argmax(dim=1) == y[sl]).sum())
    n = len(y)
    return total_loss / n, correct / n


def train_classifier(
    dataset: CuratedDataset,
    config: TrainConfig,
    model_dir: str | Path | None = None,
) -> ClassifierArtifact:
    """Fine-tune backbone + head on the train split; keep the best
    validation-loss epoch's weights.

    Per-epoch train/validation loss and accuracy are logged (evaluated in
    eval mode after the epoch). Raises on single-class datasets and on NaN
    loss.
    """
    from transformers import AutoModel, AutoTokenizer

    from .encoder import resolve_model_dir

    if dataset.task not in ("genre", "success"):
        raise ValueError(f"classifier tasks are genre/success, got {dataset.task!r}")
    if dataset.split is None:
        raise ValueError("dataset has no split assignment; run assign_splits first")

    classes = tuple(sorted(set(dataset.labels)))
    if len(classes) < 2:
        raise ValueError(f"need at least 2 classes to train, got {classes}")
    class_index = {c: i for i, c in enumerate(classes)}

    train_records, train_labels = dataset.subset("train")
    val_records, val_labels = dataset.subset("validation")
    if not train_records:
        raise ValueError("train split is empty")
    if len(set(train_labels)) < 2:
        raise ValueError("train split contains a single class")

    torch.manual_seed(config.seed)
    random.seed(config.seed)
    np.random.seed(config.seed % (2**32))

    resolved = resolve_model_dir(model_dir)
    tokenizer = AutoTokenizer.from_pretrained(resolved)
    backbone = AutoModel.from_pretrained(resolved)
    base_checkpoint_id = _base_checkpoint_digest(backbone)
    model = LyricClassifier(backbone, n_classes=len(classes), dropout=config.dropout)

    train_ids, train_mask = _encode_split(tokenizer, [r.lyrics for r in train_records], config.max_len)
    train_y = torch.tensor([class_index[l] for l in train_labels], dtype=torch.long)
    if val_records:
        val_ids, val_mask = _encode_split(tokenizer, [r.lyrics for r in val_records], config.max_len)
        val_y = torch.tensor([class_index[l] for l in val_labels], dtype=torch.long)
    else:
        val_ids = val_mask = val_y = None

    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate, weight_decay=config.weight_decay)
    lossf = nn.CrossEntropyLoss()
    generator = torch.Generator().manual_seed(config.seed)

    def snapshot() -> dict:
        return {k: v.detach().clone() for k, v in model.state_dict().items()}

    history: list[dict] = []
    best_state = snapshot()
    best_val_loss = float("inf")
    best_epoch = -1
    epochs_without_improvement = 0
    n_train = len(train_y)

    for epoch in range(config.epochs):
        model.train()
        perm = torch.randperm(n_train, generator=generator)
        optimizer.zero_grad()
        for step, start in enumerate(range(0, n_train, config.batch_size)):
            idx = perm[start : start + config.batch_size]
            logits = model(train_ids[idx], train_mask[idx])
            loss = lossf(logits, train_y[idx]) / config.grad_accum_steps
            if not torch.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch} step {step}: {float(loss)!r} "
                    f"(lr={config.learning_rate}, batch_size={config.batch_size})"
                )
            loss.backward()
            if (step + 1) % config.grad_accum_steps == 0:
                optimizer.step()
                optimizer.zero_grad()
        # flush a trailing partial accumulation window; no-op when grads are None
        optimizer.step()
        optimizer.zero_grad()

        train_loss, train_acc = _eval_split(model, train_ids, train_mask, train_y, config.batch_size)
        record = {"epoch": epoch, "train_loss": train_loss, "train_accuracy": train_acc}
        if val_y is not None:
            val_loss, val_acc = _eval_split(model, val_ids, val_mask, val_y, config.batch_size)
            record.update(val_loss=val_loss, val_accuracy=val_acc)
        else:
            val_loss = train_loss
        history.append(record)
        log.info("epoch %d: %s", epoch, record)

        if val_loss < best_val_loss:
            best_val_loss = val_loss
            best_state = snapshot()
            best_epoch = epoch
            epochs_without_improvement = 0
        else:
            epochs_without_improvement += 1
            if config.early_stop_patience is not None and epochs_without_improvement >= config.early_stop_patience:
                log.info("early stop at epoch %d (patience %d)", epoch, config.early_stop_patience)
                break

    model.load_state_dict(best_state)
    model.eval()

    final: dict = {"best_epoch": best_epoch, "epochs_run": len(history)}
    if val_y is not None and len(val_y) > 0:
        val_loss, val_acc = _eval_split(model, val_ids, val_mask, val_y, config.batch_size)
        final.update(val_loss=val_loss, val_accuracy=val_acc)
    if history:
        final["final_train_accuracy"] = history[-1]["train_accuracy"]

    return ClassifierArtifact(
        task=dataset.task,
        classes=classes,
        train_config=config.to_dict(),
        checkpoint_id=base_checkpoint_id,
        model=model,
        tokenizer=tokenizer,
        metrics=final,
        history=history,
    )


def _base_checkpoint_digest(backbone) -> str:
    h = hashlib.sha256()
    h.update(json.dumps(backbone.config.to_dict(), sort_keys=True, default=str).encode())
    for name, tensor in sorted(backbone.state_dict().items()):
        h.update(name.encode())
        h.update(tensor.detach().cpu().numpy().tobytes())
    return h.hexdigest()[:16]


def predict_probs(artifact: ClassifierArtifact, lyrics: str) -> Distribution:
    """Class probabilities for one lyric (cleaned first)."""
    return artifact.predict(lyrics)


@dataclass
class EvaluationResult:
    artifact_id: str
    task: str
    split: str
    report: ClassificationReport

    def to_dict(self) -> dict:
        return {
            "artifact_id": self.artifact_id,
            "task": self.task,
            "split": self.split,
            **self.report.to_dict(),
        }


def evaluate_classifier(
    artifact: ClassifierArtifact, dataset: CuratedDataset, split: str = "test"
) -> EvaluationResult:
    """Confusion matrix and classification report on one split."""
    records, labels = dataset.subset(split)
    if not records:
        raise ValueError(f"split {split!r} is empty")
    unknown = sorted({l for l in labels if l not in artifact.classes})
    if unknown:
        raise ValueError(f"labels {unknown} present in data but absent from artifact classes {list(artifact.classes)}")
    predictions = [d.label for d in artifact.predict_batch([r.lyrics for r in records])]
    cm = confusion(labels, predictions, artifact.classes)
    return EvaluationResult(
        artifact_id=artifact.artifact_id,
        task=artifact.task,
        split=split,
        report=classification_report(cm),
    )
