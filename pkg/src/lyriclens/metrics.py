"""Evaluation metrics: confusion matrices, accuracy, precision/recall/F1, RMSE.

Every other module routes its metric computations through here so that
classification reports and regression scores are produced by exactly one
implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "ConfusionMatrix",
    "PerClassMetrics",
    "ClassificationReport",
    "confusion",
    "accuracy",
    "precision_recall_f1",
    "rmse",
    "classification_report",
]


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts matrix with rows = true class, columns = predicted class."""

    classes: tuple
    counts: np.ndarray  # (C, C) int64

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def support(self, cls) -> int:
        """Number of evaluated examples whose true label is `cls`."""
        return int(self.counts[self._index(cls)].sum())

    def _index(self, cls) -> int:
        try:
            return self.classes.index(cls)
        except ValueError:
            raise ValueError(f"class {cls!r} not among {list(self.classes)}") from None


def confusion(y_true: Sequence, y_pred: Sequence, classes: Sequence) -> ConfusionMatrix:
    """Count (true, predicted) pairs into a C x C matrix.

    Raises if the label lists differ in length or contain a label outside
    `classes`.
    """
    if len(y_true) != len(y_pred):
        raise ValueError(f"length mismatch: {len(y_true)} true vs {len(y_pred)} predicted")
    classes = tuple(classes)
    index = {c: i for i, c in enumerate(classes)}
    if len(index) != len(classes):
        raise ValueError("classes contains duplicates")
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        if t not in index:
            raise ValueError(f"true label {t!r} not among classes {list(classes)}")
        if p not in index:
            raise ValueError(f"predicted label {p!r} not among classes {list(classes)}")
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(classes=classes, counts=counts)


def accuracy(cm: ConfusionMatrix) -> float:
    """Correctly labeled fraction: matrix trace over total count."""
    total = cm.total
    if total == 0:
        raise ValueError("cannot compute accuracy of an empty confusion matrix")
    return float(np.trace(cm.counts)) / total


@dataclass(frozen=True)
class PerClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int
    # True when a zero denominator forced any of the three values to 0.
    degenerate: bool = False


def precision_recall_f1(cm: ConfusionMatrix, cls) -> PerClassMetrics:
    """One-vs-rest precision, recall, and F1 for a single class.

    Zero-denominator convention: the affected metric is 0 and the result is
    flagged degenerate, keeping reports numeric.
    """
    i = cm._index(cls)
    tp = int(cm.counts[i, i])
    fp = int(cm.counts[:, i].sum()) - tp
    fn = int(cm.counts[i, :].sum()) - tp
    degenerate = False
    if tp + fp == 0:
        precision, degenerate = 0.0, True
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall, degenerate = 0.0, True
    else:
        recall = tp / (tp + fn)
    if precision + recall == 0:
        f1, degenerate = 0.0, True
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return PerClassMetrics(precision, recall, f1, support=tp + fn, degenerate=degenerate)


def rmse(y_true: Sequence[float], y_pred: Sequence[float]) -> float:
    """Root mean squared error over paired values."""
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"shape mismatch: {y_true.shape} vs {y_pred.shape}")
    if y_true.size == 0:
        raise ValueError("cannot compute RMSE of empty input")
    residuals = y_true - y_pred
    return float(math.sqrt(float(np.mean(residuals * residuals))))


@dataclass
class ClassificationReport:
    """Per-class metrics plus accuracy and macro/weighted averages."""

    classes: tuple
    per_class: dict
    accuracy: float
    macro_avg: PerClassMetrics
    weighted_avg: PerClassMetrics
    confusion_matrix: ConfusionMatrix = field(repr=False)

    def to_dict(self) -> dict:
        """Full-precision structured form, JSON-ready."""
        return {
            "classes": list(self.classes),
            "per_class": {
                str(c): {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                    "degenerate": m.degenerate,
                }
                for c, m in self.per_class.items()
            },
            "accuracy": self.accuracy,
            "macro_avg": {
                "precision": self.macro_avg.precision,
                "recall": self.macro_avg.recall,
                "f1": self.macro_avg.f1,
            },
            "weighted_avg": {
                "precision": self.weighted_avg.precision,
                "recall": self.weighted_avg.recall,
                "f1": self.weighted_avg.f1,
            },
            "total_support": self.confusion_matrix.total,
            "confusion_matrix": self.confusion_matrix.counts.tolist(),
        }

    def to_text(self) -> str:
        """Fixed-width rendering with two decimal places."""
        name_w = max(12, max(len(str(c)) for c in self.classes) + 2)
        header = f"{'':<{name_w}}{'precision':>10}{'recall':>10}{'f1-score':>10}{'support':>10}"
        lines = [header, ""]
        for c in self.classes:
            m = self.per_class[c]
            lines.append(
                f"{str(c):<{name_w}}{m.precision:>10.2f}{m.recall:>10.2f}{m.f1:>10.2f}{m.support:>10d}"
            )
        total = self.confusion_matrix.total
        lines.append("")
        lines.append(f"{'accuracy':<{name_w}}{'':>10}{'':>10}{self.accuracy:>10.2f}{total:>10d}")
        for label, m in (("macro avg", self.macro_avg), ("weighted avg", self.weighted_avg)):
            lines.append(
                f"{label:<{name_w}}{m.precision:>10.2f}{m.recall:>10.2f}{m.f1:>10.2f}{total:>10d}"
            )
        return "\n".join(lines)


def classification_report(cm: ConfusionMatrix) -> ClassificationReport:
    """Assemble per-class metrics, accuracy, and macro/weighted averages.

    Weighted averages weight each class by its true-label support; macro
    averages are plain unweighted means.
    """
    total = cm.total
    if total == 0:
        raise ValueError("cannot report on an empty confusion matrix")
    per_class = {c: precision_recall_f1(cm, c) for c in cm.classes}
    n = len(cm.classes)
    macro = PerClassMetrics(
        precision=sum(m.precision for m in per_class.values()) / n,
        recall=sum(m.recall for m in per_class.values()) / n,
        f1=sum(m.f1 for m in per_class.values()) / n,
        support=total,
        degenerate=any(m.degenerate for m in per_class.values()),
    )
    weighted = PerClassMetrics(
        precision=sum(m.precision * m.support for m in per_class.values()) / total,
        recall=sum(m.recall * m.support for m in per_class.values()) / total,
        f1=sum(m.f1 * m.support for m in per_class.values()) / total,
        support=total,
        degenerate=any(m.degenerate for m in per_class.values()),
    )
    return ClassificationReport(
        classes=cm.classes,
        per_class=per_class,
        accuracy=accuracy(cm),
        macro_avg=macro,
        weighted_avg=weighted,
        confusion_matrix=cm,
    )
