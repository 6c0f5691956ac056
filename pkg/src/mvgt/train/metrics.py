"""Loss and classification metrics."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import numkit as nk
from ..errors import DataError


def cross_entropy(logits: nk.Tensor, labels) -> nk.Tensor:
    """Mean negative log-likelihood of the true class (log-sum-exp stabilised)."""
    labels = np.asarray(labels)
    n, C = logits.shape
    if labels.shape != (n,):
        raise DataError(f"{labels.shape} labels for {n} logit rows")
    bad = np.nonzero((labels < 0) | (labels >= C))[0]
    if bad.size:
        raise DataError(f"label {labels[bad[0]]} at index {bad[0]} outside [0, {C})")
    onehot = np.zeros((n, C))
    onehot[np.arange(n), labels] = 1.0
    return -(nk.log_softmax(logits) * nk.Tensor(onehot)).sum() * (1.0 / n)


def predict_labels(logits: np.ndarray) -> np.ndarray:
    # np.argmax returns the first maximum, i.e. ties go to the lowest class index
    return np.argmax(np.asarray(logits), axis=-1)


def confusion(logits: np.ndarray, labels, n_classes: int | None = None) -> np.ndarray:
    """Counts with rows = true class and columns = predicted class."""
    logits = np.asarray(logits)
    labels = np.asarray(labels, dtype=np.int64)
    C = logits.shape[-1] if n_classes is None else n_classes
    cm = np.zeros((C, C), dtype=np.int64)
    np.add.at(cm, (labels, predict_labels(logits)), 1)
    return cm


@dataclass
class EvalReport:
    accuracy: float
    per_class_accuracy: list[float]
    confusion: np.ndarray
    loss_curve: list[float] = field(default_factory=list)
    test_curve: list[float] = field(default_factory=list)

    @classmethod
    def from_logits(cls, logits, labels, n_classes: int, **kw) -> "EvalReport":
        cm = confusion(logits, labels, n_classes)
        total = cm.sum()
        acc = float(np.trace(cm) / total) if total else float("nan")
        rows = cm.sum(axis=1)
        per_class = [float(cm[i, i] / rows[i]) if rows[i] else float("nan") for i in range(n_classes)]
        return cls(acc, per_class, cm, **kw)

    def write_confusion_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            C = self.confusion.shape[0]
            w.writerow(["true\\pred"] + [str(c) for c in range(C)])
            for i, row in enumerate(self.confusion):
                w.writerow([str(i)] + [str(int(v)) for v in row])

    def write_curve_csv(self, path) -> None:
        write_curve_csv(path, self.loss_curve, self.test_curve)

    def write_summary_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["metric", "value"])
            w.writerow(["accuracy", repr(self.accuracy)])
            for c, a in enumerate(self.per_class_accuracy):
                w.writerow([f"class_{c}_accuracy", repr(a)])
            w.writerow(["n_samples", int(self.confusion.sum())])


def write_curve_csv(path, losses, accs) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "train_loss", "test_acc"])
        for e, loss in enumerate(losses, start=1):
            acc = accs[e - 1] if e - 1 < len(accs) else ""
            w.writerow([e, repr(float(loss)), repr(float(acc)) if acc != "" else ""])
