"""Training and evaluation of :class:`~mvgt.model.MVGT`."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import numkit as nk
from ..eegsig import SegmentBatch
from ..errors import ConfigError, DataError, NumericError
from ..model import MVGT, ModelConfig
from ..spatial import ElectrodeLayout, RegionScheme
from .metrics import EvalReport, cross_entropy

log = logging.getLogger(__name__)


class StopTraining(Exception):
    """Raise from an ``on_epoch`` callback to end training after that epoch."""


@dataclass
class TrainSpec:
    batch_size: int = 32
    lr: float = 1e-3
    epochs: int = 30
    seed: int = 0
    weight_decay: float = 0.1
    betas: tuple[float, float] = (0.9, 0.999)

    def __post_init__(self):
        if self.batch_size < 1 or self.epochs < 0:
            raise ConfigError("batch_size must be >= 1 and epochs >= 0")
        if self.lr < 0 or self.weight_decay < 0:
            raise ConfigError("lr and weight_decay must be non-negative")
        if self.lr > 0 and not 3e-5 <= self.lr <= 3e-3:
            log.warning("lr=%g is outside the usual 3e-5..3e-3 range", self.lr)


@dataclass
class TrainResult:
    model: MVGT
    report: EvalReport
    train_ids: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    test_ids: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))


def split_by_trial(batch: SegmentBatch, test_fraction: float = 0.4):
    """Per class, the last ``ceil(test_fraction * trials)`` trials form the test split.

    Returns ``(train, test)``; no trial contributes to both.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError("test_fraction must lie strictly between 0 and 1")
    test_trials = set()
    for c in np.unique(batch.labels):
        trials = list(dict.fromkeys(batch.trial_ids[batch.labels == c].tolist()))
        if len(trials) < 2:
            raise DataError(f"class {c} has {len(trials)} trial(s); need two to split")
        k = min(len(trials) - 1, max(1, math.ceil(test_fraction * len(trials))))
        test_trials.update(trials[-k:])
    mask = np.isin(batch.trial_ids, sorted(test_trials))
    return _take(batch, ~mask), _take(batch, mask)


def _take(batch: SegmentBatch, mask) -> SegmentBatch:
    return SegmentBatch(batch.segments[mask], batch.T, batch.stride, batch.labels[mask],
                        batch.trial_ids[mask])


def evaluate(model: MVGT, X, y, batch_size: int = 64) -> EvalReport:
    logits = model.predict_logits(X, batch_size)
    return EvalReport.from_logits(logits, y, model.config.n_classes)


def fit(model: MVGT, X: np.ndarray, y: np.ndarray, spec: TrainSpec,
        X_test=None, y_test=None,
        on_epoch: Callable[[int, float, float | None], None] | None = None):
    """Mini-batch AdamW on cross-entropy. Returns ``(loss_curve, test_curve)``."""
    if len(X) == 0:
        raise DataError("empty training split")
    if X_test is not None and len(X_test) == 0:
        raise DataError("empty test split")
    opt = nk.AdamW(model.parameters(), lr=spec.lr, betas=spec.betas,
                   weight_decay=spec.weight_decay)
    rng = np.random.default_rng([spec.seed, 2])
    losses, accs = [], []
    for epoch in range(1, spec.epochs + 1):
        model.train()
        order = rng.permutation(len(X))
        total, seen = 0.0, 0
        for start in range(0, len(X), spec.batch_size):
            idx = order[start:start + spec.batch_size]
            opt.zero_grad()
            try:
                loss = cross_entropy(model(X[idx]).logits, y[idx])
                value = loss.item()
                if not math.isfinite(value):
                    raise NumericError(f"non-finite loss {value}")
            except NumericError as exc:
                nk.get_tape().clear()
                raise NumericError(f"epoch {epoch}, batch offset {start}: {exc}") from exc
            loss.backward()
            opt.step()
            total += value * len(idx)
            seen += len(idx)
        losses.append(total / seen)
        acc = None
        if X_test is not None:
            acc = evaluate(model, X_test, y_test).accuracy
            accs.append(acc)
        log.info("epoch %d loss %.4f test_acc %s", epoch, losses[-1], acc)
        if on_epoch is not None:
            try:
                on_epoch(epoch, losses[-1], acc)
            except StopTraining:
                break
    model.eval()
    return losses, accs


def train(dataset: SegmentBatch, spec: TrainSpec, config: ModelConfig,
          layout: ElectrodeLayout, scheme: RegionScheme, test_fraction: float = 0.4,
          on_epoch=None) -> TrainResult:
    """Split by trial, train from a seeded initialisation and evaluate on the test trials."""
    train_set, test_set = split_by_trial(dataset, test_fraction)
    if len(train_set) == 0 or len(test_set) == 0:
        raise DataError("empty train or test split")
    model = MVGT(config, layout, scheme, seed=spec.seed)
    losses, accs = fit(model, train_set.segments, train_set.labels, spec,
                       test_set.segments, test_set.labels, on_epoch)
    report = evaluate(model, test_set.segments, test_set.labels)
    report.loss_curve, report.test_curve = losses, accs
    return TrainResult(model, report, np.unique(train_set.trial_ids), np.unique(test_set.trial_ids))
