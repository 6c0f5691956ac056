"""Averaged attention maps and top-k channel-pair export."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import numkit as nk
from .errors import DataError, ParameterError
from .model import MVGT

EXPORT_COLUMNS = ["recycle_iter", "layer", "head", "src_channel", "dst_channel", "weight"]


@dataclass(frozen=True)
class AttentionExportRow:
    recycle_iter: int
    layer: int
    head: int
    src_channel: str
    dst_channel: str
    weight: float


def token_names(model: MVGT) -> list[str]:
    if model.config.use_inverted:
        return list(model.layout.names)
    return [f"t{i}" for i in range(model.config.T)]


def mean_final_attention(model: MVGT, X: np.ndarray, batch_size: int = 32) -> np.ndarray:
    """Mean post-softmax weights of the last recycle pass, ``[L, M, tokens, tokens]``."""
    if len(X) == 0:
        raise DataError("no segments to average attention over")
    total = None
    was_training = model.training
    model.eval()
    try:
        with nk.no_grad():
            for i in range(0, len(X), batch_size):
                maps = model.forward(X[i:i + batch_size], return_attention=True).attention
                part = maps[-1].sum(axis=1)
                total = part if total is None else total + part
    finally:
        model.train(was_training)
    return total / len(X)


def top_pairs(weights: np.ndarray, names, topk: int, recycle_iter: int) -> list[AttentionExportRow]:
    """Top ``topk`` (src, dst) pairs per (layer, head), ordered by weight then names."""
    L, M, n, _ = weights.shape
    if not 1 <= topk <= n * n:
        raise ParameterError(f"topk must lie in [1, {n * n}] for {n} tokens, got {topk}")
    rows = []
    for layer in range(L):
        for head in range(M):
            w = weights[layer, head]
            pairs = sorted(((-w[i, j], names[i], names[j]) for i in range(n) for j in range(n)))
            rows += [AttentionExportRow(recycle_iter, layer + 1, head + 1, src, dst, float(-neg))
                     for neg, src, dst in pairs[:topk]]
    return rows


def export_attention(model: MVGT, X: np.ndarray, topk: int, path) -> list[AttentionExportRow]:
    """Write the top-k table for the final recycle pass to ``path``.

    ``recycle_iter``, ``layer`` and ``head`` are 1-based in the output.
    """
    names = token_names(model)
    n = len(names)
    if not 1 <= topk <= n * n:
        raise ParameterError(f"topk must lie in [1, {n * n}] for {n} tokens, got {topk}")
    rows = top_pairs(mean_final_attention(model, X), names, topk, model.config.R)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(EXPORT_COLUMNS)
        for r in rows:
            w.writerow([r.recycle_iter, r.layer, r.head, r.src_channel, r.dst_channel, repr(r.weight)])
    return rows
