"""Building blocks: GraphNorm, biased multi-head attention, Pre-LN block."""

from __future__ import annotations

import math

import numpy as np

from .. import numkit as nk
from ..errors import NumericError


class GraphNorm(nk.Module):
    """Per-feature normalisation over the token axis of each sample:
    ``(x - alpha * mean) / std * gamma + beta`` with learnable ``alpha``."""

    def __init__(self, n_features: int, eps: float = 1e-5, mode: str = "standard"):
        self.alpha = nk.ones(n_features)
        self.gamma = nk.ones(n_features)
        self.beta = nk.zeros(n_features)
        self.eps = eps
        self.mode = mode

    def __call__(self, X) -> nk.Tensor:
        return graph_norm(X, self)


def graph_norm(X, gn: GraphNorm) -> nk.Tensor:
    """``X`` is ``[batch, tokens, features]`` (or ``[tokens, features]``)."""
    X = X if isinstance(X, nk.Tensor) else nk.Tensor(X)
    axis = X.ndim - 2
    if gn.mode == "minmax":
        # min-max scaling to [0, 1] per feature; alpha is unused in this mode
        lo = X.data.min(axis=axis, keepdims=True)
        hi = X.data.max(axis=axis, keepdims=True)
        scaled = nk.Tensor((X.data - lo) / (hi - lo + gn.eps))
        return scaled * gn.gamma + gn.beta
    centered = X - nk.mean_axis(X, axis, keepdims=True) * gn.alpha
    std = nk.sqrt(nk.mean_axis(centered * centered, axis, keepdims=True) + gn.eps)
    return centered / std * gn.gamma + gn.beta


class BiasedMultiHeadAttention(nk.Module):
    def __init__(self, d: int, n_heads: int, rng: np.random.Generator, layer: int = 0):
        self.W_Q = nk.xavier_uniform(rng, d, d)
        self.W_K = nk.xavier_uniform(rng, d, d)
        self.W_V = nk.xavier_uniform(rng, d, d)
        self.W_O = nk.xavier_uniform(rng, d, d)
        self.n_heads = n_heads
        self.layer = layer

    def __call__(self, H, bias=None):
        return biased_mha(H, bias, self)


def _split_heads(x: nk.Tensor, n_heads: int) -> nk.Tensor:
    b, n, d = x.shape
    return x.reshape(b, n, n_heads, d // n_heads).transpose(0, 2, 1, 3)


def biased_mha(H: nk.Tensor, bias: nk.Tensor | None, attn: BiasedMultiHeadAttention):
    """Scaled dot-product attention per head with an additive ``[M, n, n]`` bias.

    Returns the projected output ``[batch, n, d]`` and the post-softmax
    weights ``[batch, M, n, n]`` as a plain array.
    """
    squeeze = H.ndim == 2
    if squeeze:
        H = H.reshape(1, *H.shape)
    b, n, d = H.shape
    M = attn.n_heads
    q = _split_heads(nk.matmul(H, attn.W_Q), M)
    k = _split_heads(nk.matmul(H, attn.W_K), M)
    v = _split_heads(nk.matmul(H, attn.W_V), M)
    scores = nk.matmul(q, k.swapaxes(-1, -2)) * (1.0 / math.sqrt(d // M))
    if bias is not None:
        scores = scores + bias
    bad = ~np.isfinite(scores.data)
    if bad.any():
        heads = sorted(set(np.nonzero(bad)[1].tolist()))
        raise NumericError(f"non-finite attention logits in layer {attn.layer}, head(s) {heads}")
    weights = nk.softmax(scores, axis=-1)
    z = nk.matmul(weights, v).transpose(0, 2, 1, 3).reshape(b, n, d)
    out = nk.matmul(z, attn.W_O)
    if squeeze:
        return out.reshape(n, d), weights.data[0]
    return out, weights.data


class PreLNBlock(nk.Module):
    """``H' = H + MHA(LN(H))``; ``out = H' + FFN(LN(H'))``."""

    def __init__(self, d: int, n_heads: int, ffn_multiplier: int, dropout_p: float,
                 rng: np.random.Generator, layer: int = 0, eps: float = 1e-5):
        hidden = ffn_multiplier * d
        self.ln1_gain, self.ln1_bias = nk.ones(d), nk.zeros(d)
        self.attn = BiasedMultiHeadAttention(d, n_heads, rng, layer)
        self.ln2_gain, self.ln2_bias = nk.ones(d), nk.zeros(d)
        self.ffn_W1 = nk.xavier_uniform(rng, d, hidden)
        self.ffn_b1 = nk.zeros(hidden)
        self.ffn_W2 = nk.xavier_uniform(rng, hidden, d)
        self.ffn_b2 = nk.zeros(d)
        self.dropout_p = dropout_p
        self.eps = eps

    def __call__(self, H, bias=None, rng=None):
        return pre_ln_block(H, bias, self, rng)


def pre_ln_block(H: nk.Tensor, bias, block: PreLNBlock, rng=None):
    p, train = block.dropout_p, block.training
    a, weights = biased_mha(nk.layer_norm(H, block.ln1_gain, block.ln1_bias, block.eps), bias, block.attn)
    H1 = H + nk.dropout(a, p, train, rng)
    h = nk.gelu(nk.matmul(nk.layer_norm(H1, block.ln2_gain, block.ln2_bias, block.eps), block.ffn_W1)
                + block.ffn_b1)
    h = nk.dropout(h, p, train, rng)
    return H1 + (nk.matmul(h, block.ffn_W2) + block.ffn_b2), weights
