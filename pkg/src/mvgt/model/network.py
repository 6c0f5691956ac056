"""The multi-view graph transformer classifier."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import numkit as nk
from ..errors import DimensionError
from ..spatial import (
    BiasProjection,
    ElectrodeLayout,
    GaussianBasisBank,
    RegionScheme,
    bias_projection,
    centrality_encoding,
    gaussian_basis,
    pairwise_distances,
    region_encoding,
)
from .config import ModelConfig
from .layers import GraphNorm, PreLNBlock, graph_norm, pre_ln_block


def tokenize(X: np.ndarray, config: ModelConfig) -> np.ndarray:
    """Arrange ``[batch, n, T*f]`` segments into model tokens.

    Inverted mode keeps one token per channel carrying its whole segment.
    Pointwise mode makes one token per time step carrying all channels'
    band features: ``[batch, T, n*f]``.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 2:
        X = X[None]
    if X.ndim != 3 or X.shape[2] != config.T * config.f:
        raise DimensionError(
            f"segments must be [batch, channels, T*f={config.T * config.f}], got {X.shape}"
        )
    if config.use_inverted:
        return X
    b, n, _ = X.shape
    return X.reshape(b, n, config.T, config.f).transpose(0, 2, 1, 3).reshape(b, config.T, n * config.f)


inverted_vs_pointwise_embedding = tokenize


@dataclass
class ForwardResult:
    logits: nk.Tensor               # [batch, n_classes]
    attention: np.ndarray | None    # [R, L, batch, M, tokens, tokens]
    hidden: nk.Tensor               # final node states [batch, tokens, d]


class MVGT(nk.Module):
    def __init__(self, config: ModelConfig, layout: ElectrodeLayout, scheme: RegionScheme,
                 seed: int = 0):
        config.validate()
        scheme.validate(layout)
        self.config = config
        self.layout = layout
        self.scheme = scheme
        self.seed = seed
        self.dist = pairwise_distances(layout)
        rng = np.random.default_rng(seed)
        n, d = len(layout), config.d
        n_in = config.T * config.f if config.use_inverted else n * config.f

        self.graph_norm = GraphNorm(n_in, config.eps, config.graph_norm_mode)
        self.W_X = nk.xavier_uniform(rng, n_in, d)
        self.basis = GaussianBasisBank(n, config.K, float(self.dist.max()))
        self.W_E = nk.xavier_uniform(rng, config.K, d)
        self.region_table = nk.xavier_uniform(rng, scheme.n_regions, d)
        self.bias_proj = BiasProjection(config.K, config.M, rng)
        self.blocks = [
            PreLNBlock(d, config.M, config.ffn_multiplier, config.dropout_p, rng, layer=l,
                       eps=config.eps)
            for l in range(config.L)
        ]
        self.final_gain, self.final_bias = nk.ones(d), nk.zeros(d)
        self.head_W = nk.xavier_uniform(rng, d, config.n_classes)
        self.head_b = nk.zeros(config.n_classes)
        self.dropout_rng = np.random.default_rng([seed, 1])

    @property
    def n_nodes(self) -> int:
        return len(self.layout)

    def structure_encoding(self) -> nk.Tensor:
        return gaussian_basis(self.basis, self.dist)

    def encode(self, tokens: nk.Tensor):
        """Initial states ``H0`` and the per-head attention bias (None in pointwise mode)."""
        cfg = self.config
        H = nk.matmul(graph_norm(tokens, self.graph_norm), self.W_X)
        if not cfg.use_inverted:
            return H, None
        B = self.structure_encoding()
        c = centrality_encoding(B, self.W_E, normalize=True)
        r = region_encoding(self.scheme, self.region_table, self.layout.names)
        # disabled terms are multiplied by zero so every switch shares one code path
        H = H + c * float(cfg.use_centrality) + r * float(cfg.use_bre)
        bias = bias_projection(B, self.bias_proj).transpose(2, 0, 1) * float(cfg.use_gse)
        return H, bias

    def forward(self, X, return_attention: bool = False) -> ForwardResult:
        cfg = self.config
        tokens = nk.Tensor(tokenize(X, cfg))
        if cfg.use_inverted and tokens.shape[1] != self.n_nodes:
            raise DimensionError(
                f"segments carry {tokens.shape[1]} channels, layout has {self.n_nodes}"
            )
        H, bias = self.encode(tokens)
        maps = []
        for it in range(cfg.R):
            if it and cfg.recycle_detach:
                H = H.detach()
            for block in self.blocks:
                H, weights = pre_ln_block(H, bias, block, self.dropout_rng)
                if return_attention:
                    maps.append(weights)
        pooled = nk.mean_axis(nk.layer_norm(H, self.final_gain, self.final_bias, cfg.eps), 1)
        logits = nk.matmul(pooled, self.head_W) + self.head_b
        attention = None
        if return_attention:
            attention = np.stack(maps).reshape(cfg.R, cfg.L, *maps[0].shape)
        return ForwardResult(logits, attention, H)

    __call__ = forward

    def predict_logits(self, X, batch_size: int = 64) -> np.ndarray:
        """Eval-mode logits without recording a tape."""
        was_training = self.training
        self.eval()
        try:
            with nk.no_grad():
                out = [self.forward(X[i:i + batch_size]).logits.data
                       for i in range(0, len(X), batch_size)]
        finally:
            self.train(was_training)
        return np.concatenate(out) if out else np.zeros((0, self.config.n_classes))

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.data for name, p in self.named_parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        params = self.parameters()
        missing = set(params) - set(state)
        extra = set(state) - set(params)
        if missing or extra:
            raise DimensionError(f"state mismatch: missing {sorted(missing)}, unexpected {sorted(extra)}")
        for name, p in params.items():
            arr = np.asarray(state[name], dtype=np.float64)
            if arr.shape != p.shape:
                raise DimensionError(f"{name}: checkpoint shape {arr.shape} vs model {p.shape}")
            p.data = arr.copy()
