"""Differentiable spatial encodings: Gaussian distance basis, centrality,
brain-region embeddings and the per-head attention-bias projection."""

from __future__ import annotations

import math

import numpy as np

from .. import numkit as nk
from ..errors import DimensionError
from .layout import RegionScheme

SIGMA_FLOOR = 1e-2
_SQRT_2PI = math.sqrt(2.0 * math.pi)


class GaussianBasisBank(nk.Module):
    """Learnable means/widths over K kernels plus per-ordered-pair affine
    distance parameters (``alpha`` scale, ``beta`` shift)."""

    def __init__(self, n_nodes: int, n_kernels: int, max_distance: float):
        if n_kernels < 1:
            raise DimensionError("need at least one Gaussian kernel")
        spacing = max_distance / (n_kernels - 1) if n_kernels > 1 else max(max_distance, 1.0)
        self.mu = nk.Tensor(np.linspace(0.0, max_distance, n_kernels), requires_grad=True)
        self.sigma = nk.Tensor(np.full(n_kernels, max(spacing, SIGMA_FLOOR)), requires_grad=True)
        self.alpha = nk.ones(n_nodes, n_nodes)
        self.beta = nk.zeros(n_nodes, n_nodes)

    @property
    def n_kernels(self) -> int:
        return self.mu.shape[0]

    def __call__(self, dist) -> nk.Tensor:
        return gaussian_basis(self, dist)


def gaussian_basis(bank: GaussianBasisBank, dist) -> nk.Tensor:
    """``B[i, j, k]`` = normal density of ``alpha_ij * d_ij + beta_ij`` around ``mu_k``
    with width ``sigma_k`` (clamped below at 1e-2)."""
    dist = nk.Tensor(dist) if not isinstance(dist, nk.Tensor) else dist
    if dist.shape != bank.alpha.shape:
        raise DimensionError(f"distance matrix {dist.shape} vs basis pairs {bank.alpha.shape}")
    n = dist.shape[0]
    x = (bank.alpha * dist + bank.beta).reshape(n, n, 1) - bank.mu
    sigma = nk.clamp_min(bank.sigma, SIGMA_FLOOR)
    z = x / sigma
    return nk.exp(z * z * -0.5) / (sigma * _SQRT_2PI)


def centrality_encoding(B: nk.Tensor, W_E: nk.Tensor, normalize: bool = False) -> nk.Tensor:
    """Sum each source node's encodings over targets (second axis), then project.

    With ``normalize`` the sum is divided by the node count. That is a fixed
    rescaling of ``W_E``, but it keeps the projection input O(1) so Adam's
    per-parameter steps do not move this path much faster than the others.
    """
    e = nk.sum_axis(B, axis=1)
    if normalize:
        e = e * (1.0 / B.shape[1])
    return nk.matmul(e, W_E)


def region_encoding(scheme: RegionScheme, table: nk.Tensor, channel_names) -> nk.Tensor:
    idx = scheme.tag_indices(channel_names)
    if table.shape[0] != scheme.n_regions:
        raise DimensionError(
            f"embedding table has {table.shape[0]} rows for {scheme.n_regions} regions"
        )
    return nk.take_rows(table, idx)


class BiasProjection(nk.Module):
    """Per-pair perceptron K -> K (GELU) -> M, shared over all node pairs."""

    def __init__(self, n_kernels: int, n_heads: int, rng: np.random.Generator):
        self.W1 = nk.xavier_uniform(rng, n_kernels, n_kernels)
        self.b1 = nk.zeros(n_kernels)
        self.W2 = nk.xavier_uniform(rng, n_kernels, n_heads)
        self.b2 = nk.zeros(n_heads)

    def __call__(self, B: nk.Tensor) -> nk.Tensor:
        return bias_projection(B, self)


def bias_projection(B: nk.Tensor, proj: BiasProjection) -> nk.Tensor:
    """``[n, n, K] -> [n, n, M]``."""
    hidden = nk.gelu(nk.matmul(B, proj.W1) + proj.b1)
    return nk.matmul(hidden, proj.W2) + proj.b2
