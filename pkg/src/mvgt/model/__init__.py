"""MVGT network, its layers and checkpoint I/O."""

from .checkpoint import decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint
from .config import ModelConfig
from .layers import (
    BiasedMultiHeadAttention,
    GraphNorm,
    PreLNBlock,
    biased_mha,
    graph_norm,
    pre_ln_block,
)
from .network import MVGT, ForwardResult, inverted_vs_pointwise_embedding, tokenize

__all__ = [
    "MVGT", "BiasedMultiHeadAttention", "ForwardResult", "GraphNorm", "ModelConfig",
    "PreLNBlock", "biased_mha", "decode_checkpoint", "encode_checkpoint", "graph_norm",
    "inverted_vs_pointwise_embedding", "load_checkpoint", "pre_ln_block", "save_checkpoint",
    "tokenize",
]
