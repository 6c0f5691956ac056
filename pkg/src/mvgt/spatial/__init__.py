"""Electrode layouts, region schemes and spatial encodings."""

from .encodings import (
    BiasProjection,
    GaussianBasisBank,
    bias_projection,
    centrality_encoding,
    gaussian_basis,
    region_encoding,
)
from .layout import (
    BUILTIN_SCHEMES,
    ElectrodeLayout,
    RegionScheme,
    builtin_schemes,
    bundled_layout,
    load_layout,
    load_scheme,
    pairwise_distances,
    save_layout,
)

__all__ = [
    "BUILTIN_SCHEMES", "BiasProjection", "ElectrodeLayout", "GaussianBasisBank",
    "RegionScheme", "bias_projection", "builtin_schemes", "bundled_layout",
    "centrality_encoding", "gaussian_basis", "load_layout", "load_scheme",
    "pairwise_distances", "region_encoding", "save_layout",
]
