"""Model hyperparameters and ablation switches."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from ..errors import ConfigError


@dataclass
class ModelConfig:
    d: int = 64                  # hidden width
    K: int = 32                  # Gaussian kernels
    L: int = 4                   # attention blocks
    M: int = 2                   # attention heads
    R: int = 3                   # recycling passes through the block stack
    ffn_multiplier: int = 4
    dropout_p: float = 0.1
    n_classes: int = 3
    T: int = 5                   # feature windows per segment
    f: int = 5                   # frequency bands
    use_centrality: bool = True
    use_bre: bool = True
    use_gse: bool = True
    use_inverted: bool = True
    graph_norm_mode: str = "standard"   # or "minmax"
    recycle_detach: bool = False
    eps: float = 1e-5

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ("d", "K", "L", "M", "R", "ffn_multiplier", "n_classes", "T", "f"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.n_classes < 2:
            raise ConfigError("need at least two classes")
        if self.d % self.M:
            raise ConfigError(f"hidden size d={self.d} is not divisible by M={self.M} heads")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ConfigError(f"dropout_p must lie in [0, 1), got {self.dropout_p}")
        if self.graph_norm_mode not in ("standard", "minmax"):
            raise ConfigError(f"unknown graph_norm_mode {self.graph_norm_mode!r}")
        if not self.use_inverted and self.spatial_enabled:
            raise ConfigError(
                "spatial encodings (centrality, region, structure bias) need the "
                "inverted channel-token embedding; disable them for pointwise mode"
            )

    @property
    def spatial_enabled(self) -> bool:
        return self.use_centrality or self.use_bre or self.use_gse

    @property
    def head_dim(self) -> int:
        return self.d // self.M

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**obj)
