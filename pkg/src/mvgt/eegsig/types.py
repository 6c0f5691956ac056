"""Containers for raw recordings, DE features and segment batches."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError

#: delta, theta, alpha, beta, gamma (Hz)
BANDS: tuple[tuple[float, float], ...] = ((1, 4), (4, 8), (8, 14), (14, 31), (31, 50))
BAND_NAMES = ("delta", "theta", "alpha", "beta", "gamma")
MIN_SAMPLE_RATE = 2 * BANDS[-1][1]


@dataclass
class EEGRecording:
    channel_names: list[str]
    sample_rate_hz: float
    samples: np.ndarray  # [n_channels, n_samples], microvolts
    label: int | None = None
    trial: int | None = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        self.channel_names = list(self.channel_names)
        if self.samples.ndim != 2:
            raise DataError(f"samples must be [channels x samples], got {self.samples.shape}")
        if self.samples.shape[0] != len(self.channel_names):
            raise DataError(
                f"{len(self.channel_names)} channel names for {self.samples.shape[0]} rows"
            )
        if not self.sample_rate_hz > MIN_SAMPLE_RATE:
            raise DataError(
                f"sample rate {self.sample_rate_hz} Hz must exceed {MIN_SAMPLE_RATE} Hz"
            )

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate_hz


@dataclass
class FeatureTensor:
    values: np.ndarray  # [n_windows, n_channels, n_bands], nats
    window_seconds: float
    band_edges: tuple[tuple[float, float], ...] = BANDS
    channel_names: list[str] | None = None
    label: int | None = None
    trial: int | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 3 or self.values.shape[2] != len(self.band_edges):
            raise DataError(f"feature values must be [windows x channels x bands], got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise DataError("feature tensor contains NaN or Inf")

    @property
    def n_windows(self) -> int:
        return self.values.shape[0]

    @property
    def n_channels(self) -> int:
        return self.values.shape[1]


@dataclass
class SegmentBatch:
    """Sliding-window segments; ``segments[s, i]`` is channel ``i``'s T windows
    of band features concatenated in time order (``T * n_bands`` values)."""

    segments: np.ndarray  # [S, n, T*f]
    T: int
    stride: int
    labels: np.ndarray  # [S]
    trial_ids: np.ndarray = field(default=None)  # [S]

    def __post_init__(self):
        if self.trial_ids is None:
            self.trial_ids = np.full(len(self.segments), -1, dtype=np.int64)

    def __len__(self):
        return len(self.segments)

    @property
    def n_bands(self) -> int:
        return self.segments.shape[2] // self.T

    @staticmethod
    def concatenate(batches: list["SegmentBatch"]) -> "SegmentBatch":
        if not batches:
            raise DataError("no segment batches to concatenate")
        first = batches[0]
        return SegmentBatch(
            segments=np.concatenate([b.segments for b in batches]),
            T=first.T,
            stride=first.stride,
            labels=np.concatenate([b.labels for b in batches]),
            trial_ids=np.concatenate([b.trial_ids for b in batches]),
        )
