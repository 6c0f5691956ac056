"""Band filtering, differential entropy and sliding-window segmentation."""

from __future__ import annotations

import math

import numpy as np
from scipy import signal

from ..errors import DataError, ParameterError
from .types import BANDS, EEGRecording, FeatureTensor, SegmentBatch

VARIANCE_FLOOR = 1e-12
FILTER_ORDER = 4


def _bandpass_sos(low: float, high: float, fs: float) -> np.ndarray:
    if not 0 < low < high < fs / 2:
        raise ParameterError(
            f"band ({low}, {high}) Hz must satisfy 0 < low < high < Nyquist ({fs / 2} Hz)"
        )
    return signal.butter(FILTER_ORDER, [low, high], btype="bandpass", fs=fs, output="sos")


def bandpass(samples: np.ndarray, band: tuple[float, float], fs: float) -> np.ndarray:
    """Zero-phase Butterworth band-pass along the last axis (forward-backward)."""
    sos = _bandpass_sos(band[0], band[1], fs)
    samples = np.asarray(samples, dtype=np.float64)
    if not np.any(samples):
        return np.zeros_like(samples)
    return signal.sosfiltfilt(sos, samples, axis=-1)


def bandpower_decompose(rec: EEGRecording, band: tuple[float, float]) -> np.ndarray:
    """Band-limited copy of every channel, same length as the input."""
    return bandpass(rec.samples, band, rec.sample_rate_hz)


def differential_entropy(window: np.ndarray, axis: int = -1) -> np.ndarray | float:
    """Gaussian differential entropy ``0.5 * ln(2*pi*e*var)`` in nats.

    ``var`` is the unbiased sample variance along ``axis``, floored at 1e-12.
    """
    window = np.asarray(window, dtype=np.float64)
    if window.shape[axis] < 2:
        raise DataError("differential entropy needs at least two samples")
    var = np.maximum(window.var(axis=axis, ddof=1), VARIANCE_FLOOR)
    de = 0.5 * np.log(2.0 * math.pi * math.e * var)
    return float(de) if np.ndim(de) == 0 else de


def extract_features(rec: EEGRecording, window_seconds: float,
                     bands=BANDS) -> FeatureTensor:
    """DE of each band over non-overlapping windows; a trailing partial window is dropped."""
    if window_seconds <= 0:
        raise ParameterError("window_seconds must be positive")
    win = int(round(window_seconds * rec.sample_rate_hz))
    n_windows = rec.n_samples // win if win >= 2 else 0
    if n_windows == 0:
        raise DataError(
            f"recording of {rec.duration:.3f} s is shorter than one {window_seconds} s window"
        )
    values = np.empty((n_windows, rec.n_channels, len(bands)))
    usable = n_windows * win
    for b, band in enumerate(bands):
        filtered = bandpower_decompose(rec, band)[:, :usable]
        windows = filtered.reshape(rec.n_channels, n_windows, win)
        values[:, :, b] = differential_entropy(windows, axis=-1).T
    return FeatureTensor(values, window_seconds, tuple(bands), list(rec.channel_names),
                         rec.label, rec.trial)


def segment(features: FeatureTensor, T: int, stride: int = 1,
            label: int | None = None) -> SegmentBatch:
    """Sliding windows of ``T`` consecutive feature steps, flattened per channel."""
    if T < 1 or stride < 1:
        raise ParameterError(f"T and stride must be >= 1 (got T={T}, stride={stride})")
    if features.n_windows < T:
        raise DataError(
            f"{features.n_windows} feature windows are fewer than the segment length T={T}"
        )
    label = features.label if label is None else label
    if label is None:
        raise DataError("segment labels need a recording label")
    v = features.values
    S = (features.n_windows - T) // stride + 1
    starts = np.arange(S) * stride
    # [S, T, n, f] -> [S, n, T, f] -> [S, n, T*f]
    runs = np.stack([v[s:s + T] for s in starts])
    segs = runs.transpose(0, 2, 1, 3).reshape(S, features.n_channels, T * v.shape[2])
    trial = -1 if features.trial is None else features.trial
    return SegmentBatch(
        segments=np.ascontiguousarray(segs),
        T=T,
        stride=stride,
        labels=np.full(S, label, dtype=np.int64),
        trial_ids=np.full(S, trial, dtype=np.int64),
    )


def unflatten_segment(seg: np.ndarray, T: int) -> np.ndarray:
    """Inverse of the per-channel flattening: ``[n, T*f] -> [T, n, f]``."""
    n, tf = seg.shape
    return seg.reshape(n, T, tf // T).transpose(1, 0, 2)
