"""Synthetic multichannel EEG with class information planted in regional power."""

from __future__ import annotations

from typing import Mapping

import numpy as np

from ..errors import ParameterError
from ..spatial.layout import ElectrodeLayout, RegionScheme
from .features import bandpass
from .types import EEGRecording


def default_offsets(n_classes: int, scheme: RegionScheme, db: float = 6.0) -> dict[int, dict[str, float]]:
    """Class ``c`` raises the power of region ``c`` (cycling over regions) by ``db``."""
    regions = scheme.regions
    return {c: {regions[c % len(regions)]: db} for c in range(n_classes)}


def synth_dataset(
    n_classes: int,
    layout: ElectrodeLayout,
    scheme: RegionScheme,
    offsets: Mapping[int, Mapping[str, float]] | None = None,
    noise: float = 1.0,
    n_trials: int = 4,
    seed: int = 0,
    duration_s: float = 20.0,
    sample_rate: float = 200.0,
    amplitude_uv: float = 10.0,
) -> list[EEGRecording]:
    """Generate ``n_classes * n_trials`` recordings, class-major.

    Every channel carries unit-variance 1-50 Hz band-limited Gaussian noise,
    scaled by ``amplitude_uv`` and a gain in dB: the class offset of the
    channel's region plus per-trial, per-channel jitter with standard
    deviation ``noise`` dB. With all offsets zero the classes share one
    distribution.
    """
    if n_classes < 1 or n_trials < 1:
        raise ParameterError("need at least one class and one trial")
    if noise < 0:
        raise ParameterError("noise level must be non-negative")
    scheme.validate(layout)
    offsets = default_offsets(n_classes, scheme) if offsets is None else offsets
    known = set(scheme.regions)
    for c, per_region in offsets.items():
        if not 0 <= int(c) < n_classes:
            raise ParameterError(f"offsets given for class {c}, but only {n_classes} classes")
        unknown = sorted(set(per_region) - known)
        if unknown:
            raise ParameterError(f"unknown region tag(s) {unknown} in offsets of class {c}")

    region_idx = scheme.tag_indices(layout.names)
    n_ch = len(layout)
    n_samples = int(round(duration_s * sample_rate))
    rng = np.random.default_rng(seed)
    recordings = []
    for c in range(n_classes):
        class_db = np.zeros(scheme.n_regions)
        for tag, db in offsets.get(c, {}).items():
            class_db[scheme.regions.index(tag)] = db
        for _ in range(n_trials):
            white = rng.standard_normal((n_ch, n_samples))
            x = bandpass(white, (1.0, 50.0), sample_rate)
            x /= x.std(axis=1, keepdims=True)
            gain_db = class_db[region_idx] + noise * rng.standard_normal(n_ch)
            x *= (amplitude_uv * 10.0 ** (gain_db / 20.0))[:, None]
            recordings.append(EEGRecording(list(layout.names), sample_rate, x,
                                           label=c, trial=len(recordings)))
    return recordings
