"""Input checks for the estimator front end, built on sklearn's validators."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array, column_or_1d

from ..eegsig import EEGRecording
from ..errors import DataError, DimensionError


def check_segments(X, n_channels: int | None = None, width: int | None = None) -> np.ndarray:
    """Return ``X`` as a finite float64 ``[segments, channels, T*f]`` array."""
    try:
        X = check_array(X, allow_nd=True, dtype=np.float64, ensure_all_finite=True,
                        ensure_min_samples=1)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    if X.ndim != 3:
        raise DimensionError(f"expected [segments, channels, T*f], got shape {X.shape}")
    if n_channels is not None and X.shape[1] != n_channels:
        raise DimensionError(f"segments have {X.shape[1]} channels, expected {n_channels}")
    if width is not None and X.shape[2] != width:
        raise DimensionError(f"segments have {X.shape[2]} features per channel, expected {width}")
    return X


def check_labels(y, n_samples: int) -> np.ndarray:
    try:
        y = column_or_1d(y)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    if len(y) != n_samples:
        raise DataError(f"{len(y)} labels for {n_samples} segments")
    return y


def check_recordings(recordings) -> list[EEGRecording]:
    recordings = list(recordings)
    if not recordings:
        raise DataError("no recordings given")
    bad = [i for i, r in enumerate(recordings) if not isinstance(r, EEGRecording)]
    if bad:
        raise DataError(f"items {bad} are not EEGRecording instances")
    return recordings
