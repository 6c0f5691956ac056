"""Signal pipeline: band filtering, differential entropy, segmentation,
synthetic recordings and on-disk formats."""

from .features import (
    bandpass,
    bandpower_decompose,
    differential_entropy,
    extract_features,
    segment,
    unflatten_segment,
)
from .io import (
    decode_deft,
    decode_eegr,
    encode_deft,
    encode_eegr,
    feature_manifests,
    read_features,
    read_recording,
    recording_manifests,
    write_features,
    write_recording,
)
from .synth import default_offsets, synth_dataset
from .types import BAND_NAMES, BANDS, EEGRecording, FeatureTensor, SegmentBatch

__all__ = [
    "BANDS", "BAND_NAMES", "EEGRecording", "FeatureTensor", "SegmentBatch", "bandpass",
    "bandpower_decompose", "decode_deft", "decode_eegr", "default_offsets",
    "differential_entropy", "encode_deft", "encode_eegr", "extract_features",
    "feature_manifests", "read_features", "read_recording", "recording_manifests",
    "segment", "synth_dataset", "unflatten_segment", "write_features", "write_recording",
]
