"""Binary formats for raw recordings (.eegr) and DE features (.deft).

All integers and floats are little-endian; samples and feature values are
stored as float32. Channel names, label and trial id live in a JSON sidecar
next to each binary file.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import FormatError
from .types import BANDS, EEGRecording, FeatureTensor

EEGR_MAGIC = b"EEGR"
DEFT_MAGIC = b"DEFT"
FORMAT_VERSION = 1
# magic, version u16, n_channels u16, sample_rate f32, n_samples u64
_EEGR_HEADER = struct.Struct("<4sHHfQ")
# magic, version u16, n_windows u32, n_channels u16, n_bands u16, window_seconds f32
_DEFT_HEADER = struct.Struct("<4sHIHHf")


def encode_eegr(rec: EEGRecording) -> bytes:
    header = _EEGR_HEADER.pack(EEGR_MAGIC, FORMAT_VERSION, rec.n_channels,
                               rec.sample_rate_hz, rec.n_samples)
    return header + rec.samples.astype("<f4").tobytes(order="C")


def decode_eegr(buf: bytes, channel_names=None, label=None, trial=None) -> EEGRecording:
    if len(buf) < _EEGR_HEADER.size:
        raise FormatError("truncated .eegr header")
    magic, version, n_ch, fs, n_samples = _EEGR_HEADER.unpack_from(buf)
    if magic != EEGR_MAGIC:
        raise FormatError(f"bad .eegr magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported .eegr version {version}")
    expected = _EEGR_HEADER.size + 4 * n_ch * n_samples
    if len(buf) != expected:
        raise FormatError(f".eegr payload is {len(buf)} bytes, expected {expected}")
    samples = np.frombuffer(buf, dtype="<f4", offset=_EEGR_HEADER.size).reshape(n_ch, n_samples)
    names = list(channel_names) if channel_names is not None else [f"ch{i}" for i in range(n_ch)]
    return EEGRecording(names, float(fs), samples.astype(np.float64), label, trial)


def encode_deft(feat: FeatureTensor) -> bytes:
    n_w, n_ch, n_b = feat.values.shape
    header = _DEFT_HEADER.pack(DEFT_MAGIC, FORMAT_VERSION, n_w, n_ch, n_b, feat.window_seconds)
    return header + feat.values.astype("<f4").tobytes(order="C")


def decode_deft(buf: bytes, channel_names=None, label=None, trial=None) -> FeatureTensor:
    if len(buf) < _DEFT_HEADER.size:
        raise FormatError("truncated .deft header")
    magic, version, n_w, n_ch, n_b, win = _DEFT_HEADER.unpack_from(buf)
    if magic != DEFT_MAGIC:
        raise FormatError(f"bad .deft magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported .deft version {version}")
    expected = _DEFT_HEADER.size + 4 * n_w * n_ch * n_b
    if len(buf) != expected:
        raise FormatError(f".deft payload is {len(buf)} bytes, expected {expected}")
    if n_b != len(BANDS):
        raise FormatError(f".deft declares {n_b} bands, expected {len(BANDS)}")
    values = np.frombuffer(buf, dtype="<f4", offset=_DEFT_HEADER.size).reshape(n_w, n_ch, n_b)
    return FeatureTensor(values.astype(np.float64), float(win), BANDS,
                         list(channel_names) if channel_names is not None else None, label, trial)


def _manifest(path: Path, channels, label, trial) -> dict:
    out = {"channels": list(channels), "label": label, "file": path.name}
    if trial is not None:
        out["trial"] = int(trial)
    return out


def manifest_path(path) -> Path:
    return Path(path).with_suffix(".json")


def write_recording(rec: EEGRecording, path) -> Path:
    """Write ``path`` (.eegr) and its JSON manifest; returns the manifest path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_eegr(rec))
    mpath = manifest_path(path)
    mpath.write_text(json.dumps(_manifest(path, rec.channel_names, rec.label, rec.trial), indent=1))
    return mpath


def write_features(feat: FeatureTensor, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_deft(feat))
    mpath = manifest_path(path)
    channels = feat.channel_names or [f"ch{i}" for i in range(feat.n_channels)]
    mpath.write_text(json.dumps(_manifest(path, channels, feat.label, feat.trial), indent=1))
    return mpath


def read_manifest(mpath) -> tuple[dict, Path]:
    mpath = Path(mpath)
    try:
        meta = json.loads(mpath.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{mpath}: invalid manifest JSON ({exc})") from exc
    for key in ("channels", "file"):
        if key not in meta:
            raise FormatError(f"{mpath}: manifest lacks {key!r}")
    return meta, mpath.parent / meta["file"]


def read_recording(mpath) -> EEGRecording:
    meta, data_path = read_manifest(mpath)
    rec = decode_eegr(data_path.read_bytes(), meta["channels"], meta.get("label"), meta.get("trial"))
    if len(meta["channels"]) != rec.n_channels:
        raise FormatError(f"{mpath}: manifest lists {len(meta['channels'])} channels, file has {rec.n_channels}")
    return rec


def read_features(mpath) -> FeatureTensor:
    meta, data_path = read_manifest(mpath)
    feat = decode_deft(data_path.read_bytes(), meta["channels"], meta.get("label"), meta.get("trial"))
    if len(meta["channels"]) != feat.n_channels:
        raise FormatError(f"{mpath}: manifest lists {len(meta['channels'])} channels, file has {feat.n_channels}")
    return feat


def _manifests(directory, suffix: str) -> list[Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"{directory} is not a directory")
    out = []
    for mpath in sorted(directory.glob("*.json")):
        meta = json.loads(mpath.read_text())
        if isinstance(meta, dict) and str(meta.get("file", "")).endswith(suffix):
            out.append(mpath)
    return out


def recording_manifests(directory) -> list[Path]:
    return _manifests(directory, ".eegr")


def feature_manifests(directory) -> list[Path]:
    return _manifests(directory, ".deft")
