"""``.mvgt`` checkpoint files.

Layout: ``b"MVGT"``, a little-endian u32 header length, a UTF-8 JSON header,
then every parameter as contiguous little-endian float64 in header order.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import FormatError
from ..spatial import ElectrodeLayout, RegionScheme
from .config import ModelConfig
from .network import MVGT

MAGIC = b"MVGT"


def encode_checkpoint(model: MVGT, extra: dict | None = None) -> bytes:
    index, blobs, offset = [], [], 0
    for name, arr in model.state_dict().items():
        raw = np.ascontiguousarray(arr, dtype="<f8").tobytes()
        index.append({"name": name, "shape": list(arr.shape), "offset": offset})
        blobs.append(raw)
        offset += len(raw)
    header = {
        "config": model.config.to_dict(),
        "tensors": index,
        "layout": model.layout.to_json(),
        "scheme": model.scheme.to_json(),
        "seed": model.seed,
        "extra": extra or {},
    }
    hbytes = json.dumps(header, sort_keys=True).encode()
    return MAGIC + struct.pack("<I", len(hbytes)) + hbytes + b"".join(blobs)


def decode_checkpoint(buf: bytes) -> tuple[MVGT, dict]:
    if buf[:4] != MAGIC or len(buf) < 8:
        raise FormatError("not an .mvgt checkpoint (bad magic)")
    (hlen,) = struct.unpack_from("<I", buf, 4)
    try:
        header = json.loads(buf[8:8 + hlen].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"corrupt checkpoint header: {exc}") from exc
    blob = memoryview(buf)[8 + hlen:]
    model = MVGT(
        ModelConfig.from_dict(header["config"]),
        ElectrodeLayout.from_json(header["layout"]),
        RegionScheme.from_json(header["scheme"]),
        seed=header.get("seed", 0),
    )
    state = {}
    for entry in header["tensors"]:
        count = int(np.prod(entry["shape"], dtype=np.int64))
        if entry["offset"] + 8 * count > len(blob):
            raise FormatError(f"checkpoint truncated inside tensor {entry['name']!r}")
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=entry["offset"])
        state[entry["name"]] = arr.reshape(entry["shape"]).astype(np.float64)
    model.load_state_dict(state)
    return model, header.get("extra", {})


def save_checkpoint(model: MVGT, path, extra: dict | None = None) -> None:
    Path(path).write_bytes(encode_checkpoint(model, extra))


def load_checkpoint(path) -> tuple[MVGT, dict]:
    return decode_checkpoint(Path(path).read_bytes())
