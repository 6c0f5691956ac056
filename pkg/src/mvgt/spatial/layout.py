"""Electrode geometry and brain-region schemes."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import ConfigError

BUILTIN_SCHEMES = ("lobe", "general", "frontal", "hemisphere")


@dataclass(frozen=True)
class ElectrodeLayout:
    names: tuple[str, ...]
    coords: np.ndarray  # [n, 3], unit-sphere head model

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        coords = np.asarray(self.coords, dtype=np.float64)
        object.__setattr__(self, "coords", coords)
        if len(set(self.names)) != len(self.names):
            dupes = sorted({n for n in self.names if self.names.count(n) > 1})
            raise ConfigError(f"duplicate channel names in layout: {dupes}")
        if coords.shape != (len(self.names), 3):
            raise ConfigError(
                f"layout has {len(self.names)} names but coordinates of shape {coords.shape}"
            )

    def __len__(self):
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def subset(self, names) -> "ElectrodeLayout":
        idx = [self.index(n) for n in names]
        return ElectrodeLayout(tuple(names), self.coords[idx])

    def to_json(self) -> dict:
        return {"channels": [{"name": n, "xyz": [float(v) for v in xyz]}
                             for n, xyz in zip(self.names, self.coords)]}

    @classmethod
    def from_json(cls, obj: dict) -> "ElectrodeLayout":
        try:
            chans = obj["channels"]
            return cls(tuple(c["name"] for c in chans), [c["xyz"] for c in chans])
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed layout JSON: {exc}") from exc


@dataclass(frozen=True)
class RegionScheme:
    name: str
    tags: dict  # channel name -> region tag

    @property
    def regions(self) -> list[str]:
        """Distinct tags, sorted so indices do not depend on mapping order."""
        return sorted(set(self.tags.values()))

    @property
    def n_regions(self) -> int:
        return len(self.regions)

    def tag_indices(self, channel_names) -> np.ndarray:
        lookup = {r: i for i, r in enumerate(self.regions)}
        missing = [ch for ch in channel_names if ch not in self.tags]
        if missing:
            raise ConfigError(
                f"channel(s) {', '.join(missing)} have no region tag in scheme {self.name!r}"
            )
        return np.array([lookup[self.tags[ch]] for ch in channel_names], dtype=np.intp)

    def validate(self, layout: ElectrodeLayout) -> None:
        self.tag_indices(layout.names)
        if len({self.tags[n] for n in layout.names}) < 2:
            raise ConfigError(f"scheme {self.name!r} needs at least two regions on this layout")

    def to_json(self) -> dict:
        return {"name": self.name, "tags": dict(self.tags)}

    @classmethod
    def from_json(cls, obj: dict) -> "RegionScheme":
        if not isinstance(obj, dict) or not isinstance(obj.get("tags"), dict):
            raise ConfigError("scheme JSON must be {'name': str, 'tags': {channel: tag}}")
        return cls(str(obj.get("name", "custom")), {str(k): str(v) for k, v in obj["tags"].items()})


def _read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def _data_file(name: str):
    return resources.files("mvgt.spatial").joinpath("data", name)


def bundled_layout() -> ElectrodeLayout:
    """62 channels of the 10-10 system on a unit sphere (x right, y nose, z up)."""
    return ElectrodeLayout.from_json(json.loads(_data_file("seed62_layout.json").read_text()))


def load_layout(path) -> ElectrodeLayout:
    return ElectrodeLayout.from_json(_read_json(path))


def save_layout(layout: ElectrodeLayout, path) -> None:
    Path(path).write_text(json.dumps(layout.to_json(), indent=1))


def load_scheme(source) -> RegionScheme:
    """Built-in scheme by name (case-insensitive) or a JSON scheme file."""
    key = str(source).lower()
    if key in BUILTIN_SCHEMES:
        return RegionScheme.from_json(json.loads(_data_file(f"{key}.json").read_text()))
    path = Path(source)
    if not path.is_file():
        raise ConfigError(
            f"unknown scheme {source!r}: not one of {BUILTIN_SCHEMES} and not a file"
        )
    return RegionScheme.from_json(_read_json(path))


def builtin_schemes(layout: ElectrodeLayout | None = None) -> dict[str, RegionScheme]:
    """LOBE, GENERAL, FRONTAL and HEMISPHERE, validated against ``layout``."""
    schemes = {name.upper(): load_scheme(name) for name in BUILTIN_SCHEMES}
    if layout is not None:
        for scheme in schemes.values():
            scheme.validate(layout)
    return schemes


def pairwise_distances(layout: ElectrodeLayout) -> np.ndarray:
    x = layout.coords
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt((diff * diff).sum(-1))
