"""Run configuration: one JSON document, validated on load."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from .._spec import SpecMixin
from ..core.grids import SpatialGrid
from ..errors import ConfigurationError, MissingDataError
from ..interferometer import DEFAULT_DELAY, DEFAULT_SHEAR, DetectorConfig
from ..spdc import (DEFAULT_SPECTRAL_POINTS, DEFAULT_SPECTRAL_SPACING, CrystalSpec, JointSpatialSpec,
                    PumpSpec)

CONFIG_VERSION = 1
DEFAULT_RUN_C2 = -1.33e5  # fs^2; the default run demonstrates a chirped pump


@dataclass(frozen=True)
class GridConfig(SpecMixin):
    n_points: int = DEFAULT_SPECTRAL_POINTS
    spacing: float = DEFAULT_SPECTRAL_SPACING


@dataclass(frozen=True)
class ShearSettings(SpecMixin):
    """Shear and delay shared by both arms; each arm shears its own photon."""

    shear: float = DEFAULT_SHEAR
    delay: float = DEFAULT_DELAY
    phase_drift: float = 0.0


@dataclass(frozen=True)
class ScanConfig(SpecMixin):
    """Transverse scan grid, idler post-selections and the spatial fringe delay."""

    n_x: int = 7
    n_y: int = 7
    pitch: float = 0.5
    idler_points: tuple = ((0.0, 0.0),)
    fringe_delay: float = DEFAULT_DELAY
    reference_waist: float = 1.0

    def __post_init__(self):
        pts = tuple(tuple(float(c) for c in p) for p in self.idler_points)
        if not pts or any(len(p) != 2 for p in pts):
            raise ConfigurationError("scan.idler_points must be a non-empty list of [x, y] pairs")
        if len(set(pts)) != len(pts):
            raise ConfigurationError("scan.idler_points contains duplicates")
        object.__setattr__(self, "idler_points", pts)

    @property
    def grid(self) -> SpatialGrid:
        return SpatialGrid(self.n_x, self.n_y, self.pitch)

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["idler_points"] = [list(p) for p in self.idler_points]
        return d


@dataclass(frozen=True)
class RetrievalConfig(SpecMixin):
    denoise_cutoff: Optional[float] = 0.2
    threshold: float = 0.05
    method: str = "cg"
    local_terms: bool = True

    def __post_init__(self):
        if self.denoise_cutoff is not None and not 0 < self.denoise_cutoff <= 1:
            raise ConfigurationError("retrieval.denoise_cutoff must lie in (0, 1] or be null")
        if not 0 <= self.threshold < 1:
            raise ConfigurationError("retrieval.threshold must lie in [0, 1)")
        if self.method not in ("cg", "direct"):
            raise ConfigurationError("retrieval.method must be 'cg' or 'direct'")


@dataclass(frozen=True)
class PlotConfig(SpecMixin):
    enabled: bool = True


_SECTIONS = {
    "grid": GridConfig, "pump": PumpSpec, "crystal": CrystalSpec, "spatial": JointSpatialSpec,
    "shear": ShearSettings, "detector": DetectorConfig, "scan": ScanConfig,
    "retrieval": RetrievalConfig, "plots": PlotConfig,
}


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one run."""

    scenario: str = "default"
    seed: int = 0
    noiseless: bool = False
    output_dir: Optional[str] = None
    grid: GridConfig = field(default_factory=GridConfig)
    pump: PumpSpec = field(default_factory=lambda: PumpSpec(c2=DEFAULT_RUN_C2))
    crystal: CrystalSpec = field(default_factory=CrystalSpec)
    spatial: JointSpatialSpec = field(default_factory=JointSpatialSpec)
    shear: ShearSettings = field(default_factory=ShearSettings)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    plots: PlotConfig = field(default_factory=PlotConfig)

    def __post_init__(self):
        if not isinstance(self.scenario, str) or not self.scenario or "/" in self.scenario:
            raise ConfigurationError("scenario must be a non-empty name without '/'")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 63:
            raise ConfigurationError(f"seed must be a non-negative integer, got {self.seed!r}")
        if not isinstance(self.noiseless, bool):
            raise ConfigurationError("noiseless must be true or false")

    def to_dict(self) -> dict:
        d = {"version": CONFIG_VERSION}
        for f in fields(self):
            v = getattr(self, f.name)
            d[f.name] = v.to_dict() if hasattr(v, "to_dict") else v
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigurationError("config must be a JSON object")
        data = dict(data)
        version = data.pop("version", None)
        if version != CONFIG_VERSION:
            raise ConfigurationError(f"config version must be {CONFIG_VERSION}, got {version!r}")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"config: unknown keys {sorted(unknown)}")
        kwargs = {}
        for k, v in data.items():
            if k in _SECTIONS:
                try:
                    kwargs[k] = _SECTIONS[k].from_dict(v)
                except ConfigurationError as exc:
                    raise ConfigurationError(f"config.{k}: {exc}") from exc
                except (ValueError, TypeError) as exc:
                    raise ConfigurationError(f"config.{k}: {exc}") from exc
            else:
                kwargs[k] = v
        return cls(**kwargs)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), allow_nan=False)

    def content_hash(self) -> str:
        """sha256 of the canonical JSON, excluding the output location."""
        d = self.to_dict()
        d.pop("output_dir")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"), allow_nan=False)
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_overrides(self, **changes) -> "RunConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes)


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise MissingDataError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
    return RunConfig.from_dict(data)
