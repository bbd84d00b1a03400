"""Reading and writing run artifacts (matrix files plus JSON sidecars)."""
from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from ..core.grids import FrequencyGrid, PositionAxis, SpatialGrid, TimeGrid
from ..core.matrix_io import read_json, read_matrix, write_json, write_matrix
from ..errors import ContractError, MissingDataError
from ..interferometer import DetectorConfig, FringeScan, Interferogram, ShearConfig
from ..retrieval.gradient import GradientField
from ..retrieval.zonal import PhaseSurface
from ..spdc import JointSpectralField, PostSelection

SIDECAR_VERSION = 1
_AXES = {"FrequencyGrid": FrequencyGrid, "TimeGrid": TimeGrid, "PositionAxis": PositionAxis}


def axis_from_dict(d: dict):
    cls = _AXES.get(d.get("kind"))
    if cls is None:
        raise ContractError(f"unknown axis kind {d.get('kind')!r}")
    kw = {"n_points": d["n_points"], "spacing": d["spacing"]}
    if cls is FrequencyGrid:
        kw["center_angular_frequency"] = d.get("center_angular_frequency", 0.0)
    return cls(**kw)


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def save(stem, values, kind: str, **meta) -> list[Path]:
    """Write ``stem.cmat`` and ``stem.json``; returns both paths."""
    stem = Path(stem)
    m = write_matrix(stem.with_suffix(".cmat"), values)
    payload = {"version": SIDECAR_VERSION, "kind": kind, "shape": list(np.shape(values)), **meta}
    j = write_json(stem.with_suffix(".json"), payload)
    return [m, j]


def load(stem, kind: str = None, missing: str = None):
    """``(matrix, sidecar)`` for ``stem``; ``missing`` prefixes the not-found message."""
    stem = Path(stem)
    try:
        values = read_matrix(stem.with_suffix(".cmat"))
        meta = read_json(stem.with_suffix(".json"))
    except MissingDataError as exc:
        raise MissingDataError(f"{missing}: {exc}" if missing else str(exc)) from exc
    if meta.get("version") != SIDECAR_VERSION:
        raise ContractError(f"{stem}.json: unsupported sidecar version {meta.get('version')!r}")
    if kind is not None and meta.get("kind") != kind:
        raise ContractError(f"{stem}.json: expected kind {kind!r}, found {meta.get('kind')!r}")
    return values, meta


def save_field(stem, psi: JointSpectralField, kind: str = "joint_spectral_amplitude"):
    post = getattr(psi, "post_selection", None)
    return save(stem, psi.values, kind, grid_a=psi.grid_a.to_dict(), grid_b=psi.grid_b.to_dict(),
                post_selection=None if post is None else post.to_dict())


def load_field(stem, missing=None) -> JointSpectralField:
    v, m = load(stem, "joint_spectral_amplitude", missing)
    post = None if m["post_selection"] is None else PostSelection.from_dict(m["post_selection"])
    return JointSpectralField(axis_from_dict(m["grid_a"]), axis_from_dict(m["grid_b"]), v, post_selection=post)


def save_interferogram(stem, ig: Interferogram, kind: str = "interferogram"):
    return save(stem, ig.values, kind, **ig.metadata())


def load_interferogram(stem, kind: str = "interferogram", missing=None) -> Interferogram:
    v, m = load(stem, kind, missing)
    post = None if m["post_selection"] is None else PostSelection.from_dict(m["post_selection"])
    return Interferogram(np.clip(v.real, 0, None), axis_from_dict(m["grid_s"]), axis_from_dict(m["grid_i"]),
                         ShearConfig.from_dict(m["shear"]), DetectorConfig.from_dict(m["detector"]),
                         post, m["noise"], m["detector_applied"], m["denoised"])


def save_gradient(stem, g: GradientField):
    return save(stem, g.values + 1j * g.mask, "gradient", encoding="real=value, imag=mask",
                axis=g.axis, shear=g.shear, n_flagged=g.n_flagged,
                grid_s=g.grid_s.to_dict(), grid_i=g.grid_i.to_dict())


def load_gradient(stem, missing=None) -> GradientField:
    v, m = load(stem, "gradient", missing)
    return GradientField(m["axis"], v.real, v.imag > 0.5, m["shear"], axis_from_dict(m["grid_s"]),
                         axis_from_dict(m["grid_i"]), m["n_flagged"])


def save_surface(stem, s: PhaseSurface, kind: str = "phase_surface"):
    return save(stem, s.values + 1j * s.mask, kind, encoding="real=value, imag=mask",
                grid_a=s.grid_a.to_dict(), grid_b=s.grid_b.to_dict(), pin=list(s.pin),
                residual_rms=s.residual_rms, n_components=s.n_components, iterations=s.iterations)


def load_surface(stem, kind: str = "phase_surface", missing=None) -> PhaseSurface:
    v, m = load(stem, kind, missing)
    return PhaseSurface(axis_from_dict(m["grid_a"]), axis_from_dict(m["grid_b"]), v.real, v.imag > 0.5,
                        tuple(m["pin"]), m["residual_rms"], m["n_components"], m["iterations"])


def save_fringes(stem, scan: FringeScan):
    g = scan.grid
    flat = scan.spectra.reshape(g.n_x * g.n_y, -1)
    return save(stem, flat, "fringe_scan", layout="row = ix * n_y + iy", grid=g.to_dict(),
                delay=scan.delay, wavelengths=[float(w) for w in scan.wavelengths])


def load_fringes(stem, missing=None) -> FringeScan:
    v, m = load(stem, "fringe_scan", missing)
    g = SpatialGrid(**m["grid"])
    wl = np.asarray(m["wavelengths"], float)
    return FringeScan(v.real.reshape(g.n_x, g.n_y, wl.size), wl, m["delay"], g)
