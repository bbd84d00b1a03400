"""Centroids of conditional spatial intensities."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .._spec import SpecMixin
from ..core.grids import SpatialGrid
from ..errors import ContractError


@dataclass(frozen=True)
class CentroidRow(SpecMixin):
    idler_point: tuple
    centroid: tuple
    opposite_sign: bool


def intensity_centroid(intensity: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    """Intensity-weighted ``(x, y)`` centroid in mm."""
    w = np.asarray(intensity, float)
    if w.shape != (grid.n_x, grid.n_y):
        raise ContractError("intensity does not match the scan grid")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ContractError("intensity must be finite and >= 0")
    tot = w.sum()
    if tot <= 0:
        raise ContractError("intensity has zero total; centroid undefined")
    x, y = grid.mesh()
    return np.array([np.sum(w * x) / tot, np.sum(w * y) / tot])


def _opposite(c, p, atol):
    """Componentwise ``sign(c) == -sign(p)``; zero offsets need a zero centroid."""
    ok = True
    for ci, pi in zip(c, p):
        if pi == 0:
            ok &= abs(ci) <= atol
        else:
            ok &= np.sign(ci) == -np.sign(pi)
    return bool(ok)


def centroid_analysis(intensities: Mapping[tuple, np.ndarray], grid: SpatialGrid,
                      atol: float = 1e-9) -> list[CentroidRow]:
    """Signal centroid per idler post-selection point, with the sign check."""
    rows = []
    for point in sorted(intensities):
        c = intensity_centroid(intensities[point], grid)
        p = tuple(float(v) for v in point)
        rows.append(CentroidRow(p, (float(c[0]), float(c[1])), _opposite(c, p, atol)))
    return rows
