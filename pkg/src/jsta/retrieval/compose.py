"""Relative phase between two joint spatial-spectral coordinates.

The path from ``start`` to ``end`` is broken into four legs, alternating
between a spectral step (taken from a joint spectral phase surface measured
at fixed positions) and a spatial step (taken from a joint spatial phase
table measured at fixed frequencies).  The legs telescope, so the sum is
``phi(end) - phi(start)`` whenever the inputs are mutually consistent.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..errors import ContractError, MissingDataError
from .zonal import PhaseSurface

ORDERS = ("spectral-first", "spatial-first")


def _pt(p):
    return (float(p[0]), float(p[1]))


@dataclass(frozen=True)
class JointCoordinate:
    """Signal and idler detection points (mm) and relative frequencies (rad/fs)."""

    signal_point: tuple
    idler_point: tuple
    nu_s: float
    nu_i: float

    def __post_init__(self):
        object.__setattr__(self, "signal_point", _pt(self.signal_point))
        object.__setattr__(self, "idler_point", _pt(self.idler_point))


class SpatialPhaseTable:
    """Joint spatial phase ``phi(signal_point, idler_point)`` at one frequency pair."""

    def __init__(self, values: Mapping[tuple, float]):
        self._values = {(_pt(s), _pt(i)): float(v) for (s, i), v in values.items()}

    @classmethod
    def from_surface(cls, surface: PhaseSurface, idler_point, offset: float = 0.0) -> "SpatialPhaseTable":
        """Entries from a signal wavefront measured with the idler at ``idler_point``."""
        xs, ys = surface.grid_a.values, surface.grid_b.values
        vals = {}
        for ix, x in enumerate(xs):
            for iy, y in enumerate(ys):
                if surface.mask[ix, iy]:
                    vals[((x, y), idler_point)] = surface.values[ix, iy] + offset
        return cls(vals)

    def merged(self, other: "SpatialPhaseTable") -> "SpatialPhaseTable":
        return SpatialPhaseTable({**self._values, **other._values})

    def __contains__(self, key):
        s, i = key
        return (_pt(s), _pt(i)) in self._values

    def __getitem__(self, key) -> float:
        s, i = key
        return self._values[(_pt(s), _pt(i))]

    def __len__(self):
        return len(self._values)


def _spectral(surfaces, leg, pos, a, b):
    key = (pos[0], pos[1])
    surf = surfaces.get(key)
    if surf is None:
        raise MissingDataError(
            f"leg {leg}: no joint spectral phase surface for signal point {pos[0]} / idler point {pos[1]}")
    ia = [surf.grid_a.index_of(a[0]), surf.grid_b.index_of(a[1])]
    ib = [surf.grid_a.index_of(b[0]), surf.grid_b.index_of(b[1])]
    if not (surf.mask[ia[0], ia[1]] and surf.mask[ib[0], ib[1]]):
        raise ContractError(f"leg {leg}: frequency endpoint lies outside the surface mask")
    return surf.values[ib[0], ib[1]] - surf.values[ia[0], ia[1]]


def _spatial(tables, leg, freq_idx, a, b):
    table = tables.get(freq_idx)
    if table is None:
        raise MissingDataError(f"leg {leg}: no joint spatial phase table at frequency indices {freq_idx}")
    for p in (a, b):
        if p not in table:
            raise MissingDataError(f"leg {leg}: spatial table at {freq_idx} has no entry for {p}")
    return table[b] - table[a]


def compose_relative_phase(spectral_surfaces: Mapping[tuple, PhaseSurface],
                           spatial_surfaces: Mapping[tuple, SpatialPhaseTable],
                           start: JointCoordinate, end: JointCoordinate,
                           order: str = "spectral-first") -> float:
    """``phi(end) - phi(start)`` as a four-leg path sum.

    ``spectral_surfaces`` is keyed by ``(signal_point, idler_point)``;
    ``spatial_surfaces`` by the grid index pair ``(k_s, k_i)`` of the
    frequencies at which the table was taken.

    The legs always run from the lexicographically smaller endpoint, so
    swapping ``start`` and ``end`` visits the same intermediate coordinates
    and negates the result exactly, even for inconsistent inputs.
    """
    if order not in ORDERS:
        raise ContractError(f"order must be one of {ORDERS}, got {order!r}")
    if start == end:
        return 0.0
    key = lambda c: (c.signal_point, c.idler_point, c.nu_s, c.nu_i)  # noqa: E731
    if key(end) < key(start):
        return -compose_relative_phase(spectral_surfaces, spatial_surfaces, end, start, order)
    spec = {(_pt(k[0]), _pt(k[1])): v for k, v in spectral_surfaces.items()}
    any_surf = next(iter(spec.values()), None)
    if any_surf is None:
        raise MissingDataError("leg 1: no joint spectral phase surfaces given")
    ga, gb = any_surf.grid_a, any_surf.grid_b

    def fidx(nu_s, nu_i):
        return (ga.index_of(nu_s), gb.index_of(nu_i))

    s0, i0, w0s, w0i = start.signal_point, start.idler_point, start.nu_s, start.nu_i
    s1, i1, w1s, w1i = end.signal_point, end.idler_point, end.nu_s, end.nu_i
    if order == "spectral-first":
        legs = [
            _spectral(spec, 1, (s0, i0), (w0s, w0i), (w1s, w0i)),
            _spatial(spatial_surfaces, 2, fidx(w1s, w0i), (s0, i0), (s1, i0)),
            _spectral(spec, 3, (s1, i0), (w1s, w0i), (w1s, w1i)),
            _spatial(spatial_surfaces, 4, fidx(w1s, w1i), (s1, i0), (s1, i1)),
        ]
    else:
        legs = [
            _spatial(spatial_surfaces, 1, fidx(w0s, w0i), (s0, i0), (s1, i0)),
            _spectral(spec, 2, (s1, i0), (w0s, w0i), (w1s, w0i)),
            _spatial(spatial_surfaces, 3, fidx(w1s, w0i), (s1, i0), (s1, i1)),
            _spectral(spec, 4, (s1, i1), (w1s, w0i), (w1s, w1i)),
        ]
    return float(np.sum(legs))
