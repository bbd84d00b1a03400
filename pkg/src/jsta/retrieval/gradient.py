"""Phase differences ``phi(nu) - phi(nu + shear)`` from an extracted sideband."""
from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..core.grids import ComplexField2D, FrequencyGrid
from ..errors import ContractError
from ..interferometer import ShearConfig

_AXES = {"signal": 0, "idler": 1}


class PhaseJumpWarning(UserWarning):
    """Cells were dropped because the wrapped phase jumped by more than the limit."""


@dataclass(frozen=True, eq=False)
class GradientField:
    """Finite phase difference along one axis, indexed ``[nu_s, nu_i]``.

    ``values[k] = phi(nu_k) - phi(nu_k + shear)`` where ``mask`` is True and
    zero elsewhere.
    """

    axis: str
    values: np.ndarray = field(repr=False)
    mask: np.ndarray = field(repr=False)
    shear: float
    grid_s: FrequencyGrid
    grid_i: FrequencyGrid
    n_flagged: int = 0

    def __post_init__(self):
        if self.axis not in _AXES:
            raise ContractError(f"axis must be 'signal' or 'idler', got {self.axis!r}")
        if self.shear == 0 or not np.isfinite(self.shear):
            raise ContractError("gradient needs a finite, nonzero shear")
        v = np.array(self.values, dtype=float, copy=True)
        m = np.array(self.mask, dtype=bool, copy=True)
        shape = (self.grid_s.n_points, self.grid_i.n_points)
        if v.shape != shape or m.shape != shape:
            raise ContractError(f"gradient arrays must have shape {shape}")
        if not np.all(np.isfinite(v)):
            raise ContractError("gradient contains non-finite values")
        v[~m] = 0.0
        for a in (v, m):
            a.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "mask", m)

    @property
    def axis_index(self) -> int:
        return _AXES[self.axis]

    @property
    def grid(self) -> FrequencyGrid:
        return self.grid_s if self.axis_index == 0 else self.grid_i

    def oriented(self):
        """``(values, mask)`` with the sheared axis first."""
        if self.axis_index == 0:
            return self.values, self.mask
        return self.values.T, self.mask.T


def _wrap(x):
    return (x + np.pi) % (2 * np.pi) - np.pi


def _runs(mask_line):
    """Half-open ``(start, stop)`` index pairs of consecutive True cells."""
    m = np.concatenate(([False], mask_line, [False])).astype(np.int8)
    d = np.diff(m)
    return list(zip(np.flatnonzero(d == 1), np.flatnonzero(d == -1)))


def unwrap_lines(wrapped: np.ndarray, mask: np.ndarray, weight: np.ndarray,
                 jump_limit: float = np.pi / 2):
    """Unwrap along axis 0 and make neighbouring lines 2pi-consistent.

    Each line (fixed index on axis 1) is unwrapped within its masked runs; a
    raw wrapped step larger than ``jump_limit`` ends a run and the cell after
    the jump is flagged and dropped.  Runs are then chained outward from the
    run containing the weighted centroid, each one shifted by the multiple
    of 2pi that best matches the already-aligned run beside it.  The seed run
    is placed so the centroid cell lies in ``(-pi, pi]``.

    Returns ``(unwrapped, mask, n_flagged, n_orphans)``.
    """
    n0, n1 = wrapped.shape
    out = np.zeros_like(wrapped, dtype=float)
    mask = mask.copy()
    runs = []  # (line, start, stop)
    n_flagged = 0
    for j in range(n1):
        for a, b in _runs(mask[:, j]):
            steps = _wrap(np.diff(wrapped[a:b, j]))
            start = a
            for k in np.flatnonzero(np.abs(steps) > jump_limit) + a + 1:
                if k < start:
                    continue
                if k > start:
                    runs.append((j, start, k))
                mask[k, j] = False
                n_flagged += 1
                start = k + 1
            if b > start:
                runs.append((j, start, b))
    if not runs:
        return out, mask, n_flagged, 0
    for j, a, b in runs:
        out[a, j] = wrapped[a, j]
        if b - a > 1:
            out[a + 1:b, j] = wrapped[a, j] + np.cumsum(_wrap(np.diff(wrapped[a:b, j])))

    w = np.where(mask, weight, 0.0)
    tot = w.sum()
    if tot > 0:
        ci = np.sum(w * np.arange(n0)[:, None]) / tot
        cj = np.sum(w * np.arange(n1)[None, :]) / tot
    else:
        ci, cj = n0 / 2, n1 / 2
    cells = np.argwhere(mask)
    seed_cell = cells[np.argmin((cells[:, 0] - ci) ** 2 + (cells[:, 1] - cj) ** 2)]
    by_line: dict[int, list[int]] = {}
    for r, (j, a, b) in enumerate(runs):
        by_line.setdefault(j, []).append(r)
    seed = next(r for r in by_line[seed_cell[1]] if runs[r][1] <= seed_cell[0] < runs[r][2])

    done = np.zeros(len(runs), bool)
    j, a, b = runs[seed]
    out[a:b, j] -= 2 * np.pi * np.round(out[seed_cell[0], j] / (2 * np.pi))
    done[seed] = True
    queue = deque([seed])
    while queue:
        r = queue.popleft()
        j, a, b = runs[r]
        for jn in (j - 1, j + 1):
            for rn in by_line.get(jn, ()):
                if done[rn]:
                    continue
                _, an, bn = runs[rn]
                lo, hi = max(a, an), min(b, bn)
                if lo >= hi:
                    continue
                off = np.mean(out[lo:hi, jn] - out[lo:hi, j])
                out[an:bn, jn] -= 2 * np.pi * np.round(off / (2 * np.pi))
                done[rn] = True
                queue.append(rn)
    n_orphans = int((~done).sum())
    for r in np.flatnonzero(~done):
        j, a, b = runs[r]
        mid = (a + b) // 2
        out[a:b, j] -= 2 * np.pi * np.round(out[mid, j] / (2 * np.pi))
    out[~mask] = 0.0
    return out, mask, n_flagged, n_orphans


def gradient_from_sideband(sb: ComplexField2D, cfg: ShearConfig, threshold: float = 0.05,
                           jump_limit: float = np.pi / 2) -> GradientField:
    """Demodulate the sideband carrier and unwrap the remaining phase.

    Cells whose sideband magnitude is below ``threshold`` times the maximum
    are masked out.  Unwrapping happens along the sheared axis; see
    :func:`unwrap_lines` for how lines are tied together.
    """
    if cfg.shear == 0:
        raise ContractError("cannot form a gradient with zero shear")
    if not 0 <= threshold < 1:
        raise ContractError(f"threshold must lie in [0, 1), got {threshold}")
    ax = cfg.axis
    v = sb.values if ax == 0 else sb.values.T
    g = sb.grid_a if ax == 0 else sb.grid_b
    # the drift is unknown to the analysis, so only the carrier is removed
    demod = v * np.exp(-1j * g.values * cfg.delay)[:, None]
    mag = np.abs(demod)
    mask = mag > threshold * mag.max() if mag.max() > 0 else np.zeros(mag.shape, bool)
    dphi, mask, n_flagged, n_orphans = unwrap_lines(np.angle(demod), mask, mag ** 2, jump_limit)
    if n_flagged:
        warnings.warn(f"{n_flagged} cells dropped at phase jumps above {jump_limit:.3g} rad",
                      PhaseJumpWarning, stacklevel=2)
    if n_orphans:
        warnings.warn(f"{n_orphans} masked runs not connected to the main region; "
                      "their 2pi offset is a guess", PhaseJumpWarning, stacklevel=2)
    if ax == 1:
        dphi, mask = dphi.T, mask.T
    return GradientField("signal" if ax == 0 else "idler", dphi, mask, float(cfg.shear),
                         sb.grid_a, sb.grid_b, n_flagged)
