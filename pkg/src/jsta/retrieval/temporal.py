"""Joint temporal intensity and its second moments."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core.fourier import fft2_centered
from ..core.grids import ComplexField2D, TimeGrid
from ..errors import ContractError


@dataclass(frozen=True, eq=False)
class TemporalIntensity:
    """``|psi(t_s, t_i)|^2`` on the conjugate delay grids (fs)."""

    grid_a: TimeGrid
    grid_b: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.shape != (self.grid_a.n_points, self.grid_b.n_points):
            raise ContractError("JTI shape does not match its grids")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def cell_area(self) -> float:
        return self.grid_a.spacing * self.grid_b.spacing

    def total(self) -> float:
        return float(self.values.sum() * self.cell_area)

    def marginals(self):
        """``(P(t_s), P(t_i))`` integrated over the partner delay."""
        return (self.values.sum(axis=1) * self.grid_b.spacing,
                self.values.sum(axis=0) * self.grid_a.spacing)

    def moments(self) -> dict:
        """Means, rms widths, covariance and correlation coefficient."""
        w = self.values
        tot = w.sum()
        if tot <= 0:
            raise ContractError("JTI has zero total intensity")
        ts, ti = np.meshgrid(self.grid_a.values, self.grid_b.values, indexing="ij")
        ms, mi = np.sum(w * ts) / tot, np.sum(w * ti) / tot
        ds, di = ts - ms, ti - mi
        vs, vi = np.sum(w * ds ** 2) / tot, np.sum(w * di ** 2) / tot
        cov = np.sum(w * ds * di) / tot
        return {"mean_s": float(ms), "mean_i": float(mi), "rms_s": float(np.sqrt(vs)),
                "rms_i": float(np.sqrt(vi)), "covariance": float(cov),
                "correlation": float(cov / np.sqrt(vs * vi))}

    def correlation(self) -> float:
        return self.moments()["correlation"]


def to_temporal(psi: ComplexField2D) -> TemporalIntensity:
    """JTI as the squared magnitude of the centred 2D transform of ``psi``.

    The transform is unitary, so ``sum JTI dt_s dt_i`` equals
    ``sum |psi|^2 dnu_s dnu_i``.
    """
    f = fft2_centered(psi, "forward")
    return TemporalIntensity(f.grid_a, f.grid_b, np.abs(f.values) ** 2)


def compose_field(magnitude: np.ndarray, phase: np.ndarray, mask: np.ndarray, grid_a, grid_b) -> ComplexField2D:
    """``sqrt(JSI) * exp(i phi)`` restricted to the phase mask."""
    magnitude = np.asarray(magnitude, float)
    if np.any(magnitude < 0):
        raise ContractError("magnitude must be >= 0")
    return ComplexField2D(grid_a, grid_b, np.where(mask, magnitude * np.exp(1j * phase), 0.0))
