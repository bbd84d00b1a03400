"""Polynomial dispersion model fitted to a retrieved joint spectral phase."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .._spec import SpecMixin
from ..errors import ContractError, NumericalPreconditionError
from .zonal import PhaseSurface

MIN_CELLS = 100


@dataclass(frozen=True)
class DispersionFit(SpecMixin):
    """``phi ~ c0 + c1 u + c2 u^2 + c3 u^3 + a_s nu_s^2 + a_i nu_i^2`` with ``u = nu_s + nu_i``.

    ``gdd = 2 c2`` (fs^2) and ``tod = 6 c3`` (fs^3) describe the pump;
    ``c2_signal``/``c2_idler`` are phases local to one photon.
    """

    c0: float
    c1: float
    c2: float
    c3: float
    c2_signal: float
    c2_idler: float
    residual_rms: float
    n_cells: int

    @property
    def gdd(self) -> float:
        return 2.0 * self.c2

    @property
    def tod(self) -> float:
        return 6.0 * self.c3

    def evaluate(self, nu_s, nu_i):
        u = nu_s + nu_i
        return (self.c0 + u * (self.c1 + u * (self.c2 + u * self.c3))
                + self.c2_signal * nu_s ** 2 + self.c2_idler * nu_i ** 2)

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["gdd"] = self.gdd
        d["tod"] = self.tod
        return d


def fit_dispersion(surface: PhaseSurface, weights: Optional[np.ndarray] = None,
                   local: bool = True) -> DispersionFit:
    """Weighted least squares over the surface mask.

    ``local=False`` drops the single-photon quadratic terms.  Raises
    :class:`NumericalPreconditionError` when the design is rank deficient,
    which happens for instance when the mask is a single line.
    """
    m = surface.mask
    if weights is not None:
        weights = np.asarray(weights, float)
        if weights.shape != m.shape or np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ContractError("weights must be finite, >= 0 and match the surface")
        m = m & (weights > 0)
    n = int(m.sum())
    if n < MIN_CELLS:
        raise ContractError(f"need at least {MIN_CELLS} masked cells to fit, got {n}")
    S, I = surface.mesh()
    s, i = S[m], I[m]
    scale = max(np.abs(s).max(), np.abs(i).max(), 1e-300)
    xs, xi = s / scale, i / scale
    u = xs + xi
    cols = [np.ones(n), u, u ** 2, u ** 3]
    if local:
        cols += [xs ** 2, xi ** 2]
    A = np.stack(cols, axis=1)
    w = np.ones(n) if weights is None else np.sqrt(weights[m])
    Aw = A * w[:, None]
    y = surface.values[m]
    if np.linalg.matrix_rank(Aw) < A.shape[1]:
        raise NumericalPreconditionError(
            "dispersion fit is rank deficient; the mask does not span enough of the joint grid")
    coef, *_ = np.linalg.lstsq(Aw, y * w, rcond=None)
    resid = y - A @ coef
    rms = float(np.sqrt(np.sum(w ** 2 * resid ** 2) / np.sum(w ** 2)))
    c = list(coef) + ([0.0, 0.0] if not local else [])
    p = [1.0, scale, scale ** 2, scale ** 3, scale ** 2, scale ** 2]
    c = [float(ck / pk) for ck, pk in zip(c, p)]
    return DispersionFit(c[0], c[1], c[2], c[3], c[4], c[5], rms, n)
