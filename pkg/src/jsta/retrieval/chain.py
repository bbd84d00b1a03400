"""End-to-end joint spectral phase retrieval from the two shear arms."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..errors import ContractError
from ..interferometer import Interferogram
from .fitting import DispersionFit, fit_dispersion
from .gradient import GradientField, gradient_from_sideband
from .sideband import denoise, sideband_extract
from .zonal import PhaseSurface, zonal_solve

DEFAULT_DENOISE_CUTOFF = 0.2
DEFAULT_THRESHOLD = 0.05


@dataclass(frozen=True, eq=False)
class RetrievalResult:
    gradient_signal: GradientField
    gradient_idler: GradientField
    surface: PhaseSurface
    fit: DispersionFit


def arm_gradient(ig: Interferogram, denoise_cutoff: Optional[float] = None,
                 threshold: float = DEFAULT_THRESHOLD) -> GradientField:
    if denoise_cutoff is not None:
        ig = denoise(ig, denoise_cutoff)
    return gradient_from_sideband(sideband_extract(ig), ig.shear, threshold)


def retrieve_joint_phase(ig_signal: Interferogram, ig_idler: Interferogram,
                         denoise_cutoff: Optional[float] = None, threshold: float = DEFAULT_THRESHOLD,
                         method: str = "cg") -> RetrievalResult:
    """Sideband, gradient, zonal surface and dispersion fit for one post-selection."""
    if ig_signal.shear.arm != "signal" or ig_idler.shear.arm != "idler":
        raise ContractError("need one signal-arm and one idler-arm interferogram")
    gs = arm_gradient(ig_signal, denoise_cutoff, threshold)
    gi = arm_gradient(ig_idler, denoise_cutoff, threshold)
    surface = zonal_solve(gs, gi, method=method)
    return RetrievalResult(gs, gi, surface, fit_dispersion(surface))
