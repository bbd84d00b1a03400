"""Phase retrieval: sidebands, gradients, zonal integration, fits."""
from .chain import RetrievalResult, retrieve_joint_phase
from .compose import JointCoordinate, SpatialPhaseTable, compose_relative_phase
from .fitting import DispersionFit, fit_dispersion
from .fringes import track_fringes
from .gradient import GradientField, PhaseJumpWarning, gradient_from_sideband
from .sideband import denoise, sideband_extract
from .spatial import CentroidRow, centroid_analysis, intensity_centroid
from .temporal import TemporalIntensity, to_temporal
from .zonal import PhaseSurface, integrate_axis, solve_links, zonal_solve

__all__ = [
    "CentroidRow", "DispersionFit", "GradientField", "JointCoordinate", "PhaseJumpWarning",
    "PhaseSurface", "RetrievalResult", "SpatialPhaseTable", "centroid_analysis",
    "compose_relative_phase", "denoise", "fit_dispersion", "gradient_from_sideband",
    "integrate_axis", "intensity_centroid", "retrieve_joint_phase", "sideband_extract",
    "solve_links", "to_temporal", "track_fringes", "zonal_solve",
]
