"""Numeric substrate: grids, transforms, units, randomness and file formats."""
from .fourier import fft1_along_axis, fft2_centered, resample_shift
from .grids import (ComplexField2D, FrequencyGrid, PositionAxis, SpatialGrid,
                    TimeGrid, UniformAxis)
from .rng import RandomStream, poisson_sample

__all__ = [
    "ComplexField2D", "FrequencyGrid", "PositionAxis", "SpatialGrid", "TimeGrid",
    "UniformAxis", "RandomStream", "fft1_along_axis", "fft2_centered",
    "poisson_sample", "resample_shift",
]
