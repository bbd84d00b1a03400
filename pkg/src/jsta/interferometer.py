"""Forward model of the measured observables.

Two instruments are modelled: the spectral shearing interferometer, whose
output is ``|psi(nu) exp(i nu tau) + psi(nu + shear)|^2`` along the sheared
photon's axis, and the spatial scan, in which a Gaussian-filtered copy of the
signal interferes with itself after a delay so that spectral fringe positions
track the local wavefront.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ._spec import SpecMixin
from .core import units
from .core.fourier import conjugate_axis, fft1_array, shift_array, check_edge_energy
from .core.grids import FrequencyGrid, SpatialGrid
from .core.rng import RandomStream, poisson_sample
from .errors import ConfigurationError, ContractError
from .spdc import JointSpectralField, PostSelection

DEFAULT_SHEAR = float(units.ghz_to_angular(-150.0))  # rad/fs
DEFAULT_DELAY = 2500.0  # fs


@dataclass(frozen=True)
class ShearConfig(SpecMixin):
    """Shear (rad/fs) and delay (fs) of the interferometer.

    ``arm`` names the photon routed through the interferometer.  ``blocked``
    removes the sheared arm, leaving the joint spectral intensity.
    ``phase_drift`` (rad) is added to the delayed arm; zero means perfect
    locking.
    """

    shear: float = DEFAULT_SHEAR
    delay: float = DEFAULT_DELAY
    arm: str = "signal"
    blocked: bool = False
    phase_drift: float = 0.0

    def __post_init__(self):
        if self.arm not in ("signal", "idler"):
            raise ConfigurationError(f"arm must be 'signal' or 'idler', got {self.arm!r}")
        if not np.isfinite(self.shear) or not np.isfinite(self.delay):
            raise ConfigurationError("shear and delay must be finite")
        if self.delay <= 0:
            raise ConfigurationError("delay must be > 0")

    @property
    def axis(self) -> int:
        return 0 if self.arm == "signal" else 1

    def swapped(self) -> "ShearConfig":
        return replace(self, arm="idler" if self.arm == "signal" else "signal")


@dataclass(frozen=True)
class DetectorConfig(SpecMixin):
    """Spectrometer resolution per path (nm FWHM) and the count budget.

    The photon sent through the interferometer reaches the long dispersion
    fibre (``resolution_ssi``); the directly detected photon the short one
    (``resolution_direct``).
    """

    resolution_ssi: float = 0.084
    resolution_direct: float = 0.169
    total_counts: float = 1.8e6

    def __post_init__(self):
        if self.resolution_ssi < 0 or self.resolution_direct < 0:
            raise ConfigurationError("resolutions must be >= 0")
        if self.total_counts < 0:
            raise ConfigurationError("total_counts must be >= 0")


@dataclass(frozen=True, eq=False)
class Interferogram:
    """Real, nonnegative pattern on ``(nu_s, nu_i)`` with its provenance."""

    values: np.ndarray = field(repr=False)
    grid_s: FrequencyGrid
    grid_i: FrequencyGrid
    shear: ShearConfig
    detector: DetectorConfig = DetectorConfig()
    post_selection: Optional[PostSelection] = None
    noise: Optional[dict] = None
    detector_applied: bool = False
    denoised: bool = False

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.shape != (self.grid_s.n_points, self.grid_i.n_points):
            raise ContractError(f"interferogram shape {v.shape} does not match its grids")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ContractError("interferogram values must be finite and >= 0")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def noiseless(self) -> bool:
        return self.noise is None

    def with_values(self, values, **changes) -> "Interferogram":
        return replace(self, values=values, **changes)

    def metadata(self) -> dict:
        return {
            "shear": self.shear.to_dict(),
            "detector": self.detector.to_dict(),
            "post_selection": None if self.post_selection is None else self.post_selection.to_dict(),
            "noise": self.noise,
            "detector_applied": self.detector_applied,
            "denoised": self.denoised,
            "grid_s": self.grid_s.to_dict(),
            "grid_i": self.grid_i.to_dict(),
        }


def _oriented(psi: JointSpectralField, cfg: ShearConfig):
    """Values with the sheared axis first, plus that axis' grid."""
    if cfg.axis == 0:
        return psi.values, psi.grid_a
    return psi.values.T, psi.grid_b


def _arms(psi: JointSpectralField, cfg: ShearConfig):
    v, g = _oriented(psi, cfg)
    delayed = v * np.exp(1j * (g.values * cfg.delay + cfg.phase_drift))[:, None]
    if cfg.blocked:
        return delayed, None
    if cfg.shear == 0:
        return delayed, v
    if abs(cfg.shear) >= g.span / 4:
        raise ContractError("|shear| must be below a quarter of the axis span")
    check_edge_energy(v, 0)
    return delayed, shift_array(v, g.spacing, cfg.shear, 0)


def _orient_back(s, cfg):
    return s if cfg.axis == 0 else s.T


def ssi_pattern(psi: JointSpectralField, cfg: ShearConfig) -> Interferogram:
    """Noiseless shearing interferogram (direct ``|a + b|^2``)."""
    a, b = _arms(psi, cfg)
    s = np.abs(a) ** 2 if b is None else np.abs(a + b) ** 2
    return Interferogram(_orient_back(s, cfg), psi.grid_a, psi.grid_b, cfg,
                         post_selection=getattr(psi, "post_selection", None))


def ssi_three_term(psi: JointSpectralField, cfg: ShearConfig) -> np.ndarray:
    """The same pattern written as ``|a|^2 + |b|^2 + 2 Re[a b*]``."""
    a, b = _arms(psi, cfg)
    if b is None:
        return _orient_back(np.abs(a) ** 2, cfg)
    s = np.abs(a) ** 2 + np.abs(b) ** 2 + 2 * np.real(a * np.conj(b))
    return _orient_back(s, cfg)


def resolution_widths(ig: Interferogram) -> tuple[float, float]:
    """Gaussian FWHM (rad/fs) applied along ``nu_s`` and ``nu_i``."""
    det = ig.detector
    res_s, res_i = ((det.resolution_ssi, det.resolution_direct) if ig.shear.arm == "signal"
                    else (det.resolution_direct, det.resolution_ssi))
    lam_s = float(units.wavelength_nm(ig.grid_s.center_angular_frequency)) if ig.grid_s.center_angular_frequency else 1548.0
    lam_i = float(units.wavelength_nm(ig.grid_i.center_angular_frequency)) if ig.grid_i.center_angular_frequency else 1544.0
    return (float(units.bandwidth_to_angular(res_s, lam_s)), float(units.bandwidth_to_angular(res_i, lam_i)))


def gaussian_blur(values: np.ndarray, spacing: float, fwhm: float, axis: int) -> np.ndarray:
    """Convolve with a unit-area Gaussian of ``fwhm`` (applied in the conjugate domain)."""
    if fwhm == 0:
        return values
    n = values.shape[axis]
    if fwhm > n * spacing / 4:
        raise ConfigurationError(
            f"resolution kernel FWHM {fwhm:.3g} exceeds a quarter of the grid span {n * spacing / 4:.3g}")
    sigma = units.fwhm_to_sigma(fwhm)
    t = conjugate_axis(n, spacing)
    shape = [1] * values.ndim
    shape[axis] = n
    spec = fft1_array(values, spacing, axis) * np.exp(-0.5 * (sigma * t) ** 2).reshape(shape)
    return fft1_array(spec, 2 * np.pi / (n * spacing), axis, "inverse").real


def apply_detector(ig: Interferogram) -> Interferogram:
    """Finite spectrometer resolution on both axes; total intensity is kept."""
    ws, wi = resolution_widths(ig)
    v = gaussian_blur(ig.values, ig.grid_s.spacing, ws, 0)
    v = gaussian_blur(v, ig.grid_i.spacing, wi, 1)
    peak = max(float(np.abs(v).max()), 1e-300)
    # the periodic kernel of a sub-cell Gaussian rings slightly at interference nulls
    if v.min() < -1e-6 * peak:
        raise ContractError("resolution blur produced significant negative values")
    return ig.with_values(np.clip(v, 0.0, None), detector_applied=True)


def measure(ig: Interferogram, stream: Optional[RandomStream], noiseless: bool = False) -> Interferogram:
    """Scale to the count budget and draw Poisson counts per cell."""
    if noiseless or stream is None:
        return ig
    total = ig.detector.total_counts
    s = ig.values.sum()
    mean = np.zeros_like(ig.values) if total == 0 or s == 0 else ig.values * (total / s)
    counts = poisson_sample(mean, stream).astype(float)
    return ig.with_values(counts, noise={"kind": "poisson", "total_counts": float(total), **stream.to_dict()})


# --------------------------------------------------------------------------- spatial arm

@dataclass(frozen=True, eq=False)
class FringeScan:
    """Spectra ``[ix, iy, k]`` recorded at each scan point over ``wavelengths`` (nm)."""

    spectra: np.ndarray = field(repr=False)
    wavelengths: np.ndarray = field(repr=False)
    delay: float
    grid: SpatialGrid

    def __post_init__(self):
        if self.spectra.shape != (self.grid.n_x, self.grid.n_y, len(self.wavelengths)):
            raise ContractError("fringe spectra shape does not match the scan grid / wavelength axis")


def default_wavelength_axis(center_nm: float = 1548.0, half_width_nm: float = 40.0, step_nm: float = 0.05):
    n = int(round(2 * half_width_nm / step_nm)) + 1
    return center_nm + (np.arange(n) - n // 2) * step_nm


def signal_marginal_spectrum(psi: JointSpectralField, wavelengths) -> np.ndarray:
    """Signal intensity spectrum (summed over the idler) resampled onto ``wavelengths``."""
    marg = np.sum(np.abs(psi.values) ** 2, axis=1)
    center = psi.grid_a.center_angular_frequency
    nu = units.angular_frequency(wavelengths) - center
    return np.interp(nu, psi.grid_a.values, marg, left=0.0, right=0.0)


def gaussian_reference(amplitude: np.ndarray, grid: SpatialGrid, waist: float = 1.0) -> np.ndarray:
    """Flat-phase fundamental Gaussian carrying the mode overlap of ``amplitude``."""
    x, y = grid.mesh()
    g = np.exp(-(x ** 2 + y ** 2) / waist ** 2)
    g = g / np.sqrt(np.sum(g ** 2))
    return np.vdot(g, amplitude) * g


def fringe_periods_in_band(spectrum, wavelengths, delay, level: float = 0.1) -> float:
    band = np.asarray(wavelengths)[np.asarray(spectrum) >= level * np.max(spectrum)]
    if band.size < 2:
        return 0.0
    w = units.angular_frequency(band)
    return float((w.max() - w.min()) * delay / (2 * np.pi))


def spatial_fringe_pattern(amplitude: np.ndarray, reference: np.ndarray, delay: float, grid: SpatialGrid,
                           wavelengths=None, spectrum=None, resolution_nm: float = 0.0) -> FringeScan:
    """Spectral fringes ``s(lam) |A(x) exp(i w tau) + R(x)|^2`` at each scan point.

    ``spectrum`` is the signal intensity spectrum on ``wavelengths``; by
    default a Gaussian of 14.5 nm FWHM at 1548 nm.
    """
    if wavelengths is None:
        wavelengths = default_wavelength_axis()
    wavelengths = np.asarray(wavelengths, dtype=float)
    if spectrum is None:
        spectrum = np.exp(-4 * np.log(2) * ((wavelengths - 1548.0) / 14.5) ** 2)
    spectrum = np.asarray(spectrum, dtype=float)
    amplitude = np.asarray(amplitude)
    reference = np.asarray(reference)
    if amplitude.shape != (grid.n_x, grid.n_y) or reference.shape != amplitude.shape:
        raise ContractError("amplitude and reference must be sampled on the scan grid")
    periods = fringe_periods_in_band(spectrum, wavelengths, delay)
    if periods < 3:
        raise ConfigurationError(
            f"delay {delay:g} fs gives only {periods:.2f} fringe periods in band (need >= 3)")
    w = units.angular_frequency(wavelengths)
    carrier = np.exp(1j * w * delay)
    field_ = amplitude[:, :, None] * carrier[None, None, :] + reference[:, :, None]
    spectra = np.abs(field_) ** 2 * spectrum[None, None, :]
    if resolution_nm > 0:
        step = float(np.mean(np.diff(wavelengths)))
        spectra = _blur_direct(spectra, step, resolution_nm)
    return FringeScan(spectra, wavelengths, float(delay), grid)


def _blur_direct(spectra, step, fwhm):
    from scipy.ndimage import gaussian_filter1d
    return gaussian_filter1d(spectra, units.fwhm_to_sigma(fwhm) / step, axis=-1, mode="constant")
