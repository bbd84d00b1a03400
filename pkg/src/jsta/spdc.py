"""Ground-truth biphoton amplitudes.

The joint spectral amplitude is the product of a phase-matching function of
the frequency difference and the pump envelope evaluated at the frequency sum,

    psi(nu_s, nu_i) = N * Phi(dq, nu_s - nu_i) * E(nu_s + nu_i),

with the pump carrying a cubic spectral phase.  The joint spatial amplitude is
a double Gaussian over the sum and difference of transverse momenta, mapped
to detection-plane coordinates through ``q = k x / f``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ._spec import SpecMixin
from .core import units
from .core.grids import ComplexField2D, FrequencyGrid, SpatialGrid
from .errors import ConfigurationError, ContractError, TruncationError

SIGNAL_WAVELENGTH_NM = 1548.0
IDLER_WAVELENGTH_NM = 1544.0
DEFAULT_SPECTRAL_POINTS = 256
DEFAULT_SPECTRAL_SPACING = 3.2e-4  # rad/fs
KTP_INDEX_AT_PUMP = 1.84  # declared default, not a fitted value


def _finite(name, value):
    if not np.isfinite(value):
        raise ConfigurationError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class PumpSpec(SpecMixin):
    """Gaussian pump spectrum with polynomial spectral phase.

    ``bandwidth_fwhm`` is the intensity FWHM in nm.  The phase is
    ``c0 + c1 nu + c2 nu^2 + c3 nu^3`` (rad, fs, fs^2, fs^3), so the group
    delay dispersion is ``2 c2``.
    """

    center_wavelength: float = 773.0
    bandwidth_fwhm: float = 5.1
    c0: float = 0.0
    c1: float = 0.0
    c2: float = 0.0
    c3: float = 0.0
    waist: float = 0.25

    def __post_init__(self):
        for name in ("center_wavelength", "bandwidth_fwhm", "c0", "c1", "c2", "c3", "waist"):
            _finite(name, getattr(self, name))
        if self.bandwidth_fwhm <= 0:
            raise ConfigurationError("pump bandwidth_fwhm must be > 0")
        if self.waist <= 0:
            raise ConfigurationError("pump waist must be > 0")
        if self.center_wavelength <= 0:
            raise ConfigurationError("pump center_wavelength must be > 0")

    @property
    def bandwidth_angular(self) -> float:
        """Intensity FWHM in rad/fs."""
        return float(units.bandwidth_to_angular(self.bandwidth_fwhm, self.center_wavelength))

    @property
    def intensity_sigma(self) -> float:
        return float(units.fwhm_to_sigma(self.bandwidth_angular))

    @property
    def gdd(self) -> float:
        return 2.0 * self.c2

    @property
    def tod(self) -> float:
        return 6.0 * self.c3

    def phase(self, nu):
        nu = np.asarray(nu, dtype=float)
        return self.c0 + nu * (self.c1 + nu * (self.c2 + nu * self.c3))

    def amplitude(self, nu):
        """Unnormalised complex envelope; ``|E|^2`` has the configured FWHM."""
        nu = np.asarray(nu, dtype=float)
        s = self.intensity_sigma
        return np.exp(-nu ** 2 / (4 * s ** 2) + 1j * self.phase(nu))


def matched_pmf_width(pump: PumpSpec) -> float:
    """Spectral PMF width giving a separable (uncorrelated) joint intensity."""
    return float(np.sqrt(2.0) * pump.intensity_sigma)


def _default_k_pump() -> float:
    return float(units.wavenumber_per_mm(773.0, KTP_INDEX_AT_PUMP))


_DEFAULT_PMF_WIDTH = matched_pmf_width(PumpSpec())
_DEFAULT_Q_WIDTH = float(np.sqrt(4 * _default_k_pump() / 5.0))


@dataclass(frozen=True)
class CrystalSpec(SpecMixin):
    """Phase-matching model.

    ``pmf_spectral_width`` is the rms width (rad/fs) of the amplitude factor
    ``exp(-dnu^2 / 2 w^2)``; the default is matched to the default pump so the
    joint intensity factorises.  ``pmf_spatial_width`` plays the same role on
    ``|dq|`` for the gaussian shape; the sinc shape instead uses the
    small-angle mismatch ``dk_z = -|dq|^2 / (2 k_p)`` over ``length``.
    ``nu_q_coupling`` (fs mm) adds the optional per-photon phase
    ``coupling * (nu_s (q_sx + q_sy) + nu_i (q_ix + q_iy))``.
    """

    pmf_shape: str = "gaussian"
    pmf_spectral_width: float = _DEFAULT_PMF_WIDTH
    pmf_spatial_width: float = _DEFAULT_Q_WIDTH
    length: float = 5.0
    k_pump: float = _default_k_pump()
    nu_q_coupling: float = 0.0

    def __post_init__(self):
        if self.pmf_shape not in ("gaussian", "sinc"):
            raise ConfigurationError(f"pmf_shape must be 'gaussian' or 'sinc', got {self.pmf_shape!r}")
        for name in ("pmf_spectral_width", "pmf_spatial_width", "length", "k_pump"):
            v = getattr(self, name)
            _finite(name, v)
            if v <= 0:
                raise ConfigurationError(f"{name} must be > 0")
        _finite("nu_q_coupling", self.nu_q_coupling)


@dataclass(frozen=True)
class JointSpatialSpec(SpecMixin):
    """Double-Gaussian joint spatial amplitude in the far field.

    Widths are rms widths (rad/mm) of the amplitude on ``q_s + q_i`` and
    ``q_s - q_i``.  The default sum width follows from a 0.25 mm pump waist.
    Detection coordinates map to momenta as ``q = k x / focal_length``; the
    default focal length puts the coincidence rate at the +-1.5 mm scan edge
    at about 11% of the centre.
    """

    sigma_sum: float = float(np.sqrt(2.0) / 0.25)
    sigma_diff: float = _DEFAULT_Q_WIDTH
    wavefront: str = "flat"
    wavefront_coefficient: float = 0.0
    focal_length: float = 725.0
    signal_wavelength: float = SIGNAL_WAVELENGTH_NM
    idler_wavelength: float = IDLER_WAVELENGTH_NM

    def __post_init__(self):
        for name in ("sigma_sum", "sigma_diff", "focal_length", "signal_wavelength", "idler_wavelength"):
            v = getattr(self, name)
            _finite(name, v)
            if v <= 0:
                raise ConfigurationError(f"{name} must be > 0")
        if self.sigma_sum >= self.sigma_diff:
            raise ConfigurationError("sigma_sum must be smaller than sigma_diff (collimated-pump regime)")
        if self.wavefront not in ("flat", "quadratic"):
            raise ConfigurationError(f"wavefront must be 'flat' or 'quadratic', got {self.wavefront!r}")
        _finite("wavefront_coefficient", self.wavefront_coefficient)

    @property
    def k_signal(self) -> float:
        return float(units.wavenumber_per_mm(self.signal_wavelength))

    @property
    def k_idler(self) -> float:
        return float(units.wavenumber_per_mm(self.idler_wavelength))

    def signal_q(self, x):
        return self.k_signal * np.asarray(x, dtype=float) / self.focal_length

    def idler_q(self, x):
        return self.k_idler * np.asarray(x, dtype=float) / self.focal_length

    def signal_wavefront(self, x, y):
        if self.wavefront == "flat":
            return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)
        return self.wavefront_coefficient * (np.asarray(x) ** 2 + np.asarray(y) ** 2)


@dataclass(frozen=True)
class PostSelection(SpecMixin):
    """Detection points of both photons plus optional idler windows.

    ``coordinates`` is ``"x"`` (points in mm, mapped to momenta through the
    far-field relation) or ``"q"`` (points already in rad/mm).
    """

    signal_point: tuple = (0.0, 0.0)
    idler_point: tuple = (0.0, 0.0)
    coordinates: str = "x"
    idler_time_center: Optional[float] = None
    idler_time_width: Optional[float] = None
    idler_spectral_center: Optional[float] = None
    idler_spectral_width: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "signal_point", tuple(float(v) for v in self.signal_point))
        object.__setattr__(self, "idler_point", tuple(float(v) for v in self.idler_point))
        if len(self.signal_point) != 2 or len(self.idler_point) != 2:
            raise ConfigurationError("post-selection points must be (x, y) pairs")
        if self.coordinates not in ("x", "q"):
            raise ConfigurationError("coordinates must be 'x' or 'q'")
        for c, w in ((self.idler_time_center, self.idler_time_width),
                     (self.idler_spectral_center, self.idler_spectral_width)):
            if (c is None) != (w is None):
                raise ConfigurationError("window center and width must be given together")
            if w is not None and w <= 0:
                raise ConfigurationError("window widths must be > 0")

    def momenta(self, spatial: JointSpatialSpec):
        if self.coordinates == "q":
            return np.array(self.signal_point), np.array(self.idler_point)
        return spatial.signal_q(self.signal_point), spatial.idler_q(self.idler_point)

    def check_on_grid(self, grid: SpatialGrid):
        for name, p in (("signal", self.signal_point), ("idler", self.idler_point)):
            if not grid.contains(p):
                raise ContractError(f"{name} post-selection point {p} is not on the spatial grid")


@dataclass(frozen=True, eq=False)
class JointSpectralField(ComplexField2D):
    """Joint spectral amplitude indexed ``[nu_s, nu_i]``."""

    post_selection: Optional[PostSelection] = None

    def with_values(self, values) -> "JointSpectralField":
        return replace(self, values=values)

    def transpose(self) -> "JointSpectralField":
        return replace(self, grid_a=self.grid_b, grid_b=self.grid_a, values=self.values.T)


def default_grids(n_points: int = DEFAULT_SPECTRAL_POINTS, spacing: float = DEFAULT_SPECTRAL_SPACING):
    """Signal and idler relative-frequency grids centred on 1548 / 1544 nm."""
    gs = FrequencyGrid(n_points, spacing, center_angular_frequency=float(units.angular_frequency(SIGNAL_WAVELENGTH_NM)))
    gi = FrequencyGrid(n_points, spacing, center_angular_frequency=float(units.angular_frequency(IDLER_WAVELENGTH_NM)))
    return gs, gi


def pump_envelope(spec: PumpSpec, grid: FrequencyGrid) -> np.ndarray:
    """Pump envelope sampled on ``grid`` with unit discrete L2 norm."""
    if grid.span < 4 * spec.bandwidth_angular:
        raise TruncationError(
            f"grid span {grid.span:.4g} rad/fs is below 4x the pump bandwidth "
            f"({4 * spec.bandwidth_angular:.4g} rad/fs)")
    e = spec.amplitude(grid.values)
    return e / np.sqrt(np.sum(np.abs(e) ** 2) * grid.spacing)


def phase_matching(spec: CrystalSpec, dq, dnu):
    """Separable phase-matching function ``Phi(|dq|, dnu)``, peak value 1."""
    dq = np.asarray(dq, dtype=float)
    dnu = np.asarray(dnu, dtype=float)
    spectral = np.exp(-dnu ** 2 / (2 * spec.pmf_spectral_width ** 2))
    if spec.pmf_shape == "gaussian":
        spatial = np.exp(-dq ** 2 / (2 * spec.pmf_spatial_width ** 2))
    else:
        dkz = -dq ** 2 / (2 * spec.k_pump)
        spatial = np.sinc(dkz * spec.length / 2 / np.pi)
    return (spectral * spatial).astype(np.complex128)


def _apply_idler_windows(values, grid_i: FrequencyGrid, post: PostSelection):
    if post.idler_spectral_center is not None:
        nu_i = grid_i.values
        w = np.exp(-(nu_i - post.idler_spectral_center) ** 2 / (2 * post.idler_spectral_width ** 2))
        values = values * w[None, :]
    if post.idler_time_center is not None:
        from .core.fourier import conjugate_axis, fft1_array
        t = conjugate_axis(grid_i.n_points, grid_i.spacing)
        w = np.exp(-(t - post.idler_time_center) ** 2 / (2 * post.idler_time_width ** 2))
        spec = fft1_array(values, grid_i.spacing, axis=1) * w[None, :]
        values = fft1_array(spec, 2 * np.pi / grid_i.span, axis=1, direction="inverse")
    return values


def build_jsa(pump: PumpSpec, crystal: CrystalSpec, grid_s: FrequencyGrid, grid_i: FrequencyGrid,
              post: Optional[PostSelection] = None, spatial: Optional[JointSpatialSpec] = None,
              edge_tol: float = 1e-6) -> JointSpectralField:
    """Unit-norm joint spectral amplitude for one spatial post-selection."""
    post = post or PostSelection()
    spatial = spatial or JointSpatialSpec()
    q_s, q_i = post.momenta(spatial)
    dq = float(np.linalg.norm(q_s - q_i))

    nu_s, nu_i = np.meshgrid(grid_s.values, grid_i.values, indexing="ij")
    psi = phase_matching(crystal, dq, nu_s - nu_i) * pump.amplitude(nu_s + nu_i)
    if crystal.nu_q_coupling:
        psi = psi * np.exp(1j * crystal.nu_q_coupling * (nu_s * q_s.sum() + nu_i * q_i.sum()))
    psi = _apply_idler_windows(psi, grid_i, post)

    mag = np.abs(psi)
    peak = mag.max()
    if peak == 0:
        raise TruncationError("joint spectral amplitude vanishes on the grid")
    edge = max(mag[0].max(), mag[-1].max(), mag[:, 0].max(), mag[:, -1].max()) / peak
    if edge > edge_tol:
        raise TruncationError(f"|psi| at the grid edge is {edge:.3g} of the peak (> {edge_tol:g}); widen the grid")
    norm = np.sqrt(np.sum(mag ** 2) * grid_s.spacing * grid_i.spacing)
    return JointSpectralField(grid_s, grid_i, psi / norm, post_selection=post)


def apply_local_dispersion(psi: ComplexField2D, c2_signal: float = 0.0, c2_idler: float = 0.0):
    """Multiply by the separable phases ``exp(i c2_s nu_s^2) exp(i c2_i nu_i^2)``."""
    if c2_signal == 0 and c2_idler == 0:
        return psi
    nu_s, nu_i = psi.grid_a.values, psi.grid_b.values
    ph = np.exp(1j * c2_signal * nu_s ** 2)[:, None] * np.exp(1j * c2_idler * nu_i ** 2)[None, :]
    return psi.with_values(psi.values * ph)


def true_spectral_phase(pump: PumpSpec, grid_s: FrequencyGrid, grid_i: FrequencyGrid,
                        c2_signal: float = 0.0, c2_idler: float = 0.0) -> np.ndarray:
    """Continuous (unwrapped) joint spectral phase of the gaussian-PMF model."""
    nu_s, nu_i = np.meshgrid(grid_s.values, grid_i.values, indexing="ij")
    return pump.phase(nu_s + nu_i) + c2_signal * nu_s ** 2 + c2_idler * nu_i ** 2


def joint_spatial_amplitude(spec: JointSpatialSpec, signal_grid: SpatialGrid,
                            idler_grid: SpatialGrid) -> np.ndarray:
    """Unit-norm amplitude ``A[ix_s, iy_s, ix_i, iy_i]`` on the detection planes."""
    xs, ys = signal_grid.mesh()
    xi, yi = idler_grid.mesh()
    qxs, qys = spec.signal_q(xs)[:, :, None, None], spec.signal_q(ys)[:, :, None, None]
    qxi, qyi = spec.idler_q(xi)[None, None], spec.idler_q(yi)[None, None]
    a = _double_gaussian(spec, qxs, qys, qxi, qyi)
    a = a * np.exp(1j * spec.signal_wavefront(xs, ys))[:, :, None, None]
    return a / np.sqrt(np.sum(np.abs(a) ** 2))


def conditional_signal_amplitude(spec: JointSpatialSpec, signal_grid: SpatialGrid, idler_point) -> np.ndarray:
    """Signal amplitude ``[ix, iy]`` given the idler detected at ``idler_point`` (mm)."""
    xs, ys = signal_grid.mesh()
    qxi, qyi = spec.idler_q(idler_point[0]), spec.idler_q(idler_point[1])
    a = _double_gaussian(spec, spec.signal_q(xs), spec.signal_q(ys), qxi, qyi)
    return a * np.exp(1j * spec.signal_wavefront(xs, ys))


def _double_gaussian(spec, qxs, qys, qxi, qyi):
    ssum = (qxs + qxi) ** 2 + (qys + qyi) ** 2
    sdiff = (qxs - qxi) ** 2 + (qys - qyi) ** 2
    return np.exp(-ssum / (2 * spec.sigma_sum ** 2) - sdiff / (2 * spec.sigma_diff ** 2)).astype(np.complex128)


def anticorrelation_ratio(spec: JointSpatialSpec) -> float:
    """Conditional-mean slope ``-<q_s | q_i> / q_i`` of the double Gaussian."""
    a, b = spec.sigma_sum ** -2, spec.sigma_diff ** -2
    return (a - b) / (a + b)


def conditional_signal_centroid(spec: JointSpatialSpec, idler_point) -> np.ndarray:
    """Closed-form centroid (mm) of the conditional signal intensity."""
    x_i = np.asarray(idler_point, dtype=float)
    return -anticorrelation_ratio(spec) * (spec.k_idler / spec.k_signal) * x_i
