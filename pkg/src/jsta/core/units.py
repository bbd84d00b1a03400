"""Unit helpers for the I/O boundary.

Internally: time in fs, angular frequency in rad/fs, position in mm.
Wavelengths (nm) only appear in configuration and plots.
"""
import numpy as np

SPEED_OF_LIGHT_NM_PER_FS = 299.792458


def angular_frequency(wavelength_nm):
    """Absolute angular frequency (rad/fs) of a vacuum wavelength in nm."""
    return 2 * np.pi * SPEED_OF_LIGHT_NM_PER_FS / np.asarray(wavelength_nm, dtype=float)


def wavelength_nm(angular_freq):
    return 2 * np.pi * SPEED_OF_LIGHT_NM_PER_FS / np.asarray(angular_freq, dtype=float)


def bandwidth_to_angular(width_nm, center_nm):
    """Small-bandwidth conversion of a wavelength width to rad/fs."""
    return 2 * np.pi * SPEED_OF_LIGHT_NM_PER_FS * np.asarray(width_nm, dtype=float) / center_nm ** 2


def angular_to_bandwidth(width_rad_fs, center_nm):
    return np.asarray(width_rad_fs, dtype=float) * center_nm ** 2 / (2 * np.pi * SPEED_OF_LIGHT_NM_PER_FS)


def relative_frequency(wavelength, center_nm):
    """Relative angular frequency nu = omega - Omega for wavelengths in nm."""
    return angular_frequency(wavelength) - angular_frequency(center_nm)


def wavelength_of_relative(nu, center_nm):
    return wavelength_nm(np.asarray(nu) + angular_frequency(center_nm))


def ghz_to_angular(f_ghz):
    """Linear frequency in GHz to angular frequency in rad/fs."""
    return 2 * np.pi * np.asarray(f_ghz, dtype=float) * 1e-6


def wavenumber_per_mm(wavelength, refractive_index=1.0):
    """k = 2 pi n / lambda in rad/mm for a wavelength in nm."""
    return 2 * np.pi * refractive_index / (np.asarray(wavelength, dtype=float) * 1e-6)


def fwhm_to_sigma(fwhm):
    return fwhm / (2 * np.sqrt(2 * np.log(2)))


def sigma_to_fwhm(sigma):
    return sigma * 2 * np.sqrt(2 * np.log(2))
