"""Spatial phase from the positions of spectral interference peaks."""
from __future__ import annotations

import numpy as np

from ..core import units
from ..core.grids import SpatialGrid
from ..errors import ContractError
from ..interferometer import FringeScan
from .zonal import PhaseSurface

MIN_PEAKS = 3


def fringe_envelope(spectrum: np.ndarray, wavelengths: np.ndarray, delay: float) -> np.ndarray:
    """Slowly varying background of a fringe spectrum.

    The spectrum is low-passed along the wavelength samples at half the
    local fringe frequency, so the interference term is removed.
    """
    n = spectrum.shape[-1]
    step = float(np.mean(np.diff(wavelengths)))
    lam0 = float(np.mean(wavelengths))
    period_nm = lam0 ** 2 / (units.SPEED_OF_LIGHT_NM_PER_FS * delay)
    f = np.fft.rfftfreq(2 * n, d=step)
    keep = f <= 0.5 / period_nm
    # mirror-extend to keep the ends from wrapping onto each other
    ext = np.concatenate([spectrum, spectrum[..., ::-1]], axis=-1)
    lp = np.fft.irfft(np.fft.rfft(ext, axis=-1) * keep, n=2 * n, axis=-1)[..., :n]
    return lp


def find_peaks(y: np.ndarray) -> np.ndarray:
    """Sub-sample local maxima (fractional indices) by three-point parabolas.

    A plateau of two equal samples counts once, at the lower index.
    """
    y = np.asarray(y, float)
    if y.size < 3:
        return np.zeros(0)
    c = y[1:-1]
    is_max = (c > y[:-2]) & (c >= y[2:])
    k = np.flatnonzero(is_max) + 1
    ym, y0, yp = y[k - 1], y[k], y[k + 1]
    den = ym - 2 * y0 + yp
    off = np.where(den != 0, 0.5 * (ym - yp) / np.where(den != 0, den, 1.0), 0.0)
    return k + off


def peak_frequencies(spectrum: np.ndarray, wavelengths: np.ndarray, delay: float,
                     level: float = 0.1) -> np.ndarray:
    """Angular frequencies (rad/fs, ascending) of the fringe maxima in band."""
    env = fringe_envelope(spectrum, wavelengths, delay)
    if env.max() <= 0:
        return np.zeros(0)
    band = env >= level * env.max()
    ratio = np.where(band, spectrum / np.where(band, env, 1.0), 0.0)
    idx = find_peaks(ratio)
    # a peak needs half a fringe period of in-band samples on either side;
    # maxima cut by the band edge are not fringe maxima
    lam0 = float(np.mean(wavelengths))
    half = int(np.ceil(0.5 * lam0 ** 2 / (units.SPEED_OF_LIGHT_NM_PER_FS * delay)
                       / float(np.mean(np.diff(wavelengths)))))
    k = np.rint(idx).astype(int)
    inside = np.concatenate(([0], np.cumsum(band)))
    lo, hi = np.maximum(k - half, 0), np.minimum(k + half + 1, band.size)
    ok = (inside[hi] - inside[lo] == hi - lo) & (k - half >= 0) & (k + half < band.size)
    idx = idx[ok]
    lam = np.interp(idx, np.arange(wavelengths.size), wavelengths)
    return np.sort(units.angular_frequency(lam))


def _unwrap_from_origin(phase, valid, ox, oy):
    """Continuity unwrap: the row through the origin, then each column from it."""
    out = phase.copy()
    nx, ny = phase.shape

    def chain(line_idx):
        prev = None
        for idx in line_idx:
            if not valid[idx]:
                prev = None
                continue
            if prev is not None:
                out[idx] = out[prev] + np.angle(np.exp(1j * (out[idx] - out[prev])))
            prev = idx

    chain([(ix, oy) for ix in range(ox, nx)])
    chain([(ix, oy) for ix in range(ox, -1, -1)])
    for ix in range(nx):
        chain([(ix, iy) for iy in range(oy, ny)])
        chain([(ix, iy) for iy in range(oy, -1, -1)])
    return out


def track_fringes(scan: FringeScan, level: float = 0.1) -> PhaseSurface:
    """Wavefront (rad) relative to the scan origin from fringe-peak shifts.

    Peaks at every position are matched to the nearest peak of the origin
    spectrum; ``2 pi * shift / period`` is averaged as a unit phasor so that
    mismatched neighbours one period away do not bias the mean.  Positions
    with fewer than three peaks are left out of the mask.
    """
    grid: SpatialGrid = scan.grid
    if grid.n_x % 2 == 0 or grid.n_y % 2 == 0:
        raise ContractError("the scan grid must contain the origin (odd point counts)")
    ox, oy = grid.n_x // 2, grid.n_y // 2
    period = 2 * np.pi / scan.delay
    ref = peak_frequencies(scan.spectra[ox, oy], scan.wavelengths, scan.delay, level)
    if ref.size < MIN_PEAKS:
        raise ContractError(f"origin spectrum has {ref.size} resolvable peaks (need {MIN_PEAKS})")
    phase = np.zeros((grid.n_x, grid.n_y))
    valid = np.zeros((grid.n_x, grid.n_y), bool)
    for ix in range(grid.n_x):
        for iy in range(grid.n_y):
            pk = peak_frequencies(scan.spectra[ix, iy], scan.wavelengths, scan.delay, level)
            if pk.size < MIN_PEAKS:
                continue
            nearest = pk[np.argmin(np.abs(pk[None, :] - ref[:, None]), axis=1)]
            shift = nearest - ref
            phase[ix, iy] = np.angle(np.mean(np.exp(-2j * np.pi * shift / period)))
            valid[ix, iy] = True
    if not valid[ox, oy]:
        raise ContractError("origin position is invalid")
    phase = _unwrap_from_origin(phase, valid, ox, oy)
    phase -= phase[ox, oy]
    return PhaseSurface(grid.x_axis, grid.y_axis, phase, valid, pin=(ox, oy))
