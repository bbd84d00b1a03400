"""Fourier-filter processing of shearing interferograms."""
from __future__ import annotations

import numpy as np

from ..core.fourier import conjugate_axis, fft1_array
from ..core.grids import ComplexField2D
from ..errors import ConfigurationError, LobeOverlapError
from ..interferometer import Interferogram


def _fft2(values, da, db, direction="forward"):
    v = fft1_array(values, da, 0, direction)
    return fft1_array(v, db, 1, direction)


def denoise(ig: Interferogram, cutoff: float) -> Interferogram:
    """Low-pass the interferogram while keeping the interference sidebands.

    Conjugate-domain content is kept inside a disc of radius
    ``cutoff * Nyquist`` (per-axis normalised) around the origin and inside
    discs of the same radius around ``(+-delay, 0)`` on the sheared axis.
    ``cutoff >= 1`` keeps everything.  Negative values left by the filter are
    clamped to zero.
    """
    if not 0 < cutoff <= 1:
        raise ConfigurationError(f"denoise cutoff must lie in (0, 1], got {cutoff}")
    if cutoff >= 1:
        return ig.with_values(np.clip(ig.values, 0, None), denoised=True)
    ga, gb = ig.grid_s, ig.grid_i
    na, nb = ig.values.shape
    ta, tb = conjugate_axis(na, ga.spacing), conjugate_axis(nb, gb.spacing)
    nyq_a, nyq_b = np.pi / ga.spacing, np.pi / gb.spacing
    ax = ig.shear.axis
    tau = ig.shear.delay
    nyq_sh = nyq_a if ax == 0 else nyq_b
    if cutoff * nyq_sh < tau / 4:
        raise ConfigurationError(
            f"cutoff {cutoff} keeps only +-{cutoff * nyq_sh:.0f} fs around each sideband; "
            f"need at least {tau / 4:.0f} fs (delay/4) to keep the sideband")
    A, B = np.meshgrid(ta / nyq_a, tb / nyq_b, indexing="ij")
    keep = A ** 2 + B ** 2 <= cutoff ** 2
    if not ig.shear.blocked:
        d = tau / nyq_sh
        for sgn in (1, -1):
            if ax == 0:
                keep |= (A - sgn * d) ** 2 + B ** 2 <= cutoff ** 2
            else:
                keep |= A ** 2 + (B - sgn * d) ** 2 <= cutoff ** 2
    spec = _fft2(ig.values, ga.spacing, gb.spacing) * keep
    out = _fft2(spec, 2 * np.pi / (na * ga.spacing), 2 * np.pi / (nb * gb.spacing), "inverse").real
    return ig.with_values(np.clip(out, 0, None), denoised=True)


def super_gaussian_window(t, center, half_width, order=6):
    """Flat-top window equal to 1/2 at ``center +- half_width``."""
    return np.exp(-np.log(2) * np.abs((t - center) / half_width) ** order)


def _rms_width(t, p):
    w = p.sum()
    if w <= 0:
        return 0.0
    mu = np.sum(t * p) / w
    return float(np.sqrt(np.sum((t - mu) ** 2 * p) / w))


def lobe_separation(ig: Interferogram) -> float:
    """Delay divided by the summed rms widths of the DC and +delay lobes."""
    v = ig.values if ig.shear.axis == 0 else ig.values.T
    g = ig.grid_s if ig.shear.axis == 0 else ig.grid_i
    tau = ig.shear.delay
    t = conjugate_axis(v.shape[0], g.spacing)
    p = np.sum(np.abs(fft1_array(v, g.spacing, 0)) ** 2, axis=1)
    p = np.clip(p - np.median(p), 0, None)
    dc = np.abs(t) < tau / 2
    sb = np.abs(t - tau) < tau / 2
    width = _rms_width(t[dc], p[dc]) + _rms_width(t[sb], p[sb])
    return float("inf") if width == 0 else tau / width


def sideband_extract(ig: Interferogram, window_order: int = 6, half_width=None,
                     min_separation: float = 3.0) -> ComplexField2D:
    """Isolate the ``+delay`` lobe along the sheared axis.

    Returns ``|psi(nu) psi*(nu + shear)| exp(i [nu tau + dphi])`` on the
    interferogram grid.
    """
    tau = ig.shear.delay
    ratio = lobe_separation(ig)
    if ratio < min_separation:
        raise LobeOverlapError(
            f"conjugate-domain lobes overlap: delay / lobe width = {ratio:.2f} (< {min_separation})", ratio)
    ax = ig.shear.axis
    g = ig.grid_s if ax == 0 else ig.grid_i
    v = ig.values if ax == 0 else ig.values.T
    hw = tau / 2 if half_width is None else half_width
    t = conjugate_axis(v.shape[0], g.spacing)
    # demodulate so the +delay lobe sits on t = 0 for any delay, on-grid or not
    carrier = np.exp(1j * g.values * tau)[:, None]
    spec = fft1_array(v / carrier, g.spacing, 0) * super_gaussian_window(t, 0.0, hw, window_order)[:, None]
    sb = fft1_array(spec, 2 * np.pi / g.span, 0, "inverse") * carrier
    if ax == 1:
        sb = sb.T
    return ComplexField2D(ig.grid_s, ig.grid_i, sb)
