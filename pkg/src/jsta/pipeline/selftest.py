"""Fast invariant checks runnable from the command line."""
from __future__ import annotations

import numpy as np

from .. import interferometer as itf
from .. import kernels, spdc
from ..core.fourier import fft2_centered, resample_shift
from ..core.grids import ComplexField2D, FrequencyGrid, SpatialGrid
from ..retrieval.chain import retrieve_joint_phase
from ..retrieval.temporal import to_temporal


def _check(name, ok, detail):
    return {"name": name, "passed": bool(ok), "detail": detail}


def run_selftest(seed: int = 0) -> list[dict]:
    rng = np.random.default_rng(seed)
    out = []
    g = FrequencyGrid(64, 0.05)
    t = np.exp(-g.values ** 2 / 0.1)
    a, b = np.meshgrid(g.values, g.values, indexing="ij")
    psi = ComplexField2D(g, g, np.outer(t, t) * np.exp(1j * (rng.normal() * a * b + rng.normal() * a ** 2)))
    back = fft2_centered(fft2_centered(psi), "inverse")
    err = float(np.abs(back.values - psi.values).max())
    out.append(_check("fft2 round trip", err < 1e-12, f"max abs {err:.2e}"))
    par = abs(fft2_centered(psi).norm() - psi.norm())
    out.append(_check("Parseval", par < 1e-12, f"|dnorm| {par:.2e}"))
    a = resample_shift(resample_shift(psi, "a", 0.03), "a", 0.04)
    b = resample_shift(psi, "a", 0.07)
    err = float(np.abs(a.values - b.values).max())
    out.append(_check("shift composition", err < 1e-10, f"max abs {err:.2e}"))

    gs, gi = spdc.default_grids(128, 6.4e-4)
    field = spdc.build_jsa(spdc.PumpSpec(c2=-2e4), spdc.CrystalSpec(), gs, gi)
    cfg = itf.ShearConfig(shear=-3 * 6.4e-4, delay=1200.0)
    direct = itf.ssi_pattern(field, cfg).values
    d = float(np.abs(direct - itf.ssi_three_term(field, cfg)).max() / direct.max())
    out.append(_check("three-term expansion", d < 1e-12, f"max abs / peak {d:.2e}"))

    ig_s = itf.ssi_pattern(field, cfg)
    ig_i = itf.ssi_pattern(field, cfg.swapped())
    res = retrieve_joint_phase(ig_s, ig_i)
    rel = abs(res.fit.gdd / -4e4 - 1)
    out.append(_check("GDD round trip", rel < 5e-3, f"relative error {rel:.2e}"))

    jti = to_temporal(spdc.build_jsa(spdc.PumpSpec(), spdc.CrystalSpec(), gs, gi))
    c = abs(jti.correlation())
    out.append(_check("flat-phase JTI uncorrelated", c < 1e-6, f"|corr| {c:.2e}"))

    wa = rng.random((15, 16)) + 0.5
    wb = rng.random((16, 15)) + 0.5
    x = rng.normal(size=(16, 16))
    bvec = kernels.laplacian_matvec(wa, wb, x)
    sol, it, rr = kernels.pcg_laplacian(wa, wb, bvec, np.zeros_like(x), 1e-12, 2000)
    diff = np.asarray(sol) - x
    e = float(np.abs(diff - diff.mean()).max())
    out.append(_check(f"PCG kernel ({kernels.BACKEND})", e < 1e-8, f"max abs {e:.2e}, {it} iterations"))

    sp = spdc.JointSpatialSpec()
    grid = SpatialGrid(7, 7, 0.5)
    cen = spdc.conditional_signal_centroid(sp, (0.5, 0.5))
    out.append(_check("spatial anti-correlation sign", bool(np.all(cen < 0)), f"centroid {cen.round(4).tolist()}"))
    amp = spdc.conditional_signal_amplitude(sp, grid, (0.0, 0.0))
    ok = np.allclose(np.angle(amp), 0.0)
    out.append(_check("flat wavefront phase", ok, "conditional amplitude is real"))
    return out
