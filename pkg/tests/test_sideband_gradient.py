import warnings

import numpy as np
import pytest

from jsta import interferometer as itf
from jsta import spdc
from jsta.core.fourier import shift_array
from jsta.core.grids import ComplexField2D
from jsta.core.rng import RandomStream
from jsta.errors import ConfigurationError, LobeOverlapError
from jsta.retrieval.chain import retrieve_joint_phase
from jsta.retrieval.gradient import PhaseJumpWarning, gradient_from_sideband, unwrap_lines
from jsta.retrieval.sideband import denoise, lobe_separation, sideband_extract


def _psi(grids, **pump):
    return spdc.build_jsa(spdc.PumpSpec(**pump), spdc.CrystalSpec(), *grids)


# exactness checks need well separated lobes: with the default 2.5 ps delay and
# order-6 window the DC lobe leaks ~1e-4 rad into the sideband
SEP = dict(delay=4000.0)
STEEP = 16


# --- denoise

def test_denoise_cutoff_one_is_identity(grids):
    ig = itf.ssi_pattern(_psi(grids, c2=-1.33e5), itf.ShearConfig())
    out = denoise(ig, 1.0)
    assert np.array_equal(out.values, ig.values) and out.denoised


def test_denoise_white_noise_variance(grids):
    ratios = []
    for seed in range(5):
        rng = np.random.default_rng(seed)
        v = 100.0 + rng.normal(0, 10.0, (256, 256))
        ig = itf.Interferogram(v, *grids, itf.ShearConfig())
        out = denoise(ig, 0.1).values
        ratios.append(out.var() / v.var())
    assert np.mean(ratios) < 0.03


def test_denoise_rejects_bad_cutoff(grids):
    ig = itf.Interferogram(np.ones((256, 256)), *grids, itf.ShearConfig())
    for c in (0.0, 1.5):
        with pytest.raises(ConfigurationError):
            denoise(ig, c)
    # 0.05 of Nyquist keeps under delay / 4 around the sideband
    with pytest.raises(ConfigurationError):
        denoise(ig, 0.05)


def test_denoise_leaves_noiseless_retrieval_unchanged(grids):
    psi = _psi(grids, c2=-1.33e5)
    cfg = itf.ShearConfig()
    ig_s, ig_i = itf.ssi_pattern(psi, cfg), itf.ssi_pattern(psi, cfg.swapped())
    a = retrieve_joint_phase(ig_s, ig_i).surface
    b = retrieve_joint_phase(ig_s, ig_i, denoise_cutoff=0.2).surface
    d = a.relative_to(b)
    m = a.mask & b.mask
    assert np.sqrt(np.mean(d[m] ** 2)) < 1e-3


# --- sideband

def test_zero_shear_flat_phase_gives_pure_ramp(grids):
    psi = _psi(grids)
    cfg = itf.ShearConfig(shear=0.0, **SEP)
    sb = sideband_extract(itf.ssi_pattern(psi, cfg), window_order=STEEP).values
    nu = grids[0].values[:, None]
    m = np.abs(sb) > 0.05 * np.abs(sb).max()
    resid = np.angle(sb * np.exp(-1j * nu * cfg.delay))
    assert np.ptp(resid[m]) < 1e-9


def test_sideband_bounded_by_geometric_mean(grids):
    # modest phases keep the chirped pulse inside the conjugate window; a
    # time-aliased field makes the sheared arm a wrapped, not a true, shift
    psi = _psi(grids, c2=-2e4, c3=5e5)
    cfg = itf.ShearConfig(**SEP)
    sb = np.abs(sideband_extract(itf.ssi_pattern(psi, cfg), window_order=STEEP).values)
    j0 = np.abs(psi.values) ** 2
    j1 = np.abs(shift_array(psi.values, grids[0].spacing, cfg.shear, 0)) ** 2
    assert np.all(sb <= np.sqrt(j0 * j1) + 1e-9 * sb.max())


def test_sideband_matches_product_term(grids):
    # a 4 ps delay and a steep window make the lobes well separated
    psi = _psi(grids, c2=-2e4)
    cfg = itf.ShearConfig(**SEP)
    sb = sideband_extract(itf.ssi_pattern(psi, cfg), window_order=STEEP).values
    b = shift_array(psi.values, grids[0].spacing, cfg.shear, 0)
    prod = psi.values * np.conj(b) * np.exp(1j * grids[0].values * cfg.delay)[:, None]
    m = np.abs(prod) > 0.05 * np.abs(prod).max()
    assert (np.abs(sb - prod)[m] / np.abs(prod[m])).max() < 1e-6


def test_sideband_idler_arm_matches_transpose(grids):
    psi = _psi(grids, c2=-1.33e5)
    cfg = itf.ShearConfig(arm="idler")
    a = sideband_extract(itf.ssi_pattern(psi, cfg)).values
    b = sideband_extract(itf.ssi_pattern(psi.transpose(), cfg.swapped())).values
    assert np.abs(a - b.T).max() < 1e-12 * np.abs(a).max()


def test_lobe_overlap_error(grids):
    ig = itf.ssi_pattern(_psi(grids, c2=-1.33e5), itf.ShearConfig(delay=300.0))
    with pytest.raises(LobeOverlapError) as exc:
        sideband_extract(ig)
    assert exc.value.ratio == pytest.approx(lobe_separation(ig))


# --- gradient

def _gradient(psi, cfg, order=6, **kw):
    return gradient_from_sideband(sideband_extract(itf.ssi_pattern(psi, cfg), window_order=order), cfg, **kw)


def test_flat_phase_zero_gradient(grids):
    g = _gradient(_psi(grids), itf.ShearConfig(**SEP), STEEP)
    assert np.abs(g.values[g.mask]).max() < 1e-9


def test_gdd_gradient_is_linear_in_sum(grids):
    c2 = -1.33e5
    cfg = itf.ShearConfig()
    g = _gradient(_psi(grids, c2=c2), cfg)
    s, i = np.meshgrid(*(x.values for x in grids), indexing="ij")
    om = cfg.shear
    oracle = -2 * c2 * om * (s + i) - c2 * om ** 2
    # window roll-off leaves a small error; the linear law is what is checked
    assert np.sqrt(np.mean((g.values - oracle)[g.mask] ** 2)) < 5e-3
    assert g.n_flagged == 0


def test_tilt_only_with_cross_terms(grids):
    cfg = itf.ShearConfig()
    s_only = spdc.apply_local_dispersion(_psi(grids), c2_signal=8e4)
    g0 = _gradient(s_only, cfg)
    g1 = _gradient(_psi(grids, c2=-1.33e5), cfg)
    m = g0.mask[:, 1:] & g0.mask[:, :-1]
    assert np.abs(np.diff(g0.values, axis=1)[m]).max() < 1e-3
    m = g1.mask[:, 1:] & g1.mask[:, :-1]
    assert np.median(np.abs(np.diff(g1.values, axis=1)[m])) > 1e-2


def test_shear_sign_relation(grids):
    # phi(nu) - phi(nu - d) = -(phi(nu - d) - phi(nu)): a negated shear negates
    # the gradient evaluated one shear step away
    psi = _psi(grids, c2=-1.33e5, c3=2e6)
    d = grids[0].spacing
    gp = _gradient(psi, itf.ShearConfig(shear=d, **SEP), STEEP)
    gm = _gradient(psi, itf.ShearConfig(shear=-d, **SEP), STEEP)
    m = gm.mask[1:] & gp.mask[:-1]
    assert np.abs(gm.values[1:][m] + gp.values[:-1][m]).max() < 1e-6


def test_shear_sign_negates_linear_phase(grids):
    psi = _psi(grids, c1=300.0)
    om = itf.DEFAULT_SHEAR
    gp = _gradient(psi, itf.ShearConfig(shear=om, **SEP), STEEP)
    gm = _gradient(psi, itf.ShearConfig(shear=-om, **SEP), STEEP)
    m = gp.mask & gm.mask
    assert np.abs(gp.values[m] + gm.values[m]).max() < 1e-9


def test_gradient_phase_drift_offsets_uniformly(grids):
    psi = _psi(grids, c2=-2e4, c3=5e5)
    a = _gradient(psi, itf.ShearConfig(**SEP), STEEP)
    b = _gradient(psi, itf.ShearConfig(phase_drift=0.4, **SEP), STEEP)
    m = a.mask & b.mask
    np.testing.assert_allclose(b.values[m] - a.values[m], 0.4, atol=1e-9)


def test_unwrap_drops_cells_at_jumps():
    n = 40
    ph = np.tile(np.linspace(0, 1, n)[:, None], (1, 6))
    ph[20:, 2] += 2.0  # a jump above pi/2 in one line
    mask = np.ones((n, 6), bool)
    out, m, n_flagged, _ = unwrap_lines(np.angle(np.exp(1j * ph)), mask, np.ones((n, 6)))
    assert n_flagged == 1 and not m[20, 2]
    assert m.sum() == n * 6 - 1
    # untouched lines and the part of line 2 before the jump are exact
    clean = m.copy()
    clean[20:, 2] = False
    assert np.abs(out[clean] - ph[clean]).max() < 1e-12


def test_unwrap_restores_wrapped_ramp():
    n = 64
    truth = np.linspace(-6, 9, n)[:, None] + np.linspace(0, 0.5, 5)[None, :]
    out, m, n_flagged, orph = unwrap_lines(np.angle(np.exp(1j * truth)), np.ones((n, 5), bool), np.ones((n, 5)))
    assert n_flagged == 0 and orph == 0
    d = out - truth
    assert np.ptp(d) < 1e-12
    assert abs(d[0, 0] / (2 * np.pi) - round(d[0, 0] / (2 * np.pi))) < 1e-12


def test_phase_jump_warning(grids):
    g = grids[0]
    s, i = np.meshgrid(g.values, g.values, indexing="ij")
    amp = np.exp(-(s ** 2 + i ** 2) / (2 * 0.01 ** 2))
    ph = g.values[:, None] * 2500.0 + np.where(s > 0.002, 2.5, 0.0)
    sb = ComplexField2D(g, g, amp * np.exp(1j * ph))
    with pytest.warns(PhaseJumpWarning):
        gr = gradient_from_sideband(sb, itf.ShearConfig())
    assert gr.n_flagged > 0
    k = g.index_of(g.values[np.searchsorted(g.values, 0.002, side="right")])
    assert not gr.mask[k].any()


def test_noisy_gradient_is_finite(grids):
    psi = _psi(grids, c2=-1.33e5)
    cfg = itf.ShearConfig()
    ig = itf.measure(itf.apply_detector(itf.ssi_pattern(psi, cfg)), RandomStream(3))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PhaseJumpWarning)
        g = gradient_from_sideband(sideband_extract(denoise(ig, 0.2)), cfg)
    assert np.all(np.isfinite(g.values)) and g.mask.sum() > 1000


# --- end to end

def _retrieve(psi, cfg):
    return retrieve_joint_phase(itf.ssi_pattern(psi, cfg), itf.ssi_pattern(psi, cfg.swapped()))


@pytest.mark.parametrize("coeffs", [dict(c1=150.0, c2=-1.33e5, c3=2e6), dict(c1=-80.0, c2=6e4, c3=-3e6)])
def test_round_trip_phase_and_fit(grids, coeffs):
    pump = spdc.PumpSpec(**coeffs)
    res = _retrieve(spdc.build_jsa(pump, spdc.CrystalSpec(), *grids), itf.ShearConfig())
    surf = res.surface
    truth = spdc.true_spectral_phase(pump, *grids)
    d = (surf.values - truth)[surf.mask]
    assert np.sqrt(np.mean((d - d.mean()) ** 2)) < 1e-2
    assert res.fit.gdd == pytest.approx(2 * pump.c2, rel=5e-3)
    assert res.fit.tod == pytest.approx(6 * pump.c3, rel=2e-2)


def test_retrieval_independent_of_delay(grids):
    # strong chirp aliases in time and short delays leak the DC lobe; both
    # swamp the comparison, so use a resolved field and separated lobes
    psi = _psi(grids, c2=-2e4, c3=5e5)
    a = _retrieve(psi, itf.ShearConfig(delay=2500.0)).surface
    b = _retrieve(psi, itf.ShearConfig(delay=3500.0)).surface
    d = a.relative_to(b)
    m = a.mask & b.mask
    assert np.sqrt(np.mean(d[m] ** 2)) < 1e-3
