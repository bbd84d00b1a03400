import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jsta import spdc
from jsta.core.fourier import conjugate_axis
from jsta.core.grids import FrequencyGrid, SpatialGrid
from jsta.errors import ConfigurationError, TruncationError


def _unwrapped_phase(e):
    return np.unwrap(np.angle(e))


# --- pump

def test_pump_flat_phase_is_real_symmetric_gaussian(grids):
    g = grids[0]
    e = spdc.pump_envelope(spdc.PumpSpec(), g)
    assert np.abs(e.imag).max() == 0
    assert np.all(e.real > 0)
    # grid is symmetric about nu = 0 except the first sample
    np.testing.assert_allclose(e[1:], e[1:][::-1], rtol=1e-12)
    assert np.sum(np.abs(e) ** 2) * g.spacing == pytest.approx(1.0, abs=1e-12)


def test_pump_fwhm(grids):
    g = FrequencyGrid(4096, 2e-5)
    p = spdc.PumpSpec()
    i = np.abs(spdc.pump_envelope(p, g)) ** 2
    above = g.values[i >= i.max() / 2]
    assert above.max() - above.min() == pytest.approx(p.bandwidth_angular, rel=2e-2)


def test_pump_gdd_from_second_difference(grids):
    g = grids[0]
    e = spdc.pump_envelope(spdc.PumpSpec(c2=-1.33e5), g)
    ph = _unwrapped_phase(e)
    k = g.center_index
    d2 = (ph[k + 1] - 2 * ph[k] + ph[k - 1]) / g.spacing ** 2
    assert d2 == pytest.approx(-2.66e5, rel=1e-9)


def test_pump_linear_phase_moves_pulse_to_plus_c1(grids):
    g = grids[0]
    e = spdc.pump_envelope(spdc.PumpSpec(c1=500.0), g)
    t = conjugate_axis(g.n_points, g.spacing)
    # direct DFT with the package kernel exp(-i nu t)
    pulse = np.exp(-1j * np.outer(t, g.values)) @ e
    p = np.abs(pulse) ** 2
    centroid = np.sum(t * p) / p.sum()
    assert abs(centroid - 500.0) < t[1] - t[0]


def test_pump_truncation():
    with pytest.raises(TruncationError):
        spdc.pump_envelope(spdc.PumpSpec(), FrequencyGrid(16, 3.2e-4))


@pytest.mark.parametrize("kw", [{"bandwidth_fwhm": 0}, {"waist": -1}, {"c2": float("nan")}])
def test_pump_validation(kw):
    with pytest.raises(ConfigurationError):
        spdc.PumpSpec(**kw)


# --- phase matching

def test_phase_matching_peak():
    for shape in ("gaussian", "sinc"):
        assert spdc.phase_matching(spdc.CrystalSpec(pmf_shape=shape), 0.0, 0.0) == 1.0


def test_phase_matching_gaussian_one_sigma():
    c = spdc.CrystalSpec()
    assert abs(spdc.phase_matching(c, 0.0, c.pmf_spectral_width)) == pytest.approx(np.exp(-0.5), rel=1e-15)


def test_sinc_first_zero():
    c = spdc.CrystalSpec(pmf_shape="sinc")
    dq0 = np.sqrt(4 * np.pi * c.k_pump / c.length)
    assert abs(spdc.phase_matching(c, dq0, 0.0)) < 1e-12
    inside = np.abs(spdc.phase_matching(c, np.linspace(0, 0.99 * dq0, 50), 0.0))
    assert np.all(inside > 0)


def test_crystal_validation():
    with pytest.raises(ConfigurationError):
        spdc.CrystalSpec(pmf_shape="box")
    with pytest.raises(ConfigurationError):
        spdc.CrystalSpec(length=0)


# --- joint spectral amplitude

def test_jsa_norm_and_flat_phase(grids):
    psi = spdc.build_jsa(spdc.PumpSpec(), spdc.CrystalSpec(), *grids)
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)
    assert np.abs(psi.values.imag).max() == 0
    assert psi.values.real.min() >= 0


def test_jsa_phase_is_pump_phase_of_sum(grids):
    pump = spdc.PumpSpec(c0=0.3, c1=120.0, c2=-1.33e5, c3=2e6)
    psi = spdc.build_jsa(pump, spdc.CrystalSpec(), *grids)
    truth = spdc.true_spectral_phase(pump, *grids)
    m = np.abs(psi.values) > 1e-3 * np.abs(psi.values).max()
    err = np.angle(psi.values * np.exp(-1j * truth))
    assert np.abs(err[m]).max() < 1e-9


def test_jsa_mixed_partial_is_gdd(grids):
    pump = spdc.PumpSpec(c2=-1.33e5)
    psi = spdc.build_jsa(pump, spdc.CrystalSpec(), *grids)
    v = psi.values
    d = grids[0].spacing
    # mixed second difference of the phase, taken on phasors to avoid unwrapping
    mixed = np.angle(v[1:, 1:] * np.conj(v[1:, :-1]) * np.conj(v[:-1, 1:]) * v[:-1, :-1]) / d ** 2
    m = np.abs(v[1:, 1:]) > 1e-3 * np.abs(v).max()
    np.testing.assert_allclose(mixed[m[: mixed.shape[0], : mixed.shape[1]]], 2 * pump.c2, rtol=1e-8)


def test_jsa_marginals_match_closed_form(grids):
    pump = spdc.PumpSpec(c2=-1.33e5)
    psi = spdc.build_jsa(pump, spdc.CrystalSpec(), *grids)
    # matched widths: |psi|^2 = exp(-(nu_s^2 + nu_i^2) / sigma^2)
    s2 = pump.intensity_sigma ** 2
    for axis, g in ((1, grids[0]), (0, grids[1])):
        marg = np.sum(np.abs(psi.values) ** 2, axis=axis)
        oracle = np.exp(-g.values ** 2 / s2)
        marg, oracle = marg / marg.max(), oracle / oracle.max()
        assert np.sqrt(np.mean((marg - oracle) ** 2)) < 1e-2


def test_jsa_pump_enters_through_sum_only(grids):
    pump = spdc.PumpSpec(c2=-1.33e5, c3=3e6)
    v = spdc.build_jsa(pump, spdc.CrystalSpec(), *grids).values
    n = v.shape[0]
    # psi(s + 1, i - 1) / psi(s, i): same pump sum, so the ratio is the real PMF ratio
    a, b = v[1:, :-1], v[:-1, 1:]
    m = (np.abs(a) > 1e-3 * np.abs(v).max()) & (np.abs(b) > 1e-3 * np.abs(v).max())
    ratio = b[m] / a[m]
    assert np.abs(np.angle(ratio)).max() < 1e-9
    # the ratio depends only on the difference index
    diff_idx = (np.arange(n - 1)[:, None] - np.arange(1, n)[None, :])[m]
    for k in np.unique(diff_idx):
        r = ratio.real[diff_idx == k]
        assert np.ptp(r) <= 1e-9 * np.abs(r).max()


def test_jsa_truncation():
    g = FrequencyGrid(32, 3.2e-4)
    with pytest.raises(TruncationError):
        spdc.build_jsa(spdc.PumpSpec(), spdc.CrystalSpec(), g, g)


def test_local_dispersion(grids):
    psi = spdc.build_jsa(spdc.PumpSpec(c2=-1.33e5), spdc.CrystalSpec(), *grids)
    assert spdc.apply_local_dispersion(psi, 0.0, 0.0) is psi
    out = spdc.apply_local_dispersion(psi, 4e4, -7e4)
    # |psi| carries 1/sqrt(cell area); compare relative to the peak
    assert np.abs(np.abs(out.values) - np.abs(psi.values)).max() < 1e-15 * np.abs(psi.values).max()

    def mixed(v):
        return np.angle(v[1:, 1:] * np.conj(v[1:, :-1]) * np.conj(v[:-1, 1:]) * v[:-1, :-1])

    m = np.abs(psi.values[1:, 1:]) > 1e-3 * np.abs(psi.values).max()
    assert np.abs(mixed(out.values) - mixed(psi.values))[m].max() < 1e-9


@settings(max_examples=15, deadline=None)
@given(st.floats(-2e5, 2e5), st.floats(-2e5, 2e5))
def test_local_dispersion_is_pure_phase(c2s, c2i):
    gs, gi = spdc.default_grids(64, 1.28e-3)
    psi = spdc.build_jsa(spdc.PumpSpec(), spdc.CrystalSpec(), gs, gi)
    out = spdc.apply_local_dispersion(psi, c2s, c2i)
    # |psi| carries 1/sqrt(cell area); compare relative to the peak
    assert np.abs(np.abs(out.values) - np.abs(psi.values)).max() < 1e-15 * np.abs(psi.values).max()


def test_idler_spectral_window_narrows_idler(grids):
    post = spdc.PostSelection(idler_spectral_center=0.0, idler_spectral_width=2e-3)
    w = spdc.build_jsa(spdc.PumpSpec(), spdc.CrystalSpec(), *grids, post=post)
    plain = spdc.build_jsa(spdc.PumpSpec(), spdc.CrystalSpec(), *grids)

    def rms(v):
        p = np.sum(np.abs(v) ** 2, axis=0)
        x = grids[1].values
        return np.sqrt(np.sum(x ** 2 * p) / p.sum())

    assert rms(w.values) < rms(plain.values)


# --- joint spatial amplitude

FINE = SpatialGrid(241, 241, 0.05)


def test_centroid_at_origin_for_central_idler():
    amp = spdc.conditional_signal_amplitude(spdc.JointSpatialSpec(), FINE, (0.0, 0.0))
    x, y = FINE.mesh()
    w = np.abs(amp) ** 2
    assert abs(np.sum(w * x) / w.sum()) < 1e-12
    assert abs(np.sum(w * y) / w.sum()) < 1e-12


@pytest.mark.parametrize("pt", [(0.5, 0.5), (-0.5, 0.5), (1.0, -0.5)])
def test_centroid_opposite_and_closed_form(pt):
    spec = spdc.JointSpatialSpec()
    amp = spdc.conditional_signal_amplitude(spec, FINE, pt)
    x, y = FINE.mesh()
    w = np.abs(amp) ** 2
    c = np.array([np.sum(w * x), np.sum(w * y)]) / w.sum()
    assert np.all(np.sign(c) == -np.sign(pt))
    # closed form: conditional mean of the double Gaussian in momentum space
    a, b = spec.sigma_sum ** -2, spec.sigma_diff ** -2
    oracle = -(a - b) / (a + b) * spec.idler_q(np.array(pt)) * spec.focal_length / spec.k_signal
    np.testing.assert_allclose(c, oracle, atol=1e-6)


def test_joint_amplitude_shape_and_norm():
    g = SpatialGrid(5, 5, 0.5)
    a = spdc.joint_spatial_amplitude(spdc.JointSpatialSpec(), g, g)
    assert a.shape == (5, 5, 5, 5)
    assert np.sum(np.abs(a) ** 2) == pytest.approx(1.0)
    assert np.abs(np.angle(a)).max() == 0


def test_quadratic_wavefront_phase():
    spec = spdc.JointSpatialSpec(wavefront="quadratic", wavefront_coefficient=0.2)
    g = SpatialGrid()
    amp = spdc.conditional_signal_amplitude(spec, g, (0.0, 0.0))
    x, y = g.mesh()
    np.testing.assert_allclose(np.angle(amp), 0.2 * (x ** 2 + y ** 2), atol=1e-12)


def test_spatial_spec_regime():
    with pytest.raises(ConfigurationError):
        spdc.JointSpatialSpec(sigma_sum=200.0, sigma_diff=100.0)
