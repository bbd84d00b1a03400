import numpy as np
import pytest

from jsta import spdc
from jsta.core import units
from jsta.core.grids import SpatialGrid
from jsta.errors import ContractError, MissingDataError
from jsta.interferometer import FringeScan, default_wavelength_axis
from jsta.retrieval.compose import (JointCoordinate, SpatialPhaseTable, compose_relative_phase)
from jsta.retrieval.fringes import find_peaks, peak_frequencies, track_fringes
from jsta.retrieval.spatial import centroid_analysis, intensity_centroid
from jsta.retrieval.temporal import compose_field, to_temporal
from jsta.retrieval.zonal import zonal_solve

from conftest import analytic_gradient, disc_mask

TAU = 2500.0
GRID = SpatialGrid()


def _fringe_scan(phase, visibility=0.8, grid=GRID, delay=TAU):
    """Analytic fringes ``s (1 + V cos(w tau + phase))`` at each scan point."""
    lam = default_wavelength_axis()
    w = units.angular_frequency(lam)
    s = np.exp(-4 * np.log(2) * ((lam - 1548.0) / 14.5) ** 2)
    spectra = s * (1 + visibility * np.cos(w * delay + phase[..., None]))
    return FringeScan(spectra, lam, delay, grid)


# --- fringe peaks

def test_find_peaks_parabola_vertex():
    x = np.arange(9.0)
    y = -(x - 4.3) ** 2
    np.testing.assert_allclose(find_peaks(y), [4.3], atol=1e-12)


def test_peak_frequencies_follow_cosine_maxima():
    scan = _fringe_scan(np.zeros((7, 7)))
    pk = peak_frequencies(scan.spectra[3, 3], scan.wavelengths, TAU)
    assert pk.size >= 5
    # maxima where w tau = 2 pi k; sampling in wavelength limits sub-sample accuracy
    k = np.round(pk * TAU / (2 * np.pi))
    assert np.abs(pk - 2 * np.pi * k / TAU).max() < 1e-3 * 2 * np.pi / TAU


def test_identical_spectra_give_zero_phase():
    surf = track_fringes(_fringe_scan(np.zeros((7, 7))))
    assert surf.mask.all() and np.abs(surf.values).max() < 1e-12


def test_half_period_shift_is_pi():
    ph = np.zeros((7, 7))
    ph[1, 5] = np.pi
    surf = track_fringes(_fringe_scan(ph))
    assert abs(abs(surf.values[1, 5]) - np.pi) < 1e-2
    assert np.abs(np.delete(surf.values.ravel(), 1 * 7 + 5)).max() < 1e-12


def test_quadratic_phase_recovered():
    x, y = GRID.mesh()
    truth = 0.3 * (x ** 2 + y ** 2)
    surf = track_fringes(_fringe_scan(truth))
    assert np.sqrt(np.mean((surf.values - truth)[surf.mask] ** 2)) < 0.05


def test_too_few_peaks_is_invalid():
    scan = _fringe_scan(np.zeros((7, 7)))
    spectra = scan.spectra.copy()
    spectra[0, 6] = 0.0
    surf = track_fringes(FringeScan(spectra, scan.wavelengths, TAU, GRID))
    assert not surf.mask[0, 6] and surf.mask.sum() == 48
    spectra[3, 3] = 0.0
    with pytest.raises(ContractError):
        track_fringes(FringeScan(spectra, scan.wavelengths, TAU, GRID))


def test_track_fringes_needs_origin():
    g = SpatialGrid(6, 7, 0.5)
    with pytest.raises(ContractError):
        track_fringes(_fringe_scan(np.zeros((6, 7)), grid=g))


# --- joint temporal intensity

def _jsa(grids, **kw):
    return spdc.build_jsa(spdc.PumpSpec(**kw), spdc.CrystalSpec(), *grids)


def test_flat_phase_jti_uncorrelated(grids):
    jti = to_temporal(_jsa(grids))
    assert abs(jti.correlation()) < 1e-6


def test_chirp_correlates_jti(small_grids):
    assert to_temporal(_jsa(small_grids, c2=-2e4)).correlation() > 0.5


def test_jti_moments_match_gaussian_oracle(grids):
    # psi = exp(-nu^T M nu / 2), M = I / sigma^2 - 2 i c2 [[1, 1], [1, 1]];
    # the JTI covariance is Re(M^-1)^-1 / 2
    pump = spdc.PumpSpec(c2=-1e4)
    mom = to_temporal(_jsa(grids, c2=pump.c2)).moments()
    sig = pump.intensity_sigma
    M = np.eye(2) / sig ** 2 - 2j * pump.c2 * np.ones((2, 2))
    cov = np.linalg.inv(np.linalg.inv(M).real) / 2
    assert mom["rms_s"] == pytest.approx(np.sqrt(cov[0, 0]), rel=2e-2)
    assert mom["rms_i"] == pytest.approx(np.sqrt(cov[1, 1]), rel=2e-2)
    assert mom["correlation"] == pytest.approx(cov[0, 1] / np.sqrt(cov[0, 0] * cov[1, 1]), rel=2e-2)


def test_jti_parseval(grids):
    psi = _jsa(grids, c2=-1.33e5, c3=2e6)
    jti = to_temporal(psi)
    tot = np.sum(np.abs(psi.values) ** 2) * grids[0].spacing * grids[1].spacing
    assert jti.total() == pytest.approx(tot, rel=1e-10)
    ms, mi = jti.marginals()
    np.testing.assert_allclose(ms.sum() * jti.grid_a.spacing, tot, rtol=1e-10)
    np.testing.assert_allclose(mi.sum() * jti.grid_b.spacing, tot, rtol=1e-10)


def test_compose_field_masks_and_rejects_negative(grids):
    m = disc_mask(*grids, 0.02)
    f = compose_field(np.ones(m.shape), np.full(m.shape, 0.5), m, *grids)
    assert np.all(f.values[~m] == 0) and np.allclose(np.angle(f.values[m]), 0.5)
    with pytest.raises(ContractError):
        compose_field(-np.ones(m.shape), np.zeros(m.shape), m, *grids)


# --- centroids

FINE = SpatialGrid(241, 241, 0.05)


def test_centroid_analysis_sign_pattern():
    spec = spdc.JointSpatialSpec()
    pts = [(0.0, 0.0), (0.5, 0.0), (-0.5, 0.5), (1.0, -1.0)]
    ints = {p: np.abs(spdc.conditional_signal_amplitude(spec, FINE, p)) ** 2 for p in pts}
    rows = centroid_analysis(ints, FINE)
    assert [r.idler_point for r in rows] == sorted(pts)
    assert all(r.opposite_sign for r in rows)


def test_centroid_of_offset_spot():
    x, y = FINE.mesh()
    w = np.exp(-((x - 0.4) ** 2 + (y + 0.25) ** 2) / 0.1)
    np.testing.assert_allclose(intensity_centroid(w, FINE), [0.4, -0.25], atol=1e-12)
    with pytest.raises(ContractError):
        intensity_centroid(np.zeros(w.shape), FINE)
    with pytest.raises(ContractError):
        intensity_centroid(-w, FINE)


# --- composition

SP = [(0.0, 0.0), (0.5, 0.0)]
IP = [(0.0, 0.0), (0.0, -0.5)]


def _truth(sp, ip):
    def phi(s, i):
        u = s + i
        return (-1.33e5 * u ** 2 + 800.0 * s * sp[0] - 600.0 * i * ip[1]
                + 0.3 * (sp[0] ** 2 + sp[1] ** 2) + 0.1 * sp[0] * ip[1])
    return phi


@pytest.fixture(scope="module")
def compose_inputs():
    grids = spdc.default_grids()
    gs, gi = grids
    m = disc_mask(gs, gi, 0.03)
    om = -9.4248e-4
    surfaces = {}
    for sp in SP:
        for ip in IP:
            phi = _truth(sp, ip)
            surfaces[(sp, ip)] = zonal_solve(analytic_gradient(phi, gs, gi, "signal", om, m),
                                             analytic_gradient(phi, gs, gi, "idler", om, m))
    ks = [128 - 20, 128 + 15]
    ki = [128 + 10, 128 - 12]
    tables = {}
    for a in ks:
        for b in ki:
            tables[(a, b)] = SpatialPhaseTable({(sp, ip): _truth(sp, ip)(gs.values[a], gi.values[b])
                                                for sp in SP for ip in IP})
    start = JointCoordinate(SP[0], IP[0], gs.values[ks[0]], gi.values[ki[0]])
    end = JointCoordinate(SP[1], IP[1], gs.values[ks[1]], gi.values[ki[1]])
    return surfaces, tables, start, end


def test_compose_same_point_is_zero(compose_inputs):
    surfaces, tables, start, _ = compose_inputs
    assert compose_relative_phase(surfaces, tables, start, start) == 0.0


def test_compose_matches_truth_and_orderings(compose_inputs):
    surfaces, tables, start, end = compose_inputs
    truth = (_truth(end.signal_point, end.idler_point)(end.nu_s, end.nu_i)
             - _truth(start.signal_point, start.idler_point)(start.nu_s, start.nu_i))
    a = compose_relative_phase(surfaces, tables, start, end, "spectral-first")
    b = compose_relative_phase(surfaces, tables, start, end, "spatial-first")
    assert abs(a - b) < 1e-2
    assert abs(a - truth) < 1e-6


def test_compose_antisymmetric(compose_inputs):
    surfaces, tables, start, end = compose_inputs
    for order in ("spectral-first", "spatial-first"):
        a = compose_relative_phase(surfaces, tables, start, end, order)
        b = compose_relative_phase(surfaces, tables, end, start, order)
        assert a == -b


def test_compose_missing_leg(compose_inputs):
    surfaces, tables, start, end = compose_inputs
    partial = {k: v for k, v in surfaces.items() if k != (SP[1], IP[0])}
    with pytest.raises(MissingDataError, match="leg 3"):
        compose_relative_phase(partial, tables, start, end, "spectral-first")
    with pytest.raises(MissingDataError):
        compose_relative_phase(surfaces, {}, start, end)
    with pytest.raises(ContractError):
        compose_relative_phase(surfaces, tables, start, end, "diagonal")
