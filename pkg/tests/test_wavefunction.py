"""Position-space grids, overlaps, autocorrelation, and 3D radial densities."""

import numpy as np
import pytest

import triscar as ts


# ---------------------------------------------------------------------------
# 1D grids: closed-form two-wave superposition
#
# With equal weights on |0 0 0> and |1 -1 0> the density is
# (1 + cos(2 pi r / L)) / L^2, independent of eta, and the heavy overlap
# at r = 0 integrates to 2 / L.


@pytest.fixture(scope="module")
def two_wave(params):
    sec = ts.enumerate_basis_1d(params, 0)
    lookup = sec.index_map()
    c = np.zeros(sec.dim)
    c[lookup[(0, 0)]] = 1.0 / np.sqrt(2.0)
    c[lookup[(1, -1)]] = 1.0 / np.sqrt(2.0)
    grid = ts.position_wavefunction_1d(c, sec, params, n_r=64, n_eta=8)
    return sec, c, grid


def test_two_wave_closed_form(two_wave, params):
    sec, c, grid = two_wave
    L = params.box_length
    want = (1.0 + np.cos(2.0 * np.pi * grid.r_axis / L)) / L ** 2
    dens = grid.density()
    for j in range(len(grid.eta_axis)):
        np.testing.assert_allclose(dens[:, j], want, atol=1e-12 / L ** 2)


def test_two_wave_heavy_overlap(two_wave, params):
    sec, c, grid = two_wave
    got = ts.heavy_overlap(grid)
    assert got == pytest.approx(2.0 / params.box_length, rel=1e-12)


def test_grid_norm_parseval(two_wave):
    sec, c, grid = two_wave
    assert grid.norm() == pytest.approx(1.0, rel=1e-12)


def test_eigenstate_norm_parseval(spectrum729, sector729, params):
    c = spectrum729.eigenvectors[:, 26]
    grid = ts.position_wavefunction_1d(c, sector729, params, n_r=96, n_eta=96)
    assert grid.norm() == pytest.approx(1.0, rel=1e-10)


def test_requires_zero_momentum(params):
    sec = ts.enumerate_basis_1d(ts.ModelParams(heavy_cutoff=1), 2)
    with pytest.raises(ValueError):
        ts.position_wavefunction_1d(np.ones(sec.dim) / 3.0, sec, params)


def test_heavy_overlap_needs_origin_sample(two_wave, params):
    sec, c, _ = two_wave
    # odd grid spacing that misses r = 0
    grid = ts.position_wavefunction_1d(c, sec, params, n_r=63, n_eta=8)
    with pytest.raises(ValueError):
        ts.heavy_overlap(grid)


# ---------------------------------------------------------------------------
# concentration ratio


def test_flat_density_concentration(params):
    L = params.box_length
    n = 64
    r = -L / 2.0 + L * np.arange(n) / n
    eta = -L / 2.0 + L * np.arange(n) / n
    values = np.full((n, n), 1.0 / L, dtype=np.complex128)
    grid = ts.WavefunctionGrid(r, eta, values, L, kind="position")
    # strip of half-width L/4 covers half the area exactly
    assert ts.concentration_ratio(grid, L / 4.0) == pytest.approx(0.5,
                                                                  abs=1e-12)


def test_concentration_monotone_in_width(spectrum729, sector729, params):
    c = spectrum729.eigenvectors[:, 26]
    grid = ts.position_wavefunction_1d(c, sector729, params, n_r=128, n_eta=64)
    L = params.box_length
    widths = [L / 32.0, L / 16.0, L / 8.0, L / 4.0]
    ratios = [ts.concentration_ratio(grid, w) for w in widths]
    assert all(a < b for a, b in zip(ratios, ratios[1:]))
    assert 0.0 < ratios[0] and ratios[-1] < 1.0


def test_concentration_rejects_wide_strip(two_wave, params):
    _, _, grid = two_wave
    with pytest.raises(ValueError):
        ts.concentration_ratio(grid, params.box_length)


# ---------------------------------------------------------------------------
# autocorrelation and spectral density


def test_autocorrelation_at_zero():
    energies = np.array([1.0, 3.0, 7.0])
    weights = np.array([0.2, 0.5, 0.3])
    series = ts.autocorrelation(np.sqrt(weights), energies,
                                times=np.linspace(0.0, 10.0, 101),
                                broadening=0.5)
    assert abs(series.values[0]) == pytest.approx(1.0, abs=1e-12)


def test_two_level_period():
    de = 0.7311
    energies = np.array([0.4, 0.4 + de])
    c = np.sqrt(np.array([0.5, 0.5]))
    period = 2.0 * np.pi / de
    t = np.array([0.0, period, 2.0 * period])
    series = ts.autocorrelation(c, energies, times=t, broadening=0.1)
    mags = np.abs(series.values)
    np.testing.assert_allclose(mags, 1.0, atol=1e-12)
    # halfway through the period the two phases cancel
    half = ts.autocorrelation(c, energies, times=np.array([period / 2.0]),
                              broadening=0.1)
    assert abs(half.values[0]) == pytest.approx(0.0, abs=1e-12)


def test_spectral_density_mass():
    energies = np.array([-2.0, 1.0, 5.0])
    weights = np.array([0.25, 0.45, 0.3])
    series = ts.autocorrelation(np.sqrt(weights), energies,
                                times=np.linspace(0.0, 1.0, 11),
                                broadening=0.8)
    assert series.spectral_mass() == pytest.approx(1.0, abs=1e-6)
    lo, hi = series.energy_grid[0], series.energy_grid[-1]
    assert lo < energies.min() and hi > energies.max()


def test_autocorrelation_rejects_unnormalized():
    with pytest.raises(ValueError):
        ts.autocorrelation(np.array([1.0, 1.0]), np.array([0.0, 1.0]),
                           times=np.array([0.0]), broadening=0.1)


# ---------------------------------------------------------------------------
# 3D radial density: analytic reduction vs direct angular quadrature


@pytest.fixture(scope="module")
def c1_state(params):
    sec = ts.sector_3d(params, (0, 0, 0), cutoff_sq=1)
    rule = ts.MatrixElementRule3D(params)
    h = ts.dense_from_elements(sec, rule)
    vals, vecs = np.linalg.eigh(h)
    return sec, vecs[:, 0]


def test_radial_density_routes_agree(c1_state, params):
    sec, c = c1_state
    kw = dict(n_r=12, n_eta=12)
    analytic = ts.integrated_probability_3d(c, sec, params,
                                            method="analytic", **kw)
    quad = ts.integrated_probability_3d(c, sec, params,
                                        method="quadrature", n_angle=20, **kw)
    scale = np.abs(analytic.values).max()
    assert scale > 0.0
    np.testing.assert_allclose(quad.values, analytic.values,
                               atol=1e-8 * scale)


def test_radial_density_nonnegative(c1_state, params):
    sec, c = c1_state
    dens = ts.integrated_probability_3d(c, sec, params, n_r=16, n_eta=16)
    assert dens.values.min() > -1e-12 * np.abs(dens.values).max()


def test_radial_mass_crude_normalization(c1_state, params):
    """The radial ball misses the cube corners, so mass lands below but
    near 1 once both axes span [0, rho L / 2]."""
    sec, c = c1_state
    dens = ts.integrated_probability_3d(c, sec, params, n_r=40, n_eta=40)
    assert 0.6 < dens.mass() < 1.1


def test_mass_small_r_ordering(params, sector3d_c2):
    rule = ts.MatrixElementRule3D(params)
    plain = ts.HamiltonianOperator3D(sector3d_c2, rule, cutoff_sq=2)
    sym, anti = ts.symmetrize_sector(sector3d_c2)
    out = {}
    for tag, ssec in (("sym", sym), ("anti", anti)):
        op = ts.SymmetrizedOperator3D(ssec, plain)
        vals, vecs = np.linalg.eigh(op.dense())
        c = ssec.embed(vecs[:, 0])
        dens = ts.integrated_probability_3d(c, sector3d_c2, params,
                                            n_r=24, n_eta=24)
        out[tag] = dens.mass_small_r(0.1 * params.box_length)
    assert out["sym"] > 10.0 * out["anti"]


def test_pair_projection_consistency(c1_state, params):
    sec, c = c1_state
    proj = ts.pair_projection_3d(c, sec, params, component_r=0,
                                 component_eta=0, n_r=24, n_eta=24)
    assert proj.values.min() > -1e-20
    # projecting with swapped components gives the same density for an
    # exchange-symmetric ground state
    swap = ts.pair_projection_3d(c, sec, params, component_r=0,
                                 component_eta=1, n_r=24, n_eta=24)
    assert swap.values.shape == proj.values.shape


def test_pair_projection_component_validation(c1_state, params):
    sec, c = c1_state
    with pytest.raises(ValueError):
        ts.pair_projection_3d(c, sec, params, component_r=3, component_eta=0)
