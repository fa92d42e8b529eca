import numpy as np
import pytest

from hmimolab.config import (SystemConfig, build_array_geometry,
                             equal_distance_layout, pairwise_distances,
                             pathloss_variance, place_users)
from hmimolab.mc import ks_two_sample

from conftest import WAVELENGTH_1P6GHZ, rel_err


def test_system_config_rho_is_derived():
    cfg = SystemConfig(m=16, k=8, p_watts=1.0, n0_watts=4e-14,
                       wavelength_m=0.1874)
    assert rel_err(cfg.rho, 1.0 / (16 * 4e-14)) < 1e-15


@pytest.mark.parametrize("bad", [
    dict(m=0), dict(k=0), dict(p_watts=0.0), dict(n0_watts=-1.0),
    dict(wavelength_m=0.0), dict(cell_radius_m=-5.0),
])
def test_system_config_rejects_bad_fields(bad):
    base = dict(m=4, k=2, p_watts=1.0, n0_watts=1e-13, wavelength_m=0.2)
    base.update(bad)
    with pytest.raises(ValueError):
        SystemConfig(**base)


def test_aperture_grid_m4_spans_side():
    geo = build_array_geometry(4, "aperture", 1.0)
    d = pairwise_distances(geo.positions)
    # two points per axis: adjacent spacing equals the aperture side
    assert rel_err(sorted(set(np.round(d[d > 0], 12)))[0], 1.0) < 1e-12
    assert geo.positions.min() == 0.0 and geo.positions.max() == 1.0


def test_aperture_grid_m9_half_side_spacing():
    geo = build_array_geometry(9, "aperture", 1.0)
    d = pairwise_distances(geo.positions)
    assert rel_err(d[d > 0].min(), 0.5) < 1e-12


def test_spacing_grid_m16_half_wavelength():
    # carrier 1.6 GHz -> wavelength c/1.6e9 = 0.18737... m, half is 0.09368...
    geo = build_array_geometry(16, "spacing", WAVELENGTH_1P6GHZ / 2)
    d = pairwise_distances(geo.positions)
    assert rel_err(d[d > 0].min(), 299_792_458.0 / 3.2e9) < 1e-12
    assert geo.positions.shape == (16, 2)


def test_line_layout_and_errors():
    geo = build_array_geometry(5, "spacing", 0.1, line=True)
    assert geo.positions.shape == (5, 2)
    assert np.allclose(np.diff(geo.positions[:, 0]), 0.1)
    with pytest.raises(ValueError):
        build_array_geometry(5, "spacing", 0.1)  # not a perfect square
    with pytest.raises(ValueError):
        build_array_geometry(4, "aperture", 0.0)
    with pytest.raises(ValueError):
        build_array_geometry(4, "hexagon", 1.0)


def test_place_users_boundary_and_floor():
    rng = np.random.default_rng(0)
    layout = place_users(2000, 500.0, rng)
    assert layout.distances_m.max() <= 500.0
    assert layout.distances_m.min() >= 10.0
    # u = 1 -> the cell edge; u = 0.25 -> half the radius
    assert 500.0 * np.sqrt(1.0) == 500.0
    assert 500.0 * np.sqrt(0.25) == 250.0


def test_pathloss_values_and_monotonicity():
    # 250 m at alpha = 3.5: direct arithmetic
    assert rel_err(pathloss_variance(np.array([250.0]), 3.5)[0],
                   250.0 ** -3.5) < 1e-15
    d = np.linspace(20, 490, 100)
    v = pathloss_variance(d, 3.5)
    assert np.all(np.diff(v) < 0)


def test_area_uniformity_ks():
    rng = np.random.default_rng(7)
    layout = place_users(100_000, 500.0, rng, min_distance_m=10.0)
    u = (layout.distances_m / 500.0) ** 2
    ref = 1.0 - np.random.default_rng(8).random(100_000)
    res = ks_two_sample(u, ref, alpha=0.01)
    assert not res.reject, f"d={res.d_statistic} threshold={res.threshold}"


def test_placement_deterministic_replay():
    a = place_users(16, 500.0, np.random.default_rng(123))
    b = place_users(16, 500.0, np.random.default_rng(123))
    assert np.array_equal(a.distances_m, b.distances_m)
    assert np.array_equal(a.variances, b.variances)


def test_equal_distance_layout():
    layout = equal_distance_layout(4, 250.0, 3.5, reference_distance_m=500.0)
    assert np.allclose(layout.variances, (0.5) ** -3.5)
