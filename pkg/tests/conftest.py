import numpy as np
import pytest

from hmimolab.config import build_array_geometry, place_users
from hmimolab.coupling import build_coupling_model

WAVELENGTH_1P6GHZ = 299_792_458.0 / 1.6e9


def half_wave_scenario(m: int, k: int, seed: int = 3, reference_m: float = 500.0):
    """Half-wavelength array (grid, or line for non-square m) plus a
    cell-edge-normalized user draw."""
    side = int(np.sqrt(m))
    geo = build_array_geometry(m, "spacing", WAVELENGTH_1P6GHZ / 2,
                               line=side * side != m)
    rng = np.random.default_rng(seed)
    model = build_coupling_model(geo, WAVELENGTH_1P6GHZ, rng)
    layout = place_users(k, 500.0, rng, 3.5, 10.0,
                         reference_distance_m=reference_m)
    return model, layout


@pytest.fixture(scope="session")
def scenario_16x8():
    return half_wave_scenario(16, 8)


@pytest.fixture(scope="session")
def scenario_9x3():
    return half_wave_scenario(9, 3, seed=21)


def rel_err(got, ref):
    ref = float(ref)
    return abs(float(got) - ref) / max(abs(ref), 1e-300)
