import numpy as np

from hmimolab.channel import (complex_normal, corrupt_csi, draw_channel,
                              error_variance_from_db, realize_channel)
from hmimolab.config import UserLayout
from hmimolab.coupling import spectral_sum
from hmimolab.mc import ks_two_sample

from conftest import rel_err


def flat_layout(k, var=1.0):
    return UserLayout(np.full(k, 100.0), np.full(k, var))


def test_entry_statistics():
    rng = np.random.default_rng(1)
    a = draw_channel(flat_layout(4, var=0.73), 256, rng)
    a = np.concatenate([draw_channel(flat_layout(4, var=0.73), 256, rng).ravel()
                        for _ in range(1000)] + [a.ravel()])
    assert rel_err(np.mean(np.abs(a) ** 2), 0.73) < 0.01
    assert abs(np.mean(a)) < 3e-3
    corr = np.corrcoef(a.real, a.imag)[0, 1]
    assert abs(corr) < 0.01


def test_effective_channel_replay_and_energy(scenario_16x8):
    model, layout = scenario_16x8
    rng = np.random.default_rng(3)
    a = draw_channel(layout, 16, rng)
    h = a @ model.r
    real = realize_channel(layout, model, np.random.default_rng(3))
    assert np.max(np.abs(real.h - h)) < 1e-12
    # E[h_k h_k^H] = sigma_k^2 trace(Q), Monte Carlo at 1%
    n = 40_000
    k = 0
    acc = np.empty(n)
    rng = np.random.default_rng(11)
    l1 = spectral_sum(model.spectrum, 1)
    for chunk in range(4):
        a = complex_normal(rng, (n // 4, 16)) * np.sqrt(layout.variances[k])
        he = a @ model.r
        acc[chunk * (n // 4):(chunk + 1) * (n // 4)] = np.sum(np.abs(he) ** 2, axis=1)
    assert rel_err(acc.mean(), layout.variances[k] * l1) < 0.01
    assert acc.min() >= 0.0


def test_corrupt_csi_properties():
    rng = np.random.default_rng(5)
    h = complex_normal(rng, (512, 512))
    assert corrupt_csi(h, 0.0, rng) is h
    h_hat = corrupt_csi(h, 0.37, rng)
    err = h_hat - h
    assert rel_err(np.mean(np.abs(err) ** 2), 0.37) < 0.01
    # -10 dB error target: one tenth of the mean per-entry channel power
    var = error_variance_from_db(h, -10.0)
    assert rel_err(var, 0.1 * np.mean(np.abs(h) ** 2)) < 1e-12


def test_unitary_invariance(scenario_16x8):
    model, layout = scenario_16x8
    rng = np.random.default_rng(9)
    n = 3000
    a = complex_normal(rng, (n, 16))
    rotated = a @ model.spectrum.eigenvectors
    res = ks_two_sample(a.real.ravel(), rotated.real.ravel(), alpha=0.01)
    assert not res.reject


def test_channel_deterministic_replay(scenario_16x8):
    model, layout = scenario_16x8
    a1 = draw_channel(layout, 16, np.random.default_rng(42))
    a2 = draw_channel(layout, 16, np.random.default_rng(42))
    assert np.array_equal(a1, a2)
