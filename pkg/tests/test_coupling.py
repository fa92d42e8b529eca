import numpy as np
import pytest

from hmimolab.config import build_array_geometry
from hmimolab.coupling import (CouplingModel, build_coupling_model,
                               correlation_matrix, coupling_matrix,
                               excitation_phases, hermitian_evd, spectral_sum,
                               variance_sum)

from conftest import rel_err


def two_element_geometry(distance):
    geo = build_array_geometry(2, "spacing", distance, line=True)
    return geo


def test_sinc_values_at_reference_separations():
    lam = 0.2
    # lambda/2 separation -> sin(pi)/pi = 0; lambda/4 -> 2/pi
    for dist, expected in [(lam / 2, 0.0), (lam / 4, 2.0 / np.pi)]:
        c = coupling_matrix(two_element_geometry(dist), lam)
        assert abs(c[0, 1] - expected) < 1e-14
        assert c[0, 0] == 1.0 and c[1, 1] == 1.0
    assert np.allclose(c, c.T)


def test_sinc_envelope_far_spacing():
    lam = 0.2
    geo = build_array_geometry(9, "spacing", 10 * lam)
    c = coupling_matrix(geo, lam)
    off = np.abs(c[~np.eye(9, dtype=bool)])
    assert off.max() <= 1.0 / (2 * np.pi * 10)


def test_normalized_convention_flag():
    lam = 0.2
    geo = two_element_geometry(lam / 4)
    c = coupling_matrix(geo, lam, convention="normalized")
    x = 2 * np.pi * (lam / 4) / lam  # np.sinc applies another pi
    assert rel_err(c[0, 1], np.sinc(x)) < 1e-14
    with pytest.raises(ValueError):
        coupling_matrix(geo, lam, convention="bogus")


def test_excitation_unit_modulus():
    rng = np.random.default_rng(5)
    i_diag = excitation_phases(64, rng)
    assert np.max(np.abs(np.abs(i_diag) - 1.0)) < 1e-15
    # zero phases give the identity; pi gives -1
    assert np.allclose(np.exp(1j * np.zeros(3)), np.ones(3))
    assert abs(np.exp(1j * np.pi) + 1.0) < 1e-15


def test_correlation_matrix_identity_and_ccT():
    rng = np.random.default_rng(2)
    i_diag = excitation_phases(6, rng)
    q = correlation_matrix(np.eye(6), i_diag)
    assert np.allclose(q, np.eye(6), atol=1e-14)
    geo = build_array_geometry(9, "spacing", 0.07)
    c = coupling_matrix(geo, 0.2)
    q = correlation_matrix(c, excitation_phases(9, rng))
    assert np.max(np.abs(q - c @ c.T)) < 1e-12
    assert np.max(np.abs(q - q.conj().T)) < 1e-12


def test_excitation_invariance_of_q():
    geo = build_array_geometry(16, "spacing", 0.09)
    c = coupling_matrix(geo, 0.2)
    q1 = correlation_matrix(c, excitation_phases(16, np.random.default_rng(1)))
    q2 = correlation_matrix(c, excitation_phases(16, np.random.default_rng(99)))
    assert np.max(np.abs(q1 - q2)) < 1e-12


def test_two_by_two_eigenvalues_closed_form():
    c = 0.37
    q = correlation_matrix(np.array([[1.0, c], [c, 1.0]]), np.ones(2, complex))
    spec = hermitian_evd(q)
    assert rel_err(spec.eigenvalues[0], (1 + c) ** 2) < 1e-12
    assert rel_err(spec.eigenvalues[1], (1 - c) ** 2) < 1e-12


def test_evd_invariants_random_models():
    for seed in range(8):
        rng = np.random.default_rng(seed)
        geo = build_array_geometry(16, "aperture", 1.0)
        model = build_coupling_model(geo, 0.1874, rng)
        spec = model.spectrum
        q = model.q
        recon = (spec.eigenvectors * spec.eigenvalues) @ spec.eigenvectors.conj().T
        assert np.linalg.norm(recon - q) / np.linalg.norm(q) < 1e-10
        gram = spec.eigenvectors.conj().T @ spec.eigenvectors
        assert np.max(np.abs(gram - np.eye(16))) < 1e-10
        assert np.all(spec.eigenvalues >= 0.0)
        assert np.all(np.diff(spec.eigenvalues) <= 0)
        assert rel_err(spec.eigenvalues.sum(), np.trace(q).real) < 1e-10


def test_evd_identity_and_corruption_error():
    spec = hermitian_evd(np.eye(8))
    assert np.allclose(spec.eigenvalues, 1.0)
    with pytest.raises(ValueError):
        hermitian_evd(np.diag([1.0, -0.5]))


def test_spectral_and_variance_sums():
    spec = hermitian_evd(np.eye(8))
    assert spectral_sum(spec, 2) == 8.0
    q = correlation_matrix(coupling_matrix(
        build_array_geometry(9, "spacing", 0.08), 0.19), np.ones(9, complex))
    s = hermitian_evd(q)
    assert rel_err(spectral_sum(s, 1), np.trace(q).real) < 1e-12
    assert rel_err(spectral_sum(s, 2), np.linalg.norm(q) ** 2) < 1e-11
    assert variance_sum(np.ones(3), 2) == 3.0
    assert variance_sum([], 4) == 0.0
    assert rel_err(variance_sum([0.5, 0.2], 4), 0.5 ** 4 + 0.2 ** 4) < 1e-15


def test_model_dataclass_shape(scenario_16x8):
    model, _ = scenario_16x8
    assert isinstance(model, CouplingModel)
    assert model.m == 16
    assert model.r.shape == (16, 16)
