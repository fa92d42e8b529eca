"""Matched-filter precoders for the three CSI levels and SINR evaluation.

The matched-filter scaling sqrt(P/M) is kept literal, so the normalized SINR
identity gamma_k = rho |h_k h_k^H|^2 / (1 + rho sum |h_k h_j^H|^2) holds
exactly; the realized transmit power then equals P only in expectation and
only under power-normalized user variances.  Scenario presets that compare
against the optimal beamformer normalize variances accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coupling import CouplingModel, Spectrum


@dataclass(frozen=True)
class Precoder:
    """Beamforming matrix (columns are per-user vectors) plus bookkeeping."""

    w: np.ndarray  # (M, K)
    csi_mode: str  # full | partial | none | optimal
    power_used: float

    @property
    def k(self) -> int:
        return self.w.shape[1]


def _make(w: np.ndarray, mode: str) -> Precoder:
    return Precoder(w=w, csi_mode=mode, power_used=float(np.sum(np.abs(w) ** 2)))


def mf_precoder_full(h_known: np.ndarray, p_watts: float) -> Precoder:
    """W = sqrt(P/M) H^H built from whatever channel estimate the caller has."""
    if not np.any(h_known):
        raise ValueError("channel estimate is identically zero")
    m = h_known.shape[1]
    w = np.sqrt(p_watts / m) * h_known.conj().T
    return _make(w, "full")


def mf_precoder_partial(model: CouplingModel, variances, p_watts: float) -> Precoder:
    """Second-order-statistics precoder: column k = sqrt(P/M) sigma_k (1 R)^H."""
    v = np.asarray(variances, float)
    direction = (np.ones(model.m) @ model.r).conj()  # (1_M R)^H
    w = np.sqrt(p_watts / model.m) * np.outer(direction, np.sqrt(v))
    return _make(w, "partial")


def mf_precoder_no_csi(model: CouplingModel, p_watts: float, k: int) -> Precoder:
    """Structure-only precoder: every user gets the same coupling beam."""
    direction = (np.ones(model.m) @ model.r).conj()
    w = np.sqrt(p_watts / model.m) * np.repeat(direction[:, None], k, axis=1)
    return _make(w, "none")


def sinr_per_user(h_true: np.ndarray, precoder: Precoder, n0_watts: float) -> np.ndarray:
    """SINR_k = |h_k w_k|^2 / (N0 + sum_{j != k} |h_k w_j|^2) on the true channel."""
    gains = np.abs(h_true @ precoder.w) ** 2  # (K, K): [k, j] = |h_k w_j|^2
    signal = np.diag(gains)
    interference = gains.sum(axis=1) - signal
    return signal / (n0_watts + interference)


def sample_equivalent_sinr(spectrum: Spectrum, sigma_k_sq: float,
                           interferer_variances, rho: float,
                           rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """Draws from the eigenvalue-domain SINR model.

    Signal and interference share the same exponential draws through the
    spectrum, and the cross-user randomness enters as independent unit
    exponentials weighted by the interferer variances; this reproduces the
    matched-filter SINR in distribution.
    """
    lam = spectrum.eigenvalues
    v = np.asarray(interferer_variances, float)
    gains = rng.exponential(scale=sigma_k_sq, size=(size, lam.size))
    x1 = gains @ lam
    x2 = gains @ lam ** 2
    if v.size:
        y = rng.exponential(size=(size, v.size)) @ v
    else:
        y = np.zeros(size)
    return rho * x1 ** 2 / (1.0 + rho * x2 * y)
