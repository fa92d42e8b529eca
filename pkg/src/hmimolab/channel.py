"""Random multipath channels, the effective channel, and CSI corruption."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import UserLayout
from .coupling import CouplingModel


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly-symmetric unit-variance complex Gaussians."""
    g = rng.standard_normal(size=(*shape, 2))
    return (g[..., 0] + 1j * g[..., 1]) / np.sqrt(2.0)


def draw_channel(layout: UserLayout, m: int, rng: np.random.Generator) -> np.ndarray:
    """K x M matrix with row k i.i.d. CN(0, sigma_k^2)."""
    a = complex_normal(rng, (layout.k, m))
    return a * np.sqrt(layout.variances)[:, None]


def effective_channel(a: np.ndarray, model: CouplingModel) -> np.ndarray:
    """H = A C I, i.e. each fading row pushed through the deterministic R."""
    if a.shape[1] != model.m:
        raise ValueError("channel width does not match the array size")
    return a @ model.r


def corrupt_csi(h: np.ndarray, error_variance: float,
                rng: np.random.Generator) -> np.ndarray:
    """Additive estimation error: H_hat = H + E with E i.i.d. CN(0, sigma_e^2)."""
    if error_variance < 0:
        raise ValueError("error variance must be nonnegative")
    if error_variance == 0.0:
        return h
    return h + np.sqrt(error_variance) * complex_normal(rng, h.shape)


def error_variance_from_db(h: np.ndarray, error_db: float) -> float:
    """Per-entry error variance for a level quoted in dB relative to H.

    The reference is the mean per-entry power of the supplied channel, so
    0 dB means the error is as strong as the channel itself.
    """
    avg_power = float(np.mean(np.abs(h) ** 2))
    return 10.0 ** (error_db / 10.0) * avg_power


@dataclass(frozen=True)
class ChannelRealization:
    """One fading draw together with its effective and corrupted versions."""

    a: np.ndarray
    h: np.ndarray
    h_hat: np.ndarray | None = None
    error_variance: float = 0.0


def realize_channel(layout: UserLayout, model: CouplingModel,
                    rng: np.random.Generator,
                    error_variance: float = 0.0) -> ChannelRealization:
    a = draw_channel(layout, model.m, rng)
    h = a @ model.r
    h_hat = corrupt_csi(h, error_variance, rng) if error_variance > 0 else None
    return ChannelRealization(a=a, h=h, h_hat=h_hat, error_variance=error_variance)
