"""Seeded, thread-count-invariant Monte Carlo estimation and test statistics.

Every trial derives its own generator from (master seed, trial index), each
trial writes into its own slot, and reductions run through math.fsum, whose
result does not depend on accumulation order; estimates are therefore
bit-identical for any worker count.

The no-CSI mode realizes the single-interferer SINR model that the closed
form integrates (gain / (1/rho + gain)); the physical common-beam precoder
with its K-1 equal interference terms stays available through
precoding.mf_precoder_no_csi for side studies.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import corrupt_csi, draw_channel, error_variance_from_db
from .config import UserLayout
from .coupling import CouplingModel
from .maxmin import maxmin_beamforming
from .precoding import mf_precoder_full, mf_precoder_partial, sinr_per_user

MC_MODES = ("full", "partial", "none", "maxmin")


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    """Independent, reproducible stream for one trial."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(trial,)))


def worker_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("HMIMOLAB_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


@dataclass(frozen=True)
class McEstimate:
    """Sample mean with a normal-approximation 95% half-width."""

    mean: float
    half_width_95: float
    n_trials: int

    def __post_init__(self):
        if self.n_trials < 2:
            raise ValueError("an estimate needs at least two trials")


def _estimate_from_samples(samples: np.ndarray) -> McEstimate:
    n = samples.size
    mean = math.fsum(samples) / n
    var = math.fsum((s - mean) ** 2 for s in samples) / (n - 1)
    return McEstimate(mean=mean, half_width_95=1.96 * math.sqrt(var / n), n_trials=n)


@dataclass(frozen=True)
class ThroughputEstimate:
    """Per-user and user-averaged throughput estimates for one scenario point."""

    per_user: list[McEstimate]
    pooled: McEstimate  # statistic: per-trial average over users, nats
    t_star_mean: float | None = None  # maxmin mode only


def mc_trial_sinr(model: CouplingModel, layout_fn, mode: str, rho: float,
                  rng: np.random.Generator, error_db: float | None = None) -> tuple:
    """One trial: draw everything, return (per-user SINR array, t_star or None).

    The power budget is normalized to N0 = 1, P = rho * M, which leaves every
    SINR unchanged (only the ratio P/(M N0) enters).
    """
    layout = layout_fn(rng) if callable(layout_fn) else layout_fn
    m = model.m
    a = draw_channel(layout, m, rng)
    h = a @ model.r
    p_watts = rho * m
    n0 = 1.0
    if mode == "full":
        h_known = h
        if error_db is not None:
            h_known = corrupt_csi(h, error_variance_from_db(h, error_db), rng)
        return sinr_per_user(h, mf_precoder_full(h_known, p_watts), n0), None
    if mode == "partial":
        w = mf_precoder_partial(model, layout.variances, p_watts)
        return sinr_per_user(h, w, n0), None
    if mode == "none":
        x = np.abs(a @ model.q.sum(axis=1)) ** 2
        return rho * x / (1.0 + rho * x), None
    if mode == "maxmin":
        h_known = h
        if error_db is not None:
            h_known = corrupt_csi(h, error_variance_from_db(h, error_db), rng)
        sol = maxmin_beamforming(h_known, p_watts, n0)
        return sinr_per_user(h, sol.precoder, n0), sol.t_star
    raise ValueError(f"unknown Monte Carlo mode {mode!r}")


def estimate_throughput_mc(model: CouplingModel, layout_fn, mode: str,
                           rho: float, n_trials: int, master_seed: int,
                           error_db: float | None = None,
                           n_workers: int | None = None) -> ThroughputEstimate:
    """Average throughput E[ln(1 + SINR)] per user and pooled, in nats."""
    if n_trials < 2:
        raise ValueError("n_trials must be >= 2")
    if mode not in MC_MODES:
        raise ValueError(f"unknown Monte Carlo mode {mode!r}")
    k = (layout_fn(trial_rng(master_seed, 0)).k if callable(layout_fn)
         else layout_fn.k)
    rates = np.empty((n_trials, k))
    tstars = np.empty(n_trials) if mode == "maxmin" else None

    def run_block(block: range) -> None:
        for t in block:
            sinr, tstar = mc_trial_sinr(model, layout_fn, mode, rho,
                                        trial_rng(master_seed, t), error_db)
            rates[t] = np.log1p(sinr)
            if tstars is not None:
                tstars[t] = tstar

    workers = worker_count(n_workers)
    if workers == 1:
        run_block(range(n_trials))
    else:
        blocks = [range(i, n_trials, workers) for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_block, blocks))

    per_user = [_estimate_from_samples(rates[:, j]) for j in range(k)]
    pooled = _estimate_from_samples(rates.mean(axis=1))
    t_mean = math.fsum(tstars) / n_trials if tstars is not None else None
    return ThroughputEstimate(per_user=per_user, pooled=pooled, t_star_mean=t_mean)


def harvest_mf_statistics(model: CouplingModel, layout: UserLayout,
                          n_trials: int, master_seed: int,
                          n_workers: int | None = None) -> dict:
    """Per-trial SINR building blocks for matched-filter sweep reuse.

    For a fixed layout the SINR at any rho follows from trial statistics that
    do not depend on rho: the self gain |h_k h_k^H|^2, the cross-gain sum
    sum_{j != k} |h_k h_j^H|^2, and the statistical beam gain |alpha Q 1|^2.
    Sweeping an SNR axis then costs one vector expression per point instead
    of a fresh simulation.
    """
    k, m = layout.k, model.m
    self_gain = np.empty((n_trials, k))
    cross_gain = np.empty((n_trials, k))
    beam_gain = np.empty((n_trials, k))
    q1 = model.q.sum(axis=1)

    def run_block(block: range) -> None:
        for t in block:
            rng = trial_rng(master_seed, t)
            a = draw_channel(layout, m, rng)
            h = a @ model.r
            gains = np.abs(h @ h.conj().T) ** 2
            sg = gains.diagonal()
            self_gain[t] = sg
            cross_gain[t] = gains.sum(axis=1) - sg
            beam_gain[t] = np.abs(a @ q1) ** 2

    workers = worker_count(n_workers)
    if workers == 1:
        run_block(range(n_trials))
    else:
        blocks = [range(i, n_trials, workers) for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_block, blocks))
    return {"self_gain": self_gain, "cross_gain": cross_gain,
            "beam_gain": beam_gain}


def mf_sweep_estimates(stats: dict, layout: UserLayout, mode: str,
                       rho: float) -> ThroughputEstimate:
    """Throughput estimate at one rho from harvested matched-filter statistics."""
    if mode == "full":
        sinr = rho * stats["self_gain"] / (1.0 + rho * stats["cross_gain"])
    elif mode == "partial":
        v = layout.variances
        g2 = v.sum() - v  # per-user interferer variance sum
        x = stats["beam_gain"]
        sinr = rho * v[None, :] * x / (1.0 + rho * g2[None, :] * x)
    elif mode == "none":
        x = stats["beam_gain"]
        sinr = rho * x / (1.0 + rho * x)
    else:
        raise ValueError(f"harvested sweeps only support MF modes, not {mode!r}")
    rates = np.log1p(sinr)
    per_user = [_estimate_from_samples(rates[:, j]) for j in range(rates.shape[1])]
    pooled = _estimate_from_samples(rates.mean(axis=1))
    return ThroughputEstimate(per_user=per_user, pooled=pooled)


# ---------------------------------------------------------------------------
# statistics utilities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KsResult:
    d_statistic: float
    threshold: float
    reject: bool


def ks_two_sample(a, b, alpha: float = 0.01, min_size: int = 1000) -> KsResult:
    """Classical two-sample Kolmogorov-Smirnov test at level alpha."""
    a = np.sort(np.asarray(a, float))
    b = np.sort(np.asarray(b, float))
    n, m = a.size, b.size
    if min(n, m) < min_size:
        raise ValueError(f"need at least {min_size} points per sample")
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / n
    cdf_b = np.searchsorted(b, pooled, side="right") / m
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    c_alpha = math.sqrt(-math.log(alpha / 2.0) / 2.0)
    threshold = c_alpha * math.sqrt((n + m) / (n * m))
    return KsResult(d_statistic=d, threshold=threshold, reject=d > threshold)


def empirical_moments(samples, paired=None):
    """Unbiased mean/variance, plus the correlation for paired samples."""
    x = np.asarray(samples, float)
    mean = float(x.mean())
    var = float(x.var(ddof=1)) if x.size > 1 else 0.0
    if paired is None:
        return mean, var
    y = np.asarray(paired, float)
    if y.shape != x.shape:
        raise ValueError("paired samples must match in shape")
    sx, sy = x.std(ddof=1), y.std(ddof=1)
    if sx == 0 or sy == 0:
        corr = 1.0 if np.allclose(x - x.mean(), (y - y.mean())) else 0.0
    else:
        corr = float(((x - x.mean()) * (y - y.mean())).sum() / ((x.size - 1) * sx * sy))
    return mean, var, corr
