"""Oracle suite behind the `validate` CLI subcommand.

Each check pits a closed form against an independent route (quadrature,
Monte Carlo, brute force, or an exact identity) and reports the achieved
error against its tolerance.  The suite is a quick sweep of the same ground
the full pytest acceptance module covers exhaustively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import throughput as tp
from .channel import complex_normal
from .config import build_array_geometry, place_users
from .coupling import build_coupling_model
from .maxmin import maxmin_beamforming
from .mc import estimate_throughput_mc, ks_two_sample, trial_rng
from .precoding import (mf_precoder_full, mf_precoder_partial,
                        sample_equivalent_sinr, sinr_per_user)
from .specfun import SeriesControl


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    achieved: float
    tolerance: float
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        note = f"  ({self.note})" if self.note else ""
        return (f"[{status}] {self.name}: achieved {self.achieved:.3e} "
                f"vs tolerance {self.tolerance:.1e}{note}")


def _scenario(m: int, k: int, seed: int = 3):
    lam = 299_792_458.0 / 1.6e9
    side = int(math.isqrt(m))
    geo = build_array_geometry(m, "spacing", lam / 2, line=side * side != m)
    rng = np.random.default_rng(seed)
    model = build_coupling_model(geo, lam, rng)
    layout = place_users(k, 500.0, rng, 3.5, 10.0, reference_distance_m=500.0)
    return model, layout


def check_exp_model_oracles() -> CheckResult:
    worst = 0.0
    for m in (4, 16, 64):
        model, layout = _scenario(m, 8)
        v = layout.variances
        beam = tp.fit_beam_gain_exponential(model.q, float(v[0]))
        g2 = float(v[1:].sum())
        for snr_db in (-10.0, 0.0, 10.0, 20.0, 30.0):
            rho = 10.0 ** (snr_db / 10.0) / m
            closed = math.expm1(
                tp.throughput_partial_csi(beam, float(v[0]), g2, rho).value_nats)
            quad = tp.expected_ratio_exponential(beam, rho * v[0], rho * g2)
            worst = max(worst, abs(closed - quad) / abs(quad))
            closed = math.expm1(tp.throughput_no_csi(beam, rho).value_nats)
            quad = tp.expected_ratio_exponential(beam, rho, rho)
            worst = max(worst, abs(closed - quad) / abs(quad))
    return CheckResult("partial/no-CSI closed forms vs quadrature",
                       worst <= 1e-8, worst, 1e-8)


def check_full_csi_oracle(full_grid: bool = False) -> CheckResult:
    model, layout = _scenario(16, 8)
    v = layout.variances
    params = tp.moment_match_gamma(model.spectrum, float(v[0]), v[1:])
    ctrl = SeriesControl(1e-12, 800)
    worst = 0.0
    snrs = (0.0, 10.0, 20.0) if full_grid else (10.0,)
    for snr_db in snrs:
        rho = 10.0 ** (snr_db / 10.0) / 16
        series = tp.expected_sinr_full_csi(params, rho, ctrl)
        quad = tp.expected_sinr_full_csi_quadrature(params, rho, ctrl)
        worst = max(worst, abs(series - quad) / abs(quad))
    return CheckResult("full-CSI series vs 2-D quadrature", worst <= 1e-4,
                       worst, 1e-4)


def check_pdf_properties() -> CheckResult:
    model, layout = _scenario(16, 8)
    v = layout.variances
    params = tp.moment_match_gamma(model.spectrum, float(v[0]), v[1:])
    ctrl = SeriesControl(1e-12, 800)
    pts = np.array([0.5, 0.8, 1.0, 1.3, 1.8]) * params.nu * params.theta
    mass, marginal = tp.bivariate_pdf_mass_and_marginal(params, ctrl, pts)
    ref = np.exp((params.nu - 1) * np.log(pts) - pts / params.theta
                 - math.lgamma(params.nu) - params.nu * math.log(params.theta))
    worst = max(abs(mass - 1.0), float(np.max(np.abs(marginal - ref) / ref)))
    return CheckResult("bivariate density mass and marginal", worst <= 1e-6,
                       worst, 1e-6)


def check_moment_match_mc() -> CheckResult:
    model, layout = _scenario(16, 8)
    v = layout.variances
    params = tp.moment_match_gamma(model.spectrum, float(v[0]), v[1:])
    rng = np.random.default_rng(9)
    lam = model.spectrum.eigenvalues
    n = 400_000
    gains = rng.exponential(scale=float(v[0]), size=(n, lam.size))
    x1 = gains @ lam
    x3 = (gains @ lam ** 2) * (rng.exponential(size=(n, v.size - 1)) @ v[1:])
    errs = [abs(x1.mean() - params.nu * params.theta) / (params.nu * params.theta),
            abs(x3.mean() - params.mu * params.phi) / (params.mu * params.phi),
            abs(np.corrcoef(x1, x3)[0, 1] - params.eta) / params.eta]
    worst = max(errs)
    return CheckResult("moment matching vs Monte Carlo moments",
                       worst <= 0.02, worst, 2e-2, "MC-noise limited")


def check_equivalent_sinr() -> CheckResult:
    model, layout = _scenario(8, 4)
    rho = 10.0 / 8
    n = 20_000
    rng = trial_rng(77, 0)
    v = layout.variances
    direct = np.empty(n)
    for t in range(n):
        a = complex_normal(rng, (4, 8)) * np.sqrt(v)[:, None]
        h = a @ model.r
        direct[t] = sinr_per_user(h, mf_precoder_full(h, rho * 8), 1.0)[0]
    equiv = sample_equivalent_sinr(model.spectrum, float(v[0]), v[1:], rho,
                                   rng, size=n)
    res = ks_two_sample(direct, equiv, alpha=0.01)
    return CheckResult("matched-filter vs eigen-domain SINR law (KS)",
                       not res.reject, res.d_statistic, res.threshold)


def check_maxmin() -> CheckResult:
    worst_spread = 0.0
    dominated = True
    for trial in range(20):
        rng = np.random.default_rng(500 + trial)
        k = int(rng.integers(2, 5))
        h = complex_normal(rng, (k, 8)) * rng.uniform(0.3, 2.0, size=(k, 1))
        sol = maxmin_beamforming(h, 1.0, 0.05)
        spread = float((sol.per_user_sinr.max() - sol.per_user_sinr.min())
                       / sol.t_star)
        worst_spread = max(worst_spread, spread)
        mf_min = float(sinr_per_user(h, mf_precoder_full(h, 1.0), 0.05).min())
        dominated &= sol.t_star >= mf_min * (1.0 - 1e-9)
    passed = worst_spread <= 1e-6 and dominated
    note = "" if dominated else "lost min-SINR dominance vs MF"
    return CheckResult("max-min equal-SINR spread and MF dominance", passed,
                       worst_spread, 1e-6, note)


def check_mf_replay() -> CheckResult:
    model, layout = _scenario(9, 3)
    rng = np.random.default_rng(21)
    v = layout.variances
    a = complex_normal(rng, (3, 9)) * np.sqrt(v)[:, None]
    h = a @ model.r
    rho = 2.345
    worst = 0.0
    # literal SINR transcription: rho |h_k h_k^H|^2 / (1 + rho sum |h_k h_j^H|^2)
    got = sinr_per_user(h, mf_precoder_full(h, rho * 9), 1.0)
    for k in range(3):
        sig = abs(np.vdot(h[k], h[k])) ** 2
        intf = sum(abs(h[k] @ h[j].conj()) ** 2 for j in range(3) if j != k)
        ref = rho * sig / (1.0 + rho * intf)
        worst = max(worst, abs(got[k] - ref) / ref)
    # statistical precoder replay: rho sigma^2 X / (1 + rho G2 X)
    w = mf_precoder_partial(model, v, rho * 9)
    got_p = sinr_per_user(h, w, 1.0)
    x = np.abs(a @ model.q.sum(axis=1)) ** 2
    for k in range(3):
        g2 = float(np.delete(v, k).sum())
        ref = rho * v[k] * x[k] / (1.0 + rho * g2 * x[k])
        worst = max(worst, abs(got_p[k] - ref) / ref)
    return CheckResult("SINR evaluator vs formula transcriptions", worst <= 1e-10,
                       worst, 1e-10)


def check_determinism() -> CheckResult:
    model, layout = _scenario(9, 3)
    est1 = estimate_throughput_mc(model, layout, "full", 0.5, 200, 42,
                                  n_workers=1)
    est2 = estimate_throughput_mc(model, layout, "full", 0.5, 200, 42,
                                  n_workers=4)
    diff = abs(est1.pooled.mean - est2.pooled.mean)
    return CheckResult("thread-count invariance of estimates", diff == 0.0,
                       diff, 0.0, "bit-exact requirement")


ALL_CHECKS = (
    check_exp_model_oracles,
    check_full_csi_oracle,
    check_pdf_properties,
    check_moment_match_mc,
    check_equivalent_sinr,
    check_maxmin,
    check_mf_replay,
    check_determinism,
)


def run_validation(full: bool = False) -> tuple[str, bool]:
    results = []
    for check in ALL_CHECKS:
        if check is check_full_csi_oracle:
            results.append(check(full_grid=full))
        else:
            results.append(check())
    lines = [r.line() for r in results]
    ok = all(r.passed for r in results)
    lines.append(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return "\n".join(lines), ok
