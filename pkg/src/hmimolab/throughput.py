"""Closed-form throughput approximations and their quadrature oracles.

The full-CSI path fits the signal and interference quadratic forms with a
correlated bivariate gamma model (moment matching on exact first and second
moments of the underlying weighted-exponential sums), then evaluates the
resulting double series for E[rho X1^2 / (1 + rho X3)].  The partial/no-CSI
paths reduce to a single exponential variate and an exponential-integral
closed form.  Every closed form here has an independent quadrature twin used by the
validation suite; the twins integrate the defining expectation directly and
share no series code with the formulas they check.

Two fitting conventions exist ("derived" vs "literal").  The literal
convention is dimensionally inconsistent in its interference terms, so
the default path re-derives every parameter from the exact first and
second moments and the Monte Carlo moment oracle arbitrates (see tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .coupling import Spectrum, spectral_sum, variance_sum
from .specfun import (
    DEFAULT_CONTROL,
    SeriesControl,
    SeriesError,
    kummer_1f1,
    log_upper_incomplete_gamma_scaled,
    sinr_saturation_complement,
)

LN2 = math.log(2.0)


def nats_to_bits(x: float) -> float:
    return x / LN2


@dataclass(frozen=True)
class GammaApproxParams:
    """Moment-matched bivariate-gamma parameters for the full-CSI SINR.

    X1 ~ Gamma(nu, theta) is the beamforming gain, X3 ~ Gamma(mu, phi) the
    interference product, eta their correlation coefficient.
    """

    nu: float
    theta: float
    mu: float
    phi: float
    eta: float

    def __post_init__(self):
        if min(self.nu, self.theta, self.mu, self.phi) <= 0:
            raise ValueError("shapes and scales must be positive")
        if not 0.0 <= self.eta < 1.0:
            raise ValueError(f"eta must lie in [0, 1), got {self.eta}")


@dataclass(frozen=True)
class ExpApproxParams:
    """Rate of the exponential law fitted to the statistical beam gain."""

    beta: float

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")


@dataclass(frozen=True)
class ThroughputResult:
    value_nats: float
    csi_mode: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.value_nats) or self.value_nats < 0:
            raise ValueError(f"throughput must be finite and nonnegative, "
                             f"got {self.value_nats}")

    @property
    def value_bits(self) -> float:
        return nats_to_bits(self.value_nats)


def moment_match_gamma(spectrum: Spectrum, sigma_k_sq: float,
                       interferer_variances, mode: str = "derived") -> GammaApproxParams:
    """Fit the bivariate-gamma parameters from the spectrum and interferers.

    mode="derived" uses the exact moments of the weighted-exponential sums;
    mode="literal" keeps the alternative convention for side-by-side
    study.  Needs at least one interferer; the single-user path bypasses
    the fit.
    """
    v = np.asarray(interferer_variances, float)
    if v.size == 0:
        raise ValueError("moment matching needs at least one interferer; "
                         "use the no-interference throughput path for K=1")
    if np.any(v <= 0) or sigma_k_sq <= 0:
        raise ValueError("variances must be positive")
    l1 = spectral_sum(spectrum, 1)
    l2 = spectral_sum(spectrum, 2)
    l3 = spectral_sum(spectrum, 3)
    l4 = spectral_sum(spectrum, 4)
    if l2 <= 0:
        raise ValueError("degenerate spectrum: L(lambda, 2) must be positive")
    sig = np.sqrt(v)
    g2 = variance_sum(sig, 2)
    g4 = variance_sum(sig, 4)

    if mode == "derived":
        nu = l1 ** 2 / l2
        theta = sigma_k_sq * l2 / l1
        mean3 = l2 * g2  # sigma_k^2 factored out of shape/correlation algebra
        sq3 = (l4 + l2 ** 2) * (g4 + g2 ** 2)
        var3 = sq3 - mean3 ** 2
        if var3 <= 0:
            raise ValueError("interference variance collapsed; corrupt inputs")
        mu = mean3 ** 2 / var3
        phi = sigma_k_sq * var3 / mean3
        eta = l3 * g2 / math.sqrt(l2 * var3)
    elif mode == "literal":
        k = v.size + 1
        nu = l1 ** 2 / l2
        theta = sigma_k_sq * l2 / l1
        denom = sigma_k_sq ** 2 * (k - 1) * l2 ** 2 + k * l4
        mu = (k - 1) * l2 ** 2 / denom
        phi = denom / ((k - 1) * l2)
        eta = (sigma_k_sq * math.sqrt(l2) * g2
               / math.sqrt(l4 * g2 + 2 * sigma_k_sq * l4 * g4))
    else:
        raise ValueError(f"unknown moment-matching mode {mode!r}")

    if eta >= 1.0:
        raise ValueError(f"correlation coefficient {eta} >= 1 signals corruption")
    return GammaApproxParams(nu=nu, theta=theta, mu=mu, phi=phi, eta=eta)


# ---------------------------------------------------------------------------
# bivariate gamma density
# ---------------------------------------------------------------------------

def bivariate_gamma_pdf(x1: float, x3: float, p: GammaApproxParams,
                        ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Joint kernel with Gamma(nu, theta) x Gamma(mu, phi) marginals.

    Kibble-type series extended to distinct shapes through a confluent
    hypergeometric factor on the second variable.  When mu < nu the kernel is
    not pointwise nonnegative (it oscillates in the off-diagonal corners while
    every integral property still holds), so treat it as the formal density
    the closed forms integrate rather than a sampling density.  Relative
    accuracy degrades gracefully in the far tail, where the absolute value is
    already negligible.
    """
    if x1 <= 0 or x3 <= 0:
        raise ValueError("the density lives on the positive quadrant")
    nu, theta, mu, phi, eta = p.nu, p.theta, p.mu, p.phi, p.eta
    one = 1.0 - eta
    s1 = 1.0 / (theta * one)
    s3 = 1.0 / (phi * one)
    z = eta * x3 * s3
    base = (mu * math.log(one) - math.lgamma(nu)
            - (mu) * math.log(phi * one) - nu * math.log(theta * one)
            + (nu - 1.0) * math.log(x1) + (mu - 1.0) * math.log(x3)
            - x1 * s1 - x3 * s3)
    if eta == 0.0:
        return math.exp(base - math.lgamma(mu))
    log_eta = math.log(eta)
    log_x1s = math.log(x1 * s1)
    log_x3s = math.log(x3 * s3)
    logs: list[float] = []
    signs: list[float] = []
    top = -math.inf
    streak = 0
    for i in range(ctrl.max_terms):
        f = kummer_1f1(mu - nu, mu + i, z, ctrl)
        if f == 0.0:
            continue
        lt = (base + i * (log_eta + log_x1s + log_x3s)
              - math.lgamma(i + 1.0) - math.lgamma(mu + i)
              + math.log(abs(f)))
        logs.append(lt)
        signs.append(math.copysign(1.0, f))
        top = max(top, lt)
        if lt < top + math.log(ctrl.rel_tol):
            streak += 1
            if streak >= 3:
                break
        else:
            streak = 0
    else:
        raise SeriesError("bivariate density series did not converge")
    acc = sum(s * math.exp(l - top) for l, s in zip(logs, signs))
    return math.exp(top) * acc


# ---------------------------------------------------------------------------
# full-CSI series
# ---------------------------------------------------------------------------

def expected_sinr_full_csi(p: GammaApproxParams, rho: float,
                           ctrl: SeriesControl = DEFAULT_CONTROL,
                           diagnostics: dict | None = None) -> float:
    """E[rho X1^2 / (1 + rho X3)] under the bivariate-gamma model.

    Double series derived by integrating the density term by term; each term
    carries an exponentially scaled upper incomplete gamma of increasingly
    negative order, assembled in log-magnitude + sign form.  The gamma-ratio
    factors of the inner index collapse against the Pochhammer denominator,
    which both simplifies and stabilizes the sum.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    nu, theta, mu, phi, eta = p.nu, p.theta, p.mu, p.phi, p.eta
    one = 1.0 - eta
    chi = 1.0 / (rho * phi * one)
    log_c0 = (2.0 * math.log(theta) + 2.0 * math.log(one)
              - (mu - 1.0) * math.log(rho) - mu * math.log(phi)
              - math.lgamma(nu))
    ln_chain = _ChainCache(1.0 - mu, chi)

    if eta == 0.0:
        lt = math.lgamma(nu + 2.0) + ln_chain[0]
        value = math.exp(log_c0 + lt)
        if diagnostics is not None:
            diagnostics.update(terms=1, residual=0.0)
        return value

    # each unit of i or j contributes eta / (rho phi (1-eta))
    step = math.log(eta) - math.log(rho * phi * one)
    max_terms = ctrl.max_terms
    lg_j = gammaln(np.arange(1, max_terms + 1))  # lgamma(j+1)
    poch_log = np.empty(max_terms)
    poch_sign = np.empty(max_terms)
    acc_l, acc_s = 0.0, 1.0
    a_j = mu - nu
    terminate_j = max_terms
    for j in range(max_terms):
        poch_log[j] = acc_l
        poch_sign[j] = acc_s
        f = a_j + j
        if f == 0.0:
            terminate_j = j + 1  # rising product is zero beyond here
            poch_log[j + 1:] = -math.inf
            poch_sign[j + 1:] = 0.0
            break
        acc_l += math.log(abs(f))
        if f < 0:
            acc_s = -acc_s
    j_idx = np.arange(max_terms)
    j_guard = min(int(max(3.0, math.ceil(max(nu - mu, 0.0)) + 2)), max_terms)

    all_logs: list[np.ndarray] = []
    all_signs: list[np.ndarray] = []
    top = -math.inf
    row_streak = 0
    n_terms = 0
    last_row_max = -math.inf
    grew_at_cap = False
    log_tol = math.log(ctrl.rel_tol)
    for i in range(max_terms):
        row_base = math.lgamma(nu + i + 2.0) - math.lgamma(i + 1.0) + i * step
        # inner j loop, vectorized with an adaptive cut
        j_hi = terminate_j
        chain_vals = ln_chain.upto(i + j_hi)
        lt = (row_base + poch_log[:j_hi] - lg_j[:j_hi] + j_idx[:j_hi] * step
              + chain_vals[i:i + j_hi])
        finite = np.isfinite(lt)
        row_top = float(lt[finite].max()) if finite.any() else -math.inf
        # trim the decayed tail of the row beyond the guard
        keep = finite & ((lt >= row_top + log_tol) | (j_idx[:j_hi] < j_guard))
        all_logs.append(lt[keep])
        all_signs.append(poch_sign[:j_hi][keep])
        n_terms += int(keep.sum())
        top = max(top, row_top)
        if row_top < top + log_tol and i >= 2:
            row_streak += 1
            if row_streak >= 3:
                break
        else:
            row_streak = 0
        grew_at_cap = row_top > last_row_max
        last_row_max = row_top
    else:
        if grew_at_cap:
            raise SeriesError("full-CSI series still growing at the term cap; "
                              "parameters look pathological")
    logs = np.concatenate(all_logs)
    signs = np.concatenate(all_signs)
    acc = float(np.sum(signs * np.exp(logs - top)))
    if acc <= 0.0:
        raise SeriesError("full-CSI series summed to a nonpositive value")
    value = math.exp(log_c0 + top + math.log(acc))
    if diagnostics is not None:
        tail = float(np.exp(last_row_max - top)) / max(acc, 1e-300)
        diagnostics.update(terms=n_terms, residual=tail)
    return value


class _ChainCache:
    """Lazily extended ln(e^x Gamma(a_top - s, x)) values for s = 0, 1, ..."""

    def __init__(self, a_top: float, x: float):
        self.a_top = a_top
        self.x = x
        self.values: list[float] = []

    def upto(self, s_max: int) -> np.ndarray:
        while len(self.values) <= s_max:
            s = len(self.values)
            self.values.append(
                log_upper_incomplete_gamma_scaled(self.a_top - s, self.x))
        return np.asarray(self.values[:s_max + 1])

    def __getitem__(self, s: int) -> float:
        return float(self.upto(s)[s])


def _pdf_x1_profile(x1: np.ndarray, x3: float, p: GammaApproxParams,
                    ctrl: SeriesControl) -> np.ndarray:
    """Density values f(x1_j, x3) for an array of x1 at one fixed x3.

    The confluent factors depend on x3 only, so one series pass serves the
    whole x1 grid; this is what makes the quadrature twins affordable.
    """
    x1 = np.asarray(x1, float)
    nu, theta, mu, phi, eta = p.nu, p.theta, p.mu, p.phi, p.eta
    one = 1.0 - eta
    s1 = 1.0 / (theta * one)
    s3 = 1.0 / (phi * one)
    z = eta * x3 * s3
    base = (mu * math.log(one) - math.lgamma(nu)
            - mu * math.log(phi * one) - nu * math.log(theta * one)
            + (mu - 1.0) * math.log(x3) - x3 * s3)
    profile0 = (nu - 1.0) * np.log(x1) - x1 * s1  # x1 part of the i = 0 term
    if eta == 0.0:
        return np.exp(base + profile0 - math.lgamma(mu))
    acc = np.zeros_like(x1)
    # each i multiplies by eta * (x1 s1) * (x3 s3); use the largest grid point
    # for truncation so no x1 in the profile is cut early
    log_step_x3 = math.log(eta) + math.log(x3 * s3)
    log_x1s1 = np.log(x1 * s1)
    step_max = log_step_x3 + float(log_x1s1.max())
    top = -math.inf
    streak = 0
    li_eff = -math.inf
    for i in range(ctrl.max_terms):
        f = kummer_1f1(mu - nu, mu + i, z, ctrl)
        if f != 0.0:
            li = (base + i * log_step_x3 - math.lgamma(i + 1.0)
                  - math.lgamma(mu + i) + math.log(abs(f)))
            acc += math.copysign(1.0, f) * np.exp(li + profile0 + i * log_x1s1)
            li_eff = li - i * log_step_x3 + i * step_max
            top = max(top, li_eff)
            if li_eff < top + math.log(ctrl.rel_tol) and i >= 2:
                streak += 1
                if streak >= 3:
                    return acc
            else:
                streak = 0
    if li_eff < top - 30.0:  # decayed but slowly: truncation is still benign
        return acc
    raise SeriesError("bivariate density series did not converge")


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)


def _panel_nodes_from_edges(edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return nodes, weights


def _gamma_panels(shape: float, scale: float, cut: float,
                  n_bulk: int = 14, n_tail: int = 6) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre panels concentrated where a gamma-like profile lives."""
    bulk_hi = min(scale * (shape + 8.0 * math.sqrt(shape) + 8.0), cut)
    edges = np.concatenate([
        np.linspace(1e-12 * scale, bulk_hi, n_bulk + 1),
        np.geomspace(bulk_hi, cut, n_tail + 1)[1:],
    ])
    return _panel_nodes_from_edges(edges)


def expected_sinr_full_csi_laplace(p: GammaApproxParams, rho: float) -> float:
    """E[rho X1^2 / (1 + rho X3)] via the model's closed-form joint transform.

    The kernel's joint Laplace transform is elementary, which gives
    E[X1^2 e^(-s X3)] = nu (nu+1) theta^2 (1 + phi(1-eta)s)^2 / (1+phi s)^(mu+2)
    and turns the expectation into one smooth exponentially-damped integral.
    Unlike the double series this route is stable arbitrarily close to
    eta = 1 (the single-dominant-interferer regime).
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    nu, theta, mu, phi, eta = p.nu, p.theta, p.mu, p.phi, p.eta
    a = phi * rho * (1.0 - eta)
    b = phi * rho

    def integrand(t: float) -> float:
        return math.exp(-t + 2.0 * math.log1p(a * t)
                        - (mu + 2.0) * math.log1p(b * t))

    # the e^-t factor caps the range; the algebraic factor is <= 1 beyond the
    # knees at 1/b and 1/a, so the discarded tail is under e^-60
    knees = sorted({min(60.0 * 0.99, 1.0 / b), min(60.0 * 0.99, 1.0 / a)})
    out = integrate.quad(integrand, 0.0, 60.0, points=knees,
                         epsabs=1e-300, epsrel=1e-11, limit=400,
                         full_output=True)
    return rho * nu * (nu + 1.0) * theta ** 2 * out[0]


def series_cancellation_digits(p: GammaApproxParams) -> float:
    """Decimal digits the alternating double series is expected to cancel.

    The inner sum behaves like a binomial-type alternating series of order
    nu - mu in powers of eta, so roughly (nu-mu) log10((1+eta)/(1-eta))
    digits vanish between the largest term and the result.
    """
    if p.eta == 0.0 or p.nu <= p.mu:
        return 0.0
    return (p.nu - p.mu) * math.log10((1.0 + p.eta) / (1.0 - p.eta))


#: beyond this predicted cancellation (or close to eta = 1, where the term
#: count explodes) the production path evaluates the same model through the
#: Laplace transform instead of the alternating double series
SERIES_CANCEL_DIGITS_LIMIT = 6.0
SERIES_ETA_LIMIT = 0.9


def _edge_power(mu: float) -> int:
    """Substitution exponent that smooths the x^(mu-1) edge when mu < 1."""
    if mu >= 1.0:
        return 1
    return max(2, math.ceil(2.0 / mu))


def expected_sinr_full_csi_quadrature(p: GammaApproxParams, rho: float,
                                      ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Quadrature of the defining expectation; validation twin of the series.

    Adaptive quadrature over the interference variable (power-substituted so
    a shape below one keeps a smooth integrand), with the unimodal inner
    profile integrated on fixed Gauss-Legendre panels.  The rectangle is cut
    at deep gamma quantiles (survival mass < 1e-12).
    """
    nu, theta, mu, phi = p.nu, p.theta, p.mu, p.phi
    cut1 = theta * (nu + 2.0 + 20.0 * math.sqrt(nu + 2.0) + 60.0)
    cut3 = phi * (mu + 20.0 * math.sqrt(mu) + 60.0) / (1.0 - p.eta)
    x1_nodes, x1_weights = _gamma_panels(nu + 2.0, theta, cut1)
    moment = x1_weights * x1_nodes ** 2
    q = _edge_power(mu)

    def outer(w: float) -> float:
        x3 = w ** q
        profile = _pdf_x1_profile(x1_nodes, x3, p, ctrl)
        jac = q * w ** (q - 1)
        return jac * rho / (1.0 + rho * x3) * float(moment @ profile)

    value, _ = integrate.quad(outer, (1e-12 * phi) ** (1.0 / q),
                              cut3 ** (1.0 / q),
                              epsabs=1e-13, epsrel=1e-9, limit=400)
    return value


def bivariate_pdf_mass_and_marginal(p: GammaApproxParams,
                                    ctrl: SeriesControl = DEFAULT_CONTROL,
                                    x1_points=None):
    """Quadrature mass of the density and its x1 marginal at chosen points.

    Test twin for the normalization and marginal properties: integrates the
    density on Gauss-Legendre panels cut at deep gamma quantiles, so the
    omitted tail mass is far below the tolerances being checked.
    """
    nu, theta, mu, phi = p.nu, p.theta, p.mu, p.phi
    cut1 = theta * (nu + 20.0 * math.sqrt(nu) + 60.0)
    cut3 = phi * (mu + 20.0 * math.sqrt(mu) + 60.0) / (1.0 - p.eta)
    # dense panels: the signed kernel oscillates, so the integrals cancel and
    # need more resolution than their smooth magnitude suggests; the second
    # axis is power-substituted to defuse the x^(mu-1) edge for mu < 1
    x1_nodes, x1_weights = _gamma_panels(nu, theta, cut1, n_bulk=16)
    q = _edge_power(mu)
    bulk_hi = min(phi * (mu + 8.0 * math.sqrt(mu) + 8.0) / (1.0 - p.eta), cut3)
    w_edges = np.concatenate([
        np.linspace(0.0, bulk_hi ** (1.0 / q), 25),
        np.geomspace(bulk_hi ** (1.0 / q), cut3 ** (1.0 / q), 9)[1:],
    ])
    w_edges[0] = (1e-12 * phi) ** (1.0 / q)
    w_nodes, w_weights = _panel_nodes_from_edges(w_edges)
    probe = x1_nodes if x1_points is None else np.concatenate(
        [x1_nodes, np.asarray(x1_points, float)])
    acc = np.zeros(probe.size)
    for w, ww in zip(w_nodes, w_weights):
        jac = q * w ** (q - 1)
        acc += ww * jac * _pdf_x1_profile(probe, w ** q, p, ctrl)
    mass = float((x1_weights * acc[:x1_nodes.size]).sum())
    marginal = acc[x1_nodes.size:]
    return mass, marginal


def throughput_full_csi(spectrum: Spectrum, sigma_k_sq: float,
                        interferer_variances, rho: float,
                        ctrl: SeriesControl = DEFAULT_CONTROL,
                        mode: str = "derived") -> ThroughputResult:
    """ln(1 + E[SINR]) for matched-filter precoding with instantaneous CSI."""
    v = np.asarray(interferer_variances, float)
    if v.size == 0:
        # no interference: E[rho X1^2] in closed form
        l1 = spectral_sum(spectrum, 1)
        l2 = spectral_sum(spectrum, 2)
        mean = rho * sigma_k_sq ** 2 * (l1 ** 2 + l2)
        return ThroughputResult(math.log1p(mean), "full", {"terms": 0})
    params = moment_match_gamma(spectrum, sigma_k_sq, v, mode)
    diag: dict = {}
    if (params.eta <= SERIES_ETA_LIMIT
            and series_cancellation_digits(params) <= SERIES_CANCEL_DIGITS_LIMIT):
        mean = expected_sinr_full_csi(params, rho, ctrl, diag)
    else:
        mean = expected_sinr_full_csi_laplace(params, rho)
        diag["evaluator"] = "laplace"
    return ThroughputResult(math.log1p(mean), "full", diag)


# ---------------------------------------------------------------------------
# partial / no CSI
# ---------------------------------------------------------------------------

def fit_beam_gain_exponential(q: np.ndarray, sigma_k_sq: float,
                              mode: str = "row-sums") -> ExpApproxParams:
    """Exponential rate of |alpha_k Q 1|^2 for the statistical precoders.

    The linear form has variance sigma_k^2 * sum_i |row_i(Q) summed|^2, so the
    default rate is its reciprocal.  mode="literal" keeps the squared-total-
    sum variant of the constant (numerator sigma_k^2) for comparison runs.
    """
    q = np.asarray(q)
    if sigma_k_sq <= 0:
        raise ValueError("sigma_k_sq must be positive")
    row_sums = q.sum(axis=1)
    if mode == "row-sums":
        s = float(np.sum(np.abs(row_sums) ** 2))
        if s <= 0:
            raise ValueError("all row sums of Q vanish; degenerate correlation")
        return ExpApproxParams(beta=1.0 / (sigma_k_sq * s))
    if mode == "literal":
        total = complex(row_sums.sum())
        if abs(total) == 0:
            raise ValueError("total sum of Q vanishes; degenerate correlation")
        return ExpApproxParams(beta=sigma_k_sq / abs(total) ** 2)
    raise ValueError(f"unknown beta mode {mode!r}")


def throughput_partial_csi(beam: ExpApproxParams, sigma_k_sq: float,
                           g2: float, rho: float) -> ThroughputResult:
    """ln(1 + E[SINR]) when the precoder knows only second-order statistics.

    E[rho sigma^2 X / (1 + rho G2 X)] = (sigma^2/G2) g(beta/(rho G2)) with
    g the cancellation-free saturation complement.
    """
    if g2 <= 0:
        raise ValueError("g2 must be positive; for a single user use the "
                         "no-CSI path (no interference statistics exist)")
    if rho <= 0 or sigma_k_sq <= 0:
        raise ValueError("rho and sigma_k_sq must be positive")
    x = beam.beta / (rho * g2)
    mean = sigma_k_sq / g2 * sinr_saturation_complement(x)
    return ThroughputResult(math.log1p(mean), "partial", {"x": x})


def throughput_no_csi(beam: ExpApproxParams, rho: float,
                      n_interferers: int = 1) -> ThroughputResult:
    """ln(1 + E[SINR]) for the structure-only precoder.

    With n_interferers=1 this is the single-interferer closed form
    1 + (beta/rho) e^(beta/rho) Ei(-beta/rho); passing the true interferer
    count K-1 scales the denominator to match the physical common-beam
    precoder, whose interference adds K-1 equal terms.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    if n_interferers < 1:
        raise ValueError("n_interferers must be >= 1")
    n = float(n_interferers)
    x = beam.beta / (rho * n)
    mean = sinr_saturation_complement(x) / n
    return ThroughputResult(math.log1p(mean), "none", {"x": x})


def expected_ratio_exponential(beam: ExpApproxParams, c_num: float,
                               c_den: float) -> float:
    """Quadrature twin for the partial/no-CSI means: E[c_num X/(1+c_den X)].

    X ~ Exp(rate beta); integrated on the unit-mean scale t = beta x.
    """
    beta = beam.beta
    r_num = c_num / beta
    r_den = c_den / beta

    def integrand(t: float) -> float:
        return r_num * t * math.exp(-t) / (1.0 + r_den * t)

    value, _ = integrate.quad(integrand, 0.0, np.inf,
                              epsabs=1e-14, epsrel=1e-12, limit=200)
    return value


def saturation_complement_quadrature(x: float) -> float:
    """Direct quadrature of g(x) = E[T/(x+T)], T ~ Exp(1); test oracle."""

    def integrand(t: float) -> float:
        return t / (x + t) * math.exp(-t)

    value, _ = integrate.quad(integrand, 0.0, np.inf,
                              epsabs=1e-14, epsrel=1e-12, limit=200)
    return value
