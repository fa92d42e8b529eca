"""Scalar special-function kernels for the closed-form throughput work.

Everything here is pure-Python double precision.  The upper incomplete gamma
is exposed in exponentially scaled form e^x * Gamma(a, x) because the series
that consume it multiply exactly that combination; forming the factors
separately overflows long before the product does.  For strongly negative
orders the values themselves leave float range, so log-domain variants are
provided for the series assembler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_EULER_GAMMA = 0.5772156649015328606
_TINY = 1e-300
_CF_TOL = 1e-15
_CF_MAX_ITER = 1_000_000


class SeriesError(RuntimeError):
    """A series or continued fraction failed to converge."""


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy shared by the series evaluators."""

    rel_tol: float = 1e-10
    max_terms: int = 500

    def __post_init__(self):
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_CONTROL = SeriesControl()


def log_gamma(x: float) -> float:
    """Natural log of Gamma(x) for x > 0."""
    if x <= 0:
        raise ValueError("log_gamma requires a positive argument")
    return math.lgamma(x)


def signed_log_gamma(z: float) -> tuple[float, float]:
    """(log|Gamma(z)|, sign) for any noninteger or positive z."""
    if z > 0:
        return math.lgamma(z), 1.0
    if z == math.floor(z):
        raise ValueError("Gamma pole at nonpositive integer")
    # reflection: Gamma(z) = pi / (sin(pi z) Gamma(1 - z))
    s = math.sin(math.pi * z)
    logabs = math.log(math.pi) - math.log(abs(s)) - math.lgamma(1.0 - z)
    return logabs, math.copysign(1.0, s)


def log_pochhammer(a: float, n: int) -> float:
    """ln Gamma(a+n) - ln Gamma(a) for a > 0, n >= 0."""
    if a <= 0:
        raise ValueError("log_pochhammer requires a > 0; "
                         "use signed_log_pochhammer for signed factors")
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 0.0
    return math.lgamma(a + n) - math.lgamma(a)


def signed_log_pochhammer(a: float, n: int) -> tuple[float, float]:
    """(log|poch(a, n)|, sign) for any real a.

    The rising product a(a+1)...(a+n-1) alternates sign while factors are
    negative; a nonpositive-integer a makes the product hit zero, reported as
    (-inf, 0).
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 0.0, 1.0
    if a > 0:
        return log_pochhammer(a, n), 1.0
    logabs = 0.0
    sign = 1.0
    for m in range(n):
        f = a + m
        if f == 0.0:
            return -math.inf, 0.0
        if f < 0:
            sign = -sign
        logabs += math.log(abs(f))
    return logabs, sign


# ---------------------------------------------------------------------------
# exponential integral
# ---------------------------------------------------------------------------

def _e1_series(y: float) -> float:
    """E1(y) for 0 < y < 1 via the convergent alternating series."""
    total = -_EULER_GAMMA - math.log(y)
    term = 1.0
    for n in range(1, 200):
        term *= -y / n
        contrib = -term / n
        total += contrib
        if abs(contrib) < 1e-17 * abs(total):
            return total
    raise SeriesError("E1 series did not converge")


def exp_scaled_e1(y: float) -> float:
    """e^y * E1(y) for y > 0, safe against underflow at large y."""
    if y <= 0:
        raise ValueError("exp_scaled_e1 requires y > 0")
    if y < 1.0:
        return math.exp(y) * _e1_series(y)
    # Lentz on e^y E1(y) = 1/(y+1 - 1/(y+3 - 4/(y+5 - 9/(...))))
    b = y + 1.0
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _CF_MAX_ITER):
        an = -float(i * i)
        b += 2.0
        d = an * d + b
        if d == 0.0:
            d = _TINY
        c = b + an / c
        if c == 0.0:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_TOL:
            return h
    raise SeriesError("E1 continued fraction did not converge")


def exponential_integral_ei(x: float) -> float:
    """Ei(x) for x < 0 (equivalently -E1(-x))."""
    if x >= 0:
        raise ValueError("only negative arguments are supported")
    y = -x
    if y < 1.0:
        return -_e1_series(y)
    return -math.exp(-y) * exp_scaled_e1(y)


def expx_ei_neg(x: float) -> float:
    """e^x * Ei(-x) for x > 0; lies in (-1, 0) and never overflows."""
    if x <= 0:
        raise ValueError("expx_ei_neg requires x > 0")
    return -exp_scaled_e1(x)


def sinr_saturation_complement(x: float) -> float:
    """g(x) = 1 - x e^x E1(x) for x > 0, evaluated without cancellation.

    This is E[cT/(1+cT)] for a unit-mean exponential T with x = 1/c; it
    decays like 1/x, so the naive subtraction loses all precision at large x.
    For x >= 1 the Stieltjes fraction e^x E1(x) = 1/(x+u) gives
    g = u/(x+u) directly.
    """
    if x <= 0:
        raise ValueError("sinr_saturation_complement requires x > 0")
    if x < 1.0:
        return 1.0 - x * exp_scaled_e1(x)
    # u = 1/(1 + 1/(x + 2/(1 + 2/(x + 3/(1 + 3/(x + ...))))))
    c = 1.0 / _TINY
    d = 1.0
    h = 1.0
    i = 2
    while i < _CF_MAX_ITER:
        an = float((i + 1) // 2)
        bn = x if i % 2 == 0 else 1.0
        d = an * d + bn
        if d == 0.0:
            d = _TINY
        c = bn + an / c
        if c == 0.0:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_TOL:
            u = h
            return u / (x + u)
        i += 1
    raise SeriesError("saturation-complement continued fraction did not converge")


# ---------------------------------------------------------------------------
# scaled upper incomplete gamma
# ---------------------------------------------------------------------------

def _log_ugamma_scaled_cf(a: float, x: float) -> float:
    """log(e^x Gamma(a, x)) via the Legendre continued fraction (Lentz).

    Accurate for any a <= 1 once x is not tiny, and increasingly fast for
    strongly negative orders.
    """
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _CF_MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if d == 0.0:
            d = _TINY
        c = b + an / c
        if c == 0.0:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_TOL:
            if h <= 0.0:
                raise SeriesError("incomplete-gamma continued fraction lost positivity")
            return a * math.log(x) + math.log(h)
    raise SeriesError("incomplete-gamma continued fraction did not converge")


def _log_ugamma_scaled_series_unit(a: float, x: float) -> float:
    """log(e^x Gamma(a, x)) for 0 < a < 1 and x < a + 1.

    Gamma(a,x) = (Gamma(a+1) - x^a)/a - x^a sum_{n>=1} (-x)^n/(n!(a+n)); the
    leading bracket is written through expm1 so a near 0 stays stable.
    """
    lead = (math.expm1(math.lgamma(a + 1.0)) - math.expm1(a * math.log(x))) / a
    xa = math.exp(a * math.log(x))
    term = 1.0
    tail = 0.0
    for n in range(1, 700):
        term *= -x / n
        contrib = term / (a + n)
        tail += contrib
        if abs(contrib) < 1e-18 * max(abs(tail), 1e-30):
            break
    else:
        raise SeriesError("incomplete-gamma small-x series did not converge")
    value = lead - xa * tail
    if value <= 0.0:
        raise SeriesError("incomplete-gamma series lost positivity")
    return x + math.log(value)


def _log_ugamma_scaled_series_neg(a: float, x: float) -> float:
    """log(e^x Gamma(a, x)) for noninteger a < 0 and small x.

    Factoring out the dominant x^a keeps everything in float range:
    Gamma(a,x) = x^a * [S + Gamma(a+1)/(a x^a)] with
    S = -1/a - sum_{n>=1} (-x)^n/(n!(a+n)).
    """
    s = -1.0 / a
    term = 1.0
    for n in range(1, 700):
        term *= -x / n
        contrib = term / (a + n)
        s -= contrib
        if abs(contrib) < 1e-18 * abs(s):
            break
    else:
        raise SeriesError("incomplete-gamma small-x series did not converge")
    log_gap1, sign_gap1 = signed_log_gamma(a + 1.0)
    # Gamma(a+1) / (a x^a): exponentially small whenever x^a is huge
    log_corr = log_gap1 - math.log(abs(a)) - a * math.log(x)
    corr = 0.0
    if log_corr > -700.0:
        corr = sign_gap1 * math.copysign(1.0, a) * math.exp(log_corr)
    value = s + corr
    if value <= 0.0:
        raise SeriesError("incomplete-gamma series lost positivity")
    return x + a * math.log(x) + math.log(value)


def _log_ugamma_scaled_int_chain(x: float, count: int) -> list[float]:
    """log(e^x Gamma(-n, x)) for n = 0..count-1 via the E_n recurrence."""
    values = []
    s = exp_scaled_e1(x)  # e^x E_1(x) = e^x Gamma(0, x)
    lx = math.log(x)
    for n in range(count):
        values.append(-n * lx + math.log(s))
        s = (1.0 - x * s) / (n + 1)  # e^x E_{n+2}
    return values


def _log_add_exp(la: float, lb: float) -> float:
    if la < lb:
        la, lb = lb, la
    return la + math.log1p(math.exp(lb - la))


def log_upper_incomplete_gamma_scaled(a: float, x: float) -> float:
    """log(e^x Gamma(a, x)) for any real order a and x > 0."""
    if x <= 0:
        raise ValueError("x must be positive")
    if a == 1.0:
        return 0.0  # e^x Gamma(1, x) = 1 exactly
    if a > 1.0:
        # climb from the base in (0, 1]: G(c+1) = c G(c) + x^c
        n_steps = math.ceil(a) - 1
        base = a - n_steps
        lx = math.log(x)
        if base == 1.0:
            log_g, c = 0.0, 1.0
        else:
            log_g, c = log_upper_incomplete_gamma_scaled(base, x), base
        for _ in range(n_steps):
            log_g = _log_add_exp(math.log(c) + log_g, c * lx)
            c += 1.0
        return log_g
    near_int = round(a)
    is_int = abs(a - near_int) < 1e-12
    small_x_cut = a + 1.0 if a > 0 else 0.5
    if x >= small_x_cut:
        return _log_ugamma_scaled_cf(a, x)
    if is_int:  # a in {0, -1, -2, ...} at small x
        chain = _log_ugamma_scaled_int_chain(x, 1 - int(near_int))
        return chain[-1]
    if a > 0:
        return _log_ugamma_scaled_series_unit(a, x)
    return _log_ugamma_scaled_series_neg(a, x)


def upper_incomplete_gamma_scaled(a: float, x: float) -> float:
    """e^x * Gamma(a, x) for any real order a and x > 0.

    Returns inf when the value exceeds float range (strongly negative orders
    at tiny x); use the log variant in that regime.
    """
    lg = log_upper_incomplete_gamma_scaled(a, x)
    if lg > 709.0:
        return math.inf
    return math.exp(lg)


def log_ugamma_scaled_chain(a_top: float, x: float, count: int) -> list[float]:
    """log(e^x Gamma(a, x)) at orders a_top, a_top-1, ..., a_top-count+1."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return [log_upper_incomplete_gamma_scaled(a_top - s, x) for s in range(count)]


# ---------------------------------------------------------------------------
# Kummer confluent hypergeometric
# ---------------------------------------------------------------------------

def kummer_1f1(a: float, b: float, z: float,
               ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """1F1(a; b; z) by direct series with term recurrence.

    Adequate in double precision for the argument ranges the bivariate
    density visits (|z| up to a few hundred with moderate b-a); for a < 0 the
    head of the series alternates and a few digits can cancel.
    """
    if b <= 0 and abs(b - round(b)) < 1e-12:
        raise ValueError("b must not be a nonpositive integer")
    if z == 0.0:
        return 1.0
    total = 1.0
    comp = 0.0  # Kahan compensation
    term = 1.0
    # terms can grow until j ~ |z|; forbid convergence checks before that
    j_min = int(abs(z)) + 2
    small_streak = 0
    max_terms = max(ctrl.max_terms, j_min + 10)
    for j in range(max_terms):
        term *= (a + j) * z / ((b + j) * (j + 1))
        if term == 0.0:  # terminating series: a was a nonpositive integer
            break
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) <= ctrl.rel_tol * abs(total):
            small_streak += 1
            if j >= j_min and small_streak >= 3:
                return total
        else:
            small_streak = 0
    else:
        raise SeriesError(
            f"1F1 series did not converge within {max_terms} terms "
            f"(a={a}, b={b}, z={z})")
    return total
