"""Scalar special functions, quadrature rules, and root finding.

Everything here is a pure function of its inputs (no global state), so all
operations are safe for unrestricted concurrent use.  Probability-valued
functions are computed from series of positive terms wherever a naive
`1 - q` would lose relative accuracy; exponential-growth functions ship an
exp-scaled companion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import linalg as _sla
from scipy import special as _special

__all__ = [
    "Tolerance",
    "DEFAULT_TOLERANCE",
    "gaussian_q",
    "marcum_q1",
    "marcum_q1_complement",
    "bessel_i0",
    "bessel_i0_scaled",
    "upper_incomplete_gamma_regularized",
    "lower_incomplete_gamma_regularized",
    "kummer_1f1_int",
    "kummer_1f1_int_scaled",
    "pochhammer",
    "gauss_laguerre_nodes",
    "gauss_gamma_nodes",
    "bisect_root",
    "adaptive_simpson",
]


@dataclass(frozen=True)
class Tolerance:
    """Stopping control for series summation and root finding."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_terms: int = 10_000

    def __post_init__(self):
        if not (self.abs_tol > 0):
            raise ValueError(f"abs_tol must be > 0, got {self.abs_tol}")
        if not (self.rel_tol > 0):
            raise ValueError(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.max_terms < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_TOLERANCE = Tolerance()


def _require_finite(name: str, x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x}")
    return x


def gaussian_q(x: float) -> float:
    """Gaussian tail probability Q(x) = P(Z > x) for standard normal Z.

    Computed through the complementary error function, Q(x) = erfc(x/sqrt(2))/2,
    which stays accurate (no cancellation) far into the tail; Q(40) is a
    denormal-range value rather than 0 or NaN.
    """
    x = _require_finite("x", x)
    return 0.5 * math.erfc(x / math.sqrt(2.0))


# ----------------------------------------------------------------------
# Marcum-Q of order 1 and its complement
# ----------------------------------------------------------------------

def _poisson_logpmf(k: int, rate: float) -> float:
    return k * math.log(rate) - rate - math.lgamma(k + 1)


def _poisson_cdf(k: int, rate: float) -> float:
    """P(Poisson(rate) <= k) as a sum of positive terms anchored at the mode.

    Deep left-tail values keep full relative accuracy (no `1 - survival`
    subtraction), which the Marcum complement below relies on.
    """
    if k < 0:
        return 0.0
    if rate <= 0.0:
        return 1.0
    sd = math.sqrt(rate)
    if k >= rate + 40.0 * sd + 40.0:
        return 1.0
    j0 = min(k, int(rate))
    lp = _poisson_logpmf(j0, rate)
    if lp < -745.0:
        # anchor underflows only in the deep left tail where the CDF itself
        # is below double-precision range
        return 0.0
    seed = math.exp(lp)
    total = seed
    # downward from the anchor
    t = seed
    j = j0
    while j > 0:
        t *= j / rate
        j -= 1
        total += t
        if t <= total * 1e-18:
            break
    # upward from the anchor to k (bounded: k - j0 <= 40 sd + 41)
    t = seed
    j = j0
    while j < k:
        j += 1
        t *= rate / j
        total += t
        if t == 0.0:
            break
    return min(total, 1.0)


def _marcum_direct(lam: float, x: float, max_terms: int) -> float:
    """Q1 as sum_k Poisson(k; lam) * P(Poisson(x) <= k); all terms positive."""
    w = math.exp(-lam)
    u = math.exp(-x)          # P(Poisson(x) <= 0)
    if w == 0.0 or u == 0.0:
        # rate(s) beyond exp range: sum the Poisson window with per-term
        # log evaluation instead
        return _marcum_windowed(lam, x, upper=True)
    t_inner = u               # Poisson(x) pmf at current inner index
    total = w * u
    comp = 0.0
    k = 0
    while k < max_terms:
        k += 1
        w *= lam / k
        t_inner *= x / k
        u += t_inner
        term = w * u
        y = term - comp
        s = total + y
        comp = (s - total) - y
        total = s
        # past the outer mode the weights decay super-exponentially; the
        # inner factor is bounded by 1, so the tail is bounded by the
        # remaining outer mass ~ w
        if k > lam and w <= total * 1e-18 + 1e-300:
            break
    return min(total, 1.0)


def _marcum_complement_direct(lam: float, x: float, max_terms: int) -> float:
    """1 - Q1 as sum_j Poisson(j; x) * P(Poisson(lam) <= j-1); positive terms."""
    v = math.exp(-x)
    c_inner = math.exp(-lam)  # P(Poisson(lam) <= 0)
    if v == 0.0 or (c_inner == 0.0 and x >= 0.5 * lam):
        return _marcum_windowed(lam, x, upper=False)
    t_inner = c_inner         # Poisson(lam) pmf at current inner index
    total = 0.0
    comp = 0.0
    j = 0
    while j < max_terms:
        j += 1
        v *= x / j
        term = v * c_inner    # inner CDF evaluated at j-1
        y = term - comp
        s = total + y
        comp = (s - total) - y
        total = s
        t_inner *= lam / j
        c_inner += t_inner
        if j > x and v <= total * 1e-18 + 1e-300:
            break
    return min(total, 1.0)


def _marcum_windowed(lam: float, x: float, upper: bool) -> float:
    """Fallback for rates beyond exp underflow: sum over the Poisson window
    with per-term log evaluation.  Slower, rarely exercised."""
    rate = lam if upper else x
    sd = math.sqrt(rate)
    lo = max(0, int(rate - 40.0 * sd - 40.0))
    hi = int(rate + 40.0 * sd + 40.0)
    total = 0.0
    for k in range(lo, hi + 1):
        lp = _poisson_logpmf(k, rate)
        if lp < -745.0:
            continue
        if upper:
            inner = _poisson_cdf(k, x)
        else:
            inner = _poisson_cdf(k - 1, lam)
        total += math.exp(lp) * inner
    return min(total, 1.0)


def marcum_q1(a: float, b: float, tol: Tolerance = DEFAULT_TOLERANCE) -> float:
    """First-order Marcum-Q function Q1(a, b).

    Q1(a, b) is the survival function at b^2 of a noncentral chi-squared
    variable with 2 degrees of freedom and noncentrality a^2 (unit variance
    per degree of freedom).  Summed as a Poisson mixture of regularized
    gamma tails with term-ratio stopping; when the complement is the small
    quantity, it is computed directly by `marcum_q1_complement` and
    subtracted, so neither side is ever produced by catastrophic
    cancellation.
    """
    a = _require_finite("a", a)
    b = _require_finite("b", b)
    if a < 0 or b < 0:
        raise ValueError(f"marcum_q1 requires a, b >= 0, got a={a}, b={b}")
    if b == 0.0:
        return 1.0
    lam = 0.5 * a * a
    x = 0.5 * b * b
    if a == 0.0:
        return math.exp(-x)
    if x >= lam:
        # Q1 is the smaller (or comparable) side: sum it directly
        return max(0.0, min(1.0, _marcum_direct(lam, x, tol.max_terms)))
    return max(0.0, min(1.0, 1.0 - _marcum_complement_direct(lam, x, tol.max_terms)))


def marcum_q1_complement(a: float, b: float, tol: Tolerance = DEFAULT_TOLERANCE) -> float:
    """1 - Q1(a, b) with full relative accuracy for small outage values.

    This is the noncentral chi-squared CDF at b^2; it is the quantity the
    outage analytics consume, and it must remain meaningful down to 1e-7
    and below, hence the dedicated positive-term series.
    """
    a = _require_finite("a", a)
    b = _require_finite("b", b)
    if a < 0 or b < 0:
        raise ValueError(f"marcum_q1_complement requires a, b >= 0, got a={a}, b={b}")
    if b == 0.0:
        return 0.0
    lam = 0.5 * a * a
    x = 0.5 * b * b
    if a == 0.0:
        return -math.expm1(-x)
    if x >= lam:
        return max(0.0, min(1.0, 1.0 - _marcum_direct(lam, x, tol.max_terms)))
    return max(0.0, min(1.0, _marcum_complement_direct(lam, x, tol.max_terms)))


# ----------------------------------------------------------------------
# Modified Bessel function of order zero
# ----------------------------------------------------------------------

def bessel_i0(x: float) -> float:
    """Modified Bessel function I0(x), x >= 0.

    Raises OverflowError for x > 709 where the unscaled value exceeds the
    double range; callers in that regime must use `bessel_i0_scaled`.
    """
    x = _require_finite("x", x)
    if x < 0:
        raise ValueError(f"bessel_i0 requires x >= 0, got {x}")
    if x > 709.0:
        raise OverflowError(
            f"I0({x}) overflows double precision; use bessel_i0_scaled"
        )
    return float(_special.i0e(x)) * math.exp(x)


def bessel_i0_scaled(x: float) -> float:
    """exp(-x) * I0(x); bounded by 1 on x >= 0, safe for any magnitude."""
    x = _require_finite("x", x)
    if x < 0:
        raise ValueError(f"bessel_i0_scaled requires x >= 0, got {x}")
    return float(_special.i0e(x))


# ----------------------------------------------------------------------
# Incomplete gamma (integer shape)
# ----------------------------------------------------------------------

def upper_incomplete_gamma_regularized(s: int, x: float) -> float:
    """Gamma(s, x) / Gamma(s) for integer s >= 1: exp(-x) sum_{k<s} x^k/k!.

    The finite sum is exact for integer shape; a per-term log-space path
    covers x beyond exp underflow.
    """
    if int(s) != s or s <= 0:
        raise ValueError(f"shape must be a positive integer, got {s}")
    s = int(s)
    x = _require_finite("x", x)
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return 1.0
    t = math.exp(-x)
    if t > 0.0:
        total = t
        for k in range(1, s):
            t *= x / k
            total += t
        return min(total, 1.0)
    total = 0.0
    for k in range(s):
        lt = k * math.log(x) - x - math.lgamma(k + 1)
        if lt > -745.0:
            total += math.exp(lt)
    return min(total, 1.0)


def lower_incomplete_gamma_regularized(s: int, x: float) -> float:
    """1 - Gamma(s, x)/Gamma(s), summed from k = s upward (positive terms).

    Keeps relative accuracy in the deep lower tail, where the complement of
    the finite sum would be roundoff-dominated.
    """
    if int(s) != s or s <= 0:
        raise ValueError(f"shape must be a positive integer, got {s}")
    s = int(s)
    x = _require_finite("x", x)
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return 0.0
    lt = s * math.log(x) - x - math.lgamma(s + 1)
    if lt < -745.0:
        return 0.0
    t = math.exp(lt)
    total = t
    k = s
    limit = int(x + 40.0 * math.sqrt(x) + 60.0) + s
    while k < limit:
        k += 1
        t *= x / k
        total += t
        if t <= total * 1e-18:
            break
    return min(total, 1.0)


# ----------------------------------------------------------------------
# Kummer confluent hypergeometric 1F1 with integer parameters
# ----------------------------------------------------------------------

def pochhammer(a: float, k: int) -> float:
    """Rising factorial (a)_k = a (a+1) ... (a+k-1); (a)_0 = 1.

    Exact for the integer arguments used by the outage series, including
    the negative-integer case (1-l)_k that truncates it.
    """
    if int(k) != k or k < 0:
        raise ValueError(f"k must be a non-negative integer, got {k}")
    out = 1.0
    for j in range(int(k)):
        out *= a + j
    return out


def _kummer_series(a: int, b: int, x: float, tol: Tolerance) -> float:
    term = 1.0
    total = 1.0
    for k in range(1, tol.max_terms + 1):
        term *= (a + k - 1) / (b + k - 1) * x / k
        total += term
        if abs(term) <= tol.rel_tol * 1e-4 * abs(total) + tol.abs_tol * 1e-4:
            break
    return total


def kummer_1f1_int(
    a: int, b: int, x: float, tol: Tolerance = DEFAULT_TOLERANCE, method: str = "auto"
) -> float:
    """1F1(a; b; x) for positive integer parameters.

    For a >= b the Kummer transformation 1F1(a;b;x) = e^x 1F1(b-a;b;-x)
    terminates after a-b+1 terms and is used by default; otherwise (and
    under method="series") the defining series is summed under `tol`.
    method="transform" forces the terminating route and raises if it does
    not terminate.
    """
    if int(a) != a or a < 1:
        raise ValueError(f"a must be a positive integer, got {a}")
    if int(b) != b or b < 1:
        raise ValueError(f"b must be a positive integer, got {b}")
    a, b = int(a), int(b)
    x = _require_finite("x", x)
    if method not in ("auto", "series", "transform"):
        raise ValueError(f"unknown method {method!r}")
    if method == "series" or (method == "auto" and a < b):
        return _kummer_series(a, b, x, tol)
    if a < b:
        raise ValueError("transform route requires a >= b (terminating case)")
    return math.exp(x) * _kummer_poly(a, b, x)


def kummer_1f1_int_scaled(a: int, b: int, x: float) -> float:
    """exp(-x) * 1F1(a; b; x) for a >= b >= 1: the terminating polynomial
    itself, safe for x far beyond exp overflow."""
    if int(a) != a or a < 1 or int(b) != b or b < 1:
        raise ValueError("parameters must be positive integers")
    a, b = int(a), int(b)
    if a < b:
        raise ValueError("scaled form requires a >= b (terminating case)")
    return _kummer_poly(a, b, float(x))


def _kummer_poly(a: int, b: int, x: float) -> float:
    # 1F1(b-a; b; -x) with b - a <= 0: terminates after a - b + 1 terms
    n = a - b
    term = 1.0
    total = 1.0
    for k in range(n):
        term *= (b - a + k) * (-x) / ((k + 1) * (b + k))
        total += term
    return total


# ----------------------------------------------------------------------
# Quadrature
# ----------------------------------------------------------------------

def _laguerre_rule(n: int, alpha: float):
    """Golub-Welsch rule for the weight t^alpha e^-t, weights normalized to 1."""
    k = np.arange(n, dtype=float)
    diag = 2.0 * k + alpha + 1.0
    off = np.sqrt(k[1:] * (k[1:] + alpha))
    nodes, vecs = _sla.eigh_tridiagonal(diag, off)
    w = vecs[0, :] ** 2
    return nodes, w / w.sum()


def gauss_laguerre_nodes(n: int) -> list[tuple[float, float]]:
    """Gauss-Laguerre rule: integral_0^inf e^-t g(t) dt ~ sum w_i g(t_i).

    Weights are positive and sum to 1 (the weight function integrates to 1).
    Valid for 2 <= n <= 256.
    """
    if int(n) != n or not (2 <= n <= 256):
        raise ValueError(f"n must be an integer in [2, 256], got {n}")
    nodes, weights = _laguerre_rule(int(n), 0.0)
    return [(float(t), float(w)) for t, w in zip(nodes, weights)]


def gauss_gamma_nodes(n: int, shape: float):
    """Quadrature for E[g(T)] with T ~ Gamma(shape, 1): generalized
    Gauss-Laguerre with alpha = shape - 1, weights normalized to sum 1.

    Returns (nodes, weights) as float arrays.  shape = 1 reduces to the
    plain Laguerre rule.
    """
    if int(n) != n or not (2 <= n <= 256):
        raise ValueError(f"n must be an integer in [2, 256], got {n}")
    if not (shape > 0):
        raise ValueError(f"shape must be > 0, got {shape}")
    return _laguerre_rule(int(n), float(shape) - 1.0)


# ----------------------------------------------------------------------
# Root finding and adaptive integration
# ----------------------------------------------------------------------

class BracketError(ValueError):
    """Raised when a root bracket does not contain a sign change."""


def bisect_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: Tolerance = DEFAULT_TOLERANCE,
) -> float:
    """Bisection on a monotone f with f(lo), f(hi) of opposite signs.

    Stops when |f(mid)| <= abs_tol or the interval width falls below
    rel_tol * |mid|.
    """
    lo = _require_finite("lo", lo)
    hi = _require_finite("hi", hi)
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"f({lo})={flo} and f({hi})={fhi} have the same sign")
    for _ in range(600):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= tol.abs_tol or (hi - lo) <= tol.rel_tol * abs(mid):
            return mid
        if (fm > 0) == (fhi > 0):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    abs_tol: float = 1e-12,
    max_depth: int = 48,
) -> float:
    """Recursive adaptive Simpson integration of f on [a, b]."""
    if not (b >= a):
        raise ValueError(f"need b >= a, got [{a}, {b}]")
    if b == a:
        return 0.0

    def _simp(fa, fm, fb, left, right):
        return (right - left) / 6.0 * (fa + 4.0 * fm + fb)

    def _rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = f(lm)
        frm = f(rm)
        left = _simp(fa, flm, fm, a, m)
        right = _simp(fm, frm, fb, m, b)
        if depth >= max_depth or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return _rec(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) + _rec(
            m, b, fm, frm, fb, right, 0.5 * tol, depth + 1
        )

    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = _simp(fa, fm, fb, a, b)
    return _rec(a, b, fa, fm, fb, whole, abs_tol, 0)
