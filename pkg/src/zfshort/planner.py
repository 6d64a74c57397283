"""Decision layer: rate design, finite-blocklength error probability,
goodput, stream-count optimization, and the identical-statistics lower
bound with its continuous-relaxation stream-count estimate.

Rates are npcu (natural log) throughout; dB or bits conversions belong to
the CLI boundary.  Stream indices are 1-based.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import StreamStats, SystemConfig, _check_stream, derive_stats
from .numerics import (
    Tolerance,
    adaptive_simpson,
    bessel_i0_scaled,
    bisect_root,
    gauss_gamma_nodes,
    gaussian_q,
)
from .analytics import cdf_conditional, outage_cdf

__all__ = [
    "RatePlan",
    "GoodputReport",
    "design_rate",
    "error_prob_finite_blocklength",
    "goodput",
    "optimize_streams",
    "exhaustive_stream_argmax",
    "goodput_lower_bound",
    "bound_inner_sum_direct",
    "bound_inner_sum_closed",
    "m_star_lower_bound",
    "goodput_lb_continuous_maximizer",
]


@dataclass(frozen=True)
class RatePlan:
    """Per-stream coding rates (npcu), target frame error rate, and the
    data blocklength they are meant for."""

    rates: tuple[float, ...]
    epsilon: float
    blocklength: int

    def __post_init__(self):
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        if not self.rates:
            raise ValueError("rates must contain at least one stream")
        if any(r < 0 for r in self.rates):
            raise ValueError("rates must be >= 0")
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.blocklength < 100:
            warnings.warn(
                f"blocklength {self.blocklength} is below the stated validity "
                f"range (>= 100) of the normal-approximation error probability",
                stacklevel=2,
            )

    @classmethod
    def uniform(cls, rate: float, n_streams: int, epsilon: float, blocklength: int) -> "RatePlan":
        return cls(rates=(float(rate),) * n_streams, epsilon=epsilon, blocklength=blocklength)


@dataclass(frozen=True)
class GoodputReport:
    """Goodput evaluation, optionally extended with the identical-statistics
    lower bound and the stream-count optimizers that produced it."""

    goodput: float
    per_stream_terms: tuple[float, ...]
    goodput_lower_bound: float | None = None
    m_star: int | None = None
    m_star_lb: int | None = None


def design_rate(
    cfg: SystemConfig,
    stats: StreamStats,
    i: int,
    epsilon: float,
    f_tol: float = 1e-10,
) -> float:
    """Largest rate R (npcu) with outage F(exp(R) - 1) = epsilon, found by
    bisection; the O(ln(L)/L) refinement of the defining equation is
    truncated.  The residual |F(exp(R) - 1) - epsilon| is driven below
    f_tol (default well inside the 1e-9 acceptance band)."""
    _check_stream(cfg, i)
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")

    def f(rate: float) -> float:
        return outage_cdf(cfg, stats, i, math.expm1(rate)) - epsilon

    hi = 1.0
    while f(hi) < 0.0:
        hi *= 2.0
        if hi > 1024.0:
            raise RuntimeError("failed to bracket the design rate")
    return bisect_root(f, 0.0, hi, Tolerance(abs_tol=f_tol, rel_tol=1e-15))


def _q_factor(x: float, rate: float, blocklength: int) -> float:
    """Q(sqrt(L) (ln(1+x) - R) / sqrt(1 - (1+x)^-2)) with the x -> 0 limit."""
    if x <= 0.0:
        return 1.0 if rate > 0.0 else 0.5
    v = 1.0 - 1.0 / ((1.0 + x) * (1.0 + x))
    return gaussian_q(math.sqrt(blocklength) * (math.log1p(x) - rate) / math.sqrt(v))


def error_prob_finite_blocklength(
    cfg: SystemConfig,
    stats: StreamStats,
    i: int,
    rate: float,
    blocklength: int,
    n_outer: int = 64,
    inner_rel_tol: float = 1e-8,
) -> float:
    """Normal-approximation frame error probability at finite blocklength:
    the expectation of the Q-factor over the unconditional SNR law.

    Outer integral: quadrature matched to the Gamma weight of the diagonal
    power (n_outer nodes).  Inner integral: adaptive Simpson over the
    conditional (Rician-power) law in amplitude coordinates, split at the
    rate threshold, with the tail cut where the density falls below 1e-16
    of its peak scale.
    """
    idx = _check_stream(cfg, i)
    if rate < 0:
        raise ValueError(f"rate must be >= 0, got {rate}")
    if blocklength < 100:
        warnings.warn(
            f"blocklength {blocklength} below stated validity range (>= 100)",
            stacklevel=2,
        )
    mu = stats.mu[idx]
    s2 = stats.sigma_dof_sq[idx]
    sd = math.sqrt(s2)
    shape = cfg.n_rx - cfg.n_streams + 1
    theta = stats.sigma_hhat_sq[idx]
    u_th = math.sqrt(math.expm1(rate)) if rate > 0 else 0.0

    def inner(y: float) -> float:
        m = math.sqrt(mu * y)

        def f(u: float) -> float:
            if u <= 0.0:
                return 0.0
            z = u * m / s2
            dens = (u / s2) * bessel_i0_scaled(z) * math.exp(
                -((u - m) ** 2) / (2.0 * s2)
            )
            return dens * _q_factor(u * u, rate, blocklength)

        lo = max(0.0, m - 13.0 * sd)
        hi = m + 13.0 * sd
        # magnitude estimate for a relative tolerance target
        rough = cdf_conditional(stats, i, y, math.expm1(rate)) if rate > 0 else 0.0
        rough += _q_factor(m * m + 2.0 * s2, rate, blocklength)
        tol = max(1e-18, inner_rel_tol * rough)
        points = sorted({lo, min(max(u_th, lo), hi), hi})
        total = 0.0
        for a, b in zip(points[:-1], points[1:]):
            if b > a:
                total += adaptive_simpson(f, a, b, abs_tol=0.5 * tol)
        return total

    nodes, weights = gauss_gamma_nodes(n_outer, float(shape))
    total = 0.0
    for t, w in zip(nodes, weights):
        total += w * inner(theta * float(t))
    return min(1.0, max(0.0, total))


def _prefactor(cfg: SystemConfig, blocklength: int) -> float:
    frame = cfg.pilot_len + blocklength
    return max(0.0, 1.0 - cfg.n_streams / frame)


def goodput(
    cfg: SystemConfig,
    stats: StreamStats,
    plan: RatePlan,
    use_outage_approx: bool = True,
) -> GoodputReport:
    """Total system goodput: (1 - M/L_T) * sum_i R_i (1 - P_i).

    With use_outage_approx the per-stream error probability is the outage
    CDF at exp(R_i) - 1 (blocklength enters only through the pilot
    overhead); otherwise the full finite-blocklength expectation is used.
    """
    if len(plan.rates) != cfg.n_streams:
        raise ValueError(
            f"plan carries {len(plan.rates)} rates for {cfg.n_streams} streams"
        )
    if cfg.identical_stats and len(set(plan.rates)) == 1:
        # all streams share one law: evaluate a single per-stream term
        rate = plan.rates[0]
        if use_outage_approx:
            p_err = outage_cdf(cfg, stats, 1, math.expm1(rate))
        else:
            p_err = error_prob_finite_blocklength(
                cfg, stats, 1, rate, plan.blocklength
            )
        terms = (rate * (1.0 - p_err),) * cfg.n_streams
    else:
        term_list = []
        for i, rate in enumerate(plan.rates, start=1):
            if use_outage_approx:
                p_err = outage_cdf(cfg, stats, i, math.expm1(rate))
            else:
                p_err = error_prob_finite_blocklength(
                    cfg, stats, i, rate, plan.blocklength
                )
            term_list.append(rate * (1.0 - p_err))
        terms = tuple(term_list)
    g = _prefactor(cfg, plan.blocklength) * sum(terms)
    return GoodputReport(goodput=g, per_stream_terms=terms)


def _sorted_stream_order(
    cfg: SystemConfig,
    stats: StreamStats,
    plan: RatePlan,
    priorities: Sequence[float] | None,
) -> list[int]:
    """Stream order for nested sub-family evaluation: by priority, ties by
    descending per-stream outage-discounted rate (computed at the full M)."""
    metric = [
        plan.rates[i] * (1.0 - outage_cdf(cfg, stats, i + 1, math.expm1(plan.rates[i])))
        for i in range(cfg.n_streams)
    ]
    if priorities is None:
        keys = [(-metric[i], i) for i in range(cfg.n_streams)]
    else:
        if len(priorities) != cfg.n_streams:
            raise ValueError("priorities must have one entry per stream")
        keys = [(-priorities[i], -metric[i], i) for i in range(cfg.n_streams)]
    return [k[-1] for k in sorted(keys)]


def _sub_family(cfg: SystemConfig, plan: RatePlan, order: Sequence[int], j: int):
    """Config and plan restricted to the first j streams of the sorted order.
    The pilot length tracks the stream count when it was minimal."""
    chosen = list(order[:j])
    pilot = j if cfg.pilot_len == cfg.n_streams else cfg.pilot_len
    sub_cfg = SystemConfig(
        n_rx=cfg.n_rx,
        n_streams=j,
        power=cfg.power,
        sigma_h_sq=tuple(cfg.sigma_h_sq[k] for k in chosen),
        pilot_len=pilot,
        data_len=cfg.data_len,
        allow_short_data=cfg.allow_short_data,
    )
    sub_plan = RatePlan(
        rates=tuple(plan.rates[k] for k in chosen),
        epsilon=plan.epsilon,
        blocklength=plan.blocklength,
    )
    return sub_cfg, sub_plan


def _family_goodput(cfg, plan, order, j, use_outage_approx):
    sub_cfg, sub_plan = _sub_family(cfg, plan, order, j)
    return goodput(sub_cfg, derive_stats(sub_cfg), sub_plan, use_outage_approx).goodput


def optimize_streams(
    cfg: SystemConfig,
    plan: RatePlan,
    priorities: Sequence[float] | None = None,
    use_outage_approx: bool = True,
) -> int:
    """Descending line search for the goodput-maximizing stream count:
    starting from the full candidate set, return the first j (from M down
    to 2) with G(j) >= G(j-1), else 1.

    For non-unimodal G this is a local decision by construction; compare
    with `exhaustive_stream_argmax` to make discrepancies visible.
    """
    if len(plan.rates) != cfg.n_streams:
        raise ValueError("plan must carry one rate per candidate stream")
    stats = derive_stats(cfg)
    order = _sorted_stream_order(cfg, stats, plan, priorities)
    g_next = None
    for j in range(cfg.n_streams, 1, -1):
        g_j = _family_goodput(cfg, plan, order, j, use_outage_approx) if g_next is None else g_next
        g_jm1 = _family_goodput(cfg, plan, order, j - 1, use_outage_approx)
        if g_j >= g_jm1:
            return j
        g_next = g_jm1
    return 1


def exhaustive_stream_argmax(
    cfg: SystemConfig,
    plan: RatePlan,
    priorities: Sequence[float] | None = None,
    use_outage_approx: bool = True,
) -> int:
    """Brute-force argmax of G(j) over j = 1..M on the same nested stream
    order the line search uses (smallest maximizer on ties)."""
    stats = derive_stats(cfg)
    order = _sorted_stream_order(cfg, stats, plan, priorities)
    values = [
        _family_goodput(cfg, plan, order, j, use_outage_approx)
        for j in range(1, cfg.n_streams + 1)
    ]
    return int(np.argmax(values)) + 1


# ----------------------------------------------------------------------
# Identical-statistics lower bound
# ----------------------------------------------------------------------

def bound_inner_sum_direct(a_geom: float, b_half: float, k_max: int) -> float:
    """sum_{l=0}^{K} a^l (1 + (l+1) b) by direct summation (ground truth)."""
    if k_max < 0:
        raise ValueError(f"k_max must be >= 0, got {k_max}")
    total = 0.0
    apow = 1.0
    for l in range(k_max + 1):
        total += apow * (1.0 + (l + 1) * b_half)
        apow *= a_geom
    return total


def bound_inner_sum_closed(a_geom: float, b_half: float, k_max: int) -> float:
    """Closed form of the same sum:
    (1 - a^(K+1))/(1 - a) + b (1 - (K+2) a^(K+1) + (K+1) a^(K+2))/(1 - a)^2.

    Derived independently from the geometric and arithmetico-geometric
    partial sums; must match the direct summation to 1e-12 relative.
    """
    if k_max < 0:
        raise ValueError(f"k_max must be >= 0, got {k_max}")
    a = a_geom
    if a == 1.0:
        return (k_max + 1) + b_half * (k_max + 1) * (k_max + 2) / 2.0
    ak1 = a ** (k_max + 1)
    ak2 = ak1 * a
    geo = (1.0 - ak1) / (1.0 - a)
    ari = (1.0 - (k_max + 2) * ak1 + (k_max + 1) * ak2) / (1.0 - a) ** 2
    return geo + b_half * ari


def _identical_params(cfg: SystemConfig):
    if not cfg.identical_stats:
        raise ValueError("identical-statistics operation requires equal sigma_h_sq")
    stats = derive_stats(cfg)
    s2h = cfg.sigma_h_sq[0]
    rho = s2h / stats.sigma_e_sq
    a_geom = 1.0 / (1.0 + rho)
    return stats, a_geom


def _glb_value(cfg: SystemConfig, m_real: float, rate: float, a_geom: float,
               xp: float, xt: float) -> float:
    """Continuous-in-M lower-bound goodput for the identical-stats family
    (pilot length tracking the stream count)."""
    n = cfg.n_rx
    frame = m_real + cfg.data_len
    pref = (1.0 - m_real / frame) * m_real * rate * math.exp(-xp)
    k = n - m_real
    b = xt / 2.0
    if a_geom == 1.0:
        ssum = (k + 1) + b * (k + 1) * (k + 2) / 2.0
    else:
        ln_a = math.log(a_geom)
        ak1 = math.exp((k + 1) * ln_a)
        ak2 = ak1 * a_geom
        ssum = (1.0 - ak1) / (1.0 - a_geom) + b * (
            1.0 - (k + 2) * ak1 + (k + 1) * ak2
        ) / (1.0 - a_geom) ** 2
    return pref * (1.0 + xt * ssum)


def _glb_setup(cfg: SystemConfig, rate: float):
    stats, a_geom = _identical_params(cfg)
    x = math.expm1(rate)
    xp = x / (2.0 * stats.sigma_dof_sq[0])
    xt = (1.0 - a_geom) * xp
    return a_geom, xp, xt


def goodput_lower_bound(cfg: SystemConfig, m: int, rate: float) -> float:
    """Identical-statistics lower bound on the total goodput at stream
    count m: the outage survival's hypergeometric factors are bounded
    below by 1F1(a; 2; x) >= 1 + a x / 2, giving

        (1 - m/L_T) m R exp(-xp) [1 + xt * sum_{l=0}^{N-m} a^l (1+(l+1) xt/2)].

    The inner sum is evaluated by direct summation (the normative route;
    `bound_inner_sum_closed` is the O(1) equivalent).  Tight for rates
    up to about 0.1 npcu, loose above.
    """
    if not (1 <= m <= cfg.n_rx):
        raise ValueError(f"m must be in [1, {cfg.n_rx}], got {m}")
    if rate < 0:
        raise ValueError(f"rate must be >= 0, got {rate}")
    a_geom, xp, xt = _glb_setup(cfg, rate)
    frame = (m if cfg.pilot_len == cfg.n_streams else cfg.pilot_len) + cfg.data_len
    pref = (1.0 - m / frame) * m * rate * math.exp(-xp)
    ssum = bound_inner_sum_direct(a_geom, xt / 2.0, cfg.n_rx - m)
    return pref * (1.0 + xt * ssum)


def goodput_lb_continuous_maximizer(cfg: SystemConfig, rate: float) -> float:
    """Stationary point of the continuous-in-M relaxation of the lower
    bound, located by bisection on a centered finite-difference derivative
    (step 1e-4).  Returns N when the derivative is still positive at the
    boundary (no interior root)."""
    if rate <= 0:
        raise ValueError(f"rate must be > 0, got {rate}")
    a_geom, xp, xt = _glb_setup(cfg, rate)
    n = float(cfg.n_rx)
    h = 1e-4

    def deriv(m_real: float) -> float:
        return (
            _glb_value(cfg, m_real + h, rate, a_geom, xp, xt)
            - _glb_value(cfg, m_real - h, rate, a_geom, xp, xt)
        ) / (2.0 * h)

    lo, hi = 1.0, n
    if deriv(hi) >= 0.0:
        return n
    if deriv(lo) <= 0.0:
        return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if deriv(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def m_star_lower_bound(cfg: SystemConfig, rate: float) -> int:
    """min(floor(J), N) with J the continuous maximizer of the lower-bound
    goodput, floored at 1.

    The bound relation to the true optimizer is an observed regularity at
    low rates, not a theorem; callers comparing it against the line-search
    result should flag violations rather than assert."""
    j = goodput_lb_continuous_maximizer(cfg, rate)
    return max(1, min(int(math.floor(j)), cfg.n_rx))
