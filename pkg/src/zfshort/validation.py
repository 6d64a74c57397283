"""Named validation suites: analytic identity checks and Monte-Carlo
cross-comparisons, reduced to a machine-readable report.

Reports are pure functions of (suite, seed, n_trials): no timestamps or
environment state, so repeated runs serialize to byte-identical JSON.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .channel import SystemConfig, derive_stats
from .analytics import (
    outage_cdf,
    outage_cdf_kummer_form,
    outage_mixing_quadrature,
    outage_perfect_csi,
)
from .planner import (
    RatePlan,
    bound_inner_sum_closed,
    bound_inner_sum_direct,
    design_rate,
    error_prob_finite_blocklength,
    exhaustive_stream_argmax,
    goodput,
    goodput_lower_bound,
    m_star_lower_bound,
    optimize_streams,
)
from .montecarlo import TrialPlan, estimate_error_prob, estimate_mean_snr, estimate_outage

__all__ = ["run_validation", "SUITES"]

_SIGMA_H = 0.1
_THRESHOLD = math.expm1(0.1)

_EQUIV_GRID = [
    (nm, ps2, x)
    for nm in (0, 1, 2, 8, 32)
    for ps2 in (0.1, 1.0, 10.0)
    for x in (0.01, 0.1, 1.0, 5.0)
]


def _grid_config(nm: int, ps2: float) -> SystemConfig:
    return SystemConfig.identical(
        n_rx=nm + 2, n_streams=2, power=ps2 / _SIGMA_H,
        sigma_h_sq=_SIGMA_H, data_len=300,
    )


def check_closed_vs_hypergeometric(seed, n_trials) -> dict:
    """Production finite-sum outage against the hypergeometric cross-check
    form on the equivalence grid (tolerance 1e-9 absolute)."""
    worst = 0.0
    worst_at = None
    for nm, ps2, x in _EQUIV_GRID:
        cfg = _grid_config(nm, ps2)
        stats = derive_stats(cfg)
        a = outage_cdf(cfg, stats, 1, x)
        b = outage_cdf_kummer_form(cfg, stats, 1, x)
        d = abs(a - b)
        if d > worst:
            worst, worst_at = d, {"n_minus_m": nm, "p_sigma": ps2, "x": x}
    return {
        "name": "outage-closed-vs-hypergeometric",
        "passed": worst <= 1e-9,
        "details": {"max_abs_deviation": worst, "tolerance": 1e-9, "worst_at": worst_at},
    }


def check_closed_vs_mixing_quadrature(seed, n_trials) -> dict:
    """Production finite-sum outage against 128-node quadrature of the
    conditional-CDF x diagonal-power-density mixing integral (1e-6)."""
    worst = 0.0
    worst_at = None
    for nm, ps2, x in _EQUIV_GRID:
        cfg = _grid_config(nm, ps2)
        stats = derive_stats(cfg)
        a = outage_cdf(cfg, stats, 1, x)
        b = outage_mixing_quadrature(cfg, stats, 1, x, n_nodes=128)
        d = abs(a - b)
        if d > worst:
            worst, worst_at = d, {"n_minus_m": nm, "p_sigma": ps2, "x": x}
    return {
        "name": "outage-closed-vs-mixing-quadrature",
        "passed": worst <= 1e-6,
        "details": {"max_abs_deviation": worst, "tolerance": 1e-6, "worst_at": worst_at},
    }


def check_bound_sum_routes(seed, n_trials) -> dict:
    """Direct summation of the lower-bound inner sum against the derived
    closed form (1e-12 relative) on the (A, B, K) grid."""
    worst = 0.0
    worst_at = None
    for a in (0.01, 0.1, 0.5, 0.9):
        for b in (0.01, 0.05, 0.5):
            for k in (0, 1, 8, 126):
                direct = bound_inner_sum_direct(a, b, k)
                closed = bound_inner_sum_closed(a, b, k)
                rel = abs(direct - closed) / abs(direct)
                if rel > worst:
                    worst, worst_at = rel, {"a": a, "b": b, "k": k}
    return {
        "name": "bound-inner-sum-direct-vs-closed",
        "passed": worst <= 1e-12,
        "details": {"max_rel_deviation": worst, "tolerance": 1e-12, "worst_at": worst_at},
    }


def _mc_outage_points():
    for n, m in ((2, 2), (4, 2), (8, 4)):
        for p_db in (10.0, 20.0):
            yield n, m, p_db


def check_outage_monte_carlo(seed, n_trials) -> dict:
    """Empirical outage from full link-level frames at the six reference
    configurations against the closed form, 4 sigma."""
    reports = []
    for n, m, p_db in _mc_outage_points():
        cfg = SystemConfig.identical(n, m, 10.0 ** (p_db / 10.0), _SIGMA_H, 300)
        plan = TrialPlan(n_trials=n_trials, seed=seed)
        rep = estimate_outage(cfg, plan, _THRESHOLD)
        reports.append({"config": f"({n},{m}) p={p_db:g}dB", **asdict(rep)})
    return {
        "name": "outage-monte-carlo",
        "passed": all(r["passed"] for r in reports),
        "details": {"reports": reports},
    }


def check_mean_snr_monte_carlo(seed, n_trials) -> dict:
    """Sample mean SNR against the closed form at p = 10 dB, plus the
    high-power asymptote ratio at p = 1e4 (both 4 sigma)."""
    cfg = SystemConfig.identical(4, 2, 10.0, _SIGMA_H, 300)
    rep = estimate_mean_snr(cfg, TrialPlan(n_trials=n_trials, seed=seed))
    cfg_hi = SystemConfig.identical(4, 2, 1e4, _SIGMA_H, 300)
    rep_hi = estimate_mean_snr(cfg_hi, TrialPlan(n_trials=n_trials, seed=seed + 1))
    asym = cfg_hi.power * _SIGMA_H * (cfg_hi.n_rx - cfg_hi.n_streams + 1)
    ratio = rep_hi.empirical / asym
    ratio_band = rep_hi.confidence_sigmas * rep_hi.std_error / asym
    ratio_ok = abs(ratio - 1.0) <= ratio_band
    return {
        "name": "mean-snr-monte-carlo",
        "passed": rep.passed and rep_hi.passed and ratio_ok,
        "details": {
            "base": asdict(rep),
            "high_power": asdict(rep_hi),
            "asymptote_ratio": ratio,
            "asymptote_band": ratio_band,
        },
    }


def check_error_prob_monte_carlo(seed, n_trials) -> dict:
    """Sampled finite-blocklength error probability against the nested
    quadrature (4 sigma), and its large-L agreement with outage."""
    cfg = SystemConfig.identical(4, 2, 10.0, _SIGMA_H, 300)
    plan = TrialPlan(n_trials=n_trials, seed=seed)
    rep = estimate_error_prob(cfg, plan, rate=0.1, blocklength=300)
    rep_long = estimate_error_prob(cfg, plan, rate=0.1, blocklength=10_000)
    stats = derive_stats(cfg)
    outage = outage_cdf(cfg, stats, 1, _THRESHOLD)
    long_ok = abs(rep_long.empirical - outage) <= (
        rep_long.confidence_sigmas * rep_long.std_error
    )
    return {
        "name": "error-prob-monte-carlo",
        "passed": rep.passed and rep_long.passed and long_ok,
        "details": {
            "l300": asdict(rep),
            "l10000": asdict(rep_long),
            "outage": outage,
        },
    }


def check_perr_convergence(seed, n_trials) -> dict:
    """Finite-blocklength error probability approaches the outage CDF
    monotonically over L in {100, 300, 1000, 10000}; final gap <= 1e-3."""
    cfg = SystemConfig.identical(4, 2, 10.0, _SIGMA_H, 300)
    stats = derive_stats(cfg)
    outage = outage_cdf(cfg, stats, 1, _THRESHOLD)
    gaps = []
    for blocklength in (100, 300, 1000, 10_000):
        v = error_prob_finite_blocklength(cfg, stats, 1, 0.1, blocklength)
        gaps.append({"blocklength": blocklength, "p_err": v, "gap": abs(v - outage)})
    monotone = all(gaps[i]["gap"] > gaps[i + 1]["gap"] for i in range(len(gaps) - 1))
    final_ok = gaps[-1]["gap"] <= 1e-3
    return {
        "name": "perr-outage-convergence",
        "passed": monotone and final_ok,
        "details": {"outage": outage, "ladder": gaps, "final_tolerance": 1e-3},
    }


def _argmax_streams_full_perr(cfg: SystemConfig, rate: float, blocklength: int) -> int:
    """Coarse-to-fine argmax of the goodput with the full finite-blocklength
    error probability (step-4 grid, then the +-4 neighborhood)."""
    n = cfg.n_streams

    def g_of(m: int) -> float:
        sub = SystemConfig.identical(
            cfg.n_rx, m, cfg.power, cfg.sigma_h_sq[0], cfg.data_len,
            allow_short_data=cfg.allow_short_data,
        )
        plan = RatePlan.uniform(rate, m, 0.5, blocklength)
        return goodput(sub, derive_stats(sub), plan, use_outage_approx=False).goodput

    values = {m: g_of(m) for m in list(range(1, n + 1, 4)) + [n]}
    best = max(values, key=lambda m: values[m])
    for m in range(max(1, best - 4), min(n, best + 4) + 1):
        if m not in values:
            values[m] = g_of(m)
    return max(values, key=lambda m: values[m])


def check_mstar_blocklength_contrast(seed, n_trials) -> dict:
    """The goodput-maximizing stream count under the full finite-blocklength
    law differs between L = 200 and L = 10000 on at least one preset rate;
    both values are reported per rate."""
    p_lin = 10.0 ** 2 / math.sqrt(128.0)
    per_rate = []
    any_differ = False
    for rate in (0.05, 0.1, 0.5):
        cfg = SystemConfig.identical(128, 128, p_lin, _SIGMA_H, 200)
        m_short = _argmax_streams_full_perr(cfg, rate, 200)
        m_long = _argmax_streams_full_perr(cfg, rate, 10_000)
        differ = m_short != m_long
        any_differ = any_differ or differ
        per_rate.append(
            {"rate": rate, "m_star_L200": m_short, "m_star_L10000": m_long, "differ": differ}
        )
    return {
        "name": "mstar-blocklength-contrast",
        "passed": any_differ,
        "details": {"per_rate": per_rate},
    }


def check_goodput_approx_vs_full(seed, n_trials) -> dict:
    """Outage-approximated goodput within 5% relative of the full
    finite-blocklength goodput at L = 300 design points."""
    cfg = SystemConfig.identical(4, 2, 100.0, _SIGMA_H, 300)
    stats = derive_stats(cfg)
    rows = []
    ok = True
    for eps in (1e-2, 1e-3):
        rate = design_rate(cfg, stats, 1, eps)
        plan = RatePlan.uniform(rate, 2, eps, 300)
        g_full = goodput(cfg, stats, plan, use_outage_approx=False).goodput
        g_appr = goodput(cfg, stats, plan, use_outage_approx=True).goodput
        rel = abs(g_full - g_appr) / g_appr
        ok = ok and rel <= 0.05
        rows.append({"epsilon": eps, "rate": rate, "full": g_full, "approx": g_appr, "rel": rel})
    return {
        "name": "goodput-approx-vs-full",
        "passed": ok,
        "details": {"points": rows, "tolerance": 0.05},
    }


def check_fig1_qualitative(seed, n_trials) -> dict:
    """Outage decreases in p; imperfect CSI lies above perfect CSI at every
    point; the imperfect/perfect ratio at p = 10 dB grows with N."""
    p_grid = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]
    monotone_ok = True
    dominance_ok = True
    ratios = []
    for n in (2, 4, 8):
        cfg0 = SystemConfig.identical(n, 2, 1.0, _SIGMA_H, 300)
        imp = []
        perf = []
        for p_db in p_grid:
            cfg = SystemConfig.identical(n, 2, 10.0 ** (p_db / 10.0), _SIGMA_H, 300)
            stats = derive_stats(cfg)
            fi = outage_cdf(cfg, stats, 1, _THRESHOLD)
            fp = outage_perfect_csi(cfg, 1, _THRESHOLD)
            imp.append(fi)
            perf.append(fp)
            # N = M is an exact-equality point (the error term is signal,
            # so nothing is lost when no extra diversity exists); allow
            # roundoff-level slack there
            if fi < fp * (1.0 - 1e-9) - 1e-15:
                dominance_ok = False
        if any(imp[i + 1] >= imp[i] for i in range(len(imp) - 1)):
            monotone_ok = False
        i10 = p_grid.index(10.0)
        ratios.append({"n": n, "ratio_at_10db": imp[i10] / perf[i10]})
    ratio_growth = all(
        ratios[i + 1]["ratio_at_10db"] > ratios[i]["ratio_at_10db"]
        for i in range(len(ratios) - 1)
    )
    return {
        "name": "fig1-qualitative",
        "passed": monotone_ok and dominance_ok and ratio_growth,
        "details": {
            "outage_decreasing_in_p": monotone_ok,
            "imperfect_above_perfect": dominance_ok,
            "gap_ratio_at_10db": ratios,
            "ratio_grows_with_n": ratio_growth,
        },
    }


def _unimodal(values: list[float]) -> bool:
    diffs = np.diff(values)
    seen_down = False
    for d in diffs:
        if d < -1e-12:
            seen_down = True
        elif d > 1e-12 and seen_down:
            return False
    return True


def check_fig2_properties(seed, n_trials) -> dict:
    """Large-array goodput curve: unimodal in M, line-search optimum equals
    the exhaustive argmax, the lower bound never exceeds the goodput, and
    at rate 0.05 the bound sits within 10% of the peak goodput."""
    p_lin = 10.0 ** 2 / math.sqrt(128.0)
    n = 128
    details = {}
    ok = True
    for rate in (0.05, 0.1):
        g_vals = []
        lb_vals = []
        for m in range(1, n + 1):
            sub = SystemConfig.identical(n, m, p_lin, _SIGMA_H, 200)
            plan = RatePlan.uniform(rate, m, 0.5, 200)
            g_vals.append(goodput(sub, derive_stats(sub), plan).goodput)
            lb_vals.append(goodput_lower_bound(SystemConfig.identical(n, m, p_lin, _SIGMA_H, 200), m, rate))
        cfg_full = SystemConfig.identical(n, n, p_lin, _SIGMA_H, 200)
        plan_full = RatePlan.uniform(rate, n, 0.5, 200)
        alg1 = optimize_streams(cfg_full, plan_full)
        exh = exhaustive_stream_argmax(cfg_full, plan_full)
        mlb = m_star_lower_bound(cfg_full, rate)
        unimodal = _unimodal(g_vals)
        below = all(lb <= g + 1e-12 for lb, g in zip(lb_vals, g_vals))
        peak = max(g_vals)
        peak_idx = g_vals.index(peak)
        peak_gap = (peak - lb_vals[peak_idx]) / peak
        entry = {
            "unimodal": unimodal,
            "algorithm_m_star": alg1,
            "exhaustive_argmax": exh,
            "lower_bound_below": below,
            "peak_m": peak_idx + 1,
            "peak_goodput": peak,
            "peak_lb_rel_gap": peak_gap,
            "m_star_lower_bound": mlb,
            "lb_bound_holds": mlb <= exh,
        }
        ok = ok and unimodal and (alg1 == exh) and below
        if rate == 0.05:
            ok = ok and peak_gap <= 0.10
        details[f"rate_{rate:g}"] = entry
    return {
        "name": "fig2-properties",
        "passed": ok,
        "details": details,
    }


SUITES = {
    "analytic-identities": (
        check_closed_vs_hypergeometric,
        check_closed_vs_mixing_quadrature,
        check_bound_sum_routes,
    ),
    "monte-carlo": (
        check_outage_monte_carlo,
        check_mean_snr_monte_carlo,
        check_error_prob_monte_carlo,
    ),
    "finite-blocklength": (
        check_perr_convergence,
        check_mstar_blocklength_contrast,
        check_goodput_approx_vs_full,
    ),
    "figures": (
        check_fig1_qualitative,
        check_fig2_properties,
    ),
}
SUITES["all"] = tuple(
    fn for name in ("analytic-identities", "monte-carlo", "finite-blocklength", "figures")
    for fn in SUITES[name]
)


def _jsonable(obj):
    """Coerce numpy scalars so reports serialize with the stdlib encoder."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def run_validation(
    suite: str,
    seed: int = 42,
    n_trials: int = 100_000,
    out_path: str | Path | None = None,
) -> dict:
    """Run a named suite and return (optionally also write) the report.

    The report is a pure function of (suite, seed, n_trials), so the
    serialized bytes are identical across repeated runs.
    """
    if suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}; valid: {sorted(SUITES)}")
    checks = [_jsonable(fn(seed, n_trials)) for fn in SUITES[suite]]
    report = {
        "suite": suite,
        "seed": seed,
        "n_trials": n_trials,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }
    if out_path is not None:
        Path(out_path).write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return report
