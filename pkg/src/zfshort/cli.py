"""Command-line front end.

Verbs: sweep (parameter grids to CSV/JSON plus a rendered figure),
validate (named check suites with machine-readable reports), rate-design,
mstar, and info.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .channel import SystemConfig, derive_stats
from .analytics import average_snr, outage_cdf, outage_perfect_csi
from .planner import (
    RatePlan,
    design_rate,
    error_prob_finite_blocklength,
    exhaustive_stream_argmax,
    goodput,
    goodput_lb_continuous_maximizer,
    goodput_lower_bound,
    m_star_lower_bound,
    optimize_streams,
)
from .sweeps import (
    SweepValidationError,
    load_config,
    preset_spec,
    run_sweep,
)
from .validation import SUITES, run_validation

EXIT_OK = 0
EXIT_VALIDATION_FAILURE = 1
EXIT_USAGE = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_system_flags(p: argparse.ArgumentParser):
    p.add_argument("--n", type=int, help="receive antennas N")
    p.add_argument("--m", type=int, help="transmitted streams M")
    p.add_argument("--snr-db", type=float, help="input SNR p in dB")
    p.add_argument(
        "--sigma-h-sq",
        type=str,
        help="large-scale fading variance(s), comma separated",
    )
    p.add_argument("--rate", type=float, help="coding rate in npcu")
    p.add_argument("--epsilon", type=float, help="target frame error rate")
    p.add_argument("--blocklength", type=int, help="data blocklength L")


def build_parser() -> _Parser:
    parser = _Parser(prog="zfshort", description=__doc__)
    parser.add_argument("--version", action="version", version=f"zfshort {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p_sweep = sub.add_parser("sweep", help="evaluate a parameter grid")
    p_sweep.add_argument("--preset", choices=("fig1", "fig2"), help="baked-in grid")
    p_sweep.add_argument("--config", type=str, help="sweep config file (key = value)")
    p_sweep.add_argument("--out", type=str, help="output file path")
    p_sweep.add_argument("--format", choices=("csv", "json"), help="output format")
    p_sweep.add_argument(
        "--no-plot", action="store_true",
        help="skip the figure rendered alongside the delimited output",
    )
    _add_system_flags(p_sweep)

    p_val = sub.add_parser("validate", help="run a named validation suite")
    p_val.add_argument(
        "suite", nargs="?", default="analytic-identities",
        help=f"one of {sorted(SUITES)}",
    )
    p_val.add_argument("--seed", type=int, default=42)
    p_val.add_argument("--trials", type=int, default=100_000)
    p_val.add_argument("--out", type=str, help="write the JSON report here")

    p_rate = sub.add_parser("rate-design", help="largest rate meeting a target error probability")
    _add_system_flags(p_rate)
    p_rate.add_argument("--out", type=str, help="write a JSON result here")

    p_mstar = sub.add_parser("mstar", help="goodput-maximizing stream count")
    _add_system_flags(p_mstar)
    p_mstar.add_argument("--out", type=str, help="write the goodput curve CSV here")
    p_mstar.add_argument("--no-plot", action="store_true")

    p_info = sub.add_parser("info", help="derived statistics for a configuration")
    _add_system_flags(p_info)
    p_info.add_argument("--out", type=str, help="write a JSON summary here")

    return parser


def _config_from_args(args, default_m=2) -> SystemConfig:
    n = args.n if args.n is not None else 4
    m = args.m if args.m is not None else default_m
    snr_db = args.snr_db if args.snr_db is not None else 10.0
    blocklength = args.blocklength if args.blocklength is not None else 300
    sigma = _parse_sigma(args.sigma_h_sq, m)
    return SystemConfig(
        n_rx=n,
        n_streams=m,
        power=10.0 ** (snr_db / 10.0),
        sigma_h_sq=sigma,
        pilot_len=m,
        data_len=blocklength,
        allow_short_data=True,
    )


def _parse_sigma(text: str | None, m: int) -> tuple[float, ...]:
    if text is None:
        return (0.1,) * m
    vals = tuple(float(v) for v in text.split(",") if v.strip())
    if len(vals) == 1:
        return vals * m
    if len(vals) != m:
        raise UsageError(
            f"--sigma-h-sq expects 1 or {m} comma-separated values, got {len(vals)}"
        )
    return vals


def _write_text(path: str, text: str):
    try:
        Path(path).write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}") from exc


def _cmd_sweep(args) -> int:
    if (args.preset is None) == (args.config is None):
        raise UsageError("give exactly one of --preset or --config")
    if args.out is None:
        raise UsageError("--out is required for sweep")
    if args.preset is not None:
        spec = preset_spec(args.preset)
    else:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise IOError(f"cannot read {args.config}: {exc}") from exc
        spec = load_config(text)
    overrides = {}
    if args.n is not None:
        overrides["n"] = args.n
    if args.m is not None:
        overrides["m"] = args.m
    if args.snr_db is not None:
        overrides["snr_db"] = args.snr_db
    if args.rate is not None:
        overrides["rate"] = args.rate
    if args.epsilon is not None:
        overrides["epsilon"] = args.epsilon
    if args.blocklength is not None:
        overrides["blocklength"] = args.blocklength
    if args.sigma_h_sq is not None:
        overrides["sigma_h_sq"] = _parse_sigma(args.sigma_h_sq, overrides.get("m", spec.base.m))
    if overrides:
        spec = replace(spec, base=replace(spec.base, **overrides))
    if args.format is not None:
        spec = replace(spec, out_format=args.format)
    result = run_sweep(spec)
    _write_text(args.out, result.render())
    written = [args.out]
    if not args.no_plot:
        from .plots import figure_path_for, render_sweep_figure

        fig_path = figure_path_for(args.out)
        try:
            render_sweep_figure(result, fig_path)
        except OSError as exc:
            raise IOError(f"cannot write {fig_path}: {exc}") from exc
        written.append(str(fig_path))
    print(f"wrote {', '.join(written)} ({len(result.rows)} rows)")
    return EXIT_OK


def _cmd_validate(args) -> int:
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; valid: {sorted(SUITES)}")
    report = run_validation(args.suite, seed=args.seed, n_trials=args.trials,
                            out_path=args.out)
    for check in report["checks"]:
        print(f"[{'PASS' if check['passed'] else 'FAIL'}] {check['name']}")
    print(f"suite {args.suite}: {'PASS' if report['passed'] else 'FAIL'}")
    if args.out:
        print(f"report written to {args.out}")
    return EXIT_OK if report["passed"] else EXIT_VALIDATION_FAILURE


def _cmd_rate_design(args) -> int:
    if args.epsilon is None:
        raise UsageError("--epsilon is required for rate-design")
    cfg = _config_from_args(args)
    stats = derive_stats(cfg)
    blocklength = args.blocklength if args.blocklength is not None else cfg.data_len
    rows = []
    for i in range(1, cfg.n_streams + 1):
        rate = design_rate(cfg, stats, i, args.epsilon)
        achieved = outage_cdf(cfg, stats, i, math.expm1(rate))
        p_err = error_prob_finite_blocklength(cfg, stats, i, rate, blocklength)
        rows.append(
            {
                "stream": i,
                "sigma_h_sq": cfg.sigma_h_sq[i - 1],
                "rate_star": rate,
                "outage_at_rate": achieved,
                "p_err_finite_blocklength": p_err,
            }
        )
    print(f"target epsilon {args.epsilon:g}, blocklength {blocklength}")
    for r in rows:
        print(
            f"stream {r['stream']}: R* = {r['rate_star']:.12g} npcu  "
            f"F(e^R*-1) = {r['outage_at_rate']:.6e}  "
            f"P_err(L) = {r['p_err_finite_blocklength']:.6e}"
        )
    if args.out:
        _write_text(
            args.out,
            json.dumps(
                {"epsilon": args.epsilon, "blocklength": blocklength, "streams": rows},
                indent=2,
                sort_keys=True,
            )
            + "\n",
        )
    return EXIT_OK


def _cmd_mstar(args) -> int:
    if args.rate is None:
        raise UsageError("--rate is required for mstar")
    cfg = _config_from_args(args, default_m=args.n if args.n is not None else 4)
    plan = RatePlan.uniform(args.rate, cfg.n_streams, 0.5, cfg.data_len)
    m_alg = optimize_streams(cfg, plan)
    m_exh = exhaustive_stream_argmax(cfg, plan)
    lines = [
        f"line-search M* = {m_alg}",
        f"exhaustive argmax = {m_exh}",
    ]
    bound = None
    j_cont = None
    if cfg.identical_stats:
        j_cont = goodput_lb_continuous_maximizer(cfg, args.rate)
        bound = m_star_lower_bound(cfg, args.rate)
        holds = bound <= m_exh
        lines.append(f"lower-bound maximizer J = {j_cont:.4f}, min(floor(J), N) = {bound}")
        if not holds:
            lines.append(
                f"warning: stream-count bound {bound} exceeds exhaustive argmax "
                f"{m_exh} (the bound is heuristic at this rate)"
            )
    if m_alg != m_exh:
        lines.append(
            "warning: line search and exhaustive argmax disagree (non-unimodal goodput)"
        )
    for line in lines:
        print(line)
    if args.out:
        if not cfg.identical_stats:
            raise UsageError("--out goodput curve requires a single --sigma-h-sq value")
        rows = ["m,goodput,goodput_lb"]
        curve = []
        for m in range(1, cfg.n_streams + 1):
            sub = SystemConfig.identical(
                cfg.n_rx, m, cfg.power, cfg.sigma_h_sq[0], cfg.data_len,
                allow_short_data=True,
            )
            g = goodput(sub, derive_stats(sub), RatePlan.uniform(args.rate, m, 0.5, cfg.data_len)).goodput
            lb = goodput_lower_bound(sub, m, args.rate)
            curve.append((m, g, lb))
            rows.append(f"{m},{g:.17g},{lb:.17g}")
        _write_text(args.out, "\n".join(rows) + "\n")
        if not args.no_plot and curve:
            from .plots import _pyplot, figure_path_for

            plt = _pyplot()
            fig, ax = plt.subplots(figsize=(7.2, 5.0))
            ax.plot([c[0] for c in curve], [c[1] for c in curve], "-", label="goodput")
            ax.plot([c[0] for c in curve], [c[2] for c in curve], "--", label="lower bound")
            ax.axvline(m_alg, color="gray", alpha=0.5)
            ax.set_xlabel("transmitted streams M")
            ax.set_ylabel("goodput [npcu]")
            ax.grid(True, alpha=0.3)
            ax.legend()
            fig.tight_layout()
            fig_path = figure_path_for(args.out)
            fig.savefig(fig_path, dpi=150)
            plt.close(fig)
            print(f"wrote {args.out}, {fig_path}")
        else:
            print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_info(args) -> int:
    cfg = _config_from_args(args)
    stats = derive_stats(cfg)
    rate = args.rate if args.rate is not None else 0.1
    threshold = math.expm1(rate)
    summary = {
        "version": __version__,
        "n_rx": cfg.n_rx,
        "n_streams": cfg.n_streams,
        "power_linear": cfg.power,
        "power_db": 10.0 * math.log10(cfg.power),
        "sigma_h_sq": list(cfg.sigma_h_sq),
        "pilot_len": cfg.pilot_len,
        "data_len": cfg.data_len,
        "frame_len": cfg.frame_len,
        "sigma_e_sq": stats.sigma_e_sq,
        "sigma_hhat_sq": list(stats.sigma_hhat_sq),
        "sigma_z_sq": list(stats.sigma_z_sq),
        "noncentrality_scale_mu": list(stats.mu),
        "dof_variance": list(stats.sigma_dof_sq),
        "rate": rate,
        "snr_threshold": threshold,
        "per_stream": [
            {
                "stream": i,
                "average_snr": average_snr(cfg, stats, i),
                "outage": outage_cdf(cfg, stats, i, threshold),
                "outage_perfect_csi": outage_perfect_csi(cfg, i, threshold),
            }
            for i in range(1, cfg.n_streams + 1)
        ],
    }
    if args.epsilon is not None:
        summary["rate_star"] = [
            design_rate(cfg, stats, i, args.epsilon)
            for i in range(1, cfg.n_streams + 1)
        ]
    print(json.dumps(summary, indent=2, sort_keys=True))
    if args.out:
        _write_text(args.out, json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


_COMMANDS = {
    "sweep": _cmd_sweep,
    "validate": _cmd_validate,
    "rate-design": _cmd_rate_design,
    "mstar": _cmd_mstar,
    "info": _cmd_info,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help()
            return EXIT_USAGE
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SweepValidationError as exc:
        print(f"invalid sweep spec: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IOError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def console_entry():
    raise SystemExit(main())


if __name__ == "__main__":
    console_entry()
