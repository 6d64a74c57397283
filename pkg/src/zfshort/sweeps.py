"""Parameter sweeps: grid specification, the plain-text config format,
baked-in figure presets, and the metric evaluation loop.

Output rows are long-format (swept value, series label, metric, value) in
deterministic order; values serialize with 17 significant digits.  Specs
carry power in dB; the dB-to-linear conversion happens exactly once, where
the per-point SystemConfig is built.
"""

from __future__ import annotations

import configparser
import io
import json
import math
from dataclasses import dataclass, field, replace

from .channel import SystemConfig, derive_stats
from .analytics import outage_cdf, outage_perfect_csi, average_snr
from .planner import (
    RatePlan,
    design_rate,
    error_prob_finite_blocklength,
    goodput,
    goodput_lower_bound,
    optimize_streams,
)

__all__ = [
    "SweepBase",
    "SweepSpec",
    "SweepResult",
    "SweepValidationError",
    "run_sweep",
    "preset_spec",
    "load_config",
    "dump_config",
    "PRESETS",
]

SWEEP_PARAMS = ("p_db", "n", "m", "rate", "blocklength")
_PARAM_ALIASES = {"n": "n", "N": "n", "m": "m", "M": "m", "l": "blocklength",
                  "L": "blocklength", "p_db": "p_db", "rate": "rate",
                  "blocklength": "blocklength"}
METRICS = (
    "outage",
    "outage_perfect",
    "avg_snr",
    "rate_star",
    "p_err",
    "goodput",
    "goodput_lb",
    "m_star",
)


class SweepValidationError(ValueError):
    """A sweep specification field is invalid; the message names it."""


@dataclass(frozen=True)
class SweepBase:
    """Fixed system parameters of a sweep grid point (before the swept
    parameter is substituted)."""

    n: int = 4
    m: int = 2
    snr_db: float = 10.0
    sigma_h_sq: tuple[float, ...] = (0.1,)
    rate: float = 0.1
    epsilon: float = 1e-3
    blocklength: int = 300

    def config(self) -> SystemConfig:
        sig = self.sigma_h_sq
        if len(sig) == 1:
            sig = sig * self.m
        if len(sig) != self.m:
            raise SweepValidationError(
                f"sigma_h_sq: expected 1 or {self.m} values, got {len(sig)}"
            )
        return SystemConfig(
            n_rx=self.n,
            n_streams=self.m,
            power=10.0 ** (self.snr_db / 10.0),
            sigma_h_sq=sig,
            pilot_len=self.m,
            data_len=self.blocklength,
            allow_short_data=True,
        )


@dataclass(frozen=True)
class SweepSpec:
    """One swept parameter over a value grid, evaluated for a metric list
    on top of fixed system parameters; optional labelled series replay the
    grid under per-series base overrides (this is how the figure presets
    carry several curves in one file)."""

    param: str
    values: tuple[float, ...]
    metrics: tuple[str, ...]
    base: SweepBase = field(default_factory=SweepBase)
    series: tuple[tuple[str, dict], ...] = ()
    out_format: str = "csv"

    def __post_init__(self):
        norm = _PARAM_ALIASES.get(self.param)
        if norm is None:
            raise SweepValidationError(
                f"param: must be one of {SWEEP_PARAMS}, got {self.param!r}"
            )
        object.__setattr__(self, "param", norm)
        if not self.values:
            raise SweepValidationError("values: the sweep range is empty")
        if not self.metrics:
            raise SweepValidationError("metrics: the metric list is empty")
        for m in self.metrics:
            if m not in METRICS:
                raise SweepValidationError(
                    f"metrics: unknown metric {m!r}; valid: {METRICS}"
                )
        if self.out_format not in ("csv", "json"):
            raise SweepValidationError(
                f"format: must be csv or json, got {self.out_format!r}"
            )
        for label, _ in self.series:
            if "," in label or "\n" in label:
                raise SweepValidationError(
                    f"series: label {label!r} must not contain commas or newlines"
                )


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: tuple[tuple[str, float, str, float], ...]  # (series, value, metric, value)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"{self.spec.param},series,metric,value\n")
        for series, pval, metric, val in self.rows:
            buf.write(f"{pval:.17g},{series},{metric},{val:.17g}\n")
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "param": self.spec.param,
            "metrics": list(self.spec.metrics),
            "rows": [
                {
                    "series": series,
                    self.spec.param: pval,
                    "metric": metric,
                    "value": val,
                }
                for series, pval, metric, val in self.rows
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def render(self) -> str:
        return self.to_csv() if self.spec.out_format == "csv" else self.to_json()


def _apply_param(base: SweepBase, param: str, value: float) -> SweepBase:
    if param == "p_db":
        return replace(base, snr_db=float(value))
    if param == "n":
        return replace(base, n=int(value))
    if param == "m":
        return replace(base, m=int(value))
    if param == "rate":
        return replace(base, rate=float(value))
    if param == "blocklength":
        return replace(base, blocklength=int(value))
    raise SweepValidationError(f"param: unknown {param!r}")


def _eval_metric(metric: str, base: SweepBase) -> float:
    cfg = base.config()
    stats = derive_stats(cfg)
    threshold = math.expm1(base.rate)
    if metric == "outage":
        return outage_cdf(cfg, stats, 1, threshold)
    if metric == "outage_perfect":
        return outage_perfect_csi(cfg, 1, threshold)
    if metric == "avg_snr":
        return average_snr(cfg, stats, 1)
    if metric == "rate_star":
        return design_rate(cfg, stats, 1, base.epsilon)
    if metric == "p_err":
        return error_prob_finite_blocklength(cfg, stats, 1, base.rate, base.blocklength)
    if metric == "goodput":
        plan = RatePlan.uniform(base.rate, cfg.n_streams, base.epsilon, base.blocklength)
        return goodput(cfg, stats, plan).goodput
    if metric == "goodput_lb":
        return goodput_lower_bound(cfg, cfg.n_streams, base.rate)
    if metric == "m_star":
        plan = RatePlan.uniform(base.rate, cfg.n_streams, base.epsilon, base.blocklength)
        return float(optimize_streams(cfg, plan))
    raise SweepValidationError(f"metrics: unknown metric {metric!r}")


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Evaluate the grid; rows are emitted in (series, value, metric) order.

    The m_star metric does not depend on a swept stream count, so under
    param = m it is emitted once per series (at the full candidate set)
    instead of once per grid point.
    """
    series = spec.series if spec.series else (("", {}),)
    rows: list[tuple[str, float, str, float]] = []
    for label, overrides in series:
        base = replace(spec.base, **overrides) if overrides else spec.base
        for value in spec.values:
            point = _apply_param(base, spec.param, value)
            for metric in spec.metrics:
                if metric == "m_star" and spec.param == "m" and value != max(spec.values):
                    continue
                rows.append((label, float(value), metric, _eval_metric(metric, point)))
    return SweepResult(spec=spec, rows=tuple(rows))


# ----------------------------------------------------------------------
# Presets
# ----------------------------------------------------------------------

def _fig1_spec() -> SweepSpec:
    """Outage vs input SNR: two-stream detection at a 300-use data block,
    imperfect against perfect CSI, one curve family per antenna count."""
    return SweepSpec(
        param="p_db",
        values=tuple(float(v) for v in range(0, 31, 2)),
        metrics=("outage", "outage_perfect"),
        base=SweepBase(n=4, m=2, sigma_h_sq=(0.1,), rate=0.1, blocklength=300),
        series=(
            ("N=2", {"n": 2}),
            ("N=4", {"n": 4}),
            ("N=8", {"n": 8}),
        ),
    )


def _fig2_spec() -> SweepSpec:
    """Goodput vs stream count at N = 128 with power scaled down by
    sqrt(N) from a 20 dB budget; short-block and long-block series per
    coding rate, with the identical-statistics lower bound."""
    p_lin = 10.0 ** (20.0 / 10.0) / math.sqrt(128.0)
    snr_db = 10.0 * math.log10(p_lin)
    series = []
    for rate in (0.05, 0.1, 0.5):
        for blocklength in (200, 10_000):
            series.append(
                (
                    f"R={rate:g} L={blocklength}",
                    {"rate": rate, "blocklength": blocklength},
                )
            )
    return SweepSpec(
        param="m",
        values=tuple(float(v) for v in range(1, 129)),
        metrics=("goodput", "goodput_lb", "m_star"),
        base=SweepBase(n=128, m=128, snr_db=snr_db, sigma_h_sq=(0.1,),
                       rate=0.1, blocklength=200),
        series=tuple(series),
    )


PRESETS = {"fig1": _fig1_spec, "fig2": _fig2_spec}


def preset_spec(name: str) -> SweepSpec:
    try:
        return PRESETS[name]()
    except KeyError:
        raise SweepValidationError(
            f"preset: unknown {name!r}; valid: {sorted(PRESETS)}"
        ) from None


# ----------------------------------------------------------------------
# Plain-text config round trip
# ----------------------------------------------------------------------

def _parse_values(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text and "," not in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise SweepValidationError(
                f"values: range syntax is start:stop:step, got {text!r}"
            )
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise SweepValidationError("values: step must be > 0")
        out = []
        v = start
        while v <= stop + 1e-12 * max(1.0, abs(stop)):
            out.append(round(v, 12))
            v += step
        return tuple(out)
    return tuple(float(p) for p in text.split(",") if p.strip())


def load_config(text: str) -> SweepSpec:
    """Parse the key = value config format (sections: sweep, system, and
    optional series.<label> override sections)."""
    cp = configparser.ConfigParser()
    cp.read_string(text)
    if "sweep" not in cp:
        raise SweepValidationError("config: missing [sweep] section")
    sw = cp["sweep"]
    if "param" not in sw:
        raise SweepValidationError("param: missing from [sweep]")
    if "values" not in sw:
        raise SweepValidationError("values: missing from [sweep]")
    if "metrics" not in sw:
        raise SweepValidationError("metrics: missing from [sweep]")
    base_kwargs = {}
    if "system" in cp:
        sy = cp["system"]
        for key in ("n", "m", "blocklength"):
            if key in sy:
                base_kwargs[key] = sy.getint(key)
        for key in ("snr_db", "rate", "epsilon"):
            if key in sy:
                base_kwargs[key] = sy.getfloat(key)
        if "sigma_h_sq" in sy:
            base_kwargs["sigma_h_sq"] = tuple(
                float(v) for v in sy["sigma_h_sq"].split(",")
            )
    series = []
    for section in cp.sections():
        if section.startswith("series."):
            label = section[len("series."):]
            overrides: dict = {}
            for key, raw in cp[section].items():
                if key in ("n", "m", "blocklength"):
                    overrides[key] = int(raw)
                elif key in ("snr_db", "rate", "epsilon"):
                    overrides[key] = float(raw)
                elif key == "sigma_h_sq":
                    overrides[key] = tuple(float(v) for v in raw.split(","))
                else:
                    raise SweepValidationError(f"series.{label}: unknown key {key!r}")
            series.append((label, overrides))
    return SweepSpec(
        param=sw["param"].strip(),
        values=_parse_values(sw["values"]),
        metrics=tuple(m.strip() for m in sw["metrics"].split(",") if m.strip()),
        base=SweepBase(**base_kwargs),
        series=tuple(series),
        out_format=sw.get("format", "csv").strip(),
    )


def dump_config(spec: SweepSpec) -> str:
    """Serialize a SweepSpec to the config format; load_config(dump_config(s))
    reproduces an identical sweep."""
    cp = configparser.ConfigParser()
    cp["sweep"] = {
        "param": spec.param,
        "values": ",".join(f"{v:.17g}" for v in spec.values),
        "metrics": ",".join(spec.metrics),
        "format": spec.out_format,
    }
    cp["system"] = {
        "n": str(spec.base.n),
        "m": str(spec.base.m),
        "snr_db": f"{spec.base.snr_db:.17g}",
        "sigma_h_sq": ",".join(f"{v:.17g}" for v in spec.base.sigma_h_sq),
        "rate": f"{spec.base.rate:.17g}",
        "epsilon": f"{spec.base.epsilon:.17g}",
        "blocklength": str(spec.base.blocklength),
    }
    for label, overrides in spec.series:
        section = f"series.{label}"
        cp[section] = {}
        for key, val in overrides.items():
            if key == "sigma_h_sq":
                cp[section][key] = ",".join(f"{v:.17g}" for v in val)
            elif isinstance(val, float):
                cp[section][key] = f"{val:.17g}"
            else:
                cp[section][key] = str(val)
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
