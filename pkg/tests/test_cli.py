"""CLI and sweep machinery: config round trips, output formats, figure
siblings, presets, exit codes, and report determinism."""

import json
import math

import pytest

from zfshort.cli import main
from zfshort.sweeps import (
    SweepBase,
    SweepSpec,
    SweepValidationError,
    dump_config,
    load_config,
    preset_spec,
    run_sweep,
)
from zfshort import validation


SMALL_CONFIG = """
[sweep]
param = p_db
values = 0:10:5
metrics = outage,outage_perfect
format = csv

[system]
n = 4
m = 2
sigma_h_sq = 0.1
rate = 0.1
blocklength = 300
"""


class TestSweepSpec:
    def test_param_aliases(self):
        spec = SweepSpec(param="N", values=(2.0, 4.0), metrics=("outage",))
        assert spec.param == "n"
        spec_l = SweepSpec(param="L", values=(200.0,), metrics=("outage",))
        assert spec_l.param == "blocklength"

    def test_invalid_fields(self):
        with pytest.raises(SweepValidationError, match="param"):
            SweepSpec(param="bogus", values=(1.0,), metrics=("outage",))
        with pytest.raises(SweepValidationError, match="values"):
            SweepSpec(param="p_db", values=(), metrics=("outage",))
        with pytest.raises(SweepValidationError, match="metrics"):
            SweepSpec(param="p_db", values=(1.0,), metrics=())
        with pytest.raises(SweepValidationError, match="metrics"):
            SweepSpec(param="p_db", values=(1.0,), metrics=("nope",))
        with pytest.raises(SweepValidationError, match="format"):
            SweepSpec(param="p_db", values=(1.0,), metrics=("outage",),
                      out_format="xml")

    def test_config_round_trip(self):
        spec = load_config(SMALL_CONFIG)
        text = dump_config(spec)
        again = load_config(text)
        assert again == spec
        assert run_sweep(again).rows == run_sweep(spec).rows

    def test_range_syntax(self):
        spec = load_config(SMALL_CONFIG)
        assert spec.values == (0.0, 5.0, 10.0)

    def test_db_conversion_exact_once(self):
        base = SweepBase(n=4, m=2, snr_db=10.0)
        assert base.config().power == 10.0 ** 1.0

    def test_missing_sections(self):
        with pytest.raises(SweepValidationError, match="sweep"):
            load_config("[system]\nn = 4\n")
        with pytest.raises(SweepValidationError, match="values"):
            load_config("[sweep]\nparam = p_db\nmetrics = outage\n")


class TestRunSweep:
    def test_rows_and_formats(self):
        spec = load_config(SMALL_CONFIG)
        result = run_sweep(spec)
        assert len(result.rows) == 3 * 2
        csv_text = result.to_csv()
        lines = csv_text.split("\n")
        assert lines[0] == "p_db,series,metric,value"
        assert len(lines) == 1 + 6 + 1  # header + rows + trailing newline
        assert "\r" not in csv_text
        payload = json.loads(result.to_json())
        assert payload["param"] == "p_db"
        assert len(payload["rows"]) == 6

    def test_full_precision_round_trip(self):
        spec = load_config(SMALL_CONFIG)
        result = run_sweep(spec)
        line = result.to_csv().split("\n")[1]
        value = float(line.split(",")[-1])
        assert value == result.rows[0][3]

    def test_series_override(self):
        spec = SweepSpec(
            param="p_db",
            values=(10.0,),
            metrics=("outage",),
            base=SweepBase(),
            series=(("N=2", {"n": 2}), ("N=8", {"n": 8})),
        )
        rows = run_sweep(spec).rows
        assert {r[0] for r in rows} == {"N=2", "N=8"}
        by_series = {r[0]: r[3] for r in rows}
        assert by_series["N=8"] < by_series["N=2"]


class TestPresets:
    def test_fig1_structure(self):
        spec = preset_spec("fig1")
        assert spec.param == "p_db"
        assert spec.metrics == ("outage", "outage_perfect")
        assert [label for label, _ in spec.series] == ["N=2", "N=4", "N=8"]
        assert spec.base.blocklength == 300
        assert spec.base.m == 2

    def test_fig2_structure(self):
        spec = preset_spec("fig2")
        assert spec.param == "m"
        assert spec.base.n == 128
        assert len(spec.values) == 128
        # power scaling from the 20 dB budget
        assert spec.base.snr_db == pytest.approx(
            10 * math.log10(10.0 ** 2 / math.sqrt(128.0))
        )
        assert spec.base.snr_db == pytest.approx(9.4639, abs=5e-4)

    def test_unknown_preset(self):
        with pytest.raises(SweepValidationError):
            preset_spec("fig9")


class TestCliSweep:
    def test_config_sweep_writes_csv_and_figure(self, tmp_path):
        cfg = tmp_path / "sweep.ini"
        cfg.write_text(SMALL_CONFIG)
        out = tmp_path / "out.csv"
        rc = main(["sweep", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        assert out.exists()
        assert (tmp_path / "out.png").exists()
        header = out.read_text().splitlines()[0]
        assert header == "p_db,series,metric,value"

    def test_no_plot(self, tmp_path):
        cfg = tmp_path / "sweep.ini"
        cfg.write_text(SMALL_CONFIG)
        out = tmp_path / "out.csv"
        rc = main(["sweep", "--config", str(cfg), "--out", str(out), "--no-plot"])
        assert rc == 0
        assert not (tmp_path / "out.png").exists()

    def test_json_format(self, tmp_path):
        cfg = tmp_path / "sweep.ini"
        cfg.write_text(SMALL_CONFIG)
        out = tmp_path / "out.json"
        rc = main(["sweep", "--config", str(cfg), "--out", str(out),
                   "--format", "json", "--no-plot"])
        assert rc == 0
        payload = json.loads(out.read_text())
        assert payload["rows"]

    def test_flag_overrides_config(self, tmp_path):
        cfg = tmp_path / "sweep.ini"
        cfg.write_text(SMALL_CONFIG)
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        main(["sweep", "--config", str(cfg), "--out", str(out_a), "--no-plot"])
        main(["sweep", "--config", str(cfg), "--out", str(out_b), "--no-plot",
              "--n", "8"])
        assert out_a.read_text() != out_b.read_text()

    def test_usage_errors(self, tmp_path):
        assert main(["sweep"]) == 2
        cfg = tmp_path / "sweep.ini"
        cfg.write_text(SMALL_CONFIG)
        assert main(["sweep", "--config", str(cfg)]) == 2  # missing --out
        assert main(
            ["sweep", "--preset", "fig1", "--config", str(cfg),
             "--out", str(tmp_path / "x.csv")]
        ) == 2

    def test_io_error(self, tmp_path):
        cfg = tmp_path / "sweep.ini"
        cfg.write_text(SMALL_CONFIG)
        rc = main(["sweep", "--config", str(cfg),
                   "--out", "/nonexistent-dir/deep/out.csv"])
        assert rc == 3

    def test_invalid_config_is_usage_error(self, tmp_path):
        cfg = tmp_path / "sweep.ini"
        cfg.write_text("[sweep]\nparam = bogus\nvalues = 1\nmetrics = outage\n")
        rc = main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o.csv")])
        assert rc == 2


class TestCliValidate:
    def test_analytic_suite_passes(self, tmp_path):
        out = tmp_path / "report.json"
        rc = main(["validate", "analytic-identities", "--seed", "42",
                   "--out", str(out)])
        assert rc == 0
        report = json.loads(out.read_text())
        assert report["passed"] is True
        assert {c["name"] for c in report["checks"]} == {
            "outage-closed-vs-hypergeometric",
            "outage-closed-vs-mixing-quadrature",
            "bound-inner-sum-direct-vs-closed",
        }

    def test_monte_carlo_suite_deterministic_bytes(self, tmp_path):
        out_a = tmp_path / "a.json"
        out_b = tmp_path / "b.json"
        args = ["validate", "monte-carlo", "--seed", "42", "--trials", "4000"]
        assert main(args + ["--out", str(out_a)]) == 0
        assert main(args + ["--out", str(out_b)]) == 0
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_unknown_suite(self):
        assert main(["validate", "not-a-suite"]) == 2

    def test_failing_suite_exit_code(self, tmp_path, monkeypatch):
        def failing_check(seed, n_trials):
            return {"name": "always-fails", "passed": False, "details": {}}

        monkeypatch.setitem(validation.SUITES, "doomed", (failing_check,))
        assert main(["validate", "doomed"]) == 1


class TestCliOtherVerbs:
    def test_rate_design(self, tmp_path, capsys):
        out = tmp_path / "rates.json"
        rc = main(["rate-design", "--n", "4", "--m", "2", "--snr-db", "20",
                   "--sigma-h-sq", "0.1", "--epsilon", "1e-3",
                   "--blocklength", "300", "--out", str(out)])
        assert rc == 0
        payload = json.loads(out.read_text())
        assert len(payload["streams"]) == 2
        for row in payload["streams"]:
            assert abs(row["outage_at_rate"] - 1e-3) <= 1e-9

    def test_rate_design_requires_epsilon(self):
        assert main(["rate-design", "--n", "4", "--m", "2"]) == 2

    def test_mstar(self, tmp_path, capsys):
        out = tmp_path / "curve.csv"
        rc = main(["mstar", "--n", "16", "--m", "16", "--snr-db", "10",
                   "--rate", "0.1", "--blocklength", "200", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "m,goodput,goodput_lb"
        assert len(lines) == 17
        assert (tmp_path / "curve.png").exists()
        captured = capsys.readouterr().out
        assert "line-search M*" in captured
        assert "exhaustive argmax" in captured

    def test_mstar_requires_rate(self):
        assert main(["mstar", "--n", "4"]) == 2

    def test_info(self, tmp_path, capsys):
        rc = main(["info", "--n", "4", "--m", "2", "--snr-db", "10",
                   "--sigma-h-sq", "0.1", "--rate", "0.1"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["sigma_e_sq"] == pytest.approx(0.1)
        assert payload["per_stream"][0]["average_snr"] == pytest.approx(2.0)

    def test_no_command_prints_help(self, capsys):
        assert main([]) == 2
