import numpy as np
import pytest

import blender_forge as bf
from blender_forge.cli import main
from blender_forge.config import parse_config
from blender_forge.core_affine import ChartPoint, maps_close
from blender_forge.errors import ConfigError
from blender_forge.report import emit_kv, emit_trace_csv, parse_kv


class TestParseConfig:
    def test_empty_document_is_reference_model(self):
        cfg = parse_config("")
        ref = bf.reference_cycle()
        assert maps_close(cfg.model.A, ref.A)
        assert maps_close(cfg.model.B, ref.B)
        assert maps_close(cfg.model.T_out, ref.T_out)
        assert maps_close(cfg.model.T_in, ref.T_in)
        assert cfg.model.y_plus == ref.y_plus

    def test_explicit_reference_values(self):
        text = "\n".join(
            [
                "[model]",
                "mu = 2.0",
                "lambda = 0.5",
                "y_plus = 1.0",
                "y_minus = -1.0",
            ]
        )
        cfg = parse_config(text)
        ref = bf.reference_cycle()
        assert cfg.model.mu == ref.mu and cfg.model.lam == ref.lam
        assert cfg.model.y_plus == ref.y_plus and cfg.model.y_minus == ref.y_minus

    def test_comments_and_blank_lines(self):
        cfg = parse_config("# header\n\n[solver]\neps = 0.02  # inline\n")
        assert cfg.solver["eps"] == 0.02

    def test_invalid_lambda_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("[model]\nlambda = 1.5\n")

    def test_unknown_key_has_line_number(self):
        with pytest.raises(ConfigError) as err:
            parse_config("[model]\nmu = 2.0\nbogus = 1\n")
        assert err.value.line == 3

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("[nonsense]\n")

    def test_key_outside_section_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("mu = 2.0\n")

    def test_malformed_line_rejected(self):
        with pytest.raises(ConfigError) as err:
            parse_config("[model]\nmu 2.0\n")
        assert err.value.line == 2


class TestKvReports:
    def test_roundtrip_identity(self):
        data = {
            "a": 1,
            "b": 0.1 + 0.2,
            "c": "text",
            "flag": True,
            "nested": {"x": 3.0e-17, "y": -2},
        }
        parsed = parse_kv(emit_kv(data))
        assert parsed["a"] == 1
        assert parsed["b"] == 0.1 + 0.2
        assert parsed["c"] == "text"
        assert parsed["flag"] is True
        assert parsed["nested.x"] == 3.0e-17
        assert parsed["nested.y"] == -2

    def test_17_digit_floats_roundtrip(self):
        rng = np.random.default_rng(17)
        values = {f"v{i}": float(v) for i, v in enumerate(rng.uniform(-1e6, 1e6, 100))}
        assert parse_kv(emit_kv(values)) == values

    def test_emission_is_deterministic(self):
        data = {"x": 0.1, "y": [1.0, 2.0]}
        assert emit_kv(data) == emit_kv(data)


class TestTraceCsv:
    def test_single_point(self):
        trace = [ChartPoint("P", [0.0], 1.0, [0.0])]
        lines = emit_trace_csv(trace).strip().splitlines()
        assert lines[0] == "step,chart,x0,y,z0"
        assert len(lines) == 2

    def test_reference_orbit_center_column(self, base):
        start = ChartPoint("P", [0.0], 1.0, [0.0])
        trace = bf.orbit(
            base, start, ("T_out", "B", "B", "T_in", "A"), check_domains=False
        )
        lines = emit_trace_csv(trace).strip().splitlines()
        ys = [float(line.split(",")[3]) for line in lines[1:]]
        assert ys == [1.0, -1.0, -0.5, -0.25, -0.25, -0.5]


class TestCliExitCodes:
    def test_validate_ok(self, tmp_path, capsys):
        assert main(["validate", "--out", str(tmp_path)]) == 0
        assert (tmp_path / "report.validate.kv").exists()
        assert (tmp_path / "report.validate.txt").exists()

    def test_orbit_artifacts(self, tmp_path):
        assert main(["orbit", "--out", str(tmp_path)]) == 0
        assert (tmp_path / "trace.csv").exists()
        assert (tmp_path / "trace.png").exists()

    def test_config_error_is_2(self, tmp_path, capsys):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[model]\nlambda = 1.5\n")
        assert main(["validate", "--config", str(cfg), "--out", str(tmp_path)]) == 2

    def test_stage_failure_is_3(self, tmp_path, capsys):
        cfg = tmp_path / "small.ini"
        cfg.write_text("[solver]\nm_max = 2\n")
        assert main(["solve", "--config", str(cfg), "--out", str(tmp_path)]) == 3
        err = capsys.readouterr().err
        assert "solve" in err

    def test_chart_inconsistent_orbit_is_3(self, tmp_path, capsys):
        cfg = tmp_path / "orbit.ini"
        cfg.write_text("[solver]\norbit_itinerary = A,B\n")
        assert main(["orbit", "--config", str(cfg), "--out", str(tmp_path)]) == 3
        assert "position 1" in capsys.readouterr().err

    def test_missing_config_is_io_error(self, tmp_path, capsys):
        assert main(["validate", "--config", "/nonexistent.ini", "--out", str(tmp_path)]) == 4

    def test_solve_report_roundtrip(self, tmp_path):
        assert main(["solve", "--out", str(tmp_path)]) == 0
        kv = parse_kv((tmp_path / "report.solve.kv").read_text())
        assert kv["m"] == 8 and kv["nprime"] == 9
        assert kv["t"] == 3.0 * 2.0**-9

    def test_determinism(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["solve", "--out", str(out1)]) == 0
        assert main(["solve", "--out", str(out2)]) == 0
        assert (out1 / "report.solve.kv").read_bytes() == (
            out2 / "report.solve.kv"
        ).read_bytes()
