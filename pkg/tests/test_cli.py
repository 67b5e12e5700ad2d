"""End-to-end tests for the lcgeom command line."""

import json

import pandas as pd
import pytest

from lightcone_geometry.cli import build_parser, run

SMALL = ["--grid", "5x5", "--rect=-0.3,0.3,-0.3,0.3"]

INFLECTION = """
source = "R31"
components = ["u - u^5/5 + sin(v)/2", "2*u^3/3 - cos(v)/2", "u + u^5/5 - v/2"]
domain = [-0.5, 0.5, -0.5, 0.5]
"""


def report_of(path):
    return json.loads(path.read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

class TestCatalogCommand:
    def test_list(self, capsys):
        assert run(["catalog"]) == 0
        payload = json.loads(capsys.readouterr().out)
        names = [c["name"] for c in payload["results"]["charts"]]
        assert "cylinder_r31" in names

    def test_emit(self, capsys):
        assert run(["catalog", "--emit", "--catalog", "cylinder_r31"]) == 0
        assert 'source = "R31"' in capsys.readouterr().out

    def test_emit_needs_name(self, capsys):
        assert run(["catalog", "--emit"]) == 1
        assert "ERROR" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# Frame and detector commands
# ---------------------------------------------------------------------------

class TestVerify:
    def test_cylinder_passes(self, tmp_path):
        out = tmp_path / "verify.json"
        assert run(["verify", "--catalog", "cylinder_r31", *SMALL, "--out", str(out)]) == 0
        report = report_of(out)
        assert report["status"] == "ok"
        assert report["results"]["structure_max"] <= 1e-8
        assert report["config_echo"]["catalog"] == "cylinder_r31"
        assert report["grid"]["nu"] == 5

    def test_low_order_rejected(self, capsys):
        assert run(["verify", "--catalog", "cylinder_r31", "--order", "4", *SMALL]) == 1
        assert "jet order >= 6" in capsys.readouterr().err

    def test_invariants_csv(self, tmp_path):
        out = tmp_path / "inv.csv"
        assert run(["invariants", "--catalog", "cylinder_r31", *SMALL, "--format", "csv", "--out", str(out)]) == 0
        frame = pd.read_csv(out)
        assert len(frame) == 25
        assert frame["k1"].iloc[0] == pytest.approx(-0.25)
        assert (tmp_path / "inv.csv.json").exists()


class TestDetect:
    def test_output_is_reproducible(self, tmp_path):
        outs = [tmp_path / "a.json", tmp_path / "b.json"]
        for out in outs:
            assert run(["detect", "--catalog", "cylinder_r31", *SMALL, "--out", str(out)]) == 0
        assert outs[0].read_bytes() == outs[1].read_bytes()
        results = report_of(outs[0])["results"]
        assert results["isothermic_sign"] == "+"
        assert results["is_willmore"] is False
        assert "mu1" not in results["swillmore"]

    def test_negative_flags_still_exit_0(self, tmp_path):
        out = tmp_path / "d.json"
        assert run(["detect", "--catalog", "cylinder_r31", *SMALL, "--out", str(out)]) == 0
        report = report_of(out)
        assert report["status"] == "ok"
        assert report["results"]["is_willmore"] is False

    def test_exit_semantics_documented(self):
        text = build_parser().format_help()
        assert "exit codes:" in text
        assert "detect reports the Willmore, S-Willmore and isothermic flags" in text

    def test_param_override_is_echoed(self, tmp_path):
        out = tmp_path / "d.json"
        run(["detect", "--catalog", "cylinder_r31", "--param", "r=2", *SMALL, "--out", str(out)])
        assert report_of(out)["config_echo"]["params"] == {"r": 2.0}


# ---------------------------------------------------------------------------
# Pairs
# ---------------------------------------------------------------------------

class TestPairs:
    def test_fields_from_config(self, tmp_path):
        config = tmp_path / "dual.toml"
        config.write_text('catalog = "clifford_s31"\nmode = "fields"\n\n[fields]\na = "0"\nb = "0"\nxi = "0"\n')
        out = tmp_path / "pair.json"
        assert run(["pair-classify", str(config), *SMALL, "--out", str(out)]) == 0
        assert report_of(out)["results"]["label"] == "DualSWillmore"

    def test_trivial_point(self, tmp_path):
        out = tmp_path / "trivial.json"
        code = run(["pair-trivial", "--catalog", "cylinder_r31", "--point", "1,0,0,0,1", *SMALL, "--out", str(out)])
        assert code == 0
        assert report_of(out)["results"]["label"] == "Trivial"

    def test_trivial_needs_point(self, capsys):
        assert run(["pair-trivial", "--catalog", "cylinder_r31", *SMALL]) == 1
        assert "five coordinates" in capsys.readouterr().err

    def test_darboux_needs_init(self, capsys):
        assert run(["pair-darboux", "--catalog", "cylinder_r31", "--theta", "1", *SMALL]) == 1


# ---------------------------------------------------------------------------
# thomsen and error paths
# ---------------------------------------------------------------------------

class TestThomsen:
    def test_failed_precondition_exits_2(self, tmp_path):
        out = tmp_path / "t.json"
        assert run(["thomsen", "--catalog", "cylinder_r31", *SMALL, "--out", str(out)]) == 2
        results = report_of(out)["results"]
        assert results["error"] == "precondition failed: willmore"
        assert results["condition"] == "willmore"

    @pytest.mark.parametrize("grid, condition", [("4x4", "isothermic"), ("5x5", "umbilic-free")])
    def test_config_chart_gates(self, tmp_path, grid, condition):
        config = tmp_path / "inflection.toml"
        config.write_text(INFLECTION)
        out = tmp_path / "t.json"
        args = ["thomsen", str(config), "--grid", grid, "--rect=-0.25,0.25,-0.25,0.25", "--out", str(out)]
        assert run(args) == 2
        report = report_of(out)
        assert report["status"] == "negative"
        assert report["results"]["condition"] == condition

    def test_nullsum_passes(self, tmp_path):
        out = tmp_path / "t.json"
        args = ["thomsen", "--catalog", "nullsum_minimal_r31", "--grid", "11x11",
                "--rect=-0.05,0.05,-0.05,0.05", "--out", str(out)]
        assert run(args) == 0
        results = report_of(out)["results"]
        assert results["branch"] == "R31"
        assert results["causal"] == "null"


class TestErrors:
    def test_bad_config_exits_1(self, tmp_path, capsys):
        config = tmp_path / "bad.toml"
        config.write_text('source = "R31"\ncomponents = ["u", "v +", "0"]\n')
        assert run(["invariants", str(config)]) == 1
        assert capsys.readouterr().err.startswith("ERROR:")

    def test_missing_chart(self, capsys):
        assert run(["invariants"]) == 1
        assert "--catalog NAME is required" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert run(["invariants", str(tmp_path / "nope.toml")]) == 1

    def test_bad_grid_spec(self, capsys):
        assert run(["invariants", "--catalog", "cylinder_r31", "--grid", "20by20"]) == 1
        assert "grid must look like 20x20" in capsys.readouterr().err
