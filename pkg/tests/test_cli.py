import json
import math
from pathlib import Path

import numpy as np
import pytest

from neutralflow import cli


def write_cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


FAST_SOLVE = """
solver.grid_n = 80
solver.t_end = 5.0
initial.kind = perturbed
initial.amplitude_frac = 0.1
"""


class TestConfigParsing:
    def test_defaults_without_file(self):
        cfg = cli.parse_config(None)
        assert cfg["solver.grid_n"] == 400
        assert cfg["solver.k"] == 2.0

    def test_unknown_key_named_with_line(self, tmp_path):
        p = write_cfg(tmp_path, "solver.grid_n = 100\nsolver.bogus = 1\n")
        with pytest.raises(cli.ConfigError) as err:
            cli.parse_config(p)
        assert "solver.bogus" in str(err.value)
        assert ":2" in str(err.value)

    def test_bad_value_diagnostic(self, tmp_path):
        p = write_cfg(tmp_path, "solver.grid_n = four hundred\n")
        with pytest.raises(cli.ConfigError) as err:
            cli.parse_config(p)
        assert "solver.grid_n" in str(err.value)

    def test_comments_and_blanks(self, tmp_path):
        p = write_cfg(tmp_path, "# a comment\n\nsolver.theta0 = 0.25  # inline\n")
        assert cli.parse_config(p)["solver.theta0"] == 0.25

    def test_malformed_line(self, tmp_path):
        p = write_cfg(tmp_path, "solver.theta0\n")
        with pytest.raises(cli.ConfigError) as err:
            cli.parse_config(p)
        assert ":1" in str(err.value)


class TestSolveCommand:
    def test_valid_holomorphic_run(self, tmp_path, monkeypatch):
        monkeypatch.delenv("NEUTRALFLOW_OUT", raising=False)
        cfgp = write_cfg(tmp_path, FAST_SOLVE)
        out = tmp_path / "out"
        code = cli.main(["solve", "--config", str(cfgp), "--out", str(out), "--quiet"])
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["converged"] is True
        assert (out / "monitors.csv").exists()
        assert (out / "profile_final.csv").exists()
        assert (out / "limit_profile.csv").exists()
        header = (out / "monitors.csv").read_text().splitlines()[0]
        assert header == "t,u_min,u_max,sup_sigma,B_min,B_max,steady_residual,boundary_slope,axis_value"
        prof_header = (out / "profile_final.csv").read_text().splitlines()[0]
        assert prof_header == "theta,psi,dpsi,lambda,abs_sigma"

    def test_t_end_zero_exits_two(self, tmp_path, monkeypatch):
        monkeypatch.delenv("NEUTRALFLOW_OUT", raising=False)
        cfgp = write_cfg(tmp_path, FAST_SOLVE + "solver.t_end = 0.0\n")
        out = tmp_path / "out"
        code = cli.main(["solve", "--config", str(cfgp), "--out", str(out), "--quiet"])
        assert code == 2
        report = json.loads((out / "report.json").read_text())
        assert report["converged"] is False

    def test_unknown_key_exits_one(self, tmp_path, monkeypatch, capsys):
        monkeypatch.delenv("NEUTRALFLOW_OUT", raising=False)
        cfgp = write_cfg(tmp_path, "nonsense.key = 1\n")
        code = cli.main(["solve", "--config", str(cfgp), "--out", str(tmp_path / "o"), "--quiet"])
        assert code == 1
        assert "nonsense.key" in capsys.readouterr().err

    def test_env_var_overrides_out(self, tmp_path, monkeypatch):
        cfgp = write_cfg(tmp_path, FAST_SOLVE)
        envdir = tmp_path / "from_env"
        monkeypatch.setenv("NEUTRALFLOW_OUT", str(envdir))
        code = cli.main(["solve", "--config", str(cfgp), "--out", str(tmp_path / "ignored"), "--quiet"])
        assert code == 0
        assert (envdir / "report.json").exists()
        assert not (tmp_path / "ignored").exists()

    def test_manifest_lists_every_file(self, tmp_path, monkeypatch):
        monkeypatch.delenv("NEUTRALFLOW_OUT", raising=False)
        cfgp = write_cfg(tmp_path, FAST_SOLVE)
        out = tmp_path / "out"
        cli.main(["solve", "--config", str(cfgp), "--out", str(out), "--quiet"])
        manifest = json.loads((out / "manifest.json").read_text())
        listed = set(manifest["files"])
        present = {p.name for p in out.iterdir() if p.name != "manifest.json"}
        assert listed == present
        assert manifest["tool_version"]

    def test_paper_literal_flag(self, tmp_path, monkeypatch):
        monkeypatch.delenv("NEUTRALFLOW_OUT", raising=False)
        cfgp = write_cfg(tmp_path, FAST_SOLVE)
        out = tmp_path / "out"
        code = cli.main(["solve", "--config", str(cfgp), "--out", str(out),
                         "--paper-literal", "--quiet"])
        report = json.loads((out / "report.json").read_text())
        assert report["config"]["solver.neumann_variant"] == "paper-literal-cot-two-theta"
        assert code in (0, 2)

    def test_determinism_byte_identical(self, tmp_path, monkeypatch):
        monkeypatch.delenv("NEUTRALFLOW_OUT", raising=False)
        cfgp = write_cfg(tmp_path, FAST_SOLVE)
        outs = []
        for name in ("o1", "o2"):
            out = tmp_path / name
            assert cli.main(["solve", "--config", str(cfgp), "--out", str(out), "--quiet"]) == 0
            outs.append(out)
        a, b = outs
        names = sorted(p.name for p in a.iterdir() if p.name != "manifest.json")
        for n in names:
            assert (a / n).read_bytes() == (b / n).read_bytes(), n
        ham = json.loads((a / "manifest.json").read_text())["files"]
        hbm = json.loads((b / "manifest.json").read_text())["files"]
        assert ham == hbm


FAST_FAMILY = """
solver.grid_n = 120
solver.t_end = 5.0
family.leaves = 4
family.vartheta0 = 0.3
family.samples = 30
"""


class TestFamilyCommand:
    def test_valid_family_run(self, tmp_path, monkeypatch):
        monkeypatch.delenv("NEUTRALFLOW_OUT", raising=False)
        cfgp = write_cfg(tmp_path, FAST_FAMILY)
        out = tmp_path / "fam"
        code = cli.main(["family", "--config", str(cfgp), "--out", str(out), "--quiet"])
        assert code == 0
        report = json.loads((out / "family_report.json").read_text())
        assert report["filling"] is True
        assert len(report["leaves"]) == 4
        assert (out / "family.csv").exists()
        assert (out / "leaf_final_03.csv").exists()
        header = (out / "family.csv").read_text().splitlines()[0]
        assert header == "t,leaf_index,linf_error,min_separation"

    def test_indivisible_leaf_count_exits_one(self, tmp_path, monkeypatch, capsys):
        monkeypatch.delenv("NEUTRALFLOW_OUT", raising=False)
        cfgp = write_cfg(tmp_path, "solver.grid_n = 100\nfamily.leaves = 7\n")
        code = cli.main(["family", "--config", str(cfgp), "--out", str(tmp_path / "x"), "--quiet"])
        assert code == 1

    def test_euclidean_samples_emitted(self, tmp_path, monkeypatch):
        monkeypatch.delenv("NEUTRALFLOW_OUT", raising=False)
        cfgp = write_cfg(
            tmp_path,
            "solver.grid_n = 60\nfamily.leaves = 2\nfamily.samples = 10\n"
            "family.euclidean_samples = true\n",
        )
        out = tmp_path / "fam"
        code = cli.main(["family", "--config", str(cfgp), "--out", str(out), "--quiet"])
        assert code == 0
        lines = (out / "leaf_lines_00.csv").read_text().splitlines()
        assert lines[0] == "theta,phi,r,x1,x2,x3"
        assert len(lines) > 10


class TestOracleCommand:
    def test_default_fit(self, capsys):
        code = cli.main(["oracle"])
        assert code == 0
        out = capsys.readouterr().out
        assert "2.000000" in out

    def test_k1_comparison_prints_mismatch(self, capsys):
        code = cli.main(["oracle", "--k", "1"])
        assert code == 0
        assert "predicted" in capsys.readouterr().out

    def test_empty_theta_list_exits_one(self, tmp_path):
        cfgp = write_cfg(tmp_path, "oracle.thetas =\n")
        assert cli.main(["oracle", "--config", str(cfgp)]) == 1


class TestVerifyCommand:
    def test_clean_build_passes(self, capsys):
        assert cli.main(["verify", "--count", "20"]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out

    def test_seed_reproducible(self, capsys):
        cli.main(["verify", "--count", "15", "--seed", "7"])
        first = capsys.readouterr().out
        cli.main(["verify", "--count", "15", "--seed", "7"])
        second = capsys.readouterr().out
        assert first == second

    def test_zero_tolerance_lists_failures(self, capsys):
        assert cli.main(["verify", "--count", "10", "--tol-scale", "0"]) == 2
        assert "FAIL" in capsys.readouterr().out
