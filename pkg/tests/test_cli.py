"""
End-to-end command runs through main()
"""

import json
import math

import pandas as pd
import pytest

from qkd_security.components.gf2code import CodeSpec, write_code_file
from qkd_security.constants import EXIT_CONFIG, EXIT_FAILED, EXIT_OK
from qkd_security.pipelines.cli import main
from qkd_security.pipelines.verification_pipeline import GALLAGER_DELTAS, GALLAGER_N, VerificationSuite
from qkd_security.logging_exception import ConfigError


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path / "out"


def read_results(path):
    return json.loads(path.read_text())["results"]


class TestSimulate:

    def test_identity_run(self, out_dir):
        code = main(["simulate", "--n", "2", "--attack", "identity", "--trials", "5", "--out", str(out_dir)])
        assert code == EXIT_OK
        results = read_results(out_dir / "summary.json")
        assert results["pass_frequency"] == 1.0
        transcript = json.loads((out_dir / "transcript.json").read_text())
        assert transcript["config"]["attack"] == "identity"
        assert transcript["results"]["test_pass"] is True

    def test_csv_summary(self, out_dir):
        assert main(["simulate", "--n", "2", "--trials", "4", "--format", "csv", "--out", str(out_dir)]) == EXIT_OK
        frame = pd.read_csv(out_dir / "summary.csv", comment="#")
        assert len(frame) == 4
        assert {"pass", "c_T", "c_I", "keys_equal"} <= set(frame.columns)

    def test_given_code_file(self, out_dir, tmp_path):
        path = write_code_file(CodeSpec.from_rows(["110"], ["011"], n=3), tmp_path / "code.txt")
        assert main(["simulate", "--n", "3", "--code", str(path), "--trials", "3", "--out", str(out_dir)]) == EXIT_OK

    def test_missing_code_file(self, out_dir, tmp_path):
        assert main(["simulate", "--code", str(tmp_path / "absent.txt"), "--out", str(out_dir)]) == EXIT_CONFIG

    def test_unknown_attack(self, out_dir):
        assert main(["simulate", "--attack", "teleport", "--out", str(out_dir)]) == EXIT_CONFIG

    def test_classical_shadow_for_large_n(self, out_dir):
        args = ["simulate", "--n", "16", "--r", "4", "--m", "2", "--attack", "swap", "--trials", "3", "--out", str(out_dir)]
        assert main(args) == EXIT_OK
        assert read_results(out_dir / "summary.json")["channel"] == "swap"

    def test_config_file(self, out_dir, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"n=2\ntrials=2\nout={out_dir}\n")
        assert main(["simulate", "--config", str(cfg)]) == EXIT_OK
        assert (out_dir / "summary.json").exists()

    def test_dotenv_in_working_directory(self, out_dir, tmp_path):
        (tmp_path / ".env").write_text("QKD_OUTPUT_DIR=env_out\n")
        assert main(["simulate", "--n", "2", "--trials", "2"]) == EXIT_OK
        assert (tmp_path / "env_out" / "summary.json").exists()

    def test_dotenv_loaded_once(self, out_dir, monkeypatch):
        calls = []
        monkeypatch.setattr("qkd_security.pipelines.cli.load_dotenv", lambda *args, **kwargs: calls.append(args))
        assert main(["table1", "--out", str(out_dir)]) == EXIT_OK
        assert len(calls) == 1

    def test_bad_format_flag(self, out_dir):
        with pytest.raises(SystemExit):
            main(["simulate", "--format", "xml"])


class TestOtherCommands:

    def test_bounds(self, out_dir):
        args = ["bounds", "--n", "800000", "--p-allowed", "0.02", "--eps-sec", "0.01", "--eps-rel", "0.01",
                "--r", "400000", "--m", "100000", "--out", str(out_dir)]
        assert main(args) == EXIT_OK
        results = read_results(out_dir / "bounds.json")
        assert results["thresholds"]["strict"] == pytest.approx(0.05501, abs=1e-5)
        assert results["report"]["R_secret"] == pytest.approx(0.125)

    def test_table1(self, out_dir, capsys):
        assert main(["table1", "--out", str(out_dir)]) == EXIT_OK
        assert "1/22026" in capsys.readouterr().out
        assert (out_dir / "table1.json").exists()

    def test_attack_analyze(self, out_dir):
        args = ["attack-analyze", "--n", "1", "--attack", "intercept-z", "--symmetrize", "--out", str(out_dir)]
        assert main(args) == EXIT_OK
        results = read_results(out_dir / "spectrum.json")
        assert results["ordering_holds"] is True
        assert results["conjugate_law_residual"] < 1e-9

    def test_codegen_meets_requirement(self, out_dir):
        args = ["codegen", "--n", "8", "--r", "3", "--m", "1", "--p-allowed", "0.01", "--eps-sec", "0.01",
                "--seed", "1", "--out", str(out_dir)]
        assert main(args) == EXIT_OK
        assert (out_dir / "code.txt").read_text().splitlines()[0] == "8 3 1"
        assert read_results(out_dir / "certificate.json")["kind"] == "exact"

    def test_codegen_v_hat_too_small(self, out_dir):
        args = ["codegen", "--n", "4", "--r", "2", "--m", "1", "--p-allowed", "0.4", "--eps-sec", "0.2",
                "--out", str(out_dir)]
        assert main(args) == EXIT_FAILED

    def test_verify_negative_control(self, out_dir, capsys):
        assert main(["verify", "--suite", "negative-control", "--out", str(out_dir)]) == EXIT_OK
        assert "expected fail" in capsys.readouterr().out
        assert read_results(out_dir / "verify.json")["checks"][0]["expected"] == "fail"

    def test_verify_unknown_suite(self, out_dir):
        assert main(["verify", "--suite", "everything", "--out", str(out_dir)]) == EXIT_CONFIG


class TestVerificationSuite:

    def test_unknown_suite(self):
        with pytest.raises(ConfigError):
            VerificationSuite().run("everything")

    def test_gallager_cells_cover_distinct_distances(self):
        cutoffs = {math.ceil(delta * GALLAGER_N) - 1 for delta in GALLAGER_DELTAS}
        assert len(cutoffs) >= 2

    def test_symmetrization_rows_cover_presets(self):
        rows = VerificationSuite(seed=0).check_symmetrization()
        assert all(row["passed"] for row in rows)
        checks = {row["check"] for row in rows}
        for name in ("swap", "half-swap", "intercept-random", "bit-flip"):
            assert f"uniform-info-posterior[{name}]" in checks
            assert f"overlap-shift-invariance[{name}]" in checks

    @pytest.mark.slow
    @pytest.mark.parametrize("suite", ["symmetrization", "spectrum", "ordering", "counterexamples", "reliability"])
    def test_suite_passes(self, suite):
        frame = VerificationSuite(seed=0).run(suite)
        assert frame["ok"].all(), frame[~frame["ok"]].to_string()
