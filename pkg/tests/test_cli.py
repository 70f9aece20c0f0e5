"""End-to-end command-line behavior via subprocess."""

from __future__ import annotations

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from logitboot import fit_mle, holdout_validate
from logitboot.data_io import encode, load_csv

from conftest import GOLDEN_COEFFICIENTS

GOLDEN_FLAG = ",".join(str(c) for c in GOLDEN_COEFFICIENTS)


def run_cli(*args, env_extra=None, pin_time=True):
    env = dict(os.environ)
    if pin_time:
        env["SOURCE_DATE_EPOCH"] = "1700000000"
    env.pop("LOGITBOOT_SEED", None)
    if env_extra:
        env.update(env_extra)
    proc = subprocess.run(
        [sys.executable, "-m", "logitboot", *args],
        capture_output=True,
        text=True,
        env=env,
    )
    return proc.returncode, proc.stdout, proc.stderr


@pytest.fixture(scope="module")
def study_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "study.csv"
    code, out, err = run_cli(
        "simulate", "--coefficients", GOLDEN_FLAG, "--n", "400",
        "--seed", "7", "--out", str(path),
    )
    assert code == 0, err
    return str(path)


class TestManifest:
    def test_every_run_has_one_manifest(self, study_csv):
        code, out, _ = run_cli("fit", "--input", study_csv)
        assert code == 0
        doc = json.loads(out)
        assert set(doc) >= {"manifest", "coefficients"}
        manifest = doc["manifest"]
        assert manifest["subcommand"] == "fit"
        assert manifest["input"] == study_csv
        assert manifest["config"]["tol"] == 1e-8
        assert manifest["config"]["max_iter"] == 25
        assert out.count('"manifest"') == 1

    def test_source_date_epoch_pins_timestamp(self, study_csv):
        _, out, _ = run_cli("fit", "--input", study_csv)
        doc = json.loads(out)
        assert doc["manifest"]["timestamp"] == "2023-11-14T22:13:20Z"

    def test_error_documents_carry_manifest(self):
        code, out, _ = run_cli("fit", "--input", "/nonexistent/file.csv")
        assert code == 4
        doc = json.loads(out)
        assert doc["manifest"]["subcommand"] == "fit"
        assert doc["error"]["type"] == "FileNotFoundError"


class TestSimulateFit:
    def test_fit_recovers_generating_model_loosely(self, study_csv):
        code, out, _ = run_cli("fit", "--input", study_csv)
        assert code == 0
        doc = json.loads(out)
        assert doc["converged"] is True
        fitted = [doc["coefficients"][c] for c in ("Intercept", "Age", "Emp", "Gender")]
        # n = 400: expect rough agreement only
        assert fitted == pytest.approx(GOLDEN_COEFFICIENTS, abs=0.8)
        assert doc["odds"][1]["odds_ratio"] == pytest.approx(
            np.exp(doc["coefficients"]["Age"]), rel=1e-12
        )

    def test_fit_output_is_deterministic_bytes(self, study_csv):
        _, first, _ = run_cli("fit", "--input", study_csv)
        _, second, _ = run_cli("fit", "--input", study_csv)
        assert first == second

    def test_simulate_is_seed_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_cli("simulate", "--coefficients", GOLDEN_FLAG, "--n", "100",
                "--seed", "3", "--out", str(a))
        run_cli("simulate", "--coefficients", GOLDEN_FLAG, "--n", "100",
                "--seed", "3", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_env_seed_is_default(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        code, out, _ = run_cli(
            "simulate", "--coefficients", GOLDEN_FLAG, "--n", "50",
            "--out", str(a), env_extra={"LOGITBOOT_SEED": "11"},
        )
        assert code == 0
        assert json.loads(out)["manifest"]["config"]["seed"] == 11
        run_cli("simulate", "--coefficients", GOLDEN_FLAG, "--n", "50",
                "--seed", "11", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()


class TestBootstrapCLI:
    def test_byte_identical_output(self, study_csv):
        args = ("bootstrap", "--input", study_csv, "--replicates", "150",
                "--seed", "5", "--ci-method", "percentile")
        _, first, _ = run_cli(*args)
        _, second, _ = run_cli(*args)
        assert first == second
        doc = json.loads(first)
        assert doc["replicates"]["requested"] == 150

    def test_odds_bounds_are_exponentiated(self, study_csv):
        _, out, _ = run_cli("bootstrap", "--input", study_csv,
                            "--replicates", "120", "--seed", "5",
                            "--ci-method", "wald")
        doc = json.loads(out)
        for interval in doc["intervals"]:
            assert interval["odds"]["lower"] == pytest.approx(
                np.exp(interval["log_odds"]["lower"]), rel=1e-12
            )
            assert interval["odds"]["upper"] == pytest.approx(
                np.exp(interval["log_odds"]["upper"]), rel=1e-12
            )

    def test_all_methods_emit_all_intervals(self, study_csv):
        _, out, _ = run_cli("bootstrap", "--input", study_csv,
                            "--replicates", "1000", "--seed", "5",
                            "--ci-method", "all")
        doc = json.loads(out)
        methods = {}
        for interval in doc["intervals"]:
            methods.setdefault(interval["method"], 0)
            methods[interval["method"]] += 1
        assert methods == {"wald": 4, "percentile": 4, "bca": 4}

    def test_insufficient_replicates_for_bca_is_numerical_failure(self, study_csv):
        code, out, _ = run_cli("bootstrap", "--input", study_csv,
                               "--replicates", "200", "--seed", "5",
                               "--ci-method", "bca")
        assert code == 3
        assert json.loads(out)["error"]["type"] == "InsufficientReplicatesError"


class TestSplitValidateCurves:
    def test_single_full_split_matches_fit(self, study_csv):
        _, fit_out, _ = run_cli("fit", "--input", study_csv)
        _, split_out, _ = run_cli("split", "--input", study_csv, "--sizes", "400")
        fit_doc = json.loads(fit_out)
        split_doc = json.loads(split_out)
        assert split_doc["splits"][0]["coefficients"] == fit_doc["coefficients"]

    def test_default_sizes(self, study_csv):
        _, out, _ = run_cli("split", "--input", study_csv)
        doc = json.loads(out)
        assert [e["size"] for e in doc["splits"]] == [50, 100, 200, 300, 400]
        assert all(e["error"] is None for e in doc["splits"])

    def test_validate_matches_library(self, study_csv):
        code, out, _ = run_cli("validate", "--input", study_csv,
                               "--train-count", "300")
        assert code == 0
        doc = json.loads(out)
        data = encode(load_csv(study_csv))
        from logitboot import EncodedDataset

        train = EncodedDataset(data.design[:300], data.response[:300], data.column_names)
        fit = fit_mle(train)
        report = holdout_validate(data, fit, list(range(300, 400)))
        assert doc["report"]["accuracy"] == report.accuracy
        assert doc["report"]["true_positive"] == report.true_positive
        assert doc["report"]["test_count"] == 100

    def test_curves_inline_matches_fit_json_route(self, study_csv, tmp_path):
        _, fit_out, _ = run_cli("fit", "--input", study_csv)
        fit_path = tmp_path / "fit.json"
        fit_path.write_text(fit_out)
        _, from_json, _ = run_cli("curves", "--fit-json", str(fit_path))
        doc = json.loads(from_json)
        coefs = json.loads(fit_out)["coefficients"]
        inline = ",".join(
            repr(coefs[c]) for c in ("Intercept", "Age", "Emp", "Gender")
        )
        _, from_inline, _ = run_cli("curves", "--coefficients", inline)
        assert json.loads(from_inline)["points"] == doc["points"]

    def test_curves_golden_first_point(self):
        _, out, _ = run_cli("curves", "--coefficients", GOLDEN_FLAG)
        doc = json.loads(out)
        points = doc["points"]
        assert len(points) == 52
        first = points[0]
        assert first["profile"] == "male-emp" and first["age"] == 0.0
        assert first["probability"] == pytest.approx(0.8264925, abs=1e-6)

    def test_curves_csv_file(self, tmp_path):
        out_path = tmp_path / "curves.csv"
        code, out, _ = run_cli("curves", "--coefficients", GOLDEN_FLAG,
                               "--format", "csv", "--out", str(out_path),
                               "--profiles", "male-emp,female-unemp")
        assert code == 0
        lines = out_path.read_text().strip().splitlines()
        assert lines[0] == "profile,age,probability"
        assert len(lines) == 1 + 2 * 13
        assert json.loads(out)["output"] == str(out_path)

    def test_curves_csv_requires_out(self):
        code, out, _ = run_cli("curves", "--coefficients", GOLDEN_FLAG,
                               "--format", "csv")
        assert code == 1


class TestExitCodes:
    def test_usage_errors(self, study_csv):
        assert run_cli("bogus")[0] == 1
        assert run_cli("fit")[0] == 1  # missing --input
        assert run_cli("fit", "--input", study_csv, "--unknown-flag")[0] == 1
        assert run_cli("split", "--input", study_csv, "--sizes", "200,100")[0] == 1

    def test_degenerate_response_exit(self, tmp_path):
        path = tmp_path / "all_pos.csv"
        rows = "\n".join(f"{20 + i},0,0,1" for i in range(10))
        path.write_text(f"Age,Gender,Emp,HIV\n{rows}\n")
        code, out, _ = run_cli("fit", "--input", str(path))
        assert code == 2
        assert json.loads(out)["error"]["type"] == "DegenerateResponseError"

    def test_separation_exit(self, tmp_path):
        path = tmp_path / "separated.csv"
        # HIV flips exactly at age 42.5, so the Age coefficient diverges.
        rows = ["40,0,0,0", "41,1,1,0", "42,0,1,0", "43,1,0,1", "44,0,1,1", "45,1,1,1"]
        path.write_text("Age,Gender,Emp,HIV\n" + "\n".join(rows) + "\n")
        code, out, _ = run_cli("fit", "--input", str(path))
        assert code == 3
        assert json.loads(out)["error"]["type"] == "SeparationError"

    def test_parse_error_exit_cites_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("Age,Gender,Emp,HIV\n20,0,0,1\n21,0,0,7\n")
        code, out, _ = run_cli("fit", "--input", str(path))
        assert code == 4
        doc = json.loads(out)
        assert doc["error"]["type"] == "ParseError"
        assert "row 2" in doc["error"]["message"]

    def test_ignored_column_warning_on_stderr(self, tmp_path):
        path = tmp_path / "extra.csv"
        cells = [(20, 0, 0, 1), (21, 1, 1, 1), (22, 0, 0, 0), (23, 1, 1, 0),
                 (24, 0, 1, 1), (25, 1, 0, 0), (26, 0, 1, 0), (27, 1, 0, 1)]
        rows = "\n".join(f"{a},{g},{e},{h},9" for a, g, e, h in cells)
        path.write_text(f"Age,Gender,Emp,HIV,PMOT\n{rows}\n")
        code, _, err = run_cli("fit", "--input", str(path))
        assert code == 0
        assert "PMOT" in err
