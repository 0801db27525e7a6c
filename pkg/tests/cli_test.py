"""
    To run all tests: pytest -s
    To run this module: pytest -s tests/cli_test.py
"""
import json

import pandas as pd
import pytest
from typer.testing import CliRunner

from main import cli

runner = CliRunner()


def read_table(path):
    return pd.read_csv(path, comment="#")


def test_gap_scan_two_state(tmp_path):
    out = tmp_path / "scan.csv"
    result = runner.invoke(cli, ["gap-scan", "--q", "0.5", "--L", "1", "--H", "2", "--N", "1", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert "Wrote 2 rows" in result.output

    frame = read_table(out)
    assert list(frame["N"].astype(str)) == ["1", "sup"]
    assert frame["gap"].iloc[0] == pytest.approx(2.5, abs=1e-12)

    header = [line for line in out.read_text().splitlines() if line.startswith("#")]
    assert any(line.startswith("# command:") for line in header)
    assert any(line.startswith("# run_id:") for line in header)


def test_gap_scan_json(tmp_path):
    out = tmp_path / "scan.json"
    result = runner.invoke(cli, ["gap-scan", "--L", "2", "--H", "2", "--format", "json", "--out", str(out)])
    assert result.exit_code == 0, result.output
    payload = json.loads(out.read_text())
    assert payload["header"]["command"] == "gap-scan"
    assert {row["N"] for row in payload["rows"]} == {1, 2, "sup"}


def test_gap_scan_usage_errors(tmp_path):
    out = str(tmp_path / "scan.csv")
    assert runner.invoke(cli, ["gap-scan", "--L", "3..x", "--out", out]).exit_code == 2
    assert runner.invoke(cli, ["gap-scan", "--L", "4..2", "--out", out]).exit_code == 2
    assert runner.invoke(cli, ["gap-scan", "--q", "1.5", "--out", out]).exit_code == 2
    assert runner.invoke(cli, ["gap-scan", "--form", "other", "--out", out]).exit_code == 2


def test_gap_scan_bernoulli_laplace(tmp_path):
    out = tmp_path / "bl.csv"
    result = runner.invoke(cli, ["gap-scan", "--form", "bernoulli-laplace", "--L", "3..4", "--out", str(out)])
    assert result.exit_code == 0, result.output
    frame = read_table(out)
    sup = frame[frame["N"].astype(str) == "sup"]
    assert len(sup) == 2
    assert sup["gamma"].tolist() == pytest.approx([0.5, 0.5], abs=1e-10)


def test_xxz_unit_gap(tmp_path):
    out = tmp_path / "xxz.csv"
    result = runner.invoke(cli, ["xxz", "--delta", "1.25,5", "--twice-s", "1", "--H", "2", "--out", str(out)])
    assert result.exit_code == 0, result.output
    frame = read_table(out)
    assert frame["gap"].tolist() == pytest.approx([1.0, 1.0], abs=1e-10)
    assert (frame["equivalence_residual"] <= 1e-10).all()


def test_xxz_diagonal(tmp_path):
    out = tmp_path / "diag.csv"
    result = runner.invoke(cli, ["xxz", "--diagonal", "--R", "1", "--H", "2..3", "--out", str(out)])
    assert result.exit_code == 0, result.output
    frame = read_table(out)
    assert frame["R"].tolist() == [1, 1]
    assert (frame["gap"] > 0).all()


def test_xxz_rejects_bad_sectors(tmp_path):
    out = str(tmp_path / "xxz.csv")
    assert runner.invoke(cli, ["xxz", "--sector", "4", "--out", out]).exit_code == 2
    assert runner.invoke(cli, ["xxz", "--delta", "0.5", "--out", out]).exit_code == 2
    assert runner.invoke(cli, ["xxz", "--diagonal", "--sector", "3", "--out", out]).exit_code == 2
    assert runner.invoke(cli, ["xxz", "--diagonal", "--R", "0", "--out", out]).exit_code == 2
    assert runner.invoke(cli, ["xxz", "--diagonal", "--R", "0..2", "--out", out]).exit_code == 2


def test_verify_single_check():
    result = runner.invoke(cli, ["verify", "--filter", "two-state-gap"])
    assert result.exit_code == 0, result.output
    assert "PASS" in result.output
    assert "FAIL" not in result.output


def test_verify_detects_a_corrupted_operator():
    result = runner.invoke(cli, ["verify", "--filter", "two-state-gap", "--corrupt", "two-state-gap"])
    assert result.exit_code == 1
    assert "FAIL" in result.output


def test_verify_trend_checks():
    result = runner.invoke(cli, ["verify", "--filter", "k-decay"])
    assert result.exit_code == 0, result.output
    assert "FAIL" not in result.output

    corrupted = runner.invoke(cli, ["verify", "--filter", "k-decay", "--corrupt", "k-decay"])
    assert corrupted.exit_code == 1
    assert "FAIL" in corrupted.output


def test_verify_list_and_unknown_filter():
    result = runner.invoke(cli, ["verify", "--list"])
    assert result.exit_code == 0
    assert "xxz-equivalence" in result.output

    assert runner.invoke(cli, ["verify", "--filter", "no-such-check"]).exit_code == 2
    assert runner.invoke(cli, ["verify", "--filter", "two-state-gap", "--corrupt", "no-such-check"]).exit_code == 2


def simulate_args(out, *extra):
    return ["simulate", "--q", "0.5", "--L", "1", "--H", "2", "--N", "1", "--t-run", "4000", "--sample-dt", "0.05", "--out", str(out), *extra]


def test_simulate_is_reproducible(tmp_path):
    first, second = tmp_path / "a" / "run", tmp_path / "b" / "run"
    assert runner.invoke(cli, simulate_args(first, "--seed", "5")).exit_code == 0
    assert runner.invoke(cli, simulate_args(second, "--seed", "5")).exit_code == 0

    for suffix in ("_series.csv", "_estimate.json"):
        a = (tmp_path / "a" / f"run{suffix}").read_bytes()
        b = (tmp_path / "b" / f"run{suffix}").read_bytes()
        assert a == b

    estimate = json.loads((tmp_path / "a" / "run_estimate.json").read_text())
    assert estimate["exact_gap"] == pytest.approx(2.5, abs=1e-12)
    assert estimate["ratio"] == pytest.approx(estimate["rate"] / 2.5)
    assert estimate["header"]["seed"] == 5


def test_simulate_echoes_a_drawn_seed(tmp_path):
    result = runner.invoke(cli, simulate_args(tmp_path / "run"))
    assert result.exit_code == 0, result.output
    assert result.output.startswith("seed: ")
    seed = int(result.output.splitlines()[0].split(":")[1])
    estimate = json.loads((tmp_path / "run_estimate.json").read_text())
    assert estimate["header"]["seed"] == seed


def test_simulate_usage_errors(tmp_path):
    assert runner.invoke(cli, simulate_args(tmp_path / "run", "--mode", "other")).exit_code == 2
    assert runner.invoke(cli, ["simulate", "--q", "0.5", "--L", "2", "--H", "2", "--N", "4", "--seed", "1", "--out", str(tmp_path / "run")]).exit_code == 2
