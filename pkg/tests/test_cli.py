"""Command-line interface: exit codes, outputs, config precedence, determinism."""

import json

import numpy as np
import pytest

from squeezefit import LabeledDataset, ResultRecord, load_csv, load_matrix_json, save_csv
from squeezefit.cli import main


@pytest.fixture
def two_point_csv(tmp_path):
    path = tmp_path / "two.csv"
    ds = LabeledDataset(np.array([[0.0, 0.0], [2.0, 0.0]]), np.array([4, 9]))
    save_csv(ds, path)
    return path


def run(args):
    return main([str(a) for a in args])


def test_solve_writes_matrix_and_record(two_point_csv, tmp_path):
    out = tmp_path / "run"
    code = run(["solve", two_point_csv, "--delta", "2", "--certify", "--out", out])
    assert code == 0
    matrix = load_matrix_json(out / "matrix.json")
    assert np.linalg.norm(matrix - np.diag([1.0, 0.0])) <= 1e-2
    record = ResultRecord.load(out / "results.json")
    assert record.command == "solve"
    assert record.per_trial[0]["verdict"] == "certified"
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["verdict"] == "certified"


def test_infeasible_margin_exits_2(two_point_csv, tmp_path):
    code = run(["solve", two_point_csv, "--delta", "3", "--out", tmp_path / "x"])
    assert code == 2


def test_missing_dataset_exits_3(tmp_path):
    code = run(["solve", tmp_path / "nope.csv", "--out", tmp_path / "x"])
    assert code == 3


def test_usage_error_exits_3(two_point_csv, tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        run(["solve", two_point_csv, "--mode", "bogus", "--out", tmp_path / "x"])
    assert exc.value.code == 3


def test_certify_round_trip(two_point_csv, tmp_path):
    solve_out = tmp_path / "s"
    assert run(["solve", two_point_csv, "--delta", "2", "--out", solve_out]) == 0
    cert_out = tmp_path / "c"
    code = run(
        [
            "certify",
            two_point_csv,
            solve_out / "matrix.json",
            "--delta",
            "2",
            "--out",
            cert_out,
        ]
    )
    assert code == 0


def test_certify_suboptimal_matrix_exits_1(two_point_csv, tmp_path):
    bad = tmp_path / "eye.json"
    bad.write_text(json.dumps({"dim": 2, "data": [1.0, 0.0, 0.0, 1.0]}))
    code = run(["certify", two_point_csv, bad, "--delta", "2", "--out", tmp_path / "c"])
    assert code == 1


def test_certify_malformed_matrix_exits_3(two_point_csv, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"dim": 2, "data": [1.0]}))
    code = run(["certify", two_point_csv, bad, "--out", tmp_path / "c"])
    assert code == 3


def test_config_file_supplies_and_flags_override(two_point_csv, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"schema": 1, "delta": 2.0}))
    out_a = tmp_path / "a"
    assert run(["solve", two_point_csv, "--config", cfg, "--out", out_a]) == 0
    rec_a = ResultRecord.load(out_a / "results.json")
    assert rec_a.per_trial[0]["objective"] == pytest.approx(1.0, abs=1e-6)
    out_b = tmp_path / "b"
    assert (
        run(["solve", two_point_csv, "--config", cfg, "--delta", "1", "--out", out_b])
        == 0
    )
    rec_b = ResultRecord.load(out_b / "results.json")
    assert rec_b.per_trial[0]["objective"] == pytest.approx(0.25, abs=1e-6)


def test_unknown_config_key_exits_3(two_point_csv, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"schema": 1, "bogus": 1}))
    assert run(["solve", two_point_csv, "--config", cfg, "--out", tmp_path / "x"]) == 3


def test_zero_plus_warns_when_delta_given(two_point_csv, tmp_path, capsys):
    code = run(
        [
            "solve",
            two_point_csv,
            "--mode",
            "zero_plus",
            "--delta",
            "2",
            "--out",
            tmp_path / "z",
        ]
    )
    assert code == 0
    assert "ignored" in capsys.readouterr().err


def test_gen_round_trips_through_load(tmp_path):
    out = tmp_path / "g"
    assert run(["gen", "--what", "demo3d", "--seed", "3", "--out", out]) == 0
    ds = load_csv(out / "dataset.csv")
    assert ds.n == 60 and ds.dim == 3
    pi = load_matrix_json(out / "projection.json")
    assert abs(np.trace(pi) - 1.0) <= 1e-9


def test_gen_planted_writes_projection(tmp_path):
    out = tmp_path / "p"
    code = run(
        [
            "gen", "--what", "planted", "--dim", "6", "--rank", "2", "--n-base", "3",
            "--n-reps", "4", "--sigma", "0.2", "--out", out,
        ]
    )
    assert code == 0
    ds = load_csv(out / "dataset.csv")
    assert ds.n == 12 and ds.dim == 6
    pi = load_matrix_json(out / "projection.json")
    assert abs(np.trace(pi) - 2.0) <= 1e-9


def test_statdim_writes_table(tmp_path):
    out = tmp_path / "sd"
    code = run(
        ["statdim", "--cone", "orthant", "--n", "8,16", "--trials", "500", "--out", out]
    )
    assert code == 0
    lines = (out / "table.csv").read_text().strip().splitlines()
    assert lines[0].startswith("n,estimate,stderr")
    assert len(lines) == 3
    assert (out / "statdim.svg").exists()


def test_statdim_too_few_trials_exits_3(tmp_path):
    assert run(["statdim", "--trials", "50", "--out", tmp_path / "x"]) == 3


def test_recover_records_success_rate(tmp_path):
    out = tmp_path / "r"
    code = run(
        [
            "recover", "--dim", "6", "--rank", "2", "--n-base", "3", "--n-reps", "3",
            "--sigma", "0.05", "--trials", "3", "--out", out,
        ]
    )
    assert code == 0
    record = ResultRecord.load(out / "results.json")
    assert len(record.per_trial) == 3
    assert "success_rate" in record.aggregates


def test_recover_requires_sigma_or_snr(tmp_path):
    assert run(["recover", "--trials", "2", "--out", tmp_path / "x"]) == 3


def test_recover_deterministic_across_thread_counts(tmp_path):
    args = [
        "recover", "--dim", "5", "--rank", "2", "--n-base", "3", "--n-reps", "3",
        "--sigma", "0.1", "--trials", "3", "--seed", "11",
    ]
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert run(args + ["--threads", "1", "--out", out_a]) == 0
    assert run(args + ["--threads", "3", "--out", out_b]) == 0
    rec_a = ResultRecord.load(out_a / "results.json")
    rec_b = ResultRecord.load(out_b / "results.json")
    assert rec_a.canonical_bytes() == rec_b.canonical_bytes()


def test_compare_table_on_synthetic_split(tmp_path):
    gen_out = tmp_path / "data"
    assert run(["gen", "--what", "demo3d", "--seed", "5", "--out", gen_out]) == 0
    test_out = tmp_path / "data_test"
    assert run(["gen", "--what", "demo3d", "--seed", "6", "--out", test_out]) == 0
    out = tmp_path / "cmp"
    code = run(
        [
            "compare", "--train", gen_out / "dataset.csv", "--test",
            test_out / "dataset.csv", "--n", "40", "--k-list", "1,3", "--out", out,
        ]
    )
    assert code == 0
    lines = (out / "table.csv").read_text().strip().splitlines()
    assert lines[0] == "method,rank,k,error_pct"
    assert len(lines) == 1 + 4 * 2  # four methods, two K values


def test_compare_identity_on_same_split_is_exact(tmp_path):
    gen_out = tmp_path / "data"
    assert run(["gen", "--what", "demo3d", "--seed", "7", "--out", gen_out]) == 0
    out = tmp_path / "cmp"
    code = run(
        [
            "compare", "--train", gen_out / "dataset.csv", "--test",
            gen_out / "dataset.csv", "--methods", "id", "--k-list", "1", "--out", out,
        ]
    )
    assert code == 0
    record = ResultRecord.load(out / "results.json")
    assert record.per_trial[0]["error_pct"] == 0.0


def test_compare_missing_mnist_exits_3(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("SQZ_DATA_DIR", str(tmp_path / "empty"))
    assert run(["compare", "--preset", "mnist49", "--out", tmp_path / "x"]) == 3
    assert "SQZ_DATA_DIR" in capsys.readouterr().err


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        run(["--version"])
    assert exc.value.code == 0
