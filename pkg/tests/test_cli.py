import csv
import json

import numpy as np
import pytest

from hdnsboot.cli import main, read_series_csv
from hdnsboot.models import ModelSpec, generate_regression, simulate_model


def test_simulate_round_trip(tmp_path):
    out = tmp_path / "x.csv"
    assert main(["simulate", "--model", "M2", "--n", "30", "--d", "3", "--seed", "5",
                 "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["t", "x1", "x2", "x3"] and rows[1][0] == "1" and len(rows) == 31
    expected = simulate_model(ModelSpec("M2", 30, 3, seed=5)).data
    np.testing.assert_array_equal(read_series_csv(out), expected)


def test_deps(tmp_path):
    out = tmp_path / "deps.csv"
    assert main(["deps", "--model", "M1", "--n", "40", "--d", "2", "--k-max", "2",
                 "--reps", "100", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 3 * 3
    for k in range(3):
        per = [r for r in rows if r["k"] == str(k)]
        top = [r for r in per if r["coord"] == "max"][0]
        assert float(top["theta_hat"]) == max(float(r["theta_hat"]) for r in per)


def test_bootstrap_diag(tmp_path):
    x = tmp_path / "x.csv"
    main(["simulate", "--model", "M1", "--n", "200", "--d", "2", "--seed", "1", "--out", str(x)])
    out = tmp_path / "diag.json"
    assert main(["bootstrap-diag", "--in", str(x), "--L", "6", "--B", "200", "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert set(res) == {"L", "delta_frobenius", "delta_max", "min_eigenvalue_boot"}
    assert res["L"] == 6 and 0 <= res["delta_max"] <= res["delta_frobenius"]
    target = tmp_path / "target.csv"
    np.savetxt(target, np.eye(2), delimiter=",")
    main(["bootstrap-diag", "--in", str(x), "--target", str(target), "--out", str(out)])
    assert json.loads(out.read_text())["L"] in (4, 6, 9, 12)


@pytest.mark.parametrize("which", ["combined", "threshold"])
def test_test_command(tmp_path, which):
    data = generate_regression(ModelSpec("M1", 200, 4, seed=3), np.ones(4))
    np.savetxt(tmp_path / "X.csv", data.X.data, delimiter=",")
    np.savetxt(tmp_path / "y.txt", data.y)
    np.savetxt(tmp_path / "b.txt", np.ones(4))
    out = tmp_path / "out.json"
    assert main(["test", which, "--x", str(tmp_path / "X.csv"), "--y", str(tmp_path / "y.txt"),
                 "--beta0", str(tmp_path / "b.txt"), "--B", "99", "--b-sigma", "60",
                 "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert len(res["boot_draws"]) == 99
    assert res["reject"] == (res["p_value"] <= res["alpha"])
    assert res["meta"]["test"] == which


def test_mc_flags_and_config(tmp_path):
    out_csv = tmp_path / "t1.csv"
    args = ["mc", "type1", "--n", "100", "--d", "2,3", "--reps", "3", "--B", "49",
            "--seed", "4"]
    assert main(args + ["--out", str(out_csv)]) == 0
    rows = list(csv.DictReader(out_csv.open()))
    assert len(rows) == 4 and {r["d"] for r in rows} == {"2", "3"}
    out_json = tmp_path / "t1.json"
    assert main(args + ["--out", str(out_json)]) == 0
    report = json.loads(out_json.read_text())
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(report["config_echo"]))
    again = tmp_path / "again.json"
    assert main(["mc", "type1", "--config", str(cfg), "--out", str(again)]) == 0
    assert json.loads(again.read_text())["cells"] == report["cells"]


def test_mc_abort_exit_code(tmp_path, monkeypatch):
    from hdnsboot import harness

    def broken(*a, **k):
        raise harness.DesignError("singular")
    monkeypatch.setattr(harness, "run_combined_test", broken)
    assert main(["mc", "type1", "--n", "50", "--d", "2", "--reps", "2", "--B", "9",
                 "--out", str(tmp_path / "x.csv")]) == 2
