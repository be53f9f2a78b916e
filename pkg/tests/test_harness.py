import csv
import hashlib
import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from edgesim import reduced_config, validate_config
from edgesim.cli import main as cli_main
from edgesim.errors import UnknownScheme
from edgesim.harness import compare, run_experiment, solve


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def test_zero_slots_valid_empty_outputs(rcfg, tmp_path):
    out = tmp_path / "empty"
    summary = run_experiment(rcfg, "pds", slots=0, runs=2, base_seed=0, out_dir=out)
    header, rows = read_csv(out / "runtime_costs.csv")
    assert header == ["slot", "pds"]
    assert rows == []
    _, hist_rows = read_csv(out / "battery_hist.csv")
    assert sum(int(r[1]) for r in hist_rows) == 0
    doc = json.loads((out / "summary.json").read_text())
    assert doc["per_scheme"]["pds"]["final_running_avg_cost"] is None
    assert summary.per_scheme["pds"]["discounted_costs"] == [0.0, 0.0]
    assert (out / "policy.csv").exists()


def test_rerun_byte_identical_csvs(rcfg, tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        run_experiment(rcfg, "pds", slots=120, runs=3, base_seed=11, out_dir=out,
                       trace=True)
        outs.append(out)
    for fname in ("runtime_costs.csv", "battery_hist.csv", "policy.csv",
                  "records.csv", "trace.csv"):
        assert digest(outs[0] / fname) == digest(outs[1] / fname), fname


def test_common_random_numbers_across_schemes(rcfg, tmp_path):
    out = tmp_path / "crn"
    compare(rcfg, ["pds", "myopic", "fixed:100"], slots=80, runs=2, base_seed=3,
            out_dir=out, trace=True)
    header, rows = read_csv(out / "trace.csv")
    assert header[0] == "scheme"
    by_scheme = {}
    for row in rows:
        by_scheme.setdefault(row[0], []).append(row[1:])
    seqs = list(by_scheme.values())
    assert len(seqs) == 3
    assert seqs[0] == seqs[1] == seqs[2]


def test_running_average_is_prefix_mean_of_records(rcfg, tmp_path):
    out = tmp_path / "pm"
    run_experiment(rcfg, "myopic", slots=60, runs=3, base_seed=5, out_dir=out)
    _, rec_rows = read_csv(out / "records.csv")
    costs = np.zeros((3, 60))
    for row in rec_rows:
        costs[int(row[1]), int(row[2])] = float(row[9])
    series = np.cumsum(costs.mean(axis=0)) / np.arange(1, 61)
    _, cost_rows = read_csv(out / "runtime_costs.csv")
    got = np.array([float(r[1]) for r in cost_rows])
    assert np.allclose(got, series, atol=1e-12)


def test_battery_histogram_masses(rcfg, tmp_path):
    out = tmp_path / "hist"
    compare(rcfg, ["pds", "fixed:100"], slots=70, runs=4, base_seed=9, out_dir=out)
    header, rows = read_csv(out / "battery_hist.csv")
    for col in (1, 2):
        assert sum(int(r[col]) for r in rows) == 70 * 4
    levels = [float(r[0]) for r in rows]
    assert levels == list(rcfg.battery_levels())


def test_compare_scheme_with_itself_zero_reduction(rcfg, tmp_path):
    report = compare(rcfg, ["myopic", "myopic"], slots=50, runs=2, base_seed=1,
                     out_dir=tmp_path / "self")
    vals = list(report["final"].values())
    assert vals[0] == vals[1]
    assert all(r == 0.0 for r in report["reduction_vs_best"].values())


def test_compare_oracle_not_worse_than_pds(rcfg, tmp_path):
    report = compare(rcfg, ["oracle", "pds"], slots=400, runs=10, base_seed=2,
                     out_dir=tmp_path / "ovp")
    assert report["final"]["oracle"] <= report["final"]["pds"] * 1.02


def test_unknown_scheme_raises(rcfg, tmp_path):
    with pytest.raises(UnknownScheme):
        run_experiment(rcfg, "bogus", slots=5, runs=1, base_seed=0,
                       out_dir=tmp_path / "x")


def test_solve_outputs(rcfg, tmp_path):
    out = tmp_path / "solve"
    solve(rcfg, out)
    header, rows = read_csv(out / "C_star.csv")
    assert header[-1] == "bellman_residual"
    assert len(rows) == rcfg.state_space().n
    assert max(float(r[-1]) for r in rows) < 1e-8
    assert (out / "V_star.csv").exists()
    _, prows = read_csv(out / "policy_star.csv")
    assert len(prows) == rcfg.state_space().n


def test_solve_zero_discount_policy_is_myopic_argmin(default_raw, tmp_path):
    import copy

    raw = copy.deepcopy(default_raw)
    raw["discount"] = 0.0
    cfg0 = validate_config(raw)
    out = tmp_path / "delta0"
    solve(cfg0, out)
    from edgesim.env import ModelTables

    t = ModelTables(cfg0)
    want = np.where(t.feas5, t.exp_cost, np.inf).argmin(axis=-1)
    _, rows = read_csv(out / "policy_star.csv")
    got = np.array([float(r[5]) for r in rows]).reshape(t.space.shape)
    assert np.array_equal(got, t.a_levels[want])


def test_solve_rerun_byte_identical(rcfg, tmp_path):
    a, b = tmp_path / "s1", tmp_path / "s2"
    solve(rcfg, a)
    solve(rcfg, b)
    for f in ("C_star.csv", "V_star.csv", "policy_star.csv"):
        assert digest(a / f) == digest(b / f)


# -- CLI surface -------------------------------------------------------------------

def test_cli_run_and_exit_codes(tmp_path):
    runner = CliRunner()
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(reduced_config().to_dict()))
    res = runner.invoke(cli_main, [
        "run", "--config", str(cfg_path), "--scheme", "fixed:100",
        "--slots", "20", "--runs", "2", "--seed", "1",
        "--out", str(tmp_path / "out"),
    ])
    assert res.exit_code == 0, res.output
    assert (tmp_path / "out" / "summary.json").exists()


def test_cli_invalid_config_exits_1(tmp_path):
    runner = CliRunner()
    raw = reduced_config().to_dict()
    raw["discount"] = 2.0
    raw["workload"]["transition"][0] = [0.5, 0.2, 0.2]
    cfg_path = tmp_path / "bad.json"
    cfg_path.write_text(json.dumps(raw))
    res = runner.invoke(cli_main, [
        "run", "--config", str(cfg_path), "--scheme", "pds",
        "--slots", "5", "--runs", "1", "--out", str(tmp_path / "out"),
    ])
    assert res.exit_code == 1
    assert "BadValue" in res.output and "BadMatrix" in res.output


def test_cli_unknown_scheme_exits_1(tmp_path):
    runner = CliRunner()
    res = runner.invoke(cli_main, [
        "run", "--scheme", "nope", "--slots", "5", "--runs", "1",
        "--out", str(tmp_path / "out"),
    ])
    assert res.exit_code == 1


def test_cli_nonconvergence_exits_2(tmp_path, monkeypatch):
    import edgesim.harness as hmod
    from edgesim.errors import NonConvergence

    def boom(cfg, out_dir, tol=1e-9):
        raise NonConvergence("cap reached")

    monkeypatch.setattr(hmod, "solve", boom)
    runner = CliRunner()
    res = runner.invoke(cli_main, ["solve", "--out", str(tmp_path / "out")])
    assert res.exit_code == 2


def test_cli_compare(tmp_path):
    runner = CliRunner()
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(reduced_config().to_dict()))
    res = runner.invoke(cli_main, [
        "compare", "--config", str(cfg_path),
        "--schemes", "myopic,fixed:100", "--slots", "30", "--runs", "2",
        "--seed", "0", "--out", str(tmp_path / "cmp"),
    ])
    assert res.exit_code == 0, res.output
    assert "best scheme" in res.output
