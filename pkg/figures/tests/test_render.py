"""Figure rendering against a fresh run directory from the edgesim CLI.

The run directory comes from the primary package's command-line interface
(its external surface); these tests never import edgesim.
"""
import csv
import hashlib
import subprocess
import sys

import pytest

from edgesim_figures import FigureSpec, SchemaMismatch, render


@pytest.fixture(scope="session")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("rundir")
    subprocess.run(
        [
            sys.executable, "-m", "edgesim.cli", "run",
            "--scheme", "pds", "--slots", "200", "--runs", "2",
            "--seed", "0", "--out", str(out),
        ],
        check=True,
        capture_output=True,
    )
    return out


@pytest.fixture(scope="session")
def compare_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("comparedir")
    subprocess.run(
        [
            sys.executable, "-m", "edgesim.cli", "compare",
            "--schemes", "pds,fixed:50,fixed:150",
            "--slots", "150", "--runs", "2", "--seed", "1", "--out", str(out),
        ],
        check=True,
        capture_output=True,
    )
    return out


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.mark.parametrize("kind", ["cost_curves", "policy_map", "battery_hist"])
def test_all_kinds_render_from_fresh_run(run_dir, tmp_path, kind):
    out = render(FigureSpec(kind=kind, input_dir=run_dir,
                            output_path=tmp_path / f"{kind}.png"))
    assert out.exists() and out.stat().st_size > 0


def test_rendering_is_checksum_stable(run_dir, tmp_path):
    for kind in ("cost_curves", "policy_map", "battery_hist"):
        a = render(FigureSpec(kind=kind, input_dir=run_dir,
                              output_path=tmp_path / f"a_{kind}.png"))
        b = render(FigureSpec(kind=kind, input_dir=run_dir,
                              output_path=tmp_path / f"b_{kind}.png"))
        assert sha(a) == sha(b), kind


def test_cost_curves_multi_scheme(compare_dir, tmp_path):
    out = render(FigureSpec(kind="cost_curves", input_dir=compare_dir,
                            output_path=tmp_path / "curves.png"))
    assert out.exists()


def test_empty_cost_csv_renders_axes_and_legend(tmp_path):
    src = tmp_path / "in"
    src.mkdir()
    with open(src / "runtime_costs.csv", "w", newline="") as fh:
        csv.writer(fh).writerow(["slot", "pds", "myopic"])
    out = render(FigureSpec(kind="cost_curves", input_dir=src,
                            output_path=tmp_path / "empty.png"))
    assert out.exists() and out.stat().st_size > 0


def test_policy_map_slice_options(run_dir, tmp_path):
    out = render(FigureSpec(kind="policy_map", input_dir=run_dir,
                            output_path=tmp_path / "slice.png",
                            workload=10.0, environment="Low"))
    assert out.exists()


def test_missing_column_named_in_error(tmp_path):
    src = tmp_path / "in"
    src.mkdir()
    with open(src / "battery_hist.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["level", "pds"])  # wrong first column name
        w.writerow([0, 3])
    with pytest.raises(SchemaMismatch, match="battery_wh"):
        render(FigureSpec(kind="battery_hist", input_dir=src,
                          output_path=tmp_path / "x.png"))


def test_missing_file_reported(tmp_path):
    src = tmp_path / "in"
    src.mkdir()
    with pytest.raises(SchemaMismatch):
        render(FigureSpec(kind="cost_curves", input_dir=src,
                          output_path=tmp_path / "x.png"))


def test_rendering_does_not_mutate_inputs(run_dir, tmp_path):
    before = {f.name: sha(f) for f in sorted(run_dir.glob("*.csv"))}
    for kind in ("cost_curves", "policy_map", "battery_hist"):
        render(FigureSpec(kind=kind, input_dir=run_dir,
                          output_path=tmp_path / f"{kind}.png"))
    after = {f.name: sha(f) for f in sorted(run_dir.glob("*.csv"))}
    assert before == after


def test_cli_end_to_end(run_dir, tmp_path):
    res = subprocess.run(
        [
            sys.executable, "-m", "edgesim_figures.cli", "battery_hist",
            "--in", str(run_dir), "--out", str(tmp_path / "cli.png"),
        ],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "cli.png").exists()


def test_cli_schema_mismatch_exit_code(tmp_path):
    src = tmp_path / "in"
    src.mkdir()
    (src / "runtime_costs.csv").write_text("wrong\n1\n")
    res = subprocess.run(
        [
            sys.executable, "-m", "edgesim_figures.cli", "cost_curves",
            "--in", str(src), "--out", str(tmp_path / "x.png"),
        ],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 1
    assert "slot" in res.stderr
