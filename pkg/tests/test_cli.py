"""End-to-end command-line coverage via cli.main (no subprocesses)."""

import csv
import json

import jsonschema
import numpy as np
import pytest

from kronpcg import cli
from kronpcg.formats import RUN_LOG_SCHEMA, read_tensor, write_tensor
from kronpcg.laplace1d import BoundaryCondition, analytic_spectrum


def test_gen_then_solve_round_trip(tmp_path, capsys):
    rhs = tmp_path / "p1.kten"
    assert cli.main(["gen", "--problem", "p1", "--size", "20x40", "--out", str(rhs)]) == 0
    assert rhs.exists()
    assert read_tensor(str(rhs)).shape == (20, 40)

    log_path = tmp_path / "run.json"
    sol_path = tmp_path / "u.kten"
    code = cli.main(
        [
            "solve",
            "--input", str(rhs),
            "--bc", "x=periodic,y=periodic",
            "--precond", "pinv",
            "--max-iter", "10",
            "--log", str(log_path),
            "--solution", str(sol_path),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "done:" in out

    doc = json.loads(log_path.read_text())
    jsonschema.validate(doc, RUN_LOG_SCHEMA)
    assert doc["final_norms"]["relative_true_residual"] <= 1e-11
    assert read_tensor(str(sol_path)).shape == (20, 40)


def test_gen_p2_writes_the_boundary_sidecar(tmp_path):
    rhs = tmp_path / "p2.kten"
    assert cli.main(["gen", "--problem", "p2", "--out", str(rhs)]) == 0
    sidecar = json.loads((tmp_path / "p2.kten.bc.json").read_text())
    assert sidecar["bcs"] == ["dirichlet-neumann", "periodic"]
    assert sidecar["applied"] is True
    assert sidecar["faces"][0]["end"] == {"kind": "field", "value": -0.5}
    assert sidecar["scale"] > 0.0


def test_gen_p3_variant(tmp_path):
    rhs = tmp_path / "p3.kten"
    code = cli.main(
        ["gen", "--problem", "p3", "--variant", "3d_128x64x8", "--out", str(rhs)]
    )
    assert code == 0
    assert read_tensor(str(rhs)).shape == (128, 64, 8)


@pytest.mark.parametrize(
    "argv",
    [
        ["gen", "--problem", "p1", "--out", "x.kten"],  # p1 without --size
        ["gen", "--problem", "p3", "--out", "x.kten"],  # p3 without --variant
        ["gen", "--problem", "p1", "--size", "50", "--out", "x.kten"],
        ["solve", "--input", "missing.kten", "--bc", "x=periodic,y=periodic"],
        ["spectrum", "--bc", "sideways", "--n", "8"],
        ["not-a-command"],
    ],
)
def test_usage_errors_exit_one(argv, capsys):
    assert cli.main(argv) == 1
    capsys.readouterr()


def test_solve_refuses_uncentered_singular_with_centering_off(tmp_path, capsys):
    rhs = tmp_path / "ones.kten"
    write_tensor(str(rhs), np.ones((6, 6)))
    argv = ["solve", "--input", str(rhs), "--bc", "x=periodic,y=periodic"]
    assert cli.main(argv + ["--center", "off"]) == 1
    capsys.readouterr()
    # Default handling centers the side and proceeds.
    log_path = tmp_path / "log.json"
    assert cli.main(argv + ["--log", str(log_path)]) == 0
    doc = json.loads(log_path.read_text())
    assert any("centered" in w for w in doc["warnings"])
    capsys.readouterr()


def test_solve_reports_breakdown_with_exit_two(tmp_path, capsys):
    rhs = tmp_path / "p1.kten"
    cli.main(["gen", "--problem", "p1", "--size", "50x100", "--out", str(rhs)])
    log_path = tmp_path / "log.json"
    code = cli.main(
        [
            "solve",
            "--input", str(rhs),
            "--bc", "x=periodic,y=periodic",
            "--precond", "lowrank:r=7",
            "--max-iter", "50",
            "--log", str(log_path),
        ]
    )
    assert code == 2
    captured = capsys.readouterr()
    assert "breakdown" in captured.out + captured.err
    doc = json.loads(log_path.read_text())
    jsonschema.validate(doc, RUN_LOG_SCHEMA)
    assert doc["breakdown"] == "indefinite"


def test_solve_applies_face_flags(tmp_path):
    rhs = tmp_path / "flat.kten"
    write_tensor(str(rhs), np.zeros((8, 10)))
    log_path = tmp_path / "log.json"
    code = cli.main(
        [
            "solve",
            "--input", str(rhs),
            "--bc", "x=dirichlet-neumann,y=periodic",
            "--uB", "x=1.0",
            "--eE", "x=-0.5",
            "--precond", "pinv",
            "--max-iter", "10",
            "--log", str(log_path),
        ]
    )
    assert code == 0
    doc = json.loads(log_path.read_text())
    assert any("folded" in w for w in doc["warnings"])
    assert doc["final_norms"]["relative_true_residual"] <= 1e-11


def test_spectrum_one_dimensional_output(capsys):
    assert cli.main(["spectrum", "--n", "5", "--bc", "dirichlet", "--analytic"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "k,eigenvalue"
    got = [float(line.split(",")[1]) for line in lines[1:]]
    want = analytic_spectrum(5, BoundaryCondition.DIRICHLET).values
    assert np.allclose(got, want, atol=1e-12)


def test_spectrum_grid_form_with_sums(capsys):
    code = cli.main(
        ["spectrum", "--size", "6x8", "--bc", "x=periodic,y=dirichlet", "--sums"]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "axis x (periodic, n=6)" in out
    assert "axis y (dirichlet, n=8)" in out
    assert "sum-spectrum min" in out


def _read_summary(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_experiment_exp1_compares_cg_with_stationary_jacobi(tmp_path, capsys):
    outdir = tmp_path / "exp1"
    assert cli.main(["experiment", "--name", "exp1", "--outdir", str(outdir)]) == 0
    out = capsys.readouterr().out
    assert "stand-alone jacobi omega=1.0" in out
    rows = _read_summary(outdir / "summary.csv")
    assert len(rows) == 4  # plain CG plus three damping choices
    cg = float(rows[0]["final_true_res"])
    for row in rows[1:]:
        assert float(row["final_true_res"]) > cg
    assert (outdir / "p1_none.dat").exists()


def test_experiment_exp2_sweeps_preconditioners(tmp_path, capsys):
    outdir = tmp_path / "exp2"
    assert cli.main(["experiment", "--name", "exp2", "--outdir", str(outdir)]) == 0
    capsys.readouterr()
    rows = {row["preconditioner"]: row for row in _read_summary(outdir / "summary.csv")}
    assert rows["pinv"]["iters_to_1e-9"] == "1"
    assert rows["identity"]["iters_to_1e-9"] != ""
    assert int(rows["jacobi(p=3, omega=1.3)"]["iters_to_1e-9"]) < int(
        rows["identity"]["iters_to_1e-9"]
    )
    assert int(rows["lowrank(r=3)"]["iters_to_1e-9"]) < 40
    # Every run wrote a log and a plottable series.
    assert len(list(outdir.glob("*.json"))) == len(rows)
    assert len(list(outdir.glob("*.dat"))) == len(rows)


def test_experiment_exp3_runs_the_spectral_preconditioner_everywhere(tmp_path, capsys):
    outdir = tmp_path / "exp3"
    assert cli.main(["experiment", "--name", "exp3", "--outdir", str(outdir)]) == 0
    capsys.readouterr()
    rows = _read_summary(outdir / "summary.csv")
    assert len(rows) == 9  # four stripe grids, the band problem, four random variants
    for row in rows:
        assert row["iters_to_1e-9"] != ""
        assert int(row["iters_to_1e-9"]) <= 3
