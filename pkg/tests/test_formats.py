import json

import jsonschema
import numpy as np
import pytest

from kronpcg.formats import (
    RUN_LOG_SCHEMA,
    log_to_dict,
    read_tensor,
    summary_row,
    write_csv_summary,
    write_gnuplot_series,
    write_run_log,
    write_tensor,
)
from kronpcg.precond import PinvPreconditioner
from kronpcg.problems import gen_problem1, run_experiment
from kronpcg.solver import SolverConfig, pcg


@pytest.mark.parametrize("shape", [(3, 4), (4, 5, 6)])
def test_tensor_round_trip_is_bitwise(tmp_path, shape):
    rng = np.random.default_rng(2)
    t = rng.standard_normal(shape)
    t.flat[0] = -0.0
    t.flat[1] = 5e-324  # smallest denormal
    t.flat[2] = np.pi
    path = tmp_path / "field.kten"
    write_tensor(str(path), t)
    back = read_tensor(str(path))
    assert back.shape == t.shape
    assert np.array_equal(back.view(np.uint64), t.view(np.uint64))


def test_tensor_header_is_ascii_with_dims(tmp_path):
    path = tmp_path / "t.kten"
    write_tensor(str(path), np.zeros((3, 4)))
    blob = path.read_bytes()
    assert blob.startswith(b"KTEN 2 3 4\n")
    assert len(blob) == len(b"KTEN 2 3 4\n") + 12 * 8


def test_tensor_accepts_non_contiguous_input(tmp_path):
    base = np.arange(40, dtype=float).reshape(5, 8)
    view = base[:, ::2]  # strided, not F-contiguous
    path = tmp_path / "v.kten"
    write_tensor(str(path), view)
    assert np.array_equal(read_tensor(str(path)), view)


@pytest.mark.parametrize(
    "blob",
    [
        b"NOPE 2 3 4\n" + b"\0" * 96,
        b"KTEN 2 3\n" + b"\0" * 72,
        b"KTEN 2 3 4\n" + b"\0" * 40,  # truncated payload
        b"KTEN 2 3 4\n" + b"\0" * 120,  # trailing bytes
        b"KTEN 4 2 2 2 2\n" + b"\0" * 128,  # unsupported rank
    ],
)
def test_read_tensor_rejects_malformed_files(tmp_path, blob):
    path = tmp_path / "bad.kten"
    path.write_bytes(blob)
    with pytest.raises(ValueError):
        read_tensor(str(path))


def _sample_log(max_iter=5):
    spec, h = gen_problem1(5, 10)
    cfg = SolverConfig(max_iter=max_iter)
    (log,) = run_experiment(spec, h, ["pinv"], config=cfg)
    return log, cfg


def test_log_document_validates_against_the_schema():
    log, cfg = _sample_log()
    doc = log_to_dict(log, cfg)
    jsonschema.validate(doc, RUN_LOG_SCHEMA)
    assert doc["problem"] == "p1"
    assert doc["config"]["max_iter"] == 5
    assert len(doc["iterations"]) == len(log.records)
    assert doc["final_norms"]["relative_true_residual"] <= 1e-12


def test_log_without_metadata_still_validates():
    spec, h = gen_problem1(5, 10)
    op = spec.operator()
    _, log = pcg(op, h, PinvPreconditioner(op), config=SolverConfig(max_iter=3))
    jsonschema.validate(log_to_dict(log), RUN_LOG_SCHEMA)


def test_write_run_log_round_trips_through_json(tmp_path):
    log, cfg = _sample_log()
    path = tmp_path / "run.json"
    write_run_log(str(path), log, cfg)
    doc = json.loads(path.read_text())
    jsonschema.validate(doc, RUN_LOG_SCHEMA)
    assert doc["iterations"][0]["s"] == 0


def test_summary_row_reports_the_crossing():
    log, _ = _sample_log()
    row = summary_row(log)
    assert row["problem"] == "p1"
    assert row["iters_to_1e-9"] == 1
    assert float(row["final_true_res"]) <= 1e-9
    assert row["ops_cum"] == log.records[-1].ops_cum


def test_csv_summary_has_header_and_rows(tmp_path):
    log, _ = _sample_log()
    path = tmp_path / "summary.csv"
    write_csv_summary(str(path), [summary_row(log), summary_row(log)])
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "problem,preconditioner,iters_to_1e-9,final_true_res,ops_cum"
    assert len(lines) == 3


def test_gnuplot_series_skips_gaps_and_round_trips(tmp_path):
    path = tmp_path / "series.dat"
    write_gnuplot_series(str(path), [0, 1, 2, 3], [1.0, None, 0.25, 1e-300], "a curve")
    lines = path.read_text().splitlines()
    assert lines[0] == "# a curve"
    assert len(lines) == 4
    xs, ys = zip(*(line.split() for line in lines[1:]))
    assert xs == ("0", "2", "3")
    assert [float(y) for y in ys] == [1.0, 0.25, 1e-300]
