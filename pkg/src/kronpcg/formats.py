"""On-disk formats: KTEN tensors, run-log JSON, CSV / gnuplot summaries.

A ``.kten`` file is one ASCII header line ``KTEN <ndim> <d1> <d2> [<d3>]``
followed by the raw float64 little-endian payload in first-index-fastest
order; round-trips are bitwise.  Run logs are JSON documents matching
:data:`RUN_LOG_SCHEMA`.  All writers go through a temp file and an atomic
rename so a crash never leaves a half-written artifact.
"""

from __future__ import annotations

import csv
import io
import json
import os
from typing import Optional, Sequence

import numpy as np

from .solver import ConvergenceLog, SolverConfig

__all__ = [
    "write_tensor",
    "read_tensor",
    "RUN_LOG_SCHEMA",
    "log_to_dict",
    "write_run_log",
    "summary_row",
    "write_csv_summary",
    "write_gnuplot_series",
]

_MAGIC = "KTEN"


def _atomic_write_bytes(path: str, payload: bytes) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(payload)
    os.replace(tmp, path)


def write_tensor(path: str, t: np.ndarray) -> None:
    """Write a 2D/3D float64 tensor as a KTEN file."""
    t = np.asarray(t, dtype="<f8")
    if t.ndim not in (2, 3):
        raise ValueError(f"KTEN stores 2D or 3D tensors, got ndim={t.ndim}")
    header = " ".join([_MAGIC, str(t.ndim), *map(str, t.shape)]) + "\n"
    _atomic_write_bytes(path, header.encode("ascii") + t.tobytes(order="F"))


def read_tensor(path: str) -> np.ndarray:
    """Read a KTEN file back into an array (exact payload bytes)."""
    with open(path, "rb") as fh:
        header = fh.readline(256)
        payload = fh.read()
    try:
        fields = header.decode("ascii").split()
    except UnicodeDecodeError as exc:
        raise ValueError(f"{path}: not a KTEN file (binary header)") from exc
    if len(fields) < 2 or fields[0] != _MAGIC:
        raise ValueError(f"{path}: not a KTEN file")
    try:
        ndim = int(fields[1])
        dims = tuple(int(x) for x in fields[2:])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed KTEN header {header!r}") from exc
    if ndim not in (2, 3) or len(dims) != ndim or any(d < 1 for d in dims):
        raise ValueError(f"{path}: malformed KTEN header {header!r}")
    expected = int(np.prod(dims)) * 8
    if len(payload) != expected:
        raise ValueError(
            f"{path}: payload is {len(payload)} bytes, header promises {expected}"
        )
    flat = np.frombuffer(payload, dtype="<f8").astype(float)
    return flat.reshape(dims, order="F")


_NUMBER_OR_NULL = {"type": ["number", "null"]}

RUN_LOG_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": [
        "problem",
        "shape",
        "bcs",
        "preconditioner",
        "seed",
        "config",
        "iterations",
        "warnings",
        "final_norms",
    ],
    "properties": {
        "problem": {"type": ["string", "null"]},
        "shape": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "bcs": {"type": "array", "items": {"type": "string"}},
        "preconditioner": {"type": "string"},
        "seed": {"type": ["integer", "null"]},
        "config": {
            "type": "object",
            "required": ["max_iter", "stop_tol", "center_each_iter", "center_target"],
            "properties": {
                "max_iter": {"type": "integer", "minimum": 0},
                "stop_tol": _NUMBER_OR_NULL,
                "center_each_iter": {"type": ["boolean", "null"]},
                "center_target": {"type": "string"},
            },
        },
        "iterations": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "s",
                    "alpha",
                    "beta",
                    "rho",
                    "computed_res",
                    "true_res",
                    "kappa",
                    "eta_scaled",
                    "null_norm",
                    "ops_cum",
                ],
                "properties": {
                    "s": {"type": "integer", "minimum": 0},
                    "alpha": _NUMBER_OR_NULL,
                    "beta": _NUMBER_OR_NULL,
                    "rho": {"type": "number"},
                    "computed_res": {"type": "number"},
                    "true_res": _NUMBER_OR_NULL,
                    "kappa": {"type": "number"},
                    "eta_scaled": _NUMBER_OR_NULL,
                    "null_norm": {"type": "number"},
                    "ops_cum": {"type": "integer", "minimum": 0},
                },
            },
        },
        "warnings": {"type": "array", "items": {"type": "string"}},
        "breakdown": {"type": ["string", "null"]},
        "final_norms": {
            "type": "object",
            "required": ["h", "u", "true_residual", "relative_true_residual"],
            "properties": {
                "h": {"type": "number"},
                "u": _NUMBER_OR_NULL,
                "true_residual": _NUMBER_OR_NULL,
                "relative_true_residual": _NUMBER_OR_NULL,
            },
        },
    },
}


def log_to_dict(log: ConvergenceLog, config: Optional[SolverConfig] = None) -> dict:
    """Flatten a convergence log (plus its run metadata) to a JSON document."""
    meta = log.meta
    final_true = log.records[-1].true_res if log.records else None
    rel = None
    if final_true is not None and log.h_norm > 0.0:
        rel = final_true / log.h_norm
    cfg = config if config is not None else SolverConfig()
    return {
        "problem": meta.get("problem"),
        "shape": list(meta.get("shape", [])),
        "bcs": list(meta.get("bcs", [])),
        "preconditioner": meta.get("preconditioner", "identity"),
        "seed": meta.get("seed"),
        "config": {
            "max_iter": cfg.max_iter,
            "stop_tol": cfg.stop_tol,
            "center_each_iter": cfg.center_each_iter,
            "center_target": cfg.center_target,
        },
        "iterations": [
            {
                "s": rec.s,
                "alpha": rec.alpha,
                "beta": rec.beta,
                "rho": rec.rho,
                "computed_res": rec.computed_res,
                "true_res": rec.true_res,
                "kappa": rec.kappa,
                "eta_scaled": rec.eta_scaled,
                "null_norm": rec.null_norm,
                "ops_cum": rec.ops_cum,
            }
            for rec in log.records
        ],
        "warnings": list(log.warnings),
        "breakdown": log.breakdown,
        "final_norms": {
            "h": log.h_norm,
            "u": None if log.u is None else float(np.linalg.norm(log.u)),
            "true_residual": final_true,
            "relative_true_residual": rel,
        },
    }


def write_run_log(path: str, log: ConvergenceLog, config: Optional[SolverConfig] = None) -> None:
    doc = log_to_dict(log, config)
    _atomic_write_bytes(path, json.dumps(doc, indent=1).encode("ascii"))


def summary_row(log: ConvergenceLog, threshold: float = 1e-9) -> dict:
    """One CSV row: where the run crossed ``threshold`` (relative), and totals."""
    iters_to = ""
    if log.h_norm > 0.0:
        for rec in log.records:
            if rec.true_res is not None and rec.true_res <= threshold * log.h_norm:
                iters_to = rec.s
                break
    last = log.records[-1] if log.records else None
    return {
        "problem": log.meta.get("problem", ""),
        "preconditioner": log.meta.get("preconditioner", ""),
        "iters_to_1e-9": iters_to,
        "final_true_res": "" if last is None or last.true_res is None else repr(last.true_res),
        "ops_cum": "" if last is None else last.ops_cum,
    }


def write_csv_summary(path: str, rows: Sequence[dict]) -> None:
    buf = io.StringIO()
    writer = csv.DictWriter(
        buf,
        fieldnames=["problem", "preconditioner", "iters_to_1e-9", "final_true_res", "ops_cum"],
    )
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    _atomic_write_bytes(path, buf.getvalue().encode("ascii"))


def write_gnuplot_series(path: str, xs: Sequence, ys: Sequence, comment: str) -> None:
    """Two-column whitespace-separated series with one comment line."""
    lines = [f"# {comment}"]
    for x, y in zip(xs, ys):
        if y is None:
            continue
        lines.append(f"{x} {float(y)!r}")
    _atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("ascii"))
