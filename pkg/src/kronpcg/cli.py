"""Command-line front end.

Four subcommands: ``gen`` writes benchmark right-hand sides as KTEN
files, ``solve`` runs preconditioned conjugate gradients on a KTEN input,
``experiment`` reproduces the packaged experiment suites into a directory
of run logs / CSV / gnuplot series, and ``spectrum`` prints operator
eigenvalues.  Exit codes: 0 success, 1 usage or input error, 2 solver
breakdown.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import formats
from .laplace1d import BoundaryCondition, analytic_spectrum, build, numeric_spectrum
from .operators import (
    BoundaryData,
    FaceValue,
    apply_bc_updates,
    center,
    is_singular,
    nullspace_component,
    poisson_operator,
    spectrum_sums,
)
from .precond import jacobi_standalone, make_preconditioner
from .problems import P3_VARIANTS, gen_problem1, gen_problem2, gen_problem3, run_experiment
from .solver import PCGBreakdown, SolverConfig, pcg
from .tensors import frobenius_norm

_AXES = "xyz"


class UsageError(Exception):
    """Bad flags or inconsistent inputs; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse default exits 2; we reserve that
        raise UsageError(message)


def _parse_size(text: str, want_ndim: Optional[int] = None) -> tuple[int, ...]:
    try:
        dims = tuple(int(part) for part in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"bad --size {text!r}, expected e.g. 50x100 or 16x16x16")
    if len(dims) not in (2, 3) or any(d < 1 for d in dims):
        raise UsageError(f"bad --size {text!r}, expected 2 or 3 positive extents")
    if want_ndim is not None and len(dims) != want_ndim:
        raise UsageError(f"--size {text!r} must have {want_ndim} extents here")
    return dims


def _parse_bcs(text: str, ndim: int) -> tuple[BoundaryCondition, ...]:
    seen: dict[int, BoundaryCondition] = {}
    for part in text.split(","):
        axis_name, sep, value = part.partition("=")
        axis_name = axis_name.strip().lower()
        if not sep or axis_name not in _AXES[:ndim]:
            raise UsageError(
                f"bad --bc entry {part!r}; expected <axis>=<condition> with axis in "
                f"{{{', '.join(_AXES[:ndim])}}}"
            )
        axis = _AXES.index(axis_name)
        if axis in seen:
            raise UsageError(f"duplicate --bc entry for axis {axis_name}")
        try:
            seen[axis] = BoundaryCondition(value.strip().lower())
        except ValueError:
            raise UsageError(
                f"unknown boundary condition {value.strip()!r}; choose from "
                f"{', '.join(bc.value for bc in BoundaryCondition)}"
            )
    if sorted(seen) != list(range(ndim)):
        raise UsageError(f"--bc must cover every axis {tuple(_AXES[:ndim])} exactly once")
    return tuple(seen[a] for a in range(ndim))


def _parse_face_flags(args: argparse.Namespace, ndim: int) -> BoundaryData:
    faces: list[list[Optional[FaceValue]]] = [[None, None] for _ in range(ndim)]
    flag_map = [
        ("uB", "potential", 0),
        ("uE", "potential", 1),
        ("eB", "field", 0),
        ("eE", "field", 1),
    ]
    for flag, kind, slot in flag_map:
        for entry in getattr(args, flag) or []:
            axis_name, sep, value = entry.partition("=")
            axis_name = axis_name.strip().lower()
            if not sep or axis_name not in _AXES[:ndim]:
                raise UsageError(f"bad --{flag} entry {entry!r}; expected <axis>=<value>")
            axis = _AXES.index(axis_name)
            try:
                number = float(value)
            except ValueError:
                raise UsageError(f"bad --{flag} value {value!r}; expected a number")
            if faces[axis][slot] is not None:
                raise UsageError(
                    f"conflicting boundary values for axis {axis_name} "
                    f"({'begin' if slot == 0 else 'end'} face)"
                )
            faces[axis][slot] = FaceValue(kind, number)
    return BoundaryData(tuple((b, e) for b, e in faces))


def _slug(precond_spec: str) -> str:
    return (
        precond_spec.replace(":", "_").replace("=", "").replace(",", "_").replace(".", "p")
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kronpcg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a benchmark right-hand side")
    gen.add_argument("--problem", required=True, choices=["p1", "p2", "p3"])
    gen.add_argument("--size", help="grid extents, e.g. 50x100 (p1; optional for p2)")
    gen.add_argument("--period", type=int, default=12, help="stripe period for p1")
    gen.add_argument("--variant", choices=sorted(P3_VARIANTS), help="grid variant for p3")
    gen.add_argument("--seed", type=int, default=0, help="RNG seed for p3")
    gen.add_argument("--out", required=True, help="output .kten path")

    solve = sub.add_parser("solve", help="solve L u = h from a KTEN file")
    solve.add_argument("--input", required=True, help="right-hand side .kten")
    solve.add_argument("--bc", required=True, help="e.g. x=periodic,y=dirichlet-neumann")
    solve.add_argument("--precond", default="none", help="none | pinv | jacobi:p=3,omega=1.3 | lowrank:r=3")
    solve.add_argument("--max-iter", type=int, default=100)
    solve.add_argument("--tol", type=float, default=None, help="relative true-residual stop")
    solve.add_argument("--center", choices=["auto", "on", "off"], default="auto")
    solve.add_argument("--log", help="write the run log JSON here")
    solve.add_argument("--solution", help="write the final iterate as .kten here")
    for flag, text in [
        ("uB", "begin-face potential, e.g. x=0"),
        ("uE", "end-face potential"),
        ("eB", "begin-face field"),
        ("eE", "end-face field, e.g. x=-0.5"),
    ]:
        solve.add_argument(f"--{flag}", action="append", metavar="AXIS=VALUE", help=text)

    exp = sub.add_parser("experiment", help="run a packaged experiment suite")
    exp.add_argument("--name", required=True, choices=["exp1", "exp2", "exp3"])
    exp.add_argument("--outdir", required=True)
    exp.add_argument("--seed", type=int, default=0, help="seed for the random problems")

    spec = sub.add_parser("spectrum", help="print operator eigenvalues")
    spec.add_argument("--n", type=int, help="1D size (with a single --bc value)")
    spec.add_argument("--bc", required=True, help="one condition, or x=...,y=... with --size")
    spec.add_argument("--size", help="grid extents for the sum-spectrum form")
    spec.add_argument("--analytic", action="store_true", help="use closed-form spectra")
    spec.add_argument("--sums", action="store_true", help="print sum-spectrum extrema")

    return parser


def _cmd_gen(args: argparse.Namespace) -> int:
    if args.problem == "p1":
        if not args.size:
            raise UsageError("p1 needs --size, e.g. --size 50x100")
        n, q = _parse_size(args.size, want_ndim=2)
        spec, h = gen_problem1(n, q, period=args.period)
    elif args.problem == "p2":
        if args.size:
            n, q = _parse_size(args.size, want_ndim=2)
            spec, h = gen_problem2(n, q)
        else:
            spec, h = gen_problem2()
    else:
        if not args.variant:
            raise UsageError(f"p3 needs --variant (one of {', '.join(sorted(P3_VARIANTS))})")
        spec, h = gen_problem3(args.variant, seed=args.seed)
    formats.write_tensor(args.out, h)
    print(f"wrote {spec.name} {'x'.join(map(str, spec.shape))} to {args.out} "
          f"(|h| = {frobenius_norm(h):.6e})")
    if spec.boundary is not None:
        sidecar = args.out + ".bc.json"
        doc = {
            "bcs": [bc.value for bc in spec.bcs],
            "applied": True,
            "faces": [
                {
                    "axis": _AXES[axis],
                    "begin": None if b is None else {"kind": b.kind, "value": b.value},
                    "end": None if e is None else {"kind": e.kind, "value": e.value},
                }
                for axis, (b, e) in enumerate(spec.boundary.faces)
            ],
            "scale": spec.scale,
        }
        with open(sidecar, "w", encoding="ascii") as fh:
            json.dump(doc, fh, indent=1)
        print(f"boundary data (already folded into h) recorded in {sidecar}")
    return 0


def _cmd_solve(args: argparse.Namespace) -> int:
    h = formats.read_tensor(args.input)
    bcs = _parse_bcs(args.bc, h.ndim)
    op = poisson_operator(h.shape, bcs)
    boundary = _parse_face_flags(args, h.ndim)
    notes: list[str] = []
    if any(b is not None or e is not None for b, e in boundary.faces):
        h = apply_bc_updates(h, bcs, boundary)
        notes.append("boundary face values folded into the right-hand side")

    singular = is_singular(op)
    h_norm = frobenius_norm(h)
    uncentered = singular and h_norm > 0.0 and nullspace_component(h) > 1e-10 * h_norm
    if uncentered:
        if args.center == "off":
            raise UsageError(
                "the operator is singular and h has a null-space component; "
                "refusing with --center off (drop the flag or center h)"
            )
        h = center(h)
        notes.append("right-hand side centered (singular operator)")

    center_flag = {"auto": None, "on": True, "off": False}[args.center]
    cfg = SolverConfig(max_iter=args.max_iter, stop_tol=args.tol, center_each_iter=center_flag)
    precond = make_preconditioner(op, args.precond)

    code = 0
    try:
        u, log = pcg(op, h, precond, config=cfg)
    except PCGBreakdown as exc:
        u, log = exc.u, exc.log
        code = 2
    log.meta.update(
        {
            "problem": os.path.basename(args.input),
            "shape": list(op.shape),
            "bcs": [bc.value for bc in bcs],
            "preconditioner": precond.describe(),
            "seed": None,
        }
    )
    log.warnings[:0] = notes

    if args.log:
        formats.write_run_log(args.log, log, cfg)
    if args.solution:
        formats.write_tensor(args.solution, u)

    last = log.records[-1]
    rel = "n/a"
    if last.true_res is not None and log.h_norm > 0.0:
        rel = f"{last.true_res / log.h_norm:.3e}"
    status = "breakdown after" if code == 2 else "done:"
    print(
        f"{status} {log.iterations} iterations with {precond.describe()}, "
        f"relative true residual {rel}, {last.ops_cum} elementary ops"
    )
    if code == 2:
        print(f"breakdown: {log.breakdown} (partial results written)", file=sys.stderr)
    return code


def _run_to_files(outdir: str, spec, h, pspec: str, cfg: SolverConfig) -> dict:
    log = run_experiment(spec, h, [pspec], config=cfg, strict=False)[0]
    name = f"{spec.name}_{_slug(pspec)}"
    formats.write_run_log(os.path.join(outdir, f"{name}.json"), log, cfg)
    formats.write_gnuplot_series(
        os.path.join(outdir, f"{name}.dat"),
        [rec.ops_cum for rec in log.records],
        [rec.true_res for rec in log.records],
        f"{spec.name} {log.meta['preconditioner']}: cumulative ops vs true residual",
    )
    return formats.summary_row(log)


def _cmd_experiment(args: argparse.Namespace) -> int:
    os.makedirs(args.outdir, exist_ok=True)
    rows: list[dict] = []

    if args.name == "exp1":
        spec, h = gen_problem1(50, 100)
        rows.append(_run_to_files(args.outdir, spec, h, "none", SolverConfig(max_iter=600)))
        cg_level = rows[-1]["final_true_res"]
        cg_rel = float(cg_level) / frobenius_norm(h)
        print(f"conjugate gradients: relative residual {cg_rel:.3e} after <= 600 iterations")
        op = spec.operator()
        for omega in (1.0, 1.15, 1.3):
            result = jacobi_standalone(op, h, omega=omega, iters=8000)
            name = f"{spec.name}_jacobi_standalone_omega{str(omega).replace('.', 'p')}"
            formats.write_gnuplot_series(
                os.path.join(args.outdir, f"{name}.dat"),
                result.ops_cum,
                result.residuals,
                f"{spec.name} stand-alone jacobi omega={omega}: ops vs true residual",
            )
            h_norm = frobenius_norm(h)
            reached = next(
                (i for i, r in enumerate(result.residuals) if r <= cg_rel * h_norm),
                None,
            )
            where = f"at iteration {reached}" if reached is not None else "never (within 8000)"
            print(f"stand-alone jacobi omega={omega}: reaches the CG level {where}")
            rows.append(
                {
                    "problem": spec.name,
                    "preconditioner": f"jacobi-standalone(omega={omega:g})",
                    "iters_to_1e-9": next(
                        (i for i, r in enumerate(result.residuals) if r <= 1e-9 * h_norm),
                        "",
                    ),
                    "final_true_res": repr(result.residuals[-1]),
                    "ops_cum": result.ops_cum[-1],
                }
            )

    elif args.name == "exp2":
        spec, h = gen_problem1(50, 100)
        plan: list[tuple[str, int]] = [
            ("none", 800),
            ("jacobi:p=3,omega=1.3", 800),
            ("lowrank:r=3", 800),
            ("pinv", 10),
        ]
        for p in (1, 3, 5):
            for omega in (1.0, 1.15, 1.3):
                entry = (f"jacobi:p={p},omega={omega:g}", 800)
                if entry not in plan:
                    plan.append(entry)
        for r in (1, 2, 3, 4, 7, 10):
            entry = (f"lowrank:r={r}", 800)
            if entry not in plan:
                plan.append(entry)
        for pspec, max_iter in plan:
            rows.append(
                _run_to_files(args.outdir, spec, h, pspec, SolverConfig(max_iter=max_iter))
            )
            print(f"{pspec}: iterations to 1e-9 = {rows[-1]['iters_to_1e-9'] or 'not reached'}")

    else:  # exp3
        problems = [gen_problem1(*size) for size in [(5, 10), (20, 40), (50, 100), (500, 1000)]]
        problems.append(gen_problem2())
        problems.extend(gen_problem3(v, seed=args.seed) for v in sorted(P3_VARIANTS))
        for spec, h in problems:
            rows.append(_run_to_files(args.outdir, spec, h, "pinv", SolverConfig(max_iter=10)))
            rel = float(rows[-1]["final_true_res"]) / frobenius_norm(h)
            print(
                f"{spec.name} {'x'.join(map(str, spec.shape))}: iterations to 1e-9 = "
                f"{rows[-1]['iters_to_1e-9']}, final relative residual {rel:.3e}"
            )

    formats.write_csv_summary(os.path.join(args.outdir, "summary.csv"), rows)
    print(f"summary written to {os.path.join(args.outdir, 'summary.csv')}")
    return 0


def _cmd_spectrum(args: argparse.Namespace) -> int:
    if args.size:
        dims = _parse_size(args.size)
        bcs = _parse_bcs(args.bc, len(dims))
        op = poisson_operator(dims, bcs)
        source = "analytic" if args.analytic else "numeric"
        for axis, factor in enumerate(op.factors):
            dec = (
                analytic_spectrum(factor.n, factor.bc)
                if args.analytic
                else numeric_spectrum(factor)
            )
            values = ",".join(f"{v:.12g}" for v in dec.values)
            print(f"axis {_AXES[axis]} ({factor.bc.value}, n={factor.n}): {values}")
        if args.sums:
            sums = spectrum_sums(op, source=source)
            print(f"sum-spectrum min {sums.min():.12g} max {sums.max():.12g}")
        return 0
    if not args.n:
        raise UsageError("spectrum needs either --n with a single --bc, or --size")
    try:
        bc = BoundaryCondition(args.bc.strip().lower())
    except ValueError:
        raise UsageError(f"unknown boundary condition {args.bc!r}")
    dec = analytic_spectrum(args.n, bc) if args.analytic else numeric_spectrum(build(args.n, bc))
    print("k,eigenvalue")
    for k, value in enumerate(dec.values, start=1):
        print(f"{k},{value:.15g}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "experiment":
            return _cmd_experiment(args)
        if args.command == "spectrum":
            return _cmd_spectrum(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:  # console-script hook
    sys.exit(main())


if __name__ == "__main__":
    entry()
