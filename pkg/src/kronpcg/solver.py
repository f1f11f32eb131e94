"""Preconditioned conjugate gradients on tensor-shaped unknowns.

The iteration never forms the system matrix: the operator is applied
direction-by-direction with three-point stencils, the preconditioner is an
opaque callable on residual tensors, and every inner product is the
Frobenius pairing.  Singular (all-periodic / all-Neumann) systems are
handled by keeping iterates orthogonal to the constant-tensor null space:
the preconditioned residual is mean-centered once per iteration (the
centering target is configurable).

Each run produces a :class:`ConvergenceLog` with one record per iteration:
scalar coefficients, recursive and true residual norms, the quadratic-form
error indicator ``kappa`` and its scaled square-root series ``eta``, the
null-space component of the iterate, and the cumulative elementary-op
count under the accounting rules documented in :mod:`kronpcg.counting`.

Breakdown (nonpositive preconditioned inner product, or nonpositive
curvature) raises :class:`PCGBreakdown` carrying the partial log.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import operators as op_mod
from .counting import OpCounter, cost_model
from .precond import IdentityPreconditioner, Preconditioner
from .tensors import frobenius_norm, inner, saxpy

__all__ = [
    "OpCounter",
    "cost_model",
    "SolverConfig",
    "IterationRecord",
    "ConvergenceLog",
    "PCGBreakdown",
    "pcg",
    "kappa_indicator",
    "eta_series",
    "true_residual",
]

_EPS = float(np.finfo(float).eps)  # 2**-52
_CENTER_TARGETS = ("z", "u", "r", "p", "w", "none")


@dataclass
class SolverConfig:
    """Knobs for one conjugate-gradient run.

    ``max_iter`` is the primary stopping rule; ``stop_tol`` (relative true
    residual) is optional and, when set, its per-iteration evaluation is
    charged to the op counter.  ``center_each_iter=None`` resolves to
    "center iff the operator is singular"; ``center_target`` picks which
    loop quantity gets centered (default the preconditioned residual).
    """

    max_iter: int = 100
    stop_tol: Optional[float] = None
    center_each_iter: Optional[bool] = None
    center_target: str = "z"
    record_true_residual: bool = True

    def __post_init__(self) -> None:
        if self.max_iter < 0:
            raise ValueError("max_iter must be nonnegative")
        if self.center_target not in _CENTER_TARGETS:
            raise ValueError(
                f"center_target must be one of {_CENTER_TARGETS}, got {self.center_target!r}"
            )


@dataclass
class IterationRecord:
    """Per-iteration ledger entry (s=0 is the initial state)."""

    s: int
    alpha: Optional[float]
    beta: Optional[float]
    rho: float
    computed_res: float
    true_res: Optional[float]
    kappa: float
    null_norm: float
    ops_cum: int
    eta_scaled: Optional[float] = None


@dataclass
class ConvergenceLog:
    """Full run history plus the final iterate."""

    records: list[IterationRecord] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    u: Optional[np.ndarray] = None
    h_norm: float = 0.0
    breakdown: Optional[str] = None
    meta: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        """Number of actual loop passes (records minus the s=0 entry)."""
        return max(0, len(self.records) - 1)


class PCGBreakdown(Exception):
    """Iteration stopped on a nonpositive inner product; carries the partial log."""

    def __init__(self, reason: str, log: ConvergenceLog, u: np.ndarray):
        self.reason = reason
        self.log = log
        self.u = u
        super().__init__(f"conjugate-gradient breakdown: {reason}")


def kappa_indicator(op, h: np.ndarray, u: np.ndarray) -> float:
    """Quadratic-form error indicator ``<u, Lu> - 2<u, h>``.

    Up to the constant ``<u*, Lu*>`` this is the squared operator-norm
    error of ``u``, so its minimizer over a run marks the best iterate
    even though the constant itself is unknown.
    """
    return inner(u, op_mod.apply(op, u)) - 2.0 * inner(u, h)


def eta_series(kappas, first_iter_residual: Optional[float]) -> np.ndarray:
    """Scaled error-indicator series ``alpha*sqrt(kappa - min kappa) + eps``.

    ``alpha`` anchors the series to the first iteration's true residual so
    the curve is plottable alongside residual norms; when the first
    iteration's indicator is already at rounding level, ``alpha = 1``.
    """
    k = np.asarray(list(kappas), dtype=float)
    if k.size == 0:
        return k
    eta = np.sqrt(np.maximum(k - k.min(), 0.0))
    alpha = 1.0
    if first_iter_residual is not None and k.size > 1 and eta[1] > _EPS:
        alpha = first_iter_residual / eta[1]
    return alpha * eta + _EPS


def true_residual(op, h: np.ndarray, u: np.ndarray) -> float:
    """Frobenius norm of ``h - Lu``, recomputed from scratch."""
    return frobenius_norm(h - op_mod.apply(op, u))


def _counted_true_residual(op, h, u, ops: OpCounter) -> float:
    w = op_mod.apply(op, u, ops)
    r = saxpy(-1.0, w, h)
    ops.add(2 * h.size)  # subtraction
    ops.add(2 * h.size)  # norm
    return frobenius_norm(r)


def pcg(
    op,
    h: np.ndarray,
    precond: Optional[Preconditioner] = None,
    u0: Optional[np.ndarray] = None,
    config: Optional[SolverConfig] = None,
) -> tuple[np.ndarray, ConvergenceLog]:
    """Run preconditioned conjugate gradients for ``L u = h``.

    Returns the final iterate and the convergence log.  For a singular
    operator the right-hand side must arrive centered (the constant
    component of the solution is not determined); pass it through
    :func:`kronpcg.operators.center` first or let the CLI do it.
    """
    cfg = config if config is not None else SolverConfig()
    precond = precond if precond is not None else IdentityPreconditioner()
    h = np.asarray(h, dtype=float)
    if h.shape != op.shape:
        raise ValueError(f"right-hand side shape {h.shape} does not match grid {op.shape}")

    h_norm = frobenius_norm(h)
    singular = op_mod.is_singular(op)
    if singular and h_norm > 0.0:
        rel_null = op_mod.nullspace_component(h) / h_norm
        if rel_null > 1e-8:
            raise ValueError(
                "singular operator with uncentered right-hand side "
                f"(null component {rel_null:.2e} of |h|); center h first"
            )

    centering = cfg.center_each_iter if cfg.center_each_iter is not None else singular
    target = cfg.center_target if centering else "none"

    ops = OpCounter()
    ops.add(getattr(precond, "init_cost", 0))

    u = np.zeros(op.shape) if u0 is None else np.array(u0, dtype=float)
    if u.shape != op.shape:
        raise ValueError(f"initial guess shape {u.shape} does not match grid {op.shape}")

    log = ConvergenceLog(h_norm=h_norm)

    def finish(breakdown: Optional[str] = None) -> None:
        first_res = log.records[1].true_res if len(log.records) > 1 else None
        if first_res is None and len(log.records) > 1:
            first_res = log.records[1].computed_res
        etas = eta_series([rec.kappa for rec in log.records], first_res)
        for rec, e in zip(log.records, etas):
            rec.eta_scaled = float(e)
        log.u = u
        log.breakdown = breakdown

    def record(s, alpha, beta, rho, r, tr) -> IterationRecord:
        rec = IterationRecord(
            s=s,
            alpha=alpha,
            beta=beta,
            rho=rho,
            computed_res=frobenius_norm(r),
            true_res=tr,
            kappa=kappa_indicator(op, h, u),
            null_norm=op_mod.nullspace_component(u),
            ops_cum=ops.count,
        )
        log.records.append(rec)
        return rec

    # Initialization: residual, preconditioned residual, first direction.
    w = op_mod.apply(op, u, ops)
    if target == "w":
        w = op_mod.center(w, ops)
    r = saxpy(-1.0, w, h)
    ops.add(2 * h.size)
    if target == "r":
        r = op_mod.center(r, ops)
    z = precond.apply(r, ops)
    if target == "z":
        z = op_mod.center(z, ops)
    rho = inner(r, z)
    ops.add(2 * h.size)
    p = z
    if target == "p":
        p = op_mod.center(p, ops)

    tr0: Optional[float] = None
    if cfg.stop_tol is not None:
        tr0 = _counted_true_residual(op, h, u, ops)
    elif cfg.record_true_residual:
        # r was formed as h - Lu0 just above, so its norm IS the true
        # residual unless centering already touched it.
        tr0 = frobenius_norm(r) if target not in ("r", "w") else true_residual(op, h, u)
    rec0 = record(0, None, None, rho, r, tr0)

    if rec0.computed_res == 0.0:
        finish()
        return u, log
    if cfg.stop_tol is not None and tr0 is not None and tr0 <= cfg.stop_tol * max(h_norm, _EPS):
        finish()
        return u, log

    floor_noted = False
    for s in range(1, cfg.max_iter + 1):
        w = op_mod.apply(op, p, ops)
        if target == "w":
            w = op_mod.center(w, ops)
        wp = inner(w, p)
        ops.add(2 * h.size)
        if wp <= 0.0:
            # A nonpositive value that exceeds what inner-product rounding
            # can produce means the operator is not positive on this
            # direction: misuse, and the run cannot continue.  A value
            # inside the rounding band just means the step carries no
            # information; stop cleanly where we stand.
            bound = 100.0 * _EPS * frobenius_norm(w) * frobenius_norm(p)
            if frobenius_norm(w) == 0.0 or wp < -bound:
                log.warnings.append(
                    f"iteration {s}: curvature <Lp, p> = {wp:.3e} is not positive"
                )
                finish("curvature")
                raise PCGBreakdown("nonpositive curvature", log, u)
            log.warnings.append(
                f"iteration {s}: curvature at rounding level; stopping at the "
                "residual floor"
            )
            break
        alpha = rho / wp
        u = saxpy(alpha, p, u)
        ops.add(2 * h.size)
        if target == "u":
            u = op_mod.center(u, ops)
        r = saxpy(-alpha, w, r)
        ops.add(2 * h.size)
        if target == "r":
            r = op_mod.center(r, ops)
        if frobenius_norm(r) == 0.0:
            # The recursive residual underflowed to (or below) the smallest
            # representable norm; there is no direction left to build.
            tr = true_residual(op, h, u) if cfg.record_true_residual else None
            record(s, alpha, None, 0.0, r, tr)
            break
        z = precond.apply(r, ops)
        if target == "z":
            z = op_mod.center(z, ops)
        rho_next = inner(r, z)
        ops.add(2 * h.size)
        if rho_next <= 0.0:
            bound = 100.0 * _EPS * frobenius_norm(r) * frobenius_norm(z)
            if abs(rho_next) > bound:
                # Genuinely negative: the preconditioner is indefinite on
                # this residual.
                log.warnings.append(
                    f"iteration {s}: preconditioned inner product <r, z> = "
                    f"{rho_next:.3e} is not positive (indefinite preconditioner)"
                )
                tr = true_residual(op, h, u) if cfg.record_true_residual else None
                record(s, alpha, None, rho_next, r, tr)
                finish("indefinite")
                raise PCGBreakdown("nonpositive preconditioned inner product", log, u)
            # Rounding-level: the residual is at its numerical floor and
            # <r, z> carries no information.  Keep iterating (the scalars
            # become harmless noise) so fixed-iteration budgets complete.
            if not floor_noted:
                log.warnings.append(
                    f"iteration {s}: preconditioned inner product at rounding "
                    "level; residual floor reached, further iterations carry "
                    "no information"
                )
                floor_noted = True
        beta = rho_next / rho if rho != 0.0 else 0.0
        rho = rho_next
        p = saxpy(beta, p, z)
        ops.add(2 * h.size)
        if target == "p":
            p = op_mod.center(p, ops)
        if not (np.isfinite(rho) and np.isfinite(beta) and np.isfinite(alpha)):
            log.warnings.append(
                f"iteration {s}: non-finite iteration scalars at the residual "
                "floor; stopping"
            )
            tr = true_residual(op, h, u) if cfg.record_true_residual else None
            record(s, alpha, beta, rho, r, tr)
            break

        tr: Optional[float] = None
        if cfg.stop_tol is not None:
            tr = _counted_true_residual(op, h, u, ops)
        elif cfg.record_true_residual:
            tr = true_residual(op, h, u)
        record(s, alpha, beta, rho, r, tr)
        if cfg.stop_tol is not None and tr is not None and tr <= cfg.stop_tol * max(h_norm, _EPS):
            break

    finish()
    return u, log
