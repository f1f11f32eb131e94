"""Preconditioners exploiting the operator's Kronecker-sum structure.

Three families, all symmetric so conjugate gradients stays valid:

- weighted Jacobi: ``p`` steps of the damped diagonal splitting
  ``L = omega*D + (L - omega*D)``, applied matrix-free,
- spectral pseudoinverse: exact (pseudo)inversion through the
  per-direction eigenbases, a Hadamard division against the tensor of
  eigenvalue sums with near-null modes zeroed,
- low-rank (2D only): the pseudoinverse with the reciprocal-eigenvalue
  matrix replaced by a rank-``r`` SVD truncation, which turns the dense
  spectral transform into ``r`` cheap congruence pairs.  Truncation can
  lose positive definiteness; applications check the ``<z, r>`` sign and
  emit :class:`IndefinitePreconditionerWarning` when it is crossed.

Also here: the stand-alone weighted Jacobi stationary solver used as a
baseline in the experiments.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import operators as op_mod
from .counting import OpCounter
from .tensors import frobenius_norm, hadamard_pinv, inner, linear_transform

__all__ = [
    "Preconditioner",
    "IdentityPreconditioner",
    "JacobiPreconditioner",
    "PinvPreconditioner",
    "LowRankPreconditioner",
    "IndefinitePreconditionerWarning",
    "make_preconditioner",
    "StationaryResult",
    "jacobi_standalone",
    "NULL_MODE_TOL",
]

NULL_MODE_TOL = 1e-13


class IndefinitePreconditionerWarning(UserWarning):
    """A preconditioner application produced ``<z, r> <= 0``."""


class Preconditioner:
    """Base: a symmetric map from residual tensors to search-direction seeds."""

    name = "base"
    init_cost = 0

    def apply(self, r: np.ndarray, ops: Optional[OpCounter] = None) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> str:
        return self.name


class IdentityPreconditioner(Preconditioner):
    """No preconditioning; application is free."""

    name = "identity"

    def apply(self, r: np.ndarray, ops: Optional[OpCounter] = None) -> np.ndarray:
        return r


class JacobiPreconditioner(Preconditioner):
    """``p`` damped-Jacobi sweeps on the splitting ``L = omega*D + O``.

    The weighted diagonal of the grid operator is the tensor of
    per-direction diagonal sums scaled by ``omega``; the off part per
    direction is ``O(L) = L - omega*diag(L)``, so a sweep reuses the
    stencil apply:

        ``x_j = Dhat^-1 (r - apply(op, x_{j-1}) + Dhat x_{j-1})``

    with ``x_0 = 0`` (the first sweep collapses to ``Dhat^-1 r``).
    ``omega < 1`` is rejected; ``omega`` slightly above 1 trades speed per
    sweep for robustness.  Each sweep after the first counts
    ``6*N*ndim + 4*N`` elementary ops, the first counts ``N``.
    """

    name = "jacobi"

    def __init__(self, op, p: int = 1, omega: float = 1.0):
        if p < 1:
            raise ValueError(f"jacobi needs p >= 1 sweeps, got {p}")
        if omega < 1.0:
            raise ValueError(f"jacobi damping needs omega >= 1, got {omega}")
        self.op = op
        self.p = int(p)
        self.omega = float(omega)
        diag_sum = np.zeros(op.shape)
        for axis, f in enumerate(op.factors):
            shape = [1] * op.ndim
            shape[axis] = f.n
            diag_sum = diag_sum + f.diagonal().reshape(shape)
        self.dhat = self.omega * diag_sum
        self.dhat_inv = 1.0 / self.dhat
        # Dense off parts kept for introspection; the apply path never uses them.
        self.off_parts = [
            f.dense() - self.omega * np.diag(f.diagonal()) for f in op.factors
        ]
        # Building the weighted diagonal: ndim-1 adds, a scaling, a reciprocal.
        self.init_cost = (op.ndim + 1) * int(np.prod(op.shape))

    def describe(self) -> str:
        return f"jacobi(p={self.p}, omega={self.omega:g})"

    def apply(self, r: np.ndarray, ops: Optional[OpCounter] = None) -> np.ndarray:
        x = self.dhat_inv * r
        if ops is not None:
            ops.add(r.size)
        for _ in range(self.p - 1):
            f = r - op_mod.apply(self.op, x, ops) + self.dhat * x
            x = self.dhat_inv * f
            if ops is not None:
                ops.add(4 * r.size)
        return x


class PinvPreconditioner(Preconditioner):
    """Spectral (pseudo)inverse through the per-direction eigenbases.

    Setup eigendecomposes each 1D factor and stores the entrywise
    pseudoinverse of the eigenvalue-sum tensor, zeroing sums within
    ``tol`` of zero (for an all-periodic or all-Neumann grid exactly the
    constant mode drops out).  Application is transform, Hadamard,
    transform back: ``4*N*(n+q[+t]) + N`` elementary ops.
    """

    name = "pinv"

    def __init__(self, op, source: str = "numeric", tol: float = NULL_MODE_TOL):
        self.op = op
        decomps = op_mod.spectra(op, source)
        self.bases = [d.vectors for d in decomps]
        self.bases_t = [v.T.copy() for v in self.bases]
        sums = op_mod.spectrum_sums(op, decomps)
        self.ghat = hadamard_pinv(sums, tol)
        # Eigenvalue-sum tensor and its reciprocal: (ndim-1)+1 ops per entry.
        self.init_cost = op.ndim * int(np.prod(op.shape))

    def describe(self) -> str:
        return self.name

    def apply(self, r: np.ndarray, ops: Optional[OpCounter] = None) -> np.ndarray:
        f = linear_transform(self.bases_t, r)
        f = f * self.ghat
        z = linear_transform(self.bases, f)
        if ops is not None:
            ops.add(4 * r.size * sum(self.op.shape) + r.size)
        return z


class LowRankPreconditioner(Preconditioner):
    """Rank-``r`` truncation of the spectral pseudoinverse (2D grids only).

    The reciprocal eigenvalue-sum matrix ``Ghat`` is SVD-truncated to
    ``sum_rho sigma_rho a_rho b_rho^T``; each triplet becomes a pair of
    small congruences ``(Vn diag(sigma_rho a_rho) Vn^T,  Vq diag(b_rho) Vq^T)``
    applied left and right of the residual.  At ``r = min(n, q)`` this
    reproduces the pseudoinverse; small ``r`` can go indefinite, which the
    apply reports via :class:`IndefinitePreconditionerWarning`.

    A 3D analogue would need a tensor decomposition in place of the SVD
    and is deliberately not provided.
    """

    name = "lowrank"

    def __init__(self, op, rank: int, source: str = "numeric", tol: float = NULL_MODE_TOL):
        if op.ndim != 2:
            raise ValueError("low-rank preconditioner supports 2D grids only")
        n, q = op.shape
        if not 1 <= rank <= min(n, q):
            raise ValueError(f"rank must be in [1, {min(n, q)}], got {rank}")
        self.op = op
        self.rank = int(rank)
        decomps = op_mod.spectra(op, source)
        vn, vq = decomps[0].vectors, decomps[1].vectors
        ghat = hadamard_pinv(op_mod.spectrum_sums(op, decomps), tol)
        a, sigma, bt = np.linalg.svd(ghat)
        self.left = [vn @ np.diag(sigma[i] * a[:, i]) @ vn.T for i in range(rank)]
        self.right = [vq @ np.diag(bt[i, :]) @ vq.T for i in range(rank)]
        self.init_cost = op.ndim * int(np.prod(op.shape))

    def describe(self) -> str:
        return f"lowrank(r={self.rank})"

    def apply(self, r: np.ndarray, ops: Optional[OpCounter] = None) -> np.ndarray:
        n, q = r.shape
        z = np.zeros_like(r)
        for ml, mr in zip(self.left, self.right):
            z += ml @ r @ mr.T
        if ops is not None:
            ops.add(self.rank * (2 * r.size * (n + q) + r.size))
            ops.add(2 * r.size)  # definiteness check below
        if inner(z, r) <= 0.0:
            warnings.warn(
                f"low-rank preconditioner (r={self.rank}) lost definiteness: "
                "<z, r> <= 0 on this residual",
                IndefinitePreconditionerWarning,
                stacklevel=2,
            )
        return z


def make_preconditioner(op, spec: str) -> Preconditioner:
    """Build a preconditioner from its command-line spelling.

    Grammar: ``none`` | ``pinv`` | ``jacobi:p=3,omega=1.3`` | ``lowrank:r=3``
    (parameters optional for jacobi, required rank for lowrank).
    """
    head, _, tail = spec.strip().partition(":")
    head = head.strip().lower()
    params: dict[str, str] = {}
    if tail:
        for item in tail.split(","):
            key, sep, value = item.partition("=")
            if not sep or not key.strip() or not value.strip():
                raise ValueError(f"malformed preconditioner parameter {item!r} in {spec!r}")
            params[key.strip()] = value.strip()
    try:
        if head in ("none", "identity"):
            if params:
                raise ValueError(f"{head} takes no parameters")
            return IdentityPreconditioner()
        if head == "pinv":
            if params:
                raise ValueError("pinv takes no parameters")
            return PinvPreconditioner(op)
        if head == "jacobi":
            unknown = set(params) - {"p", "omega"}
            if unknown:
                raise ValueError(f"unknown jacobi parameters {sorted(unknown)}")
            return JacobiPreconditioner(
                op, p=int(params.get("p", 1)), omega=float(params.get("omega", 1.0))
            )
        if head == "lowrank":
            if "r" not in params or set(params) - {"r"}:
                raise ValueError("lowrank needs exactly one parameter r, e.g. lowrank:r=3")
            return LowRankPreconditioner(op, rank=int(params["r"]))
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad preconditioner spec {spec!r}: {exc}") from exc
    raise ValueError(f"unknown preconditioner {head!r}")


@dataclass
class StationaryResult:
    """History of a stand-alone stationary run (index 0 = initial state)."""

    x: np.ndarray
    residuals: list[float] = field(default_factory=list)
    ops_cum: list[int] = field(default_factory=list)
    diverged: bool = False

    @property
    def iterations(self) -> int:
        return max(0, len(self.residuals) - 1)


def jacobi_standalone(
    op,
    h: np.ndarray,
    omega: float = 1.0,
    iters: int = 100,
    x0: Optional[np.ndarray] = None,
) -> StationaryResult:
    """Run the damped Jacobi splitting as a fixed-point solver.

    Records the true residual norm after every step.  If the residual
    blows past ``1e12`` times its initial value the run is flagged as
    diverged and stops early; that is a reportable outcome, not an error.
    """
    if iters < 0:
        raise ValueError("iters must be nonnegative")
    sweep = JacobiPreconditioner(op, p=1, omega=omega)
    h = np.asarray(h, dtype=float)
    x = np.zeros(op.shape) if x0 is None else np.array(x0, dtype=float)
    ops = OpCounter()
    ops.add(sweep.init_cost)
    res = StationaryResult(x=x)
    res0 = frobenius_norm(h - op_mod.apply(op, x))
    res.residuals.append(res0)
    res.ops_cum.append(ops.count)
    for _ in range(iters):
        f = h - op_mod.apply(op, x, ops) + sweep.dhat * x
        x = sweep.dhat_inv * f
        ops.add(4 * x.size)
        r = frobenius_norm(h - op_mod.apply(op, x))
        res.residuals.append(r)
        res.ops_cum.append(ops.count)
        if res0 > 0.0 and r > 1e12 * res0:
            res.diverged = True
            break
    res.x = x
    return res
