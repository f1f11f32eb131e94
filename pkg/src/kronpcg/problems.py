"""Benchmark right-hand sides and the experiment runner.

Three families of charge distributions, mirroring the package's
demonstration experiments:

- ``p1``: alternating diagonal stripes of positive and negative charge on
  a fully periodic 2D grid (singular system),
- ``p2``: a single positive band between a grounded edge and an edge with
  a prescribed outward field, periodic across (nonsingular),
- ``p3``: two random-valued stripes, a wide positive one and a narrower
  negative one, on fully periodic 2D/3D grids (singular; seeded RNG).

Every generated H is normalized so its Frobenius norm is the reciprocal
of the cell count; singular-system sides are centered first.  The applied
scale factor is kept on the :class:`ProblemSpec` so the physical system
can be recovered.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .laplace1d import BoundaryCondition
from .operators import (
    BoundaryData,
    FaceValue,
    PoissonOperator,
    apply_bc_updates,
    center,
    poisson_operator,
)
from .precond import make_preconditioner
from .solver import ConvergenceLog, PCGBreakdown, SolverConfig, pcg
from .tensors import frobenius_norm

__all__ = [
    "ProblemSpec",
    "normalize",
    "gen_problem1",
    "gen_problem2",
    "gen_problem3",
    "P3_VARIANTS",
    "run_experiment",
]

P3_VARIANTS: dict[str, tuple[int, ...]] = {
    "2d_512x256": (512, 256),
    "3d_128x64x8": (128, 64, 8),
    "3d_128x64x64": (128, 64, 64),
    "3d_512x256x8": (512, 256, 8),
}


@dataclass(frozen=True)
class ProblemSpec:
    """What was generated: grid, boundary handling, parameters, scaling."""

    name: str
    shape: tuple[int, ...]
    bcs: tuple[BoundaryCondition, ...]
    seed: Optional[int] = None
    params: dict = field(default_factory=dict)
    scale: float = 1.0
    boundary: Optional[BoundaryData] = None

    def operator(self) -> PoissonOperator:
        return poisson_operator(self.shape, self.bcs)


def normalize(h: np.ndarray) -> np.ndarray:
    """Rescale so the Frobenius norm equals ``1 / (number of cells)``."""
    h = np.asarray(h, dtype=float)
    norm = frobenius_norm(h)
    if norm == 0.0:
        raise ValueError("cannot normalize an all-zero right-hand side")
    return h * (1.0 / (h.size * norm))


def _normalized(h: np.ndarray) -> tuple[np.ndarray, float]:
    norm = frobenius_norm(h)
    if norm == 0.0:
        raise ValueError("cannot normalize an all-zero right-hand side")
    scale = 1.0 / (h.size * norm)
    return h * scale, scale


def gen_problem1(
    n: int, q: int, period: int = 12
) -> tuple[ProblemSpec, np.ndarray]:
    """Alternating diagonal charge stripes on a fully periodic 2D grid.

    Unit positive charge where ``(i + 2j) % period == 0``, unit negative
    where the same expression hits ``period/2``; the result is centered
    and normalized.  ``period`` must be even and at least 2.  The default
    of 12 deliberately does not divide the benchmark grid extents: the
    stripe seams at the periodic wrap spread the charge across the whole
    frequency range, which is what makes the problem a meaningful
    conjugate-gradient stress test (a wrap-aligned period excites only a
    few well-conditioned modes and converges in a handful of steps).
    """
    if n < 3 or q < 3:
        raise ValueError("grid needs n, q >= 3")
    if period < 2 or period % 2 != 0:
        raise ValueError(f"period must be even and >= 2, got {period}")
    phase = np.add.outer(np.arange(n), 2 * np.arange(q)) % period
    h = np.where(phase == 0, 1.0, 0.0) + np.where(phase == period // 2, -1.0, 0.0)
    h, scale = _normalized(center(h))
    spec = ProblemSpec(
        name="p1",
        shape=(n, q),
        bcs=(BoundaryCondition.PERIODIC, BoundaryCondition.PERIODIC),
        params={"period": period},
        scale=scale,
    )
    return spec, h


def gen_problem2(
    n: int = 40, q: int = 120, band_width: int = 5
) -> tuple[ProblemSpec, np.ndarray]:
    """A positive charge band between a grounded and a field-driven edge.

    The first grid direction runs from a zero-potential edge to an edge
    with prescribed outward field -1/2; the second direction is periodic.
    A band of unit charge sits a third of the way in.  Boundary updates
    are folded into H before normalization, so the stored side solves
    directly; dividing by ``spec.scale`` recovers the physical system in
    which the potential really drops at rate 1/2 off the far edge.
    """
    if n < 3 or q < 3:
        raise ValueError("grid needs n, q >= 3")
    if not 1 <= band_width <= n:
        raise ValueError(f"band width must be in [1, {n}], got {band_width}")
    bcs = (BoundaryCondition.DIRICHLET_NEUMANN, BoundaryCondition.PERIODIC)
    boundary = BoundaryData(
        (
            (FaceValue("potential", 0.0), FaceValue("field", -0.5)),
            (None, None),
        )
    )
    h = np.zeros((n, q))
    start = max(0, n // 3 - band_width // 2)
    h[start : start + band_width, :] = 1.0
    h = apply_bc_updates(h, bcs, boundary)
    h, scale = _normalized(h)
    spec = ProblemSpec(
        name="p2",
        shape=(n, q),
        bcs=bcs,
        params={"band_width": band_width, "band_start": start},
        scale=scale,
        boundary=boundary,
    )
    return spec, h


def gen_problem3(
    variant: str, seed: int = 0
) -> tuple[ProblemSpec, np.ndarray]:
    """Two random charge stripes on a fully periodic grid, seed-reproducible.

    A wide stripe of uniform(0, 1) charge and a narrower stripe of
    uniform(-1, 0) charge span the full extent of every direction but the
    first; the negative stripe is rescaled so the total charge sums to
    zero, then the side is centered and normalized.
    """
    if variant not in P3_VARIANTS:
        raise ValueError(
            f"unknown variant {variant!r}; choose one of {sorted(P3_VARIANTS)}"
        )
    dims = P3_VARIANTS[variant]
    rng = np.random.default_rng(seed)
    n = dims[0]
    wide = max(2, -(-n // 8))  # ceil(n/8)
    narrow = max(1, -(-n // 16))
    pos_start, neg_start = n // 8, (5 * n) // 8
    h = np.zeros(dims)
    h[pos_start : pos_start + wide] = rng.uniform(0.0, 1.0, size=(wide, *dims[1:]))
    neg = rng.uniform(-1.0, 0.0, size=(narrow, *dims[1:]))
    pos_sum = float(h.sum())
    neg_sum = float(neg.sum())
    h[neg_start : neg_start + narrow] = neg * (pos_sum / -neg_sum)
    h, scale = _normalized(center(h))
    spec = ProblemSpec(
        name=f"p3_{variant}",
        shape=dims,
        bcs=tuple(BoundaryCondition.PERIODIC for _ in dims),
        seed=seed,
        params={
            "variant": variant,
            "pos_stripe": [pos_start, wide],
            "neg_stripe": [neg_start, narrow],
        },
        scale=scale,
    )
    return spec, h


def run_experiment(
    spec: ProblemSpec,
    h: np.ndarray,
    precond_specs: Sequence[str],
    config: Optional[SolverConfig] = None,
    strict: bool = True,
) -> list[ConvergenceLog]:
    """Solve one problem under several preconditioners, collecting logs.

    ``precond_specs`` uses the command-line grammar (``none``, ``pinv``,
    ``jacobi:p=3,omega=1.3``, ``lowrank:r=3``).  With ``strict=False`` a
    breakdown does not abort the sweep; the partial log (which already
    carries the breakdown warning) is kept in its place.
    """
    op = spec.operator()
    cfg = config if config is not None else SolverConfig(max_iter=10)
    logs: list[ConvergenceLog] = []
    for pspec in precond_specs:
        precond = make_preconditioner(op, pspec)
        try:
            _, log = pcg(op, h, precond, config=cfg)
        except PCGBreakdown as exc:
            if strict:
                raise
            log = exc.log
        log.meta.update(
            {
                "problem": spec.name,
                "shape": list(spec.shape),
                "bcs": [bc.value for bc in spec.bcs],
                "preconditioner": precond.describe(),
                "precond_spec": pspec,
                "seed": spec.seed,
            }
        )
        logs.append(log)
    return logs
