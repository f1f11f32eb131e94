"""Elementary-operation accounting.

Costs are hardware-independent tallies of scalar multiplies and adds, each
counting 1.  The rules, applied uniformly by every counted routine:

- stencil (sparse) factor apply: 6 per entry per direction
  (3 multiplies + 3 adds; 12nq in 2D, 18nqt in 3D),
- inner product: 2 per entry,
- scaled addition (saxpy): 2 per entry,
- Hadamard product or entrywise scaling: 1 per entry,
- mean-centering: 3 per entry,
- full mode product along an axis of extent m: 2m per entry.

Diagnostics (true-residual recomputation, error indicators, null-norm
bookkeeping) are free; an explicitly requested stopping-tolerance check is
counted.  Under these rules the closed-form budgets below are exact, so
instrumented counters reproduce them identity-for-identity.
"""

from __future__ import annotations

from math import prod

from .tensors import Shape

__all__ = ["OpCounter", "cost_model"]


class OpCounter:
    """Mutable tally of elementary operations."""

    __slots__ = ("count",)

    def __init__(self) -> None:
        self.count = 0

    def add(self, n: int) -> None:
        self.count += int(n)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"OpCounter(count={self.count})"


def cost_model(shape: Shape, phase: str, variant: str = "sparse") -> int:
    """Closed-form operation budgets for the conjugate-gradient pieces.

    ``phase`` selects what is being costed:

    - ``"init"``: everything before the loop (one operator apply, one
      subtraction, one inner product),
    - ``"iter"``: one loop pass (one apply, two inner products, three
      scaled additions),
    - ``"pinv_apply"``: one application of the spectral pseudoinverse
      preconditioner (two full multi-mode transforms plus a Hadamard),
    - ``"center"``: one mean-centering pass.

    ``variant`` chooses stencil (``"sparse"``) or assembled-matrix
    (``"full"``) costs for the operator apply inside init/iter; it is
    ignored by the other phases.
    """
    if len(shape) not in (2, 3):
        raise ValueError(f"shape must be 2D or 3D, got {shape}")
    if variant not in ("sparse", "full"):
        raise ValueError(f"variant must be 'sparse' or 'full', got {variant!r}")
    size = prod(shape)
    extent_sum = sum(shape)
    ndim = len(shape)

    if phase == "init":
        if variant == "full":
            return 2 * size * (extent_sum + 2)
        return 6 * size * ndim + 4 * size
    if phase == "iter":
        if variant == "full":
            return 2 * size * (extent_sum + 5)
        return 6 * size * ndim + 10 * size
    if phase == "pinv_apply":
        return 4 * size * extent_sum + size
    if phase == "center":
        return 3 * size
    raise ValueError(f"unknown phase {phase!r}")
