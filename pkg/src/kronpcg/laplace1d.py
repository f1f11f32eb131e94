"""One-dimensional finite-difference minus-Laplacians and their spectra.

Every operator here is the ``n x n`` tridiagonal matrix with 2 on the
diagonal and -1 on the off-diagonals, except for the four corner entries,
which encode the boundary treatment:

===================  =====  =====  =====
boundary handling    (1,1)  (n,n)  corner
===================  =====  =====  =====
periodic               2      2     -1
dirichlet              2      2      0
neumann                1      1      0
dirichlet-neumann      2      1      0
neumann-dirichlet      1      2      0
===================  =====  =====  =====

All five are symmetric positive semidefinite with spectrum inside [0, 4];
the periodic and pure-Neumann variants are singular with the constant
vector spanning the null space, the other three are positive definite.

Closed-form eigendecompositions are available for all five variants
(:func:`analytic_spectrum`); the production default elsewhere in the
package is the dense symmetric eigensolver (:func:`numeric_spectrum`),
with the analytic route kept as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "BoundaryCondition",
    "CORNER_TRIPLES",
    "Laplacian1D",
    "build",
    "is_singular_1d",
    "SpectralDecomposition",
    "analytic_spectrum",
    "numeric_spectrum",
]


class BoundaryCondition(Enum):
    """Boundary handling of a 1D factor; values double as CLI spellings."""

    PERIODIC = "periodic"
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    DIRICHLET_NEUMANN = "dirichlet-neumann"
    NEUMANN_DIRICHLET = "neumann-dirichlet"


# (first corner, last corner, antidiagonal corner) per variant.
CORNER_TRIPLES: dict[BoundaryCondition, tuple[float, float, float]] = {
    BoundaryCondition.PERIODIC: (2.0, 2.0, -1.0),
    BoundaryCondition.DIRICHLET: (2.0, 2.0, 0.0),
    BoundaryCondition.NEUMANN: (1.0, 1.0, 0.0),
    BoundaryCondition.DIRICHLET_NEUMANN: (2.0, 1.0, 0.0),
    BoundaryCondition.NEUMANN_DIRICHLET: (1.0, 2.0, 0.0),
}


def is_singular_1d(bc: BoundaryCondition) -> bool:
    """True iff the 1D operator with this boundary handling is singular."""
    return bc in (BoundaryCondition.PERIODIC, BoundaryCondition.NEUMANN)


@dataclass(frozen=True)
class Laplacian1D:
    """A 1D minus-Laplacian: size, boundary kind, and the corner triple."""

    n: int
    bc: BoundaryCondition
    alpha: float
    beta: float
    gamma: float

    def dense(self) -> np.ndarray:
        """Assemble the full ``n x n`` matrix."""
        n = self.n
        m = 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
        m[0, 0] = self.alpha
        m[n - 1, n - 1] = self.beta
        m[0, n - 1] = self.gamma
        m[n - 1, 0] = self.gamma
        return m

    def diagonal(self) -> np.ndarray:
        """Main diagonal as a vector: ``[alpha, 2, ..., 2, beta]``."""
        d = np.full(self.n, 2.0)
        d[0] = self.alpha
        d[-1] = self.beta
        return d

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Matrix-vector product via the 3-nonzeros-per-row stencil."""
        return apply_axis(self, np.asarray(x, dtype=float), axis=0)


def build(n: int, bc: BoundaryCondition) -> Laplacian1D:
    """Construct the 1D operator for a grid direction of ``n >= 3`` points."""
    if n < 3:
        raise ValueError(f"1D operator needs n >= 3, got n={n}")
    bc = BoundaryCondition(bc)
    alpha, beta, gamma = CORNER_TRIPLES[bc]
    return Laplacian1D(n=n, bc=bc, alpha=alpha, beta=beta, gamma=gamma)


def apply_axis(lap: Laplacian1D, x: np.ndarray, axis: int) -> np.ndarray:
    """Apply ``lap`` along one axis of a tensor using only the stencil.

    This is the sparse path: three multiply-adds per output entry, no
    assembled matrix.  Works for vectors (``axis=0``) and for 2D/3D tensors.
    """
    xm = np.moveaxis(np.asarray(x, dtype=float), axis, 0)
    if xm.shape[0] != lap.n:
        raise ValueError(
            f"axis extent {xm.shape[0]} does not match operator size {lap.n}"
        )
    y = np.empty_like(xm)
    y[1:-1] = 2.0 * xm[1:-1]
    y[1:-1] -= xm[:-2]
    y[1:-1] -= xm[2:]
    y[0] = lap.alpha * xm[0] - xm[1]
    y[-1] = lap.beta * xm[-1] - xm[-2]
    if lap.gamma != 0.0:
        y[0] += lap.gamma * xm[-1]
        y[-1] += lap.gamma * xm[0]
    return np.moveaxis(y, 0, axis)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and matching orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray


def numeric_spectrum(lap: Laplacian1D) -> SpectralDecomposition:
    """Dense symmetric eigendecomposition (ascending, orthonormal)."""
    values, vectors = np.linalg.eigh(lap.dense())
    return SpectralDecomposition(values=values, vectors=vectors)


def analytic_spectrum(n: int, bc: BoundaryCondition) -> SpectralDecomposition:
    """Closed-form eigendecomposition of the 1D operator.

    Eigenvalues come out ascending with eigenvector columns permuted
    consistently; the doubled periodic eigenvalues keep their cosine/sine
    vectors, cleaned by one Gram-Schmidt pass per degenerate pair.
    """
    if n < 3:
        raise ValueError(f"1D operator needs n >= 3, got n={n}")
    bc = BoundaryCondition(bc)
    j = np.arange(1, n + 1, dtype=float)

    if bc is BoundaryCondition.DIRICHLET:
        k = np.arange(1, n + 1, dtype=float)
        values = 2.0 - 2.0 * np.cos(k * np.pi / (n + 1))
        vectors = np.sin(np.outer(j, k) * np.pi / (n + 1))
    elif bc is BoundaryCondition.NEUMANN:
        k = np.arange(1, n + 1, dtype=float)
        values = 2.0 - 2.0 * np.cos((k - 1.0) * np.pi / n)
        vectors = np.cos(np.outer(j - 0.5, k - 1.0) * np.pi / n)
    elif bc is BoundaryCondition.DIRICHLET_NEUMANN:
        k = np.arange(1, n + 1, dtype=float)
        theta = (2.0 * k - 1.0) * np.pi / (2 * n + 1)
        values = 2.0 - 2.0 * np.cos(theta)
        vectors = np.sin(np.outer(j, theta) - k * np.pi)
    elif bc is BoundaryCondition.NEUMANN_DIRICHLET:
        k = np.arange(1, n + 1, dtype=float)
        theta = (2.0 * k - 1.0) * np.pi / (2 * n + 1)
        values = 2.0 - 2.0 * np.cos(theta)
        vectors = np.cos(np.outer(j - 0.5, theta))
    elif bc is BoundaryCondition.PERIODIC:
        cols = [np.ones(n)]
        vals = [0.0]
        for k in range(1, (n - 1) // 2 + 1):
            lam = 2.0 - 2.0 * np.cos(2.0 * np.pi * k / n)
            cols.append(np.cos(2.0 * np.pi * k * j / n))
            cols.append(np.sin(2.0 * np.pi * k * j / n))
            vals.extend([lam, lam])
        if n % 2 == 0:
            # The (4, alternating) pair exists only on even grids.
            cols.append((-1.0) ** j)
            vals.append(4.0)
        values = np.array(vals)
        vectors = np.column_stack(cols)
    else:  # pragma: no cover - enum is exhaustive
        raise ValueError(f"unknown boundary condition {bc}")

    vectors = vectors / np.linalg.norm(vectors, axis=0)
    if bc is BoundaryCondition.PERIODIC:
        # One modified Gram-Schmidt step inside each doubled eigenvalue.
        for k in range(1, (n - 1) // 2 + 1):
            c = vectors[:, 2 * k - 1]
            s = vectors[:, 2 * k]
            s = s - np.dot(c, s) * c
            vectors[:, 2 * k] = s / np.linalg.norm(s)

    order = np.argsort(values, kind="stable")
    return SpectralDecomposition(values=values[order], vectors=vectors[:, order])
