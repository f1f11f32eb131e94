"""Dense tensor algebra for 2D/3D grid fields.

Grid fields are plain numpy arrays of shape ``(n, q)`` or ``(n, q, t)``.
The linearization convention throughout the package is first-index-fastest:
entry ``(i, j, k)`` sits at flat position ``i + n*j + n*q*k``, which is
numpy's Fortran order.  ``vec`` is therefore a reshape, not a copy, whenever
the array is already F-contiguous, and ``vec(mode_product(M, l, T))`` agrees
with multiplying ``vec(T)`` by the matching Kronecker-factor matrix built by
:func:`kron_assemble`.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

Shape = tuple[int, ...]

__all__ = [
    "Shape",
    "vec",
    "unvec",
    "mode_product",
    "linear_transform",
    "inner",
    "frobenius_norm",
    "hadamard",
    "hadamard_pinv",
    "saxpy",
    "kron_assemble",
]


def _check_ndim(t: np.ndarray) -> np.ndarray:
    if t.ndim not in (2, 3):
        raise ValueError(f"expected a 2D or 3D tensor, got ndim={t.ndim}")
    return t


def vec(t: np.ndarray) -> np.ndarray:
    """Flatten ``t`` to a vector in first-index-fastest order."""
    return np.asarray(t, dtype=float).reshape(-1, order="F")


def unvec(v: np.ndarray, shape: Shape) -> np.ndarray:
    """Inverse of :func:`vec`: reinterpret a flat vector as a tensor."""
    v = np.asarray(v, dtype=float)
    size = int(np.prod(shape))
    if v.ndim != 1 or v.size != size:
        raise ValueError(f"cannot unvec array of size {v.size} into shape {shape}")
    return v.reshape(shape, order="F")


def mode_product(m: np.ndarray, mode: int, t: np.ndarray) -> np.ndarray:
    """Mode product ``m x_mode t`` with a 1-based mode index.

    ``mode=1`` multiplies along the first tensor index (column fibers for a
    matrix), ``mode=2`` along the second, ``mode=3`` along the third.  The
    matrix's column count must match the tensor extent along that mode.
    """
    m = np.asarray(m, dtype=float)
    t = _check_ndim(np.asarray(t, dtype=float))
    if mode < 1 or mode > t.ndim:
        raise ValueError(f"mode {mode} out of range for a {t.ndim}D tensor")
    axis = mode - 1
    if m.ndim != 2 or m.shape[1] != t.shape[axis]:
        raise ValueError(
            f"matrix shape {m.shape} does not act on tensor extent "
            f"{t.shape[axis]} along mode {mode}"
        )
    out = np.tensordot(m, t, axes=(1, axis))
    return np.moveaxis(out, 0, axis)


def linear_transform(mats: Sequence[np.ndarray], t: np.ndarray) -> np.ndarray:
    """Apply one matrix per mode: ``(A, B[, C] | t)``.

    ``mats[l]`` acts along mode ``l+1``; exactly one matrix per tensor
    dimension is required.
    """
    t = _check_ndim(np.asarray(t, dtype=float))
    if len(mats) != t.ndim:
        raise ValueError(f"need {t.ndim} matrices for a {t.ndim}D tensor, got {len(mats)}")
    out = t
    for axis, m in enumerate(mats):
        out = mode_product(m, axis + 1, out)
    return out


def inner(x: np.ndarray, y: np.ndarray) -> float:
    """Frobenius inner product: sum of entrywise products."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch in inner product: {x.shape} vs {y.shape}")
    return float(np.vdot(x, y))


def frobenius_norm(x: np.ndarray) -> float:
    """Frobenius norm (entrywise 2-norm) of a tensor."""
    return float(np.linalg.norm(np.asarray(x, dtype=float)))


def hadamard(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Entrywise product of two same-shape tensors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch in Hadamard product: {x.shape} vs {y.shape}")
    return x * y


def hadamard_pinv(x: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    """Entrywise pseudoinverse: ``1/x`` where ``|x| > tol``, else 0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    mask = np.abs(x) > tol
    out[mask] = 1.0 / x[mask]
    return out


def saxpy(a: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Scaled addition ``y + a*x`` (new array)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch in saxpy: {x.shape} vs {y.shape}")
    return y + a * x


def kron_assemble(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product of a list of matrices, left to right.

    With the first-index-fastest vec convention, ``kron_assemble([B, A])``
    applied to ``vec(U)`` equals ``vec(A @ U @ B.T)``, and
    ``kron_assemble([C, B, A])`` matches the 3D transform ``(A, B, C | U)``.
    """
    if len(factors) == 0:
        raise ValueError("kron_assemble needs at least one factor")
    mats = [np.asarray(f, dtype=float) for f in factors]
    for m in mats:
        if m.ndim != 2:
            raise ValueError("kron_assemble factors must be matrices")
    return reduce(np.kron, mats)
