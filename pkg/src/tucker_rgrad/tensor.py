"""Dense tensor primitives.

Tensors are plain ``numpy.ndarray`` objects of dtype float64.  The
linearization convention is column-major: the first index varies fastest,
both for :func:`vec` and for the column ordering of :func:`matricize`.
Under this convention the Kronecker identity

    (X x_1 V1 ... x_d Vd)_(i) = Vi X_(i) (Vd kron ... kron V(i+1) kron V(i-1) kron ... kron V1)^T

holds exactly.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "check_shape",
    "check_rank",
    "vec",
    "unvec",
    "inner",
    "frobenius_norm",
    "matricize",
    "tensorize",
    "mode_multiply",
    "multi_mode_multiply",
    "leading_left_singular_vectors",
]

_MAX_INDEX = np.iinfo(np.intp).max


def check_shape(dims: Iterable[int]) -> tuple[int, ...]:
    """Validate a tensor shape and return it as a tuple of ints."""
    dims = tuple(int(n) for n in dims)
    if len(dims) < 1:
        raise ValueError("shape must have at least one dimension")
    if any(n < 1 for n in dims):
        raise ValueError(f"all dimensions must be positive, got {dims}")
    if math.prod(dims) > _MAX_INDEX:
        raise ValueError(f"shape {dims} exceeds the platform index range")
    return dims


def check_rank(rank: Iterable[int], dims: Sequence[int]) -> tuple[int, ...]:
    """Validate a multilinear rank tuple against a shape."""
    rank = tuple(int(r) for r in rank)
    if len(rank) != len(dims):
        raise ValueError(f"rank {rank} has length {len(rank)}, shape has order {len(dims)}")
    for i, (r, n) in enumerate(zip(rank, dims)):
        if not 1 <= r <= n:
            raise ValueError(f"rank r_{i + 1}={r} must lie in [1, {n}]")
    return rank


def vec(x: np.ndarray) -> np.ndarray:
    """Flatten with the first index varying fastest."""
    return np.reshape(x, -1, order="F")


def unvec(v: np.ndarray, shape: Sequence[int]) -> np.ndarray:
    return np.reshape(v, tuple(shape), order="F")


def _check_mode(mode: int, order: int) -> None:
    if not 0 <= mode < order:
        raise ValueError(f"mode {mode} out of range for an order-{order} tensor")


def inner(x: np.ndarray, z: np.ndarray) -> float:
    if x.shape != z.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {z.shape}")
    return float(np.vdot(x, z))


def frobenius_norm(x: np.ndarray) -> float:
    return float(np.linalg.norm(np.ravel(x)))


def matricize(x: np.ndarray, mode: int) -> np.ndarray:
    """Mode-``mode`` unfolding (modes are 0-based).

    Row ``k`` is the vectorized ``k``-th slice along ``mode``; the remaining
    indices are linearized with the lowest mode varying fastest.
    """
    _check_mode(mode, x.ndim)
    return np.reshape(np.moveaxis(x, mode, 0), (x.shape[mode], -1), order="F")


def tensorize(m: np.ndarray, shape: Sequence[int], mode: int) -> np.ndarray:
    """Inverse of :func:`matricize`."""
    shape = tuple(shape)
    _check_mode(mode, len(shape))
    rest = shape[:mode] + shape[mode + 1:]
    if m.shape != (shape[mode], math.prod(rest)):
        raise ValueError(
            f"matrix of shape {m.shape} does not unfold a tensor of shape {shape} at mode {mode}"
        )
    return np.moveaxis(np.reshape(m, (shape[mode],) + rest, order="F"), 0, mode)


def mode_multiply(x: np.ndarray, mode: int, v: np.ndarray) -> np.ndarray:
    """Compute ``x x_mode v`` for a ``p x n_mode`` matrix ``v``."""
    _check_mode(mode, x.ndim)
    v = np.asarray(v)
    if v.ndim != 2 or v.shape[1] != x.shape[mode]:
        raise ValueError(
            f"matrix of shape {v.shape} cannot act on mode {mode} of size {x.shape[mode]}"
        )
    return np.moveaxis(np.tensordot(v, x, axes=(1, mode)), 0, mode)


def multi_mode_multiply(x: np.ndarray, factors: Iterable[tuple[int, np.ndarray]]) -> np.ndarray:
    """Apply several mode products on distinct modes.

    ``factors`` is an iterable of ``(mode, matrix)`` pairs; the products
    commute, so the order of application does not matter.
    """
    factors = list(factors)
    modes = [mode for mode, _ in factors]
    if len(set(modes)) != len(modes):
        raise ValueError(f"repeated mode in {modes}")
    # Shrinking modes first keeps intermediates small.
    factors.sort(key=lambda mv: np.shape(mv[1])[0] - np.shape(mv[1])[1])
    y = x
    for mode, v in factors:
        y = mode_multiply(y, mode, v)
    return y


def leading_left_singular_vectors(m: np.ndarray, k: int) -> np.ndarray:
    """Orthonormal basis of the dominant ``k``-dimensional left singular subspace.

    ``k`` may exceed the column count (but not the row count); the basis is
    then completed with directions from the left null space.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError("expected a matrix")
    if not 0 <= k <= m.shape[0]:
        raise ValueError(f"k={k} out of range for a matrix with {m.shape[0]} rows")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if k == 0:
        return np.zeros((m.shape[0], 0))
    full = k > min(m.shape)
    u = np.linalg.svd(m, full_matrices=full)[0]
    return u[:, :k]
