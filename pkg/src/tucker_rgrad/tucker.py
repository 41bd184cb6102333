"""Tucker-format tensors and truncated HOSVD."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tensor import (
    check_rank,
    leading_left_singular_vectors,
    matricize,
    multi_mode_multiply,
)

__all__ = [
    "TuckerTensor",
    "reconstruct",
    "hosvd_truncate",
    "sequential_hosvd_truncate",
    "multilinear_rank",
]

ORTHONORMALITY_TOL = 1e-10


@dataclass(frozen=True)
class TuckerTensor:
    """A tensor ``core x_1 U1 ... x_d Ud`` with orthonormal factors ``Ui``."""

    core: np.ndarray
    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        factors = tuple(np.asarray(u, dtype=float) for u in self.factors)
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "core", np.asarray(self.core, dtype=float))
        if self.core.ndim != len(factors):
            raise ValueError(
                f"core has order {self.core.ndim} but {len(factors)} factors were given"
            )
        for i, u in enumerate(factors):
            if u.ndim != 2 or u.shape[1] != self.core.shape[i]:
                raise ValueError(
                    f"factor {i} has shape {u.shape}, expected (n, {self.core.shape[i]})"
                )

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(u.shape[0] for u in self.factors)

    @property
    def rank(self) -> tuple[int, ...]:
        return self.core.shape

    @property
    def order(self) -> int:
        return len(self.factors)

    def full(self) -> np.ndarray:
        return reconstruct(self)

    def orthonormality_defect(self) -> float:
        """Largest ``||Ui^T Ui - I||_2`` over all factors."""
        return max(
            (np.linalg.norm(u.T @ u - np.eye(u.shape[1]), 2) for u in self.factors),
            default=0.0,
        )

    def norm(self) -> float:
        # Orthonormal factors preserve the Frobenius norm.
        return float(np.linalg.norm(self.core))


def reconstruct(t: TuckerTensor) -> np.ndarray:
    return multi_mode_multiply(t.core, enumerate(t.factors))


def _truncate(y: np.ndarray, rank: Sequence[int], sequential: bool) -> TuckerTensor:
    rank = check_rank(rank, y.shape)
    factors = []
    work = y
    for i, r in enumerate(rank):
        source = work if sequential else y
        u = leading_left_singular_vectors(matricize(source, i), r)
        factors.append(u)
        if sequential:
            work = multi_mode_multiply(work, [(i, u.T)])
    if sequential:
        core = work
    else:
        core = multi_mode_multiply(y, [(i, u.T) for i, u in enumerate(factors)])
    return TuckerTensor(core, tuple(factors))


def hosvd_truncate(y: np.ndarray, rank: Sequence[int]) -> TuckerTensor:
    """Truncated higher-order SVD of ``y`` at multilinear rank ``rank``.

    Each factor holds the dominant left singular vectors of the
    corresponding unfolding of ``y``; the core is ``y`` contracted with all
    transposed factors.  The squared truncation error is bounded by the sum,
    over modes, of the discarded squared singular values of each unfolding.
    """
    return _truncate(np.asarray(y, dtype=float), rank, sequential=False)


def sequential_hosvd_truncate(y: np.ndarray, rank: Sequence[int]) -> TuckerTensor:
    """Successive truncated HOSVD.

    Factor ``i`` is computed from ``y`` already contracted with the factors
    of modes ``0..i-1``, which makes later SVDs cheaper.
    """
    return _truncate(np.asarray(y, dtype=float), rank, sequential=True)


def multilinear_rank(y: np.ndarray, tol: float = 1e-10) -> tuple[int, ...]:
    """Numerical multilinear rank.

    ``r_i`` counts the singular values of the mode-``i`` unfolding that
    exceed ``tol`` times the largest one.  The zero tensor has rank
    ``(0, ..., 0)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    y = np.asarray(y, dtype=float)
    ranks = []
    for i in range(y.ndim):
        s = np.linalg.svd(matricize(y, i), compute_uv=False)
        if s.size == 0 or s[0] == 0:
            ranks.append(0)
        else:
            ranks.append(int(np.count_nonzero(s > tol * s[0])))
    return tuple(ranks)
