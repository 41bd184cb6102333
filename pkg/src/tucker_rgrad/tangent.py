"""Tangent space of the fixed multilinear-rank manifold at a Tucker point.

A tangent vector at ``T = C x_1 U1 ... x_d Ud`` is stored in factored form
``(D, W1, ..., Wd)`` with ``Wi^T Ui = 0`` and represents

    D x_{all} U + sum_i C x_{j != i} Uj x_i Wi.

The d+1 summands are mutually orthogonal.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tensor import matricize, multi_mode_multiply
from .tucker import TuckerTensor, hosvd_truncate, reconstruct

__all__ = [
    "SingularCoreError",
    "TangentVector",
    "project_to_tangent",
    "densify",
    "tangent_norm",
    "retract",
    "unfolding_pinv",
    "ambient_retract",
    "component_tensors",
]

PINV_RTOL = 1e-12


class SingularCoreError(ValueError):
    """The anchor core has a rank-deficient unfolding."""

    def __init__(self, mode: int, message: str | None = None):
        self.mode = mode
        super().__init__(message or f"core unfolding at mode {mode} is rank deficient")


@dataclass(frozen=True)
class TangentVector:
    anchor: TuckerTensor
    d_core: np.ndarray
    w_factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "w_factors", tuple(np.asarray(w, dtype=float) for w in self.w_factors))
        if self.d_core.shape != self.anchor.rank:
            raise ValueError(f"d_core shape {self.d_core.shape} != anchor rank {self.anchor.rank}")
        for i, (w, u) in enumerate(zip(self.w_factors, self.anchor.factors)):
            if w.shape != u.shape:
                raise ValueError(f"w_factors[{i}] has shape {w.shape}, expected {u.shape}")

    @classmethod
    def zero(cls, anchor: TuckerTensor) -> "TangentVector":
        return cls(anchor, np.zeros(anchor.rank), tuple(np.zeros_like(u) for u in anchor.factors))

    def gauge_defect(self) -> float:
        """Largest ``||Wi^T Ui||`` over modes; zero for a valid tangent vector."""
        return max(
            (np.linalg.norm(w.T @ u) for w, u in zip(self.w_factors, self.anchor.factors)),
            default=0.0,
        )


def unfolding_pinv(core: np.ndarray, mode: int) -> np.ndarray:
    """Pseudo-inverse of the mode-``mode`` unfolding of a core tensor.

    Raises :class:`SingularCoreError` if the unfolding does not have full
    row rank (singular values below ``PINV_RTOL`` relative to the largest).
    """
    c = matricize(core, mode)
    u, s, vt = np.linalg.svd(c, full_matrices=False)
    if s.size < c.shape[0] or s[0] == 0 or s[-1] <= PINV_RTOL * s[0]:
        raise SingularCoreError(mode)
    return (vt.T / s) @ u.T


def project_to_tangent(g: np.ndarray, anchor: TuckerTensor) -> TangentVector:
    """Orthogonal projection of an ambient tensor onto the tangent space."""
    g = np.asarray(g, dtype=float)
    if g.shape != anchor.shape:
        raise ValueError(f"tensor shape {g.shape} != anchor shape {anchor.shape}")
    us = anchor.factors
    d = anchor.order
    d_core = multi_mode_multiply(g, [(j, us[j].T) for j in range(d)])
    ws = []
    for i in range(d):
        z = multi_mode_multiply(g, [(j, us[j].T) for j in range(d) if j != i])
        z_i = matricize(z, i)
        z_i = z_i - us[i] @ (us[i].T @ z_i)
        ws.append(z_i @ unfolding_pinv(anchor.core, i))
    return TangentVector(anchor, d_core, tuple(ws))


def densify(v: TangentVector) -> np.ndarray:
    return sum(component_tensors(v))


def tangent_norm(v: TangentVector) -> float:
    total = float(np.sum(v.d_core ** 2))
    for i, w in enumerate(v.w_factors):
        total += float(np.sum((w @ matricize(v.anchor.core, i)) ** 2))
    return float(np.sqrt(total))


def _block_core(core: np.ndarray, d_core: np.ndarray, alpha: float) -> np.ndarray:
    # Leading block C - alpha*D; the block offset by r_i along mode i is -alpha*C.
    rank = core.shape
    block = np.zeros(tuple(2 * r for r in rank))
    block[tuple(slice(0, r) for r in rank)] = core - alpha * d_core
    for i, r in enumerate(rank):
        idx = tuple(slice(r, 2 * r) if j == i else slice(0, rj) for j, rj in enumerate(rank))
        block[idx] = -alpha * core
    return block


def retract(
    anchor: TuckerTensor, alpha: float, v: TangentVector, rank: Sequence[int]
) -> TuckerTensor:
    """Truncated HOSVD of ``anchor - alpha * v`` without ambient tensors.

    Works on the 2r-sized block core after orthogonalizing ``[Ui Wi]``.
    """
    if v.anchor is not anchor and not _same_point(v.anchor, anchor):
        raise ValueError("tangent vector is anchored at a different point")
    if not np.isfinite(alpha):
        raise ValueError("step size must be finite")
    block = _block_core(anchor.core, v.d_core, alpha)
    qs = []
    for i, (u, w) in enumerate(zip(anchor.factors, v.w_factors)):
        q, r = np.linalg.qr(np.hstack([u, w]))
        qs.append(q)
        block = multi_mode_multiply(block, [(i, r)])
    small = hosvd_truncate(block, rank)
    factors = tuple(q @ ut for q, ut in zip(qs, small.factors))
    return TuckerTensor(small.core, factors)


def _same_point(a: TuckerTensor, b: TuckerTensor) -> bool:
    return (
        a.core.shape == b.core.shape
        and np.array_equal(a.core, b.core)
        and all(np.array_equal(x, y) for x, y in zip(a.factors, b.factors))
    )


def ambient_retract(
    anchor: TuckerTensor, alpha: float, v: TangentVector, rank: Sequence[int]
) -> TuckerTensor:
    """Reference retraction that forms the ambient tensor explicitly."""
    return hosvd_truncate(reconstruct(anchor) - alpha * densify(v), rank)


def component_tensors(v: TangentVector) -> list[np.ndarray]:
    """The d+1 mutually orthogonal summands of ``densify(v)``."""
    anchor = v.anchor
    us = anchor.factors
    d = anchor.order
    parts = [multi_mode_multiply(v.d_core, enumerate(us))]
    for i in range(d):
        mats = [(j, us[j]) for j in range(d) if j != i] + [(i, v.w_factors[i])]
        parts.append(multi_mode_multiply(anchor.core, mats))
    return parts
