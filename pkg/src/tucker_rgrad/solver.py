"""Riemannian gradient descent and normalized IHT for tensor recovery.

Both iterations minimize ``0.5 * ||A x - y||^2`` over tensors of fixed
multilinear rank.  RGrad projects the ambient gradient onto the tangent
space at the current iterate, takes an exact line-search step and retracts
through the small 2r-core; NIHT takes a full ambient step and truncates
with an ambient HOSVD.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np

from .tangent import SingularCoreError, densify, project_to_tangent, retract, tangent_norm
from .tensor import check_rank, matricize, multi_mode_multiply
from .tucker import TuckerTensor, hosvd_truncate, reconstruct

__all__ = [
    "SolverConfig",
    "SolverReport",
    "initialize",
    "rgrad_step",
    "niht_step",
    "recover",
    "contraction_factor",
    "ric_threshold",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    rank: tuple[int, ...]
    max_iters: int = 1000
    rel_residual_tol: float = 1e-6
    rel_change_tol: float = 1e-12
    algorithm: Literal["rgrad", "niht"] = "rgrad"

    def __post_init__(self):
        object.__setattr__(self, "rank", tuple(int(r) for r in self.rank))
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.rel_residual_tol <= 0 or self.rel_change_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.algorithm not in ("rgrad", "niht"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")


@dataclass
class SolverReport:
    iterations_run: int
    residual_history: list[float]
    step_history: list[float]
    converged: bool
    final: TuckerTensor
    stop_reason: str = "max_iters"
    message: str = ""
    error_history: list[float] = field(default_factory=list)

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1]

    def summary(self) -> dict:
        return {
            "iterations_run": self.iterations_run,
            "converged": self.converged,
            "stop_reason": self.stop_reason,
            "message": self.message,
            "final_residual": self.final_residual,
            "residual_history": self.residual_history,
            "step_history": self.step_history,
        }


def _sqnorm(y: np.ndarray) -> float:
    return float(np.vdot(y, y).real)


def initialize(a, y: np.ndarray, rank: Sequence[int]) -> TuckerTensor:
    """One unit IHT step from zero: truncated HOSVD of ``A^* y``."""
    return hosvd_truncate(a.adjoint(y), rank)


def rgrad_step(
    a, y: np.ndarray, t: TuckerTensor, rank: Sequence[int], residual: Optional[np.ndarray] = None
) -> tuple[TuckerTensor, float]:
    """One RGrad iteration; returns the new iterate and the step size.

    ``residual`` may carry a precomputed ``A t - y``.
    """
    if residual is None:
        residual = a.apply(reconstruct(t)) - y
    g = a.adjoint(residual)
    v = project_to_tangent(g, t)
    num = tangent_norm(v) ** 2
    den = _sqnorm(a.apply(densify(v)))
    if num == 0.0 or den == 0.0:
        return t, 0.0
    alpha = num / den
    return retract(t, alpha, v, rank), alpha


def projection_onto_factors(g: np.ndarray, t: TuckerTensor) -> np.ndarray:
    """``g`` with every mode-i fibre projected onto the span of ``Ui``."""
    return multi_mode_multiply(g, [(i, u @ u.T) for i, u in enumerate(t.factors)])


def niht_step(
    a, y: np.ndarray, t: TuckerTensor, rank: Sequence[int], residual: Optional[np.ndarray] = None
) -> tuple[TuckerTensor, float]:
    """One normalized IHT iteration; returns the new iterate and ``mu``.

    ``residual`` may carry a precomputed ``A t - y``.
    """
    dense = reconstruct(t)
    if residual is None:
        residual = a.apply(dense) - y
    g = a.adjoint(-residual)
    jg = projection_onto_factors(g, t)
    num = float(np.sum(jg ** 2))
    den = _sqnorm(a.apply(jg))
    if num == 0.0 or den == 0.0:
        return t, 0.0
    mu = num / den
    return hosvd_truncate(dense + mu * g, rank), mu


def recover(a, y: np.ndarray, cfg: SolverConfig, reference: Optional[np.ndarray] = None) -> SolverReport:
    """Run the configured iteration from the spectral initialization.

    Stops when the relative residual drops below ``cfg.rel_residual_tol``,
    when the relative change of the iterate drops below
    ``cfg.rel_change_tol``, or after ``cfg.max_iters`` steps.  When
    ``reference`` (the ground truth) is given, relative errors are recorded
    in ``error_history``.
    """
    rank = check_rank(cfg.rank, a.shape)
    step = rgrad_step if cfg.algorithm == "rgrad" else niht_step
    y_norm = math.sqrt(_sqnorm(y))
    ref_norm = None if reference is None else float(np.linalg.norm(reference))

    t = initialize(a, y, rank)
    dense = reconstruct(t)
    residual = a.apply(dense) - y

    def rel(res):
        return math.sqrt(_sqnorm(res)) / y_norm if y_norm > 0 else math.sqrt(_sqnorm(res))

    def err(x):
        return float(np.linalg.norm(x - reference)) / (ref_norm or 1.0)

    report = SolverReport(0, [rel(residual)], [], False, t)
    if reference is not None:
        report.error_history.append(err(dense))
    if report.residual_history[-1] <= cfg.rel_residual_tol:
        report.converged, report.stop_reason = True, "residual"
        return report

    for it in range(1, cfg.max_iters + 1):
        try:
            t_new, alpha = step(a, y, t, rank, residual=residual)
        except SingularCoreError as exc:
            report.stop_reason = "singular_core"
            report.message = f"{exc} (iteration {it}); requested rank may exceed the true rank"
            log.warning(report.message)
            break
        new_dense = reconstruct(t_new)
        residual = a.apply(new_dense) - y
        change = float(np.linalg.norm(new_dense - dense))
        base = float(np.linalg.norm(dense))
        t, dense = t_new, new_dense
        report.iterations_run = it
        report.final = t
        report.step_history.append(alpha)
        report.residual_history.append(rel(residual))
        if reference is not None:
            report.error_history.append(err(dense))
        if report.residual_history[-1] <= cfg.rel_residual_tol:
            report.converged, report.stop_reason = True, "residual"
            break
        if alpha == 0.0:
            report.converged, report.stop_reason = True, "stationary"
            break
        if change <= cfg.rel_change_tol * base:
            report.converged, report.stop_reason = True, "change"
            break
    return report


def _unfolding_singular_values(t: TuckerTensor) -> list[np.ndarray]:
    # Orthonormal factors: unfoldings of T and of its core share singular values.
    return [np.linalg.svd(matricize(t.core, i), compute_uv=False) for i in range(t.order)]


def contraction_factor(t_true: TuckerTensor, delta_2r: float) -> float:
    """Linear convergence rate guaranteed for RGrad under a 2r-RIP constant.

    Evaluates ``2 delta / (1 - delta) * (sqrt(d) + 1) *
    (1 + (2^d - 1) (sqrt(d) + 1) ||T||_F / min_i sigma_{r_i}(T_(i)))``.
    This is a diagnostic; the solver does not use it.
    """
    if not 0 < delta_2r < 1:
        raise ValueError("delta_2r must lie in (0, 1)")
    d = t_true.order
    sigma_min = min(s[r - 1] for s, r in zip(_unfolding_singular_values(t_true), t_true.rank))
    if sigma_min <= 0:
        raise ValueError("tensor has a zero singular value at its nominal rank")
    sd = math.sqrt(d) + 1.0
    ratio = t_true.norm() / sigma_min
    return 2.0 * delta_2r / (1.0 - delta_2r) * sd * (1.0 + (2 ** d - 1) * sd * ratio)


def ric_threshold(t_true: TuckerTensor) -> float:
    """RIP constant below which :func:`contraction_factor` is less than one.

    ``1 / (3 * 2^d * (sqrt(d) + 1)^2 * kappa * sqrt(r))`` with
    ``kappa = min_i sigma_1 / min_i sigma_{r_i}`` and ``r = max_i r_i``.
    """
    d = t_true.order
    svals = _unfolding_singular_values(t_true)
    sigma_min = min(s[r - 1] for s, r in zip(svals, t_true.rank))
    if sigma_min <= 0:
        raise ValueError("tensor has a zero singular value at its nominal rank")
    kappa = min(s[0] for s in svals) / sigma_min
    r = max(t_true.rank)
    return 1.0 / (3 * 2 ** d * (math.sqrt(d) + 1) ** 2 * kappa * math.sqrt(r))
