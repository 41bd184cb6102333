"""Synthetic recovery experiments: single trials and phase-transition grids."""
from __future__ import annotations

import csv
import hashlib
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Iterator, Optional, Sequence

import numpy as np

from .measurement import make_operator
from .solver import SolverConfig, recover
from .tensor import check_rank, check_shape
from .tucker import TuckerTensor

__all__ = [
    "CSV_HEADER",
    "TrialSpec",
    "TrialResult",
    "PhaseGrid",
    "CellResult",
    "derive_seed",
    "dof",
    "random_low_rank_tensor",
    "add_noise",
    "run_trial",
    "run_phase_grid",
    "phase_boundary",
    "linear_fit",
]

CSV_HEADER = [
    "n", "m", "rank", "operator", "noise", "trials",
    "successes", "success_rate", "mean_rel_error", "mean_iters",
]

SUCCESS_THRESHOLD = 1e-3


def derive_seed(*parts: Any) -> int:
    """Stable 64-bit seed from a tuple of ints/strings (BLAKE2b of their repr)."""
    payload = "|".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def dof(dims: Sequence[int], rank: Sequence[int]) -> int:
    """Dimension of the manifold of tensors with multilinear rank ``rank``."""
    return math.prod(rank) + sum(r * n - r * r for n, r in zip(dims, rank))


def random_low_rank_tensor(dims: Sequence[int], rank: Sequence[int], seed: int) -> TuckerTensor:
    """Gaussian core with orthonormalized Gaussian factors.

    The core is drawn first, then the factors in mode order, all from one
    PCG64 stream.
    """
    dims = check_shape(dims)
    rank = check_rank(rank, dims)
    rng = np.random.Generator(np.random.PCG64(seed))
    core = rng.standard_normal(rank)
    factors = tuple(np.linalg.qr(rng.standard_normal((n, r)))[0] for n, r in zip(dims, rank))
    return TuckerTensor(core, factors)


def add_noise(y: np.ndarray, level: float, seed: int) -> np.ndarray:
    """Add Gaussian noise scaled to exactly ``level * ||y||``.

    Complex measurements get circular complex Gaussian noise.
    """
    if level < 0:
        raise ValueError("noise level must be nonnegative")
    if level == 0:
        return y
    rng = np.random.Generator(np.random.PCG64(seed))
    e = rng.standard_normal(y.shape)
    if np.iscomplexobj(y):
        e = e + 1j * rng.standard_normal(y.shape)
    e *= level * np.linalg.norm(y) / np.linalg.norm(e)
    return y + e


@dataclass(frozen=True)
class TrialSpec:
    dims: tuple[int, ...]
    rank: tuple[int, ...]
    m: int
    operator_kind: str = "gaussian"
    noise_level: float = 0.0
    seed: int = 0
    solver: Optional[SolverConfig] = None
    success_threshold: float = SUCCESS_THRESHOLD

    def __post_init__(self):
        dims = check_shape(self.dims)
        rank = check_rank(self.rank, dims)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "rank", rank)
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.noise_level < 0:
            raise ValueError("noise_level must be nonnegative")
        if self.operator_kind not in ("gaussian", "fourier"):
            raise ValueError(f"unknown operator kind {self.operator_kind!r}")
        if self.solver is None:
            object.__setattr__(self, "solver", SolverConfig(rank=rank))
        elif tuple(self.solver.rank) != rank:
            raise ValueError(f"solver rank {self.solver.rank} differs from trial rank {rank}")

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "TrialSpec":
        d = dict(d)
        solver = d.pop("solver", None)
        if isinstance(solver, dict):
            solver = dict(solver)
            solver.setdefault("rank", d["rank"])
            solver = SolverConfig(**solver)
        return cls(solver=solver, **d)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["dims"], d["rank"] = list(self.dims), list(self.rank)
        d["solver"]["rank"] = list(self.solver.rank)
        return d


@dataclass(frozen=True)
class TrialResult:
    success: bool
    relative_error: float
    iterations: int
    wall_time: float
    converged: bool = False
    stop_reason: str = ""


def run_trial(spec: TrialSpec) -> TrialResult:
    start = time.perf_counter()
    truth = random_low_rank_tensor(spec.dims, spec.rank, derive_seed(spec.seed, "tensor")).full()
    op = make_operator(spec.operator_kind, spec.dims, spec.m, derive_seed(spec.seed, "operator"))
    y = add_noise(op.apply(truth), spec.noise_level, derive_seed(spec.seed, "noise"))
    report = recover(op, y, spec.solver)
    err = float(np.linalg.norm(report.final.full() - truth) / np.linalg.norm(truth))
    return TrialResult(
        success=bool(err <= spec.success_threshold),
        relative_error=err,
        iterations=report.iterations_run,
        wall_time=time.perf_counter() - start,
        converged=report.converged,
        stop_reason=report.stop_reason,
    )


@dataclass(frozen=True)
class PhaseGrid:
    """Cubic ``n x ... x n`` experiments over a grid of sizes and sample counts."""

    n_values: tuple[int, ...]
    m_values: tuple[int, ...]
    rank: tuple[int, ...]
    trials_per_cell: int = 20
    base_seed: int = 0
    operator_kind: str = "gaussian"
    noise_level: float = 0.0
    algorithm: str = "rgrad"
    max_iters: int = 500
    rel_residual_tol: float = 1e-6
    rel_change_tol: float = 1e-12
    success_threshold: float = SUCCESS_THRESHOLD

    def __post_init__(self):
        if not self.n_values or not self.m_values:
            raise ValueError("grid axes must be nonempty")
        if self.trials_per_cell < 1:
            raise ValueError("trials_per_cell must be at least 1")

    def cells(self) -> Iterator[tuple[int, int]]:
        d = len(self.rank)
        for n in self.n_values:
            for m in self.m_values:
                if self.operator_kind == "fourier" and m > n ** d:
                    continue
                yield n, m

    def trial_spec(self, n: int, m: int, k: int) -> TrialSpec:
        cfg = SolverConfig(
            rank=self.rank,
            max_iters=self.max_iters,
            rel_residual_tol=self.rel_residual_tol,
            rel_change_tol=self.rel_change_tol,
            algorithm=self.algorithm,
        )
        return TrialSpec(
            dims=(n,) * len(self.rank),
            rank=self.rank,
            m=m,
            operator_kind=self.operator_kind,
            noise_level=self.noise_level,
            seed=derive_seed(self.base_seed, n, m, k),
            solver=cfg,
            success_threshold=self.success_threshold,
        )


@dataclass(frozen=True)
class CellResult:
    n: int
    m: int
    rank: tuple[int, ...]
    operator: str
    noise: float
    trials: int
    successes: int
    mean_rel_error: float
    mean_iters: float
    results: tuple[TrialResult, ...] = field(default=(), repr=False, compare=False)

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    def csv_row(self) -> list:
        return [
            self.n, self.m, "x".join(map(str, self.rank)), self.operator, self.noise,
            self.trials, self.successes, self.success_rate, self.mean_rel_error, self.mean_iters,
        ]


def _open_csv(path):
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    fh = open(path, "a", newline="")
    writer = csv.writer(fh)
    if new:
        writer.writerow(CSV_HEADER)
        fh.flush()
    return fh, writer


def run_phase_grid(grid: PhaseGrid, out: Optional[str] = None, workers: int = 1) -> list[CellResult]:
    """Run every cell of ``grid``; append one CSV row per finished cell to ``out``.

    Trial ``k`` of cell ``(n, m)`` is seeded with
    ``derive_seed(base_seed, n, m, k)``, so any cell can be rerun alone and
    results do not depend on scheduling.
    """
    fh, writer = _open_csv(out) if out else (None, None)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    cells = []
    try:
        for n, m in grid.cells():
            specs = [grid.trial_spec(n, m, k) for k in range(grid.trials_per_cell)]
            results = tuple(pool.map(run_trial, specs) if pool else map(run_trial, specs))
            cell = CellResult(
                n=n,
                m=m,
                rank=tuple(grid.rank),
                operator=grid.operator_kind,
                noise=grid.noise_level,
                trials=len(results),
                successes=sum(r.success for r in results),
                mean_rel_error=float(np.mean([r.relative_error for r in results])),
                mean_iters=float(np.mean([r.iterations for r in results])),
                results=results,
            )
            cells.append(cell)
            if writer:
                writer.writerow(cell.csv_row())
                fh.flush()
    finally:
        if pool:
            pool.shutdown()
        if fh:
            fh.close()
    return cells


def phase_boundary(cells: Sequence[CellResult], level: float = 0.95) -> dict[int, Optional[int]]:
    """Smallest ``m`` per ``n`` whose success rate reaches ``level``."""
    boundary: dict[int, Optional[int]] = {}
    for cell in cells:
        boundary.setdefault(cell.n, None)
        if cell.success_rate >= level:
            cur = boundary[cell.n]
            boundary[cell.n] = cell.m if cur is None else min(cur, cell.m)
    return boundary


def linear_fit(x: Sequence[float], y: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares line through ``(x, y)``.

    Returns ``(slope, intercept, worst)`` where ``worst`` is the largest
    ``|residual| / fitted value``.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    worst = float(np.max(np.abs(y - fitted) / np.abs(fitted)))
    return float(slope), float(intercept), worst
