"""Linear measurement operators and their adjoints.

Two random ensembles are provided:

* :class:`GaussianOperator` stores an explicit ``m x N`` matrix with i.i.d.
  ``N(0, 1/m)`` entries.  Row ``k`` is the vectorized measurement tensor
  ``A_k`` (first index fastest), so ``y_k = <A_k, x>``.
* :class:`FourierOperator` computes ``(1/sqrt(m)) R_Omega F_d D x``: a
  Rademacher sign flip, the unnormalized d-dimensional DFT and restriction
  to ``m`` distinct frequencies.  Its measurements are complex; the adjoint
  is taken with respect to the real pairing ``Re <u, v>`` on ``C^m`` and
  returns a real tensor.

Random draws use ``numpy.random.Generator(PCG64(seed))``.  The Gaussian
operator draws its matrix in one call of shape ``(m, N)`` (row-major).  The
Fourier operator draws ``N`` signs first (in vectorized order), then
``Omega`` as ``m`` linear indices without replacement.
"""
from __future__ import annotations

import math
from typing import Any, Sequence

import numpy as np

from .tensor import check_shape, unvec, vec

__all__ = [
    "MatrixOperator",
    "GaussianOperator",
    "FourierOperator",
    "gaussian_new",
    "fourier_new",
    "apply",
    "adjoint_apply",
    "measurement_inner",
    "operator_from_dict",
    "make_operator",
]


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


class MatrixOperator:
    """Real operator given by an explicit matrix acting on ``vec(x)``."""

    kind = "matrix"

    def __init__(self, shape: Sequence[int], matrix: np.ndarray):
        self.shape = check_shape(shape)
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[1] != math.prod(self.shape) or matrix.shape[0] < 1:
            raise ValueError(f"matrix of shape {matrix.shape} does not act on tensors of shape {self.shape}")
        self.matrix = matrix
        self.matrix.setflags(write=False)

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        _check_input(self, x)
        return self.matrix @ vec(x)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        y = _check_measurements(self, y)
        return unvec(self.matrix.T @ y, self.shape)

    def measurement_tensor(self, k: int) -> np.ndarray:
        return unvec(self.matrix[k], self.shape)


class GaussianOperator(MatrixOperator):
    kind = "gaussian"

    def __init__(self, shape: Sequence[int], m: int, seed: int):
        shape = check_shape(shape)
        if m < 1:
            raise ValueError("measurement count m must be at least 1")
        self.seed = int(seed)
        matrix = _rng(self.seed).standard_normal((int(m), math.prod(shape))) / math.sqrt(m)
        super().__init__(shape, matrix)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "dims": list(self.shape), "m": self.m, "seed": self.seed}


class FourierOperator:
    kind = "fourier"

    def __init__(self, shape: Sequence[int], m: int, seed: int):
        self.shape = check_shape(shape)
        n_total = math.prod(self.shape)
        if not 1 <= m <= n_total:
            raise ValueError(f"measurement count m={m} must lie in [1, {n_total}]")
        self.seed = int(seed)
        rng = _rng(self.seed)
        signs = 2.0 * rng.integers(0, 2, size=n_total) - 1.0
        self.signs = unvec(signs, self.shape)
        self.linear_samples = rng.choice(n_total, size=int(m), replace=False)
        self.sample_set = np.column_stack(np.unravel_index(self.linear_samples, self.shape, order="F"))
        self.signs.setflags(write=False)
        self.linear_samples.setflags(write=False)
        self._scale = 1.0 / math.sqrt(m)

    @property
    def m(self) -> int:
        return self.linear_samples.size

    def apply(self, x: np.ndarray) -> np.ndarray:
        _check_input(self, x)
        spectrum = np.fft.fftn(self.signs * x)
        return self._scale * vec(spectrum)[self.linear_samples]

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        y = _check_measurements(self, y)
        full = np.zeros(math.prod(self.shape), dtype=complex)
        full[self.linear_samples] = y
        # F^H z = N * ifftn(z)
        back = np.fft.ifftn(unvec(full, self.shape)) * (full.size * self._scale)
        return self.signs * back.real

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "dims": list(self.shape), "m": self.m, "seed": self.seed}


def _check_input(op, x: np.ndarray) -> None:
    if np.shape(x) != op.shape:
        raise ValueError(f"tensor shape {np.shape(x)} != operator shape {op.shape}")


def _check_measurements(op, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y)
    if y.shape != (op.m,):
        raise ValueError(f"expected {op.m} measurements, got array of shape {y.shape}")
    if op.kind != "fourier" and np.iscomplexobj(y):
        raise ValueError("complex measurements given to a real operator")
    return y


def gaussian_new(shape: Sequence[int], m: int, seed: int) -> GaussianOperator:
    return GaussianOperator(shape, m, seed)


def fourier_new(shape: Sequence[int], m: int, seed: int) -> FourierOperator:
    return FourierOperator(shape, m, seed)


def apply(op, x: np.ndarray) -> np.ndarray:
    return op.apply(x)


def adjoint_apply(op, y: np.ndarray) -> np.ndarray:
    return op.adjoint(y)


def measurement_inner(u: np.ndarray, v: np.ndarray) -> float:
    """Real inner product on measurement space, ``Re sum(conj(u) * v)``."""
    return float(np.real(np.vdot(u, v)))


def operator_from_dict(desc: dict[str, Any]):
    """Rebuild an operator from its ``{kind, dims, m, seed}`` descriptor."""
    kinds = {"gaussian": GaussianOperator, "fourier": FourierOperator}
    try:
        cls = kinds[desc["kind"]]
    except KeyError:
        raise ValueError(f"unknown operator kind {desc.get('kind')!r}") from None
    return cls(desc["dims"], int(desc["m"]), int(desc["seed"]))


def make_operator(kind: str, shape: Sequence[int], m: int, seed: int):
    return operator_from_dict({"kind": kind, "dims": shape, "m": m, "seed": seed})
