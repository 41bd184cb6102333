"""Independent reference implementations used by the tests.

Nothing here calls into the package's tensor kernels except where noted.
"""
import itertools
import math

import numpy as np


def loop_inner(x, z):
    total = 0.0
    for idx in itertools.product(*(range(n) for n in x.shape)):
        total += x[idx] * z[idx]
    return total


def loop_matricize(x, mode):
    """Unfolding by explicit multi-index enumeration (0-based indices).

    Column index = sum_{k != mode} j_k * J_k with J_k = prod_{m < k, m != mode} n_m.
    """
    shape = x.shape
    cols = math.prod(n for k, n in enumerate(shape) if k != mode)
    out = np.zeros((shape[mode], cols))
    for idx in itertools.product(*(range(n) for n in shape)):
        col, stride = 0, 1
        for k, j in enumerate(idx):
            if k == mode:
                continue
            col += j * stride
            stride *= shape[k]
        out[idx[mode], col] = x[idx]
    return out


def kron_others(mats, mode):
    """V(d) kron ... kron V(mode+1) kron V(mode-1) kron ... kron V(1)."""
    out = np.ones((1, 1))
    for k in reversed(range(len(mats))):
        if k != mode:
            out = np.kron(out, mats[k])
    return out


def naive_dft(x):
    """d-dimensional DFT by direct summation over all index pairs."""
    shape = x.shape
    out = np.zeros(shape, dtype=complex)
    idxs = list(itertools.product(*(range(n) for n in shape)))
    for k in idxs:
        acc = 0j
        for j in idxs:
            phase = sum(kk * jj / n for kk, jj, n in zip(k, j, shape))
            acc += x[j] * np.exp(-2j * np.pi * phase)
        out[k] = acc
    return out


def tucker3(core, u1, u2, u3):
    return np.einsum("abc,ia,jb,kc->ijk", core, u1, u2, u3)


def tangent_lstsq_projection(g, core, us):
    """Project ``g`` onto the tangent space by least squares over an explicit
    spanning set: unconstrained (dot-core, dot-U1, dot-U2, dot-U3) parameters.
    Order-3 only.
    """
    columns = []
    rank = core.shape
    for idx in itertools.product(*(range(r) for r in rank)):
        e = np.zeros(rank)
        e[idx] = 1.0
        columns.append(tucker3(e, *us).ravel())
    for i, (u, r) in enumerate(zip(us, rank)):
        for a in range(u.shape[0]):
            for b in range(r):
                du = np.zeros_like(u)
                du[a, b] = 1.0
                mats = list(us)
                mats[i] = du
                columns.append(tucker3(core, *mats).ravel())
    basis = np.array(columns).T
    coef = np.linalg.lstsq(basis, g.ravel(), rcond=None)[0]
    return (basis @ coef).reshape(g.shape)


def unfolding_permutation(shape, mode):
    """Matrix P with vec_F(X_(mode)) = P vec_F(X), built by index enumeration."""
    n_total = math.prod(shape)
    position = np.arange(n_total, dtype=float).reshape(shape, order="F")
    order = loop_matricize(position, mode).ravel(order="F").astype(int)
    p = np.zeros((n_total, n_total))
    p[np.arange(n_total), order] = 1.0
    return p


def tangent_projector_matrix(core, us):
    """Explicit N x N matrix of the tangent projector as a sum of projector products."""
    shape = tuple(u.shape[0] for u in us)
    d = len(us)
    projs = [u @ u.T for u in us]
    first = np.ones((1, 1))
    for k in reversed(range(d)):
        first = np.kron(first, projs[k])
    total = first
    for i in range(d):
        c_i = loop_matricize(core, i)
        k_mat = kron_others(us, i)
        right = k_mat @ np.linalg.pinv(c_i) @ c_i @ k_mat.T
        perp = np.eye(shape[i]) - projs[i]
        p = unfolding_permutation(shape, i)
        total = total + p.T @ np.kron(right.T, perp) @ p
    return total
