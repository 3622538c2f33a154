"""The square polynomial system cut out by singular tuples in the affine chart.

Variables are the concatenation ``(x_1, ..., x_k, l_1, ..., l_k)`` where
``x_i`` has length ``n_i`` and ``l_i`` is the i-th singular value, for a
total of ``sum(n_i) + k`` unknowns.  Equations come in k gradient blocks

    contract(U, x, skip=i) - l_i * x_i        (length n_i)

followed by the k chart equations ``x_{i,0} - 1``.  The chart is valid for
generic tensors, whose singular tuples all have a nonzero leading
coordinate in every factor; degenerate inputs surface as path failures in
the tracker, not as silently dropped solutions.

All evaluation kernels are batched: points are rows of a ``(B, N)`` array
and the tensor argument may be shared or per-row.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tensor import CTensor, Format, _rng

__all__ = ["SystemPoint", "SingularSystem", "start_pair"]

_AX = string.ascii_lowercase


@dataclass(frozen=True)
class SystemPoint:
    """A candidate point: k chart vectors plus k singular values."""

    x: tuple[np.ndarray, ...]
    lam: np.ndarray

    def __post_init__(self):
        x = tuple(np.asarray(v, dtype=np.complex128) for v in self.x)
        lam = np.asarray(self.lam, dtype=np.complex128)
        if lam.shape != (len(x),):
            raise ValueError(f"expected {len(x)} singular values, got shape {lam.shape}")
        for v in x:
            v.setflags(write=False)
        lam.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "lam", lam)


class SingularSystem:
    """Evaluation, Jacobian and parameter derivative of the chart system."""

    def __init__(self, fmt: Format):
        self.fmt = fmt
        dims = fmt.dims
        k = fmt.k
        if k + 1 > len(_AX):
            raise ValueError(f"order {k} too large for einsum axis labels")
        self.dims = dims
        self.k = k
        self.x_offsets = np.concatenate([[0], np.cumsum(dims[:-1])])
        self.lam_offset = int(sum(dims))
        self.num_vars = self.lam_offset + k
        self.num_eqs = self.num_vars

        ax = _AX[1:k + 1]  # per-factor axis labels, 'a' is the batch axis
        self._skip_spec = [
            "a" + ax + "," + ",".join("a" + ax[j] for j in range(k) if j != i) + "->a" + ax[i]
            for i in range(k)
        ]
        self._pair_spec = {}
        for i in range(k):
            for j in range(i + 1, k):
                rest = ",".join("a" + ax[m] for m in range(k) if m not in (i, j))
                lhs = "a" + ax + ("," + rest if rest else "")
                self._pair_spec[(i, j)] = lhs + "->a" + ax[i] + ax[j]
        self._tangent_spec = [
            ax + "," + ",".join("a" + ax[j] for j in range(k) if j != i) + "->a" + ax[i]
            for i in range(k)
        ]

    # -- packing -----------------------------------------------------------

    def pack(self, p: SystemPoint) -> np.ndarray:
        """Flatten a point into the (N,) variable vector."""
        for i, v in enumerate(p.x):
            if v.shape != (self.dims[i],):
                raise ValueError(f"factor {i} vector has shape {v.shape}, expected ({self.dims[i]},)")
        return np.concatenate([*p.x, p.lam]).astype(np.complex128)

    def unpack(self, vec: np.ndarray) -> SystemPoint:
        vec = np.asarray(vec, dtype=np.complex128)
        if vec.shape != (self.num_vars,):
            raise ValueError(f"expected a vector of length {self.num_vars}")
        xs = tuple(
            vec[o:o + n].copy() for o, n in zip(self.x_offsets, self.dims)
        )
        return SystemPoint(xs, vec[self.lam_offset:].copy())

    # -- batched kernels ----------------------------------------------------

    def _factors(self, pts: np.ndarray) -> list[np.ndarray]:
        return [pts[:, o:o + n] for o, n in zip(self.x_offsets, self.dims)]

    def _tensor_batch(self, u_flat: np.ndarray, batch: int) -> np.ndarray:
        if u_flat.ndim == 1:
            return np.broadcast_to(u_flat.reshape((1,) + self.dims), (batch,) + self.dims)
        return u_flat.reshape((-1,) + self.dims)

    def residual_batch(self, pts: np.ndarray, u_flat: np.ndarray) -> np.ndarray:
        b = pts.shape[0]
        u = self._tensor_batch(u_flat, b)
        xs = self._factors(pts)
        lam = pts[:, self.lam_offset:]
        res = np.empty((b, self.num_eqs), dtype=np.complex128)
        for i, (o, n) in enumerate(zip(self.x_offsets, self.dims)):
            others = [xs[j] for j in range(self.k) if j != i]
            grad = np.einsum(self._skip_spec[i], u, *others)
            res[:, o:o + n] = grad - lam[:, i:i + 1] * xs[i]
            res[:, self.lam_offset + i] = xs[i][:, 0] - 1.0
        return res

    def jacobian_batch(self, pts: np.ndarray, u_flat: np.ndarray) -> np.ndarray:
        b = pts.shape[0]
        u = self._tensor_batch(u_flat, b)
        xs = self._factors(pts)
        lam = pts[:, self.lam_offset:]
        jac = np.zeros((b, self.num_eqs, self.num_vars), dtype=np.complex128)
        for i in range(self.k):
            oi, ni = self.x_offsets[i], self.dims[i]
            for j in range(i + 1, self.k):
                oj, nj = self.x_offsets[j], self.dims[j]
                others = [xs[m] for m in range(self.k) if m not in (i, j)]
                mixed = np.einsum(self._pair_spec[(i, j)], u, *others)
                jac[:, oi:oi + ni, oj:oj + nj] = mixed
                jac[:, oj:oj + nj, oi:oi + ni] = mixed.transpose(0, 2, 1)
            diag = np.arange(ni)
            jac[:, oi + diag, oi + diag] -= lam[:, i:i + 1]
            jac[:, oi:oi + ni, self.lam_offset + i] = -xs[i]
            jac[:, self.lam_offset + i, oi] = 1.0
        return jac

    def tangent_batch(self, pts: np.ndarray, du_flat: np.ndarray) -> np.ndarray:
        """Derivative of the residual along a fixed tensor direction ``du``."""
        b = pts.shape[0]
        du = np.asarray(du_flat, dtype=np.complex128).reshape(self.dims)
        xs = self._factors(pts)
        out = np.zeros((b, self.num_eqs), dtype=np.complex128)
        for i, (o, n) in enumerate(zip(self.x_offsets, self.dims)):
            others = [xs[j] for j in range(self.k) if j != i]
            out[:, o:o + n] = np.einsum(self._tangent_spec[i], du, *others)
        return out

    # -- single-point wrappers ----------------------------------------------

    def _check_tensor(self, u: CTensor) -> None:
        if u.fmt != self.fmt:
            raise ValueError(f"tensor format {u.fmt} does not match system format {self.fmt}")

    def evaluate(self, p: SystemPoint, u: CTensor) -> np.ndarray:
        """Residual vector of the system at ``p`` for parameter tensor ``u``."""
        self._check_tensor(u)
        return self.residual_batch(self.pack(p)[None, :], u.vectorize())[0]

    def jacobian(self, p: SystemPoint, u: CTensor) -> np.ndarray:
        """Square Jacobian of the residual with respect to the variables."""
        self._check_tensor(u)
        return self.jacobian_batch(self.pack(p)[None, :], u.vectorize())[0]

    def param_tangent(self, p: SystemPoint, du: CTensor) -> np.ndarray:
        """Residual derivative when the parameter tensor moves along ``du``."""
        self._check_tensor(du)
        return self.tangent_batch(self.pack(p)[None, :], du.vectorize())[0]


def start_pair(fmt: Format, seed) -> tuple[CTensor, SystemPoint]:
    """A tensor and an exact solution of its chart system.

    The point has ``x_i = e_1`` and all singular values equal to a seeded
    random complex number ``l``.  The tensor has ``l`` in its leading
    entry, zeros at every entry whose multi-index exceeds 0 in exactly one
    slot, and seeded random complex entries elsewhere; by construction the
    residual at the point is exactly zero.
    """
    rng = _rng(seed)
    lam_star = complex(rng.standard_normal() + 1j * rng.standard_normal())
    arr = rng.standard_normal(fmt.dims) + 1j * rng.standard_normal(fmt.dims)
    above = np.zeros(fmt.dims, dtype=np.int64)
    for axis, n in enumerate(fmt.dims):
        shape = [1] * fmt.k
        shape[axis] = n
        above += (np.arange(n) > 0).astype(np.int64).reshape(shape)
    arr[above == 1] = 0.0
    arr[(0,) * fmt.k] = lam_star
    xs = []
    for n in fmt.dims:
        e1 = np.zeros(n, dtype=np.complex128)
        e1[0] = 1.0
        xs.append(e1)
    point = SystemPoint(tuple(xs), np.full(fmt.k, lam_star, dtype=np.complex128))
    return CTensor(fmt, arr), point
