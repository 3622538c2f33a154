"""Dense complex linear algebra used by the solver and the span analysis.

LU with partial pivoting (solve and determinant) is hand-rolled so the
singularity rule is explicit: a pivot below ``1e-14`` times the row scale
raises :class:`SingularMatrixError`.  SVD and least squares are backed by
LAPACK through numpy; numerical rank adds the two-criterion decision rule
(absolute floor plus gap ratio) on top of the singular values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SingularMatrixError",
    "RankReport",
    "lu_solve",
    "determinant",
    "svd",
    "numerical_rank",
    "least_squares",
]

_PIVOT_RTOL = 1e-14


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when an LU pivot falls below the singularity threshold."""


def _lu_factor(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, int, float]:
    """In-place Doolittle LU with partial pivoting.

    Returns (LU, row permutation, permutation sign, row scale).  A zero or
    tiny pivot is reported through the returned scale; callers decide.
    """
    a = np.array(a, dtype=np.complex128)
    n, m = a.shape
    if n != m:
        raise ValueError(f"expected a square matrix, got {a.shape}")
    scale = float(np.max(np.abs(a), initial=0.0))
    perm = np.arange(n)
    sign = 1
    for j in range(n):
        p = j + int(np.argmax(np.abs(a[j:, j])))
        if p != j:
            a[[j, p]] = a[[p, j]]
            perm[[j, p]] = perm[[p, j]]
            sign = -sign
        piv = a[j, j]
        if piv != 0:
            a[j + 1 :, j] /= piv
            a[j + 1 :, j + 1 :] -= np.outer(a[j + 1 :, j], a[j, j + 1 :])
    return a, perm, sign, scale


def _check_pivots(lu: np.ndarray, scale: float) -> None:
    small = np.abs(np.diag(lu)) < _PIVOT_RTOL * max(scale, 1e-300)
    if small.any():
        raise SingularMatrixError(
            f"singular matrix: pivot below {_PIVOT_RTOL:g} * scale at "
            f"position {int(np.flatnonzero(small)[0])}"
        )


def lu_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``a x = b`` by LU with partial pivoting.

    Raises :class:`SingularMatrixError` when a pivot drops below
    ``1e-14`` times the magnitude of the largest entry of ``a``.
    """
    lu, perm, _, scale = _lu_factor(a)
    _check_pivots(lu, scale)
    b = np.asarray(b, dtype=np.complex128)
    y = b[perm].copy()
    n = lu.shape[0]
    for j in range(n):  # forward substitution, unit lower triangle
        y[j + 1 :] -= lu[j + 1 :, j] * y[j]
    for j in range(n - 1, -1, -1):  # back substitution
        y[j] /= lu[j, j]
        y[:j] -= lu[:j, j] * y[j]
    return y


def determinant(a: np.ndarray) -> complex:
    """Determinant as the signed product of LU pivots (0 is a value)."""
    lu, _, sign, _ = _lu_factor(a)
    return complex(sign * np.prod(np.diag(lu)))


def svd(a: np.ndarray, factors: bool = False):
    """Singular values of ``a``, descending; optionally the thin factors.

    With ``factors=True`` returns ``(u, s, vh)`` with
    ``a = u @ diag(s) @ vh`` up to roundoff.
    """
    a = np.asarray(a, dtype=np.complex128)
    if factors:
        return np.linalg.svd(a, full_matrices=False)
    return np.linalg.svd(a, compute_uv=False)


@dataclass(frozen=True)
class RankReport:
    """Numerical rank decision for a descending singular-value profile.

    ``gap_ratio`` is ``s[rank-1] / s[rank]`` (``inf`` when the cut falls at
    the end of the profile).  ``ambiguous`` flags profiles where no cut
    satisfies the gap criterion; the rank is then the plain absolute-floor
    count.
    """

    singular_values: tuple[float, ...]
    rank: int
    gap_ratio: float
    threshold_used: float
    ambiguous: bool = False


def numerical_rank(values, abs_floor: float | None = None, min_gap: float = 1e6) -> RankReport:
    """Decide the rank of a descending singular-value profile.

    The rank is the largest ``r`` with ``values[r-1] >= abs_floor`` and,
    unless ``r`` equals the profile length, ``values[r-1] / values[r] >=
    min_gap``.  ``abs_floor`` defaults to ``1e-8 * values[0]``.
    """
    vals = tuple(float(v) for v in values)
    if any(v < 0 for v in vals) or any(vals[i] < vals[i + 1] for i in range(len(vals) - 1)):
        raise ValueError("values must be nonnegative and descending")
    if not vals or vals[0] == 0.0:
        return RankReport(vals, 0, math.inf, 0.0 if abs_floor is None else abs_floor)
    floor = 1e-8 * vals[0] if abs_floor is None else float(abs_floor)
    above = sum(v >= floor for v in vals)
    for r in range(len(vals), 0, -1):
        if vals[r - 1] < floor:
            continue
        if r == len(vals):
            return RankReport(vals, r, math.inf, floor)
        gap = vals[r - 1] / vals[r] if vals[r] > 0 else math.inf
        if gap >= min_gap:
            return RankReport(vals, r, gap, floor)
    # No cut shows a clean gap: fall back to the absolute-floor count.
    gap = math.inf
    if 0 < above < len(vals):
        gap = vals[above - 1] / vals[above] if vals[above] > 0 else math.inf
    return RankReport(vals, above, gap, floor, ambiguous=True)


def least_squares(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    """Minimum-norm least squares via the SVD pseudoinverse.

    The pseudoinverse is cut at the :func:`numerical_rank` decision.
    Returns the coefficients and the relative residual
    ``|a x - b| / |b|`` (0 for ``b = 0``).
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros(a.shape[1], dtype=np.complex128), 0.0
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    r = numerical_rank(s).rank
    if r == 0:
        return np.zeros(a.shape[1], dtype=np.complex128), 1.0
    coeff = vh[:r].conj().T @ ((u[:, :r].conj().T @ b) / s[:r])
    residual = float(np.linalg.norm(a @ coeff - b)) / bnorm
    return coeff, residual
