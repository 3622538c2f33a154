"""Critical space, span of the singular tuples, and the membership test.

A linear form on tensor space is stored as a coefficient tensor; its value
at ``z`` is the plain bilinear sum of coordinate products.  The critical
space of ``T`` is cut out by one form per factor ``l`` and index pair
``p < q``: the coefficient of ``z[..q..]`` is ``+t[..p..]`` and of
``z[..p..]`` is ``-t[..q..]``, summed over the remaining slots.  The span
of the singular tuples is measured as the numerical rank of the matrix of
vectorized rank-one tensors, and membership of ``T`` in that span as a
least-squares residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .formats import critical_space_dim, expected_span_dim
from .linalg import RankReport, least_squares, numerical_rank, svd
from .solver import SolutionSet
from .tensor import CTensor, frobenius_inner

__all__ = [
    "LinearFormZ",
    "SpanReport",
    "critical_space_equations",
    "forms_matrix",
    "span_matrix",
    "span_dimension",
    "containment_check",
    "membership_residual",
    "critical_space_dim_check",
    "build_span_report",
]


@dataclass(frozen=True)
class LinearFormZ:
    """A linear functional on tensor space with a provenance label."""

    coefficients: CTensor
    label: str

    def __call__(self, z: CTensor) -> complex:
        return frobenius_inner(self.coefficients, z)

    def norm(self) -> float:
        return self.coefficients.norm()


def critical_space_equations(t: CTensor) -> list[LinearFormZ]:
    """The bilinear critical-space forms of ``t``, one per slot and pair.

    There are ``sum(binom(n_i, 2))`` forms; every one of them vanishes at
    ``z = t`` in exact arithmetic.
    """
    forms = []
    for slot, n in enumerate(t.fmt.dims):
        for p in range(n):
            for q in range(p + 1, n):
                coeff = np.zeros(t.fmt.dims, dtype=np.complex128)
                idx_p = (slice(None),) * slot + (p,)
                idx_q = (slice(None),) * slot + (q,)
                coeff[idx_q] = t.array[idx_p]
                coeff[idx_p] = -t.array[idx_q]
                forms.append(LinearFormZ(CTensor(t.fmt, coeff), f"critical[{slot}]({p},{q})"))
    return forms


def forms_matrix(forms: list[LinearFormZ]) -> np.ndarray:
    """Stack form coefficient tensors as rows of a matrix."""
    return np.array([f.coefficients.vectorize() for f in forms])


def span_matrix(sols: SolutionSet) -> np.ndarray:
    """Vectorized rank-one tensors of the tuples as unit-norm columns."""
    if not sols.tuples:
        raise ValueError("solution set is empty")
    cols = np.array([t.rank_one.vectorize() for t in sols.tuples]).T
    return cols / np.linalg.norm(cols, axis=0, keepdims=True)


def span_dimension(sols: SolutionSet, abs_floor: float | None = None,
                   min_gap: float = 1e6) -> tuple[RankReport, int]:
    """Numerical rank of the span matrix and the projective span dimension.

    With an incomplete solution set the measured value is only a lower
    bound; callers should treat it as provisional.
    """
    report = numerical_rank(svd(span_matrix(sols)), abs_floor=abs_floor, min_gap=min_gap)
    return report, report.rank - 1


def containment_check(forms: list[LinearFormZ], sols: SolutionSet,
                      tol: float | None = None) -> float:
    """Largest normalized value of any form at any tuple's rank-one tensor.

    Values are scaled by the form norm and the tensor norm, so a solved set
    contained in the common zero locus gives a residual near roundoff.
    ``tol`` is unused in the computation and accepted for symmetry with
    callers that threshold the result.
    """
    worst = 0.0
    for f in forms:
        fnorm = f.norm()
        for t in sols.tuples:
            value = abs(f(t.rank_one)) / (fnorm * t.rank_one.norm())
            worst = max(worst, value)
    return worst


def membership_residual(t: CTensor, sols: SolutionSet) -> float:
    """Relative least-squares residual of ``t`` against the span matrix."""
    _, residual = least_squares(span_matrix(sols), t.vectorize())
    return residual


def critical_space_dim_check(t: CTensor) -> tuple[int, int, bool]:
    """Measured affine critical-space dimension versus the closed formula."""
    rank = numerical_rank(svd(forms_matrix(critical_space_equations(t)))).rank
    measured = t.fmt.size - rank
    formula = critical_space_dim(t.fmt)
    return measured, formula, measured == formula


@dataclass(frozen=True)
class SpanReport:
    """Span/critical-space summary for one solved tensor."""

    fmt: tuple[int, ...]
    ed: int
    seed: int
    complete: bool
    span_matrix_rank: int
    span_dim_projective: int
    critical_dim_projective: int
    extra_relations: int
    gap_ratio: float
    rank_ambiguous: bool
    membership_residual: float
    expected_span_dim: int | None
    critical_formula_agrees: bool

    def to_json_dict(self) -> dict:
        gap = self.gap_ratio if math.isfinite(self.gap_ratio) else None
        return {
            "format": list(self.fmt),
            "ed": self.ed,
            "seed": self.seed,
            "complete": self.complete,
            "span_matrix_rank": self.span_matrix_rank,
            "span_dim_projective": self.span_dim_projective,
            "critical_dim_projective": self.critical_dim_projective,
            "extra_relations": self.extra_relations,
            "gap_ratio": gap,
            "rank_ambiguous": self.rank_ambiguous,
            "membership_residual": self.membership_residual,
            "expected_span_dim": self.expected_span_dim,
            "critical_formula_agrees": self.critical_formula_agrees,
        }


def build_span_report(t: CTensor, sols: SolutionSet, abs_floor: float | None = None,
                      min_gap: float = 1e6) -> SpanReport:
    """Measure span dimension, critical dimension and membership for ``t``."""
    rank_report, span_proj = span_dimension(sols, abs_floor=abs_floor, min_gap=min_gap)
    measured_aff, _, agrees = critical_space_dim_check(t)
    critical_proj = measured_aff - 1
    return SpanReport(
        fmt=t.fmt.dims,
        ed=sols.ed,
        seed=sols.seed,
        complete=sols.complete,
        span_matrix_rank=rank_report.rank,
        span_dim_projective=span_proj,
        critical_dim_projective=critical_proj,
        extra_relations=critical_proj - span_proj,
        gap_ratio=rank_report.gap_ratio,
        rank_ambiguous=rank_report.ambiguous,
        membership_residual=membership_residual(t, sols),
        expected_span_dim=expected_span_dim(t.fmt),
        critical_formula_agrees=agrees,
    )
