"""Singular vector tuples of complex tensors and the span of their rank-one tensors.

The pipeline: :func:`ed_degree` counts the singular tuples of a generic
tensor of a format, :func:`solve_singular_tuples` collects them by
parameter homotopy and monodromy, and the span/relations modules measure
the linear span of the resulting rank-one tensors, its relation to the
critical space, and the membership of the tensor in that span.
"""

from .formats import (
    FormatClass,
    classify,
    critical_space_dim,
    ed_degree,
    expected_span_dim,
    membership_is_guaranteed,
)
from .linalg import RankReport, SingularMatrixError, least_squares, numerical_rank
from .relations import (
    IndexSetChoice,
    build_relation,
    enumerate_and_filter,
    extra_relation_rank,
    laplace_identity_check,
    verify_T_satisfies,
)
from .solver import (
    SingularTuple,
    SolutionSet,
    SolveError,
    check_specialization,
    solve_singular_tuples,
)
from .span import (
    LinearFormZ,
    SpanReport,
    build_span_report,
    containment_check,
    critical_space_dim_check,
    critical_space_equations,
    membership_residual,
    span_dimension,
    span_matrix,
)
from .system import SingularSystem, SystemPoint, start_pair
from .tensor import (
    CTensor,
    Format,
    contract,
    frobenius_inner,
    load_tensor,
    multilinear_value,
    pad_last_factor,
    random_tensor,
    rank_one,
    save_tensor,
    slice_fiber,
)
from .tracking import TrackResult, TrackStatus, TrackerConfig, newton_refine, track

__version__ = "0.1.0"

__all__ = [
    "CTensor",
    "Format",
    "FormatClass",
    "IndexSetChoice",
    "LinearFormZ",
    "RankReport",
    "SingularMatrixError",
    "SingularSystem",
    "SingularTuple",
    "SolutionSet",
    "SolveError",
    "SpanReport",
    "SystemPoint",
    "TrackResult",
    "TrackStatus",
    "TrackerConfig",
    "build_relation",
    "build_span_report",
    "check_specialization",
    "classify",
    "containment_check",
    "contract",
    "critical_space_dim",
    "critical_space_dim_check",
    "critical_space_equations",
    "ed_degree",
    "enumerate_and_filter",
    "expected_span_dim",
    "extra_relation_rank",
    "frobenius_inner",
    "laplace_identity_check",
    "least_squares",
    "load_tensor",
    "membership_is_guaranteed",
    "membership_residual",
    "multilinear_value",
    "newton_refine",
    "numerical_rank",
    "pad_last_factor",
    "random_tensor",
    "rank_one",
    "save_tensor",
    "slice_fiber",
    "solve_singular_tuples",
    "span_dimension",
    "span_matrix",
    "start_pair",
    "track",
    "verify_T_satisfies",
]
