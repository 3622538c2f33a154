"""Determinantal linear relations among singular tuples.

For a tensor of format ``(n_1, ..., n_k)`` pick ``n_k - 2`` distinct fiber
prefixes ``I`` in the product of the first ``k - 1`` index ranges, and an
involution ``phi`` of that prefix box (a product of per-factor coordinate
reversals, optionally composed with a transposition of two equal-size
factors).  For every prefix ``m`` with ``phi(m)`` outside ``I`` build the
square matrix

    [fiber(T, phi(m)); symbolic z-row at m; fiber(T, I_1); ...],

and take the signed cofactors of the z-row as the coefficient block of a
linear form at prefix ``m``; blocks at prefixes in ``phi(I)`` vanish
identically (repeated fiber row).  The sum of these determinants is the
determinant of the matrix whose first two rows are the twisted last-factor
contraction of ``T`` and the last vector itself.

With the identity twist the form is a combination of the critical-space
equations (the two-row Laplace minors are exactly those equations), so
nontrivial twists are what produce relations beyond the critical space.
A twisted form vanishes on the singular tuples only for special formats
and twists; candidates are therefore enumerated over all prefix choices
and validated numerically against a solved tuple set.  Because the twist
is an involution, every candidate form evaluates to exactly zero at the
tensor it was built from.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb, prod

import numpy as np

from .linalg import determinant, numerical_rank, svd
from .solver import SolutionSet
from .span import LinearFormZ, containment_check, forms_matrix
from .tensor import CTensor, contract

__all__ = [
    "IndexSetChoice",
    "PrefixTwist",
    "candidate_twists",
    "build_relation",
    "laplace_identity_check",
    "enumerate_and_filter",
    "extra_relation_rank",
    "verify_T_satisfies",
]

MAX_CANDIDATES = 10**5


@dataclass(frozen=True)
class IndexSetChoice:
    """``n_k - 2`` distinct fiber prefixes over the first ``k - 1`` factors."""

    prefixes: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "prefixes", tuple(tuple(int(i) for i in p) for p in self.prefixes)
        )
        if len(set(self.prefixes)) != len(self.prefixes):
            raise ValueError("prefixes must be distinct")

    def validate_for(self, fmt) -> None:
        n_k = fmt.dims[-1]
        if len(self.prefixes) != n_k - 2:
            raise ValueError(
                f"need {n_k - 2} prefixes for last dimension {n_k}, got {len(self.prefixes)}"
            )
        for p in self.prefixes:
            if len(p) != fmt.k - 1:
                raise ValueError(f"prefix {p} must index the first {fmt.k - 1} factors")
            if any(not 0 <= a < n for a, n in zip(p, fmt.dims[:-1])):
                raise ValueError(f"prefix {p} out of range for format {fmt}")


@dataclass(frozen=True)
class PrefixTwist:
    """An involution of the prefix box: optional factor swap plus reversals.

    ``swap`` exchanges two factors of equal dimension; ``reversed_axes``
    reverses coordinates in the named factors.  To stay an involution a
    swap may only combine with reversals of both swapped factors or of
    factors outside the swap.
    """

    reversed_axes: tuple[int, ...] = ()
    swap: tuple[int, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "reversed_axes", tuple(sorted(set(self.reversed_axes))))
        if self.swap is not None:
            i, j = self.swap
            hit = {i, j} & set(self.reversed_axes)
            if hit not in (set(), {i, j}):
                raise ValueError("a swap may only pair with reversals of both its factors")

    @property
    def is_identity(self) -> bool:
        return not self.reversed_axes and self.swap is None

    def apply(self, m: tuple[int, ...], dims: tuple[int, ...]) -> tuple[int, ...]:
        out = list(m)
        if self.swap is not None:
            i, j = self.swap
            out[i], out[j] = out[j], out[i]
        for a in self.reversed_axes:
            out[a] = dims[a] - 1 - out[a]
        return tuple(out)

    def label(self) -> str:
        parts = []
        if self.swap is not None:
            parts.append(f"swap({self.swap[0]},{self.swap[1]})")
        if self.reversed_axes:
            parts.append("rev(" + ",".join(map(str, self.reversed_axes)) + ")")
        return "+".join(parts) if parts else "id"


def candidate_twists(fmt) -> list[PrefixTwist]:
    """Nontrivial prefix involutions, single-factor reversals first."""
    p = fmt.k - 1
    axes = list(range(p))
    twists = []
    subsets = []
    for size in range(1, p + 1):
        subsets.extend(combinations(axes, size))
    for s in subsets:
        twists.append(PrefixTwist(reversed_axes=s))
    for i, j in combinations(axes, 2):
        if fmt.dims[i] != fmt.dims[j]:
            continue
        others = [a for a in axes if a not in (i, j)]
        extras = [()]
        for size in range(1, len(others) + 1):
            extras.extend(combinations(others, size))
        for base in ((), (i, j)):
            for extra in extras:
                twists.append(PrefixTwist(reversed_axes=base + extra, swap=(i, j)))
    return twists


def _all_prefixes(fmt) -> list[tuple[int, ...]]:
    return [tuple(idx) for idx in np.ndindex(*fmt.dims[:-1])]


def build_relation(t: CTensor, choice: IndexSetChoice,
                   twist: PrefixTwist | None = None) -> LinearFormZ:
    """The cofactor linear form of one fiber choice under a prefix twist.

    The default twist reverses the first factor, the primary construction
    for the formats with a leading dimension of two.  The coefficient
    block at prefix ``m`` is the cofactor row of the z-slot in the matrix
    ``[fiber(twist(m)); z; fibers(I)]``; blocks at prefixes in the twisted
    image of the choice vanish exactly.  Raises on a degenerate
    (identically zero) form.
    """
    choice.validate_for(t.fmt)
    twist = twist if twist is not None else PrefixTwist(reversed_axes=(0,))
    dims = t.fmt.dims
    n_k = dims[-1]
    fixed = np.array([t.array[p] for p in choice.prefixes])
    chosen = set(choice.prefixes)
    coeff = np.zeros(dims, dtype=np.complex128)
    for m in _all_prefixes(t.fmt):
        pm = twist.apply(m, dims[:-1])
        if pm in chosen:
            continue
        # Rows of the summand matrix without its z-row: [fiber(pm); fibers(I)].
        base = np.vstack([t.array[pm][None, :], fixed])
        for s in range(n_k):
            minor = determinant(np.delete(base, s, axis=1))
            coeff[m + (s,)] = -minor if s % 2 == 0 else minor
    if not coeff.any():
        raise ValueError(f"degenerate relation: all coefficients vanish for {choice}")
    label = ("det[" + ";".join(",".join(map(str, p)) for p in choice.prefixes)
             + "|" + twist.label() + "]")
    return LinearFormZ(CTensor(t.fmt, coeff), label)


def laplace_identity_check(t: CTensor, choice: IndexSetChoice, x,
                           twist: PrefixTwist | None = None) -> float:
    """Residual of the two-row Laplace expansion at a concrete tuple ``x``.

    The left side is the determinant of the matrix whose first rows are
    the (optionally twisted) last-factor contraction of ``t`` at ``x`` and
    the last vector ``x_k``; the right side re-assembles every summand
    matrix with its z-row set to the rank-one values and sums the
    determinants.  Both sides are computed from scratch.
    """
    choice.validate_for(t.fmt)
    twist = twist if twist is not None else PrefixTwist()
    k = t.fmt.k
    dims = t.fmt.dims
    fixed = np.array([t.array[p] for p in choice.prefixes])
    xk = np.asarray(x[k - 1], dtype=np.complex128)

    if twist.is_identity:
        first = contract(t, list(x), skip=k - 1)
    else:
        first = np.zeros(dims[-1], dtype=np.complex128)
        for m in _all_prefixes(t.fmt):
            weight = prod(complex(x[i][m[i]]) for i in range(k - 1))
            first += weight * t.array[twist.apply(m, dims[:-1])]
    lhs = determinant(np.vstack([first[None, :], xk[None, :], fixed]))

    rhs = 0.0 + 0.0j
    chosen = set(choice.prefixes)
    for m in _all_prefixes(t.fmt):
        pm = twist.apply(m, dims[:-1])
        if pm in chosen:
            continue
        weight = prod(complex(x[i][m[i]]) for i in range(k - 1))
        z_row = weight * xk
        rhs += determinant(np.vstack([t.array[pm][None, :], z_row[None, :], fixed]))
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0)


def enumerate_and_filter(t: CTensor, sols: SolutionSet, tol: float = 1e-8) -> list[LinearFormZ]:
    """One validated form per fiber choice that vanishes on the solved tuples.

    Every choice of ``n_k - 2`` prefixes is a candidate; it validates when
    some nontrivial prefix twist yields a form whose residual on the
    solved set stays below ``tol`` (the first such twist is kept).
    Validation is numerical vanishing rather than symbolic ideal
    membership; rerunning with independent seeds and intersecting guards
    against accidental vanishing for one tensor.
    """
    n_k = t.fmt.dims[-1]
    prefixes = _all_prefixes(t.fmt)
    if n_k - 2 > len(prefixes):
        raise ValueError(
            f"last dimension {n_k} needs {n_k - 2} distinct prefixes, "
            f"only {len(prefixes)} exist"
        )
    n_candidates = comb(len(prefixes), n_k - 2)
    if n_candidates > MAX_CANDIDATES:
        raise ValueError(f"{n_candidates} candidate choices exceed the {MAX_CANDIDATES} guard")
    twists = candidate_twists(t.fmt)
    validated = []
    for combo in combinations(prefixes, n_k - 2):
        choice = IndexSetChoice(combo)
        for twist in twists:
            try:
                form = build_relation(t, choice, twist)
            except ValueError:
                continue
            if containment_check([form], sols) < tol:
                validated.append(form)
                break
    return validated


def extra_relation_rank(validated: list[LinearFormZ], critical: list[LinearFormZ]) -> int:
    """Rank added by the validated forms on top of the critical-space forms."""
    critical_rank = numerical_rank(svd(forms_matrix(critical))).rank
    if not validated:
        return 0
    both = np.vstack([forms_matrix(validated), forms_matrix(critical)])
    return numerical_rank(svd(both)).rank - critical_rank


def verify_T_satisfies(validated: list[LinearFormZ], t: CTensor) -> float:
    """Largest normalized value of the validated forms at ``t`` itself.

    Because the twist is an involution of the prefix box, the two-row
    minors of the expansion cancel pairwise at ``z = t``, so the result
    sits at roundoff level.
    """
    tnorm = t.norm()
    return max(abs(f(t)) / (f.norm() * tnorm) for f in validated)
