"""Exact integer combinatorics attached to a tensor format.

Classification (sub-boundary / boundary / concise), the count of complex
singular tuples of a generic tensor via truncated polynomial expansion,
the dimension of the critical space, and the expected projective dimension
of the span of singular tuples where it is known.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tensor import Format

__all__ = [
    "FormatClass",
    "TruncatedPoly",
    "classify",
    "ed_degree",
    "critical_space_dim",
    "expected_span_dim",
    "membership_is_guaranteed",
]


@dataclass(frozen=True)
class FormatClass:
    """Combinatorial classification of a format.

    ``boundary_threshold`` is the last-factor dimension that makes the
    given prefix a boundary format; ``concise_threshold`` is the product
    of all but the largest dimension.
    """

    is_sub_boundary: bool
    is_boundary: bool
    is_concise: bool
    boundary_threshold: int
    concise_threshold: int


def classify(fmt: Format) -> FormatClass:
    dims = fmt.dims
    total = sum(dims)
    sub = all(n <= 1 + (total - n) - (len(dims) - 1) for n in dims)
    boundary = any(n == 1 + (total - n) - (len(dims) - 1) for n in dims)
    concise = all(n <= fmt.size // n for n in dims)
    n_b = 1 + sum(n - 1 for n in dims[:-1])
    ordered = sorted(dims)
    d = math.prod(ordered[:-1])
    return FormatClass(
        is_sub_boundary=sub,
        is_boundary=sub and boundary,
        is_concise=concise,
        boundary_threshold=n_b,
        concise_threshold=d,
    )


class TruncatedPoly:
    """Integer polynomial in k variables truncated to an exponent box.

    Coefficients live on the dense box of multidegrees ``< box[i]`` in each
    variable and are arbitrary-precision Python integers.  Multiplication
    discards every monomial falling outside the box, which is sound when
    only the corner coefficient is wanted.
    """

    __slots__ = ("box", "coeffs")

    def __init__(self, box, coeffs: np.ndarray | None = None):
        self.box = tuple(int(n) for n in box)
        if coeffs is None:
            coeffs = np.zeros(self.box, dtype=object)
        self.coeffs = coeffs

    @classmethod
    def monomial(cls, box, expo, coeff: int = 1) -> "TruncatedPoly":
        p = cls(box)
        expo = tuple(int(e) for e in expo)
        if any(e < 0 or e >= n for e, n in zip(expo, p.box)):
            raise ValueError(f"exponent {expo} outside box {p.box}")
        p.coeffs[expo] = coeff
        return p

    def _nnz(self) -> int:
        return int(np.count_nonzero(self.coeffs))

    def __add__(self, other: "TruncatedPoly") -> "TruncatedPoly":
        if self.box != other.box:
            raise ValueError("box mismatch")
        return TruncatedPoly(self.box, self.coeffs + other.coeffs)

    def __mul__(self, other: "TruncatedPoly") -> "TruncatedPoly":
        if self.box != other.box:
            raise ValueError("box mismatch")
        # Shift-and-add over the operand with fewer terms; slices keep the
        # product inside the box.
        a, b = (self, other) if self._nnz() <= other._nnz() else (other, self)
        out = np.zeros(self.box, dtype=object)
        for idx in zip(*np.nonzero(a.coeffs)):
            c = a.coeffs[idx]
            src = b.coeffs[tuple(slice(0, n - e) for e, n in zip(idx, self.box))]
            dst = out[tuple(slice(e, None) for e in idx)]
            dst += src * c
        return TruncatedPoly(self.box, out)

    def corner(self) -> int:
        """Coefficient of the monomial of maximal multidegree in the box."""
        return int(self.coeffs[tuple(n - 1 for n in self.box)])


def _count_generating_factor(box, i: int) -> TruncatedPoly:
    # sum_{j=0}^{n_i - 1} hat_i^(n_i - 1 - j) * h_i^j  with hat_i = sum_{l != i} h_l
    k = len(box)
    n_i = box[i]
    hat = TruncatedPoly(box)
    for j in range(k):
        if j != i:
            e = [0] * k
            e[j] = 1
            hat = hat + TruncatedPoly.monomial(box, e)
    powers = [TruncatedPoly.monomial(box, [0] * k)]
    for _ in range(n_i - 1):
        powers.append(powers[-1] * hat)
    fac = TruncatedPoly(box)
    for j in range(n_i):
        e = [0] * k
        e[i] = j
        fac = fac + powers[n_i - 1 - j] * TruncatedPoly.monomial(box, e)
    return fac


def ed_degree(fmt: Format) -> int:
    """Number of complex singular tuples of a generic tensor of ``fmt``.

    Extracts the coefficient of ``h_1^(n_1-1) ... h_k^(n_k-1)`` from the
    product of the per-factor generating polynomials, computed exactly in
    truncated big-integer arithmetic.
    """
    box = fmt.dims
    total = _count_generating_factor(box, 0)
    for i in range(1, fmt.k):
        total = total * _count_generating_factor(box, i)
    value = total.corner()
    if value <= 0:
        raise AssertionError(f"nonpositive singular-tuple count {value} for {fmt}")
    return value


def critical_space_dim(fmt: Format) -> int:
    """Affine dimension of the critical space of a generic tensor."""
    dims = sorted(fmt.dims)
    n_k = dims[-1]
    d = math.prod(dims[:-1])
    if n_k <= d:
        return math.prod(dims) - sum(math.comb(n, 2) for n in dims)
    return math.comb(d + 1, 2) - sum(math.comb(n, 2) for n in dims[:-1])


def _span_dim_two_power(ell: int) -> int:
    # Projective span dimension for the format (2, ..., 2, ell + 2) with
    # ell factors of size two.
    n = ell + 2
    defect = max(0, (ell - 1) ** ell - (ell - 2) ** ell * n)
    return 2**ell * n - (ell + 1) - math.comb(n, 2) - defect


# Stabilized projective span dimensions for three-factor formats with
# prefix (n_1, n_2) sorted ascending: prefix -> (stable_dim, delta), where
# the stable value holds for every last dimension >= boundary + delta.
_THREE_FACTOR_SPAN = {
    (2, 2): (6, 0),
    (2, 3): (13, 0),
    (2, 4): (22, 0),
    (2, 5): (33, 0),
    (2, 6): (46, 0),
    (3, 3): (29, 1),
    (3, 4): (50, 1),
    (3, 5): (76, 1),
    (4, 4): (87, 1),
    (4, 5): (133, 2),
    (4, 6): (188, 3),
    (4, 7): (252, 3),
    (5, 5): (204, 3),
    (5, 6): (289, 4),
    (5, 7): (388, 4),
    (6, 6): (410, 5),
    (6, 7): (551, 6),
    (6, 8): (712, 7),
}

# Known projective span dimensions for formats (2, ..., 2, n) with ell >= 2
# factors of size two; beyond the largest tabulated n the value is stable.
_TWO_POWER_SPAN = {
    2: {3: 6},
    3: {4: 22, 5: 23},
    4: {5: 65, 6: 76},
    5: {6: 171, 7: 197, 8: 222, 9: 237},
    6: {7: 420, 8: 477, 9: 533, 10: 588, 11: 642, 12: 695, 13: 722},
}


def expected_span_dim(fmt: Format) -> int | None:
    """Known projective dimension of the span of singular tuples, if any.

    Covers the sub-boundary regime (span equals the projectivized critical
    space), the family ``(2, ..., 2, n)``, and the tabulated three-factor
    formats.  Returns ``None`` for formats whose span dimension is not
    settled; callers treat absence as "report only, no assertion".

    The values 13 for (2,3,5) and (2,3,6) are resolved symbolically rather
    than cohomologically (the cohomology bound alone allows 13 or 14).
    """
    cls = classify(fmt)
    if cls.is_sub_boundary:
        return critical_space_dim(fmt) - 1

    dims = sorted(fmt.dims)
    ell = fmt.k - 1
    if dims[:-1] == [2] * ell and ell >= 2:
        n = dims[-1]
        if n == ell + 2:
            return _span_dim_two_power(ell)
        table = _TWO_POWER_SPAN[ell] if ell in _TWO_POWER_SPAN else {}
        if n in table:
            return table[n]
        if table and n > max(table):
            return table[max(table)]
        return None

    if fmt.k == 3:
        prefix = (dims[0], dims[1])
        if prefix in _THREE_FACTOR_SPAN:
            stable, delta = _THREE_FACTOR_SPAN[prefix]
            n_b = dims[0] + dims[1] - 1
            if dims[-1] >= n_b + delta:
                return stable
    return None


def membership_is_guaranteed(fmt: Format) -> bool:
    """Whether a generic tensor provably lies in the span of its singular tuples.

    True for sub-boundary formats and for the families (2,2,n) with n >= 4,
    (2,3,n) with n >= 5, and (2,...,2,ell+2) with ell >= 4.  For every other
    format membership is conjectural and should be reported, not asserted.
    """
    if classify(fmt).is_sub_boundary:
        return True
    dims = sorted(fmt.dims)
    if fmt.k == 3:
        if dims[:2] == [2, 2] and dims[2] >= 4:
            return True
        if dims[:2] == [2, 3] and dims[2] >= 5:
            return True
    ell = fmt.k - 1
    if dims[:-1] == [2] * ell and ell >= 4 and dims[-1] == ell + 2:
        return True
    return False
