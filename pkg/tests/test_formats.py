"""Format classification, singular-tuple counts, and dimension formulas."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensorspan import Format, classify, critical_space_dim, ed_degree, expected_span_dim
from tensorspan.formats import TruncatedPoly, membership_is_guaranteed

# The stabilized tables: three-factor prefixes -> (n_B, ed), and the
# order-(ell+1) family (2,...,2,n) -> ed.
THREE_FACTOR_ED = {
    (2, 2): (3, 8), (2, 3): (4, 18), (2, 4): (5, 32), (2, 5): (6, 50),
    (2, 6): (7, 72), (3, 3): (5, 61), (3, 4): (6, 148), (3, 5): (7, 295),
    (4, 4): (7, 480), (4, 5): (8, 1220), (4, 6): (9, 2624), (4, 7): (10, 5012),
    (5, 5): (9, 3881), (5, 6): (10, 10166), (5, 7): (11, 23051),
    (6, 6): (11, 31976), (6, 7): (12, 85526), (6, 8): (13, 201536),
}
TWO_POWER_ED = {2: 8, 3: 48, 4: 384, 5: 3840, 6: 46080}


def full_poly_corner(dims):
    """Independent count oracle: untruncated dict-based expansion."""
    k = len(dims)

    def mul(a, b):
        out = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = out.get(e, 0) + ca * cb
        return out

    total = {(0,) * k: 1}
    for i in range(k):
        hat = {}
        for j in range(k):
            if j != i:
                e = [0] * k
                e[j] = 1
                hat[tuple(e)] = 1
        power = {(0,) * k: 1}
        powers = [power]
        for _ in range(dims[i] - 1):
            powers.append(mul(powers[-1], hat))
        factor = {}
        for j in range(dims[i]):
            e = [0] * k
            e[i] = j
            for expo, c in powers[dims[i] - 1 - j].items():
                key = tuple(x + y for x, y in zip(expo, tuple(e)))
                factor[key] = factor.get(key, 0) + c
        total = mul(total, factor)
    return total.get(tuple(n - 1 for n in dims), 0)


class TestClassify:
    def test_223_is_boundary(self):
        c = classify(Format([2, 2, 3]))
        assert c.is_boundary and c.is_sub_boundary and c.is_concise
        assert c.boundary_threshold == 3

    def test_224_no_longer_sub_boundary(self):
        c = classify(Format([2, 2, 4]))
        assert not c.is_sub_boundary and not c.is_boundary
        assert c.is_concise and c.concise_threshold == 4

    def test_225_not_concise(self):
        assert not classify(Format([2, 2, 5])).is_concise

    def test_boundary_at_threshold(self):
        for prefix, (n_b, _) in THREE_FACTOR_ED.items():
            assert classify(Format(prefix + (n_b,))).is_boundary

    def test_boundary_implies_sub_boundary(self):
        for dims in [(2, 5, 6), (3, 3, 5), (2, 2, 2, 4)]:
            c = classify(Format(dims))
            assert not c.is_boundary or c.is_sub_boundary


class TestEdDegree:
    def test_small_cube_matches_hand_expansion(self):
        # factors for dimension-2 slots are each h1+h2+h3, so the corner
        # coefficient of the cube is 3! = 6
        assert ed_degree(Format([2, 2, 2])) == 6

    def test_paper_examples(self):
        assert ed_degree(Format([2, 2, 4])) == 8
        assert ed_degree(Format([2, 3, 5])) == 18
        assert ed_degree(Format([3, 3, 5])) == 61
        assert ed_degree(Format([4, 4, 7])) == 480
        assert ed_degree(Format([2, 2, 2, 2, 6])) == 384
        assert ed_degree(Format([2, 2, 2, 2, 2, 2, 13])) == 46080

    def test_matrix_case_is_min(self):
        for n in range(2, 7):
            for m in range(2, 7):
                assert ed_degree(Format([n, m])) == min(n, m)

    def test_against_full_expansion_oracle(self):
        for dims in [(2, 2, 2), (2, 2, 3), (2, 3, 4), (3, 3, 3), (2, 2, 2, 4)]:
            assert ed_degree(Format(dims)) == full_poly_corner(dims)

    def test_three_factor_table(self):
        for prefix, (n_b, ed) in THREE_FACTOR_ED.items():
            assert ed_degree(Format(prefix + (n_b,))) == ed

    def test_two_power_table(self):
        for ell, ed in TWO_POWER_ED.items():
            assert ed_degree(Format((2,) * ell + (ell + 1,))) == ed

    def test_stabilization_in_last_factor(self):
        for prefix, (n_b, ed) in THREE_FACTOR_ED.items():
            below = ed_degree(Format(prefix + (n_b - 1,)))
            at = ed_degree(Format(prefix + (n_b,)))
            above = ed_degree(Format(prefix + (n_b + 1,)))
            assert below <= at == above == ed
        for ell, ed in TWO_POWER_ED.items():
            n_b = ell + 1
            prefix = (2,) * ell
            assert ed_degree(Format(prefix + (n_b,))) == ed
            assert ed_degree(Format(prefix + (n_b + 1,))) == ed
            assert ed_degree(Format(prefix + (n_b - 1,))) <= ed


class TestTruncatedPoly:
    def test_multiplication_matches_full_then_truncate(self):
        rng = np.random.default_rng(3)
        box = (3, 2, 3)
        for _ in range(20):
            a = {tuple(idx): int(rng.integers(-4, 5)) for idx in np.ndindex(*box)}
            b = {tuple(idx): int(rng.integers(-4, 5)) for idx in np.ndindex(*box)}
            pa = TruncatedPoly(box)
            pb = TruncatedPoly(box)
            for e, c in a.items():
                pa.coeffs[e] = c
            for e, c in b.items():
                pb.coeffs[e] = c
            fast = (pa * pb).coeffs
            slow = np.zeros(box, dtype=object)
            for ea, ca in a.items():
                for eb, cb in b.items():
                    e = tuple(x + y for x, y in zip(ea, eb))
                    if all(v < n for v, n in zip(e, box)):
                        slow[e] += ca * cb
            assert np.array_equal(fast, slow)

    def test_monomial_outside_box(self):
        with pytest.raises(ValueError):
            TruncatedPoly.monomial((2, 2), (2, 0))


class TestCriticalSpaceDim:
    def test_known_values(self):
        assert critical_space_dim(Format([2, 2, 4])) == 8
        assert critical_space_dim(Format([2, 3, 5])) == 16
        assert critical_space_dim(Format([2, 2, 6])) == math.comb(5, 2) - 2
        assert critical_space_dim(Format([2, 3, 6])) == 17
        assert critical_space_dim(Format([3, 3, 5])) == 29

    def test_sorting_does_not_mutate(self):
        fmt = Format([5, 2, 3])
        assert critical_space_dim(fmt) == critical_space_dim(Format([2, 3, 5]))
        assert fmt.dims == (5, 2, 3)


class TestExpectedSpanDim:
    def test_two_power_formula(self):
        assert expected_span_dim(Format([2, 2, 2, 2, 6])) == 76
        assert expected_span_dim(Format([2, 2, 4])) == 6
        assert expected_span_dim(Format([2, 2, 2, 5])) == 23

    def test_sub_boundary_equals_critical(self):
        assert expected_span_dim(Format([3, 3, 4])) == critical_space_dim(Format([3, 3, 4])) - 1
        assert expected_span_dim(Format([3, 3, 5])) == 28
        assert expected_span_dim(Format([2, 2, 3])) == 6

    def test_table_backed_values(self):
        assert expected_span_dim(Format([2, 3, 5])) == 13
        assert expected_span_dim(Format([2, 3, 6])) == 13
        assert expected_span_dim(Format([3, 3, 6])) == 29
        assert expected_span_dim(Format([2, 2, 5])) == 6
        assert expected_span_dim(Format([2, 2, 2, 7])) == 23

    def test_unsettled_formats_are_absent(self):
        assert expected_span_dim(Format([4, 5, 9])) is None
        assert expected_span_dim(Format([3, 3, 3, 9])) is None


class TestMembershipGuarantee:
    def test_families(self):
        assert membership_is_guaranteed(Format([2, 2, 4]))
        assert membership_is_guaranteed(Format([2, 2, 5]))
        assert membership_is_guaranteed(Format([2, 3, 5]))
        assert membership_is_guaranteed(Format([2, 3, 6]))
        assert membership_is_guaranteed(Format([3, 3, 4]))  # sub-boundary
        assert membership_is_guaranteed(Format([2, 2, 2, 2, 6]))

    def test_conjecture_level_formats(self):
        assert not membership_is_guaranteed(Format([3, 3, 6]))
        assert not membership_is_guaranteed(Format([2, 2, 2, 5]))


@given(st.integers(min_value=2, max_value=5), st.integers(min_value=2, max_value=5),
       st.integers(min_value=2, max_value=8))
@settings(max_examples=30, deadline=None)
def test_ed_degree_positive_and_stable_beyond_boundary(n1, n2, n3):
    fmt = Format([n1, n2, n3])
    ed = ed_degree(fmt)
    assert ed > 0
    n_b = n1 + n2 - 1
    if n3 >= n_b:
        assert ed == ed_degree(Format([n1, n2, n_b]))
