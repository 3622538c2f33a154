"""Linear algebra kernels against independent oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensorspan.linalg import (
    RankReport,
    SingularMatrixError,
    determinant,
    least_squares,
    lu_solve,
    numerical_rank,
    svd,
)


def _crand(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def det_by_cofactors(a):
    """Laplace expansion along the first row; exponential, tests only."""
    n = a.shape[0]
    if n == 1:
        return a[0, 0]
    total = 0.0 + 0.0j
    for j in range(n):
        minor = np.delete(np.delete(a, 0, axis=0), j, axis=1)
        total += (-1) ** j * a[0, j] * det_by_cofactors(minor)
    return total


def jacobi_eigenvalues(h, sweeps=60, tol=1e-14):
    """Cyclic Jacobi for a Hermitian matrix; independent of LAPACK SVD."""
    a = np.array(h, dtype=complex)
    n = a.shape[0]
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.abs(a - np.diag(np.diag(a))) ** 2))
        if off < tol * np.sqrt(np.sum(np.abs(np.diag(a)) ** 2) + 1e-300):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) == 0:
                    continue
                app, aqq = a[p, p].real, a[q, q].real
                phase = apq / abs(apq)
                theta = 0.5 * math.atan2(2 * abs(apq), aqq - app)
                c = math.cos(theta)
                s = math.sin(theta) * phase
                rot = np.eye(n, dtype=complex)
                rot[p, p] = c
                rot[p, q] = s
                rot[q, p] = -np.conj(s)
                rot[q, q] = c
                a = rot.conj().T @ a @ rot
    return np.sort(np.diag(a).real)[::-1]


class TestLuSolve:
    def test_identity(self):
        b = np.array([1.0, 2.0, 3.0], dtype=complex)
        assert np.array_equal(lu_solve(np.eye(3), b), b)

    def test_backward_error(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            a = _crand(rng, 10, 10)
            b = _crand(rng, 10)
            x = lu_solve(a, b)
            err = np.linalg.norm(a @ x - b) / (np.linalg.norm(a) * np.linalg.norm(x))
            assert err < 1e-12

    def test_duplicate_rows_raise(self):
        a = np.array([[1.0, 2.0], [1.0, 2.0]], dtype=complex)
        with pytest.raises(SingularMatrixError):
            lu_solve(a, np.ones(2))

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            lu_solve(np.ones((2, 3)), np.ones(2))


class TestDeterminant:
    def test_identity(self):
        assert determinant(np.eye(4)) == 1.0

    def test_repeated_row_is_zero(self):
        rng = np.random.default_rng(1)
        a = _crand(rng, 4, 4)
        a[2] = a[0]
        scale = np.max(np.abs(a)) ** 4
        assert abs(determinant(a)) < 1e-13 * scale

    def test_cofactor_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            a = _crand(rng, 4, 4)
            fast = determinant(a)
            slow = det_by_cofactors(a)
            assert abs(fast - slow) < 1e-12 * abs(slow)

    def test_triangular_is_diagonal_product(self):
        rng = np.random.default_rng(3)
        a = np.triu(_crand(rng, 5, 5))
        assert abs(determinant(a) - np.prod(np.diag(a))) < 1e-12 * abs(np.prod(np.diag(a)))

    def test_product_rule(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            a, b = _crand(rng, 6, 6), _crand(rng, 6, 6)
            lhs = determinant(a @ b)
            rhs = determinant(a) * determinant(b)
            assert abs(lhs - rhs) < 1e-10 * abs(rhs)


class TestSvd:
    def test_identity(self):
        assert np.allclose(svd(np.eye(5)), np.ones(5))

    def test_rank_one(self):
        rng = np.random.default_rng(5)
        u, v = _crand(rng, 6), _crand(rng, 4)
        s = svd(np.outer(u, v.conj()))
        assert abs(s[0] - np.linalg.norm(u) * np.linalg.norm(v)) < 1e-12 * s[0]
        assert np.all(s[1:] < 1e-13 * s[0])

    def test_gram_matrix_jacobi_oracle(self):
        rng = np.random.default_rng(6)
        a = _crand(rng, 8, 5)
        s = svd(a)
        eigs = jacobi_eigenvalues(a.conj().T @ a)
        assert np.max(np.abs(s**2 - eigs)) < 1e-10 * eigs[0]

    def test_values_descending(self):
        rng = np.random.default_rng(7)
        s = svd(_crand(rng, 7, 7))
        assert np.all(np.diff(s) <= 0)

    def test_reconstruction_bound(self):
        rng = np.random.default_rng(8)
        for m, n in [(4, 4), (8, 5), (16, 9), (30, 16)]:
            for _ in range(100):
                a = _crand(rng, m, n)
                u, s, vh = svd(a, factors=True)
                err = np.linalg.norm(a - (u * s) @ vh)
                assert err <= 50 * max(m, n) * np.finfo(float).eps * s[0]


class TestNumericalRank:
    def test_clean_gap(self):
        r = numerical_rank([1.0, 1e-12])
        assert r.rank == 1 and r.gap_ratio == pytest.approx(1e12)

    def test_full_rank(self):
        r = numerical_rank([1.0, 0.5, 0.3])
        assert r.rank == 3 and math.isinf(r.gap_ratio) and not r.ambiguous

    def test_ambiguous_profile(self):
        r = numerical_rank([1.0, 1e-3, 1e-6, 1e-10])
        assert r.ambiguous and r.rank == 3

    def test_zero_matrix(self):
        r = numerical_rank([0.0, 0.0])
        assert r.rank == 0

    def test_rejects_increasing(self):
        with pytest.raises(ValueError):
            numerical_rank([1.0, 2.0])

    def test_report_fields(self):
        r = numerical_rank([2.0, 1e-10])
        assert isinstance(r, RankReport)
        assert r.threshold_used == pytest.approx(2e-8)


@given(
    st.lists(st.floats(min_value=1e-6, max_value=1e6), min_size=1, max_size=8),
    st.floats(min_value=1e-8, max_value=1e8),
    st.floats(min_value=0.0, max_value=2 * math.pi),
)
@settings(max_examples=60, deadline=None)
def test_numerical_rank_scale_invariance(values, mag, angle):
    values = sorted(values, reverse=True)
    scale = abs(mag * complex(math.cos(angle), math.sin(angle)))
    base = numerical_rank(values)
    scaled = numerical_rank([scale * v for v in values])
    assert base.rank == scaled.rank
    assert base.ambiguous == scaled.ambiguous


class TestLeastSquares:
    def test_consistent_system(self):
        rng = np.random.default_rng(9)
        a = _crand(rng, 8, 4)
        x = _crand(rng, 4)
        coeff, res = least_squares(a, a @ x)
        assert res < 1e-10
        assert np.linalg.norm(coeff - x) < 1e-8 * np.linalg.norm(x)

    def test_orthogonal_rhs(self):
        a = np.eye(4, 2).astype(complex)
        b = np.array([0, 0, 1.0, 0], dtype=complex)
        _, res = least_squares(a, b)
        assert res == pytest.approx(1.0)

    def test_normal_equations_oracle(self):
        rng = np.random.default_rng(10)
        a = _crand(rng, 9, 5)
        b = _crand(rng, 9)
        coeff, _ = least_squares(a, b)
        gram = a.conj().T @ a
        rhs = a.conj().T @ b
        oracle = lu_solve(gram, rhs)
        assert np.linalg.norm(coeff - oracle) < 1e-8 * np.linalg.norm(oracle)

    def test_zero_rhs(self):
        coeff, res = least_squares(np.eye(3), np.zeros(3))
        assert res == 0.0 and np.all(coeff == 0)
