"""Chart system: residual, Jacobian, parameter derivative, start pair."""

import numpy as np
import pytest

from tensorspan import CTensor, Format, SingularSystem, SystemPoint, random_tensor, start_pair
from tensorspan.linalg import lu_solve


def _random_point(sys_, rng):
    vec = rng.standard_normal(sys_.num_vars) + 1j * rng.standard_normal(sys_.num_vars)
    return sys_.unpack(vec)


def _fd_jacobian(sys_, p, u, h=1e-6):
    vec = sys_.pack(p)
    u_flat = u.vectorize()
    out = np.zeros((sys_.num_eqs, sys_.num_vars), dtype=complex)
    for c in range(sys_.num_vars):
        e = np.zeros(sys_.num_vars, dtype=complex)
        e[c] = h
        fp = sys_.residual_batch((vec + e)[None, :], u_flat)[0]
        fm = sys_.residual_batch((vec - e)[None, :], u_flat)[0]
        out[:, c] = (fp - fm) / (2 * h)
    return out


class TestStartPair:
    def test_residual_exactly_zero(self):
        for dims in [(2, 2, 2), (2, 3, 4)]:
            fmt = Format(dims)
            u0, p0 = start_pair(fmt, 3)
            sys_ = SingularSystem(fmt)
            assert np.all(sys_.evaluate(p0, u0) == 0)

    def test_jacobian_nonsingular_at_start(self):
        fmt = Format((2, 3, 4))
        u0, p0 = start_pair(fmt, 5)
        sys_ = SingularSystem(fmt)
        jac = sys_.jacobian(p0, u0)
        x = lu_solve(jac, np.ones(sys_.num_vars, dtype=complex))
        assert np.all(np.isfinite(x))

    def test_seeds_give_different_lambda(self):
        fmt = Format((2, 2, 2))
        _, p1 = start_pair(fmt, 1)
        _, p2 = start_pair(fmt, 2)
        assert p1.lam[0] != p2.lam[0]

    def test_structured_zeros(self):
        fmt = Format((2, 2, 3))
        u0, p0 = start_pair(fmt, 9)
        assert u0.array[0, 0, 0] == p0.lam[0]
        assert u0.array[1, 0, 0] == 0 and u0.array[0, 1, 0] == 0
        assert u0.array[0, 0, 1] == 0 and u0.array[0, 0, 2] == 0
        assert u0.array[1, 1, 0] != 0


class TestEvaluate:
    def test_matrix_case_classical_pair(self):
        rng = np.random.default_rng(4)
        m = rng.standard_normal((3, 3))
        u_mat, s_vals, vh = np.linalg.svd(m)
        u_vec, v_vec, sigma = u_mat[:, 0], vh[0], s_vals[0]
        x1 = u_vec / u_vec[0]
        x2 = v_vec / v_vec[0]
        lam1 = sigma * u_vec[0] / v_vec[0]
        lam2 = sigma * v_vec[0] / u_vec[0]
        sys_ = SingularSystem(Format((3, 3)))
        p = SystemPoint((x1, x2), np.array([lam1, lam2]))
        res = sys_.evaluate(p, CTensor.from_array(m))
        assert np.max(np.abs(res)) < 1e-10

    def test_random_point_nonzero(self):
        fmt = Format((2, 2, 3))
        rng = np.random.default_rng(6)
        sys_ = SingularSystem(fmt)
        res = sys_.evaluate(_random_point(sys_, rng), random_tensor(fmt, rng))
        assert np.max(np.abs(res)) > 1e-3

    def test_format_mismatch(self):
        sys_ = SingularSystem(Format((2, 2)))
        p = _random_point(sys_, np.random.default_rng(0))
        with pytest.raises(ValueError):
            sys_.evaluate(p, random_tensor(Format((2, 3)), 0))


class TestJacobian:
    @pytest.mark.parametrize("dims", [(2, 2, 3), (2, 3, 4), (3, 4)])
    def test_matches_central_differences(self, dims):
        fmt = Format(dims)
        rng = np.random.default_rng(7)
        sys_ = SingularSystem(fmt)
        p = _random_point(sys_, rng)
        u = random_tensor(fmt, rng)
        jac = sys_.jacobian(p, u)
        assert np.max(np.abs(jac - _fd_jacobian(sys_, p, u))) < 1e-6

    def test_chart_rows_are_unit_rows(self):
        fmt = Format((2, 3, 2))
        sys_ = SingularSystem(fmt)
        rng = np.random.default_rng(8)
        jac = sys_.jacobian(_random_point(sys_, rng), random_tensor(fmt, rng))
        for i, off in enumerate(sys_.x_offsets):
            row = jac[sys_.lam_offset + i]
            assert row[off] == 1.0
            assert np.count_nonzero(row) == 1

    def test_lambda_column_is_minus_x(self):
        fmt = Format((2, 2, 2))
        sys_ = SingularSystem(fmt)
        rng = np.random.default_rng(9)
        p = _random_point(sys_, rng)
        jac = sys_.jacobian(p, random_tensor(fmt, rng))
        for i, (off, n) in enumerate(zip(sys_.x_offsets, fmt.dims)):
            col = jac[off:off + n, sys_.lam_offset + i]
            assert np.allclose(col, -p.x[i])

    def test_diagonal_block_has_minus_lambda(self):
        # d(block i)/d(x_i) is the mixed contraction minus lambda_i * I;
        # for k = 2 the mixed term has no diagonal contribution at zero
        # off-diagonal tensor entries.
        fmt = Format((2, 2))
        sys_ = SingularSystem(fmt)
        rng = np.random.default_rng(10)
        p = _random_point(sys_, rng)
        u = CTensor(fmt, np.zeros((2, 2)))
        jac = sys_.jacobian(p, u)
        assert np.allclose(np.diag(jac)[:2], -p.lam[0])
        assert np.allclose(np.diag(jac)[2:4], -p.lam[1])


class TestParamTangent:
    def test_zero_direction(self):
        fmt = Format((2, 2, 2))
        sys_ = SingularSystem(fmt)
        rng = np.random.default_rng(11)
        p = _random_point(sys_, rng)
        tan = sys_.param_tangent(p, CTensor(fmt, np.zeros(fmt.dims)))
        assert np.all(tan == 0)

    def test_linearity(self):
        fmt = Format((2, 3, 2))
        sys_ = SingularSystem(fmt)
        rng = np.random.default_rng(12)
        p = _random_point(sys_, rng)
        d1, d2 = random_tensor(fmt, rng), random_tensor(fmt, rng)
        a, b = 1.7 - 0.3j, -0.4 + 2.1j
        combo = CTensor(fmt, a * d1.array + b * d2.array)
        lhs = sys_.param_tangent(p, combo)
        rhs = a * sys_.param_tangent(p, d1) + b * sys_.param_tangent(p, d2)
        assert np.max(np.abs(lhs - rhs)) < 1e-13 * max(np.max(np.abs(rhs)), 1.0)

    def test_matches_finite_differences(self):
        fmt = Format((2, 2, 3))
        sys_ = SingularSystem(fmt)
        rng = np.random.default_rng(13)
        p = _random_point(sys_, rng)
        u = random_tensor(fmt, rng)
        du = random_tensor(fmt, rng)
        tan = sys_.param_tangent(p, du)
        vec = sys_.pack(p)[None, :]
        h = 1e-6
        fp = sys_.residual_batch(vec, u.vectorize() + h * du.vectorize())[0]
        fm = sys_.residual_batch(vec, u.vectorize() - h * du.vectorize())[0]
        assert np.max(np.abs(tan - (fp - fm) / (2 * h))) < 1e-6

    def test_chart_rows_zero(self):
        fmt = Format((2, 2, 2))
        sys_ = SingularSystem(fmt)
        rng = np.random.default_rng(14)
        tan = sys_.param_tangent(_random_point(sys_, rng), random_tensor(fmt, rng))
        assert np.all(tan[sys_.lam_offset:] == 0)


class TestSolutionIdentity:
    def test_lambda_inner_product_identity(self, solve_cache):
        # contracting the i-th gradient equation with x_i turns every
        # solved tuple into lambda_i * (x_i . x_i) = multilinear value
        from tensorspan import multilinear_value

        rec = solve_cache.get((2, 2, 4), 1)
        for t in rec.sols.tuples:
            value = multilinear_value(rec.tensor, list(t.x))
            products = t.invariant_products()
            assert np.max(np.abs(products - value)) < 1e-9 * abs(value)
