import math

import numpy as np
import pytest

from fracpow import (
    ConfigError,
    DomainError,
    EllipticOperator,
    GridFunction,
    GridSpec,
    QuadratureSpec,
    SolveConfig,
    approx_frac_power,
    build_plan,
    error_norms,
    frac_apply_inverse,
    normalized_solution,
    rhs_library,
    spectral_reference,
)
from fracpow.fractional import mode_response, scaling_delta

# 50-digit Simpson sum (M=4) of the eq22 density for alpha=0.75, kappa=5
SIMPSON_WEIGHT_SUM = 0.2000702924793569043455998


def test_plan_small_example():
    plan = build_plan(0.5, "midpoint", M=2, kappa=1)
    np.testing.assert_allclose(plan.t, [0.25, 0.75])
    np.testing.assert_allclose(plan.gamma, (1 - plan.t) ** 2, rtol=1e-15)
    np.testing.assert_allclose(plan.beta, plan.t**2, rtol=1e-15)
    np.testing.assert_allclose(plan.weight, [1 / math.pi] * 2, rtol=1e-15)


def test_plan_matches_scalar_approximation():
    for rule, kappa, rep in [("midpoint", 3, "eq22"), ("simpson", 5, "eq22"), ("midpoint", 2, "eq23")]:
        plan = build_plan(0.3, rule, M=20, kappa=kappa, repr=rep)
        q = QuadratureSpec.make(0.3, 20, kappa, rule, rep)
        assert plan.scalar_sum(7.0) == pytest.approx(float(approx_frac_power(7.0, q)), rel=1e-14)


def test_simpson_weight_sum():
    plan = build_plan(0.75, "simpson", M=4, kappa=5)
    assert len(plan) == 5
    assert plan.weight.sum() == pytest.approx(SIMPSON_WEIGHT_SUM, rel=1e-14)
    # the density vanishes at t=1, so that node is skipped
    np.testing.assert_array_equal(plan.active(), [0, 1, 2, 3])


def test_plan_is_grid_independent():
    a, b = build_plan(0.25, M=50), build_plan(0.25, M=50)
    np.testing.assert_array_equal(a.weight, b.weight)


def test_eq23_plan_has_two_nodes_per_point():
    plan = build_plan(0.4, "midpoint", M=10, kappa=2, repr="eq23")
    assert len(plan) == 20
    assert np.all(np.diff(plan.t) >= 0)


class TestSpectralReference:
    def test_alpha_one_is_inverse(self, laplace8, grid8, rng):
        b = GridFunction(grid8, rng.standard_normal(grid8.K))
        u = spectral_reference(laplace8, b, 1.0)
        np.testing.assert_allclose(laplace8(u).values, b.values, rtol=1e-10, atol=1e-12)

    def test_single_mode(self, laplace8):
        psi = laplace8.eigenvector(2, 3)
        mu = laplace8.eigenvalues()[2, 1]
        u = spectral_reference(laplace8, psi, 0.4)
        np.testing.assert_allclose(u.values, mu**-0.4 * psi.values, atol=1e-13)

    def test_fast_matches_dense(self, rng):
        op = EllipticOperator(GridSpec.square(16))
        b = GridFunction(op.grid, rng.standard_normal(op.grid.K))
        fast = spectral_reference(op, b, 0.3, "fast")
        dense = spectral_reference(op, b, 0.3, "dense")
        assert (fast - dense).norm() <= 1e-11 * dense.norm()

    def test_rejects_bad_requests(self, laplace8, variable_op, grid8):
        b = GridFunction(grid8, np.ones(grid8.K))
        with pytest.raises(DomainError):
            spectral_reference(laplace8, b, 1.2)
        with pytest.raises(ConfigError):
            spectral_reference(variable_op, GridFunction(variable_op.grid, np.ones(variable_op.grid.K)),
                               0.5, "fast")


class TestHelpers:
    def test_sgn_values(self):
        g = GridSpec(4, 4)
        f = rhs_library("sgn", g).as_array()
        # x1 = 0.5 sits on the middle column
        assert f[0, 1] == 0.0
        assert f[0, 0] == 1.0 and f[0, 2] == -1.0

    def test_bubble_value(self):
        g = GridSpec(2, 2)
        assert rhs_library("bubble", g).values[0] == pytest.approx(0.0625)

    def test_unknown_rhs(self, grid8):
        with pytest.raises(ConfigError):
            rhs_library("nope", grid8)

    def test_error_norms(self, grid8):
        ref = GridFunction(grid8, np.ones(grid8.K))
        assert error_norms(ref, ref) == (0.0, 0.0)
        eps, eps_inf = error_norms(ref * 1.01, ref)
        assert eps == pytest.approx(0.01) and eps_inf == pytest.approx(0.01)
        with pytest.raises(ZeroDivisionError):
            error_norms(ref, GridFunction.zeros(grid8))

    def test_normalized_solution(self, grid8):
        u, umax = normalized_solution(GridFunction(grid8, np.full(grid8.K, 3.0)))
        assert umax == 3.0 and np.all(u.values == 1.0)
        with pytest.raises(DomainError):
            normalized_solution(GridFunction(grid8, -np.ones(grid8.K)))

    def test_scaling_policies(self, laplace8, grid8):
        from fracpow import EllipticCoeffs, min_eigenvalue
        mu1 = min_eigenvalue(laplace8)
        assert scaling_delta(laplace8) == 1.0
        assert scaling_delta(laplace8, "eigenvalue") == mu1
        small = EllipticOperator(grid8, EllipticCoeffs(a=0.01))
        assert scaling_delta(small) == pytest.approx(min_eigenvalue(small))
        with pytest.raises(ConfigError):
            scaling_delta(laplace8, 2 * mu1)


class TestFracApply:
    @pytest.mark.parametrize("scaling", ["auto", "eigenvalue"])
    def test_eigenvector_commutes(self, laplace8, scaling):
        plan = build_plan(0.6, "midpoint", M=40, kappa=3)
        psi = laplace8.eigenvector(3, 1)
        mu = laplace8.eigenvalues()[0, 2]
        res = frac_apply_inverse(laplace8, psi, plan, scaling=scaling)
        factor = mode_response(0.6, plan, mu, res.delta)
        np.testing.assert_allclose(res.u.values, factor * psi.values, rtol=1e-10, atol=1e-14)

    def test_linearity(self, laplace8, grid8, rng):
        plan = build_plan(0.25, M=30)
        b1, b2 = (GridFunction(grid8, rng.standard_normal(grid8.K)) for _ in range(2))
        u1 = frac_apply_inverse(laplace8, b1, plan).u
        u2 = frac_apply_inverse(laplace8, b2, plan).u
        u12 = frac_apply_inverse(laplace8, 2 * b1 - 3 * b2, plan).u
        assert (u12 - (2 * u1 - 3 * u2)).norm() <= 1e-12 * u12.norm()

    def test_sgn_symmetries(self):
        op = EllipticOperator(GridSpec.square(32))
        u = frac_apply_inverse(op, rhs_library("sgn", op.grid), build_plan(0.5, M=50)).u.as_array()
        scale = np.abs(u).max()
        np.testing.assert_allclose(u, u.T, atol=1e-10 * scale)
        np.testing.assert_allclose(u, -u[:, ::-1], atol=1e-10 * scale)
        np.testing.assert_allclose(u, -u[::-1, :], atol=1e-10 * scale)

    def test_error_decreases_with_M(self):
        op = EllipticOperator(GridSpec.square(32))
        b = rhs_library("xy", op.grid)
        ref = spectral_reference(op, b, 0.5)
        errs = [error_norms(frac_apply_inverse(op, b, build_plan(0.5, M=M)).u, ref)[0]
                for M in (25, 50, 100)]
        assert errs[0] > errs[1] > errs[2]
        # second order in M: each halving of the step gains roughly four
        assert 2 < errs[0] / errs[1] < 8

    def test_eq23_operator_path(self):
        op = EllipticOperator(GridSpec.square(16))
        b = rhs_library("bubble", op.grid)
        ref = spectral_reference(op, b, 0.75)
        u = frac_apply_inverse(op, b, build_plan(0.75, "midpoint", M=200, kappa=2, repr="eq23")).u
        assert error_norms(u, ref)[0] < 1e-4

    def test_workers_do_not_change_result(self, rng):
        op = EllipticOperator(GridSpec.square(16))
        b = GridFunction(op.grid, rng.standard_normal(op.grid.K))
        plan = build_plan(0.1, "simpson", M=20)
        serial = frac_apply_inverse(op, b, plan, SolveConfig("cg")).u
        threaded = frac_apply_inverse(op, b, plan, SolveConfig("cg"), workers=4).u
        np.testing.assert_array_equal(serial.values, threaded.values)

    def test_variable_coefficients_via_cg(self, variable_op, rng):
        b = GridFunction(variable_op.grid, rng.standard_normal(variable_op.grid.K))
        plan = build_plan(0.5, "midpoint", M=2000, kappa=3)
        res = frac_apply_inverse(variable_op, b, plan, scaling="eigenvalue")
        ref = spectral_reference(variable_op, b, 0.5)
        assert error_norms(res.u, ref)[0] < 1e-6
        assert res.total_solver_iterations > 0

    def test_metadata(self, laplace8, grid8):
        res = frac_apply_inverse(laplace8, rhs_library("xy", grid8), build_plan(0.9, M=10))
        meta = res.metadata()
        assert meta["alpha"] == 0.9 and meta["M"] == 10 and meta["node_count"] == 10
