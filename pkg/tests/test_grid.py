import math

import numpy as np
import pytest
import scipy.linalg

from fracpow import (
    ConfigError,
    EllipticCoeffs,
    EllipticOperator,
    GridFunction,
    GridSpec,
    min_eigenvalue,
    normalize,
)
from fracpow.grid import min_eigenvalue_bound


def mu1_closed_form(grid, a=1.0, c=0.0):
    h1, h2 = grid.h1, grid.h2
    return a * (4 / h1**2 * math.sin(math.pi * h1 / (2 * grid.l1)) ** 2
                + 4 / h2**2 * math.sin(math.pi * h2 / (2 * grid.l2)) ** 2) + c


def random_function(grid, rng):
    return GridFunction(grid, rng.standard_normal(grid.K))


class TestGridSpec:
    def test_derived_quantities(self):
        g = GridSpec(4, 6, 2.0, 3.0)
        assert (g.h1, g.h2, g.K, g.shape) == (0.5, 0.5, 15, (5, 3))

    def test_layout_is_i1_fastest(self):
        g = GridSpec(4, 3)
        X1, X2 = g.coordinates()
        f = GridFunction.from_callable(g, lambda x1, x2: 10 * x2 + x1)
        np.testing.assert_allclose(f.values[:3], 10 / 3 + np.array([0.25, 0.5, 0.75]))
        assert X1.shape == g.shape

    @pytest.mark.parametrize("N", [1, 0, 2.5])
    def test_rejects_small_grids(self, N):
        with pytest.raises(ConfigError):
            GridSpec(N, 4)


class TestGridFunction:
    def test_inner_product_weight(self, grid8):
        one = GridFunction(grid8, np.ones(grid8.K))
        assert one.inner(one) == pytest.approx(grid8.K * grid8.h1 * grid8.h2)

    def test_wrong_length(self, grid8):
        with pytest.raises(ConfigError):
            GridFunction(grid8, np.ones(grid8.K + 1))

    def test_immutable(self, grid8):
        f = GridFunction.zeros(grid8)
        with pytest.raises(ValueError):
            f.values[0] = 1.0
        with pytest.raises(AttributeError):
            f.values = np.ones(grid8.K)

    @pytest.mark.parametrize("suffix", [".csv", ".bin"])
    def test_round_trip(self, tmp_path, rng, suffix):
        g = GridSpec(5, 7, 1.5, 0.5)
        f = random_function(g, rng)
        path = f.save(tmp_path / f"u{suffix}")
        back = GridFunction.load(path)
        assert back.grid == g
        np.testing.assert_array_equal(back.values, f.values)


class TestApply:
    def test_first_eigenpair(self, laplace8, grid8):
        psi = laplace8.eigenvector(1, 1)
        mu = mu1_closed_form(grid8)
        np.testing.assert_allclose(laplace8(psi).values, mu * psi.values, rtol=1e-12)
        dense = scipy.linalg.eigvalsh(laplace8.assemble().toarray())
        assert dense[0] == pytest.approx(mu, rel=1e-12)

    def test_zero(self, laplace8, grid8):
        assert not np.any(laplace8(GridFunction.zeros(grid8)).values)

    def test_reaction_term_adds(self, grid8, laplace8, rng):
        u = random_function(grid8, rng)
        shifted = EllipticOperator(grid8, EllipticCoeffs(a=1.0, c=1.0))
        np.testing.assert_allclose(shifted(u).values, (laplace8(u) + u).values, rtol=1e-13)

    def test_matches_assembled_matrix(self, variable_op, rng):
        u = random_function(variable_op.grid, rng)
        np.testing.assert_allclose(variable_op.assemble() @ u.values,
                                   variable_op(u).values, rtol=1e-13)

    def test_grid_mismatch(self, laplace8):
        with pytest.raises(ConfigError):
            laplace8(GridFunction.zeros(GridSpec.square(6)))

    def test_symmetry(self, variable_op, rng):
        A = variable_op
        for _ in range(100):
            u, w = random_function(A.grid, rng), random_function(A.grid, rng)
            Au = A(u)
            assert abs(Au.inner(w) - u.inner(A(w))) <= 1e-12 * Au.norm() * w.norm()

    def test_positivity(self, variable_op, rng):
        bound = min_eigenvalue(variable_op)
        for _ in range(100):
            u = random_function(variable_op.grid, rng)
            assert variable_op(u).inner(u) / u.inner(u) >= bound - 1e-12

    def test_locality(self, variable_op, rng):
        g = variable_op.grid
        u = random_function(g, rng)
        i1, i2 = 3, 2
        bumped = u.as_array().copy()
        bumped[i2, i1] += 1.0
        diff = (variable_op(GridFunction(g, bumped)) - variable_op(u)).as_array()
        changed = set(zip(*np.nonzero(diff)))
        assert changed <= {(i2, i1), (i2 + 1, i1), (i2 - 1, i1), (i2, i1 + 1), (i2, i1 - 1)}
        assert (i2, i1) in changed

    def test_consistency_order(self):
        errs = []
        for N in (16, 32):
            g = GridSpec.square(N)
            u = GridFunction.from_callable(g, lambda x1, x2: np.sin(np.pi * x1) * np.sin(np.pi * x2))
            errs.append((EllipticOperator(g)(u) - 2 * math.pi**2 * u).max_norm())
        assert 3.6 <= errs[0] / errs[1] <= 4.4

    def test_rejects_bad_coefficients(self, grid8):
        from fracpow import DomainError
        with pytest.raises(DomainError):
            EllipticOperator(grid8, EllipticCoeffs(a=0.0))
        with pytest.raises(DomainError):
            EllipticOperator(grid8, EllipticCoeffs(c=-1.0))


class TestEigenvalues:
    def test_min_eigenvalue_matches_dense(self, laplace8):
        dense = scipy.linalg.eigvalsh(laplace8.assemble().toarray())
        assert min_eigenvalue(laplace8) == pytest.approx(dense[0], rel=1e-12)

    def test_all_eigenvalues_match_dense(self):
        op = EllipticOperator(GridSpec(6, 5, 1.0, 2.0), EllipticCoeffs(a=1.7, c=0.3))
        dense = scipy.linalg.eigvalsh(op.assemble().toarray())
        np.testing.assert_allclose(np.sort(op.eigenvalues().ravel()), dense, rtol=1e-12)

    def test_continuum_limit(self):
        assert min_eigenvalue(EllipticOperator(GridSpec.square(512))) == \
            pytest.approx(2 * math.pi**2, rel=1e-5)

    def test_reaction_shift(self, grid8, laplace8):
        shifted = EllipticOperator(grid8, EllipticCoeffs(c=5.0))
        assert min_eigenvalue(shifted) == pytest.approx(min_eigenvalue(laplace8) + 5, rel=1e-14)

    def test_variable_bound_flagged(self, variable_op):
        value, exact = min_eigenvalue_bound(variable_op)
        assert not exact
        dense = scipy.linalg.eigvalsh(variable_op.assemble().toarray())
        assert 0 < value <= dense[0]


class TestNormalize:
    def test_rayleigh_quotient(self, variable_op, rng):
        op_n, delta = normalize(variable_op)
        assert delta == min_eigenvalue(variable_op)
        for _ in range(100):
            u = random_function(op_n.grid, rng)
            assert op_n(u).inner(u) / u.inner(u) >= 1 - 1e-12

    def test_smallest_eigenvalue_is_one(self, laplace8):
        op_n, _ = normalize(laplace8)
        dense = scipy.linalg.eigvalsh(op_n.assemble().toarray())
        assert dense[0] == pytest.approx(1.0, abs=1e-12)

    def test_fractional_power_rescaling(self, laplace8, grid8, rng):
        alpha = 0.35
        b = rng.standard_normal(grid8.K)
        op_n, delta = normalize(laplace8)

        def frac(matrix, v):
            mu, psi = scipy.linalg.eigh(matrix)
            return psi @ (mu ** (-alpha) * (psi.T @ v))

        direct = frac(laplace8.assemble().toarray(), b)
        rescaled = frac(op_n.assemble().toarray(), delta ** (-alpha) * b)
        np.testing.assert_allclose(rescaled, direct, rtol=1e-11)
