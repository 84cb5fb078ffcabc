import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treelevels.errors import ConditioningError, ResourceBudgetError
from treelevels.limits import (
    GridSpec,
    KernelMatrix,
    limit_covariance,
    pathwise_truncation_horizon,
    sample_kernel,
    sample_pathwise,
    stationary_covariance,
)
from treelevels.rng import stream


class TestGridSpec:
    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            GridSpec(np.array([0.0, 1.0]))

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            GridSpec(np.array([2.0, 1.0]))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            GridSpec(np.array([]))


class TestCovariance:
    def test_values(self):
        assert limit_covariance(1.0, 1.0) == 0.5
        assert math.isclose(limit_covariance(1.0, 2.0), 1.0 / 3.0)

    def test_diagonal_is_marginal_variance(self):
        for u in (0.5, 1.0, 4.0):
            assert math.isclose(limit_covariance(u, u), 1.0 / (2 * u))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            limit_covariance(0.0, 1.0)

    def test_stationary_values(self):
        assert stationary_covariance(0.0) == 0.5
        assert math.isclose(stationary_covariance(math.log(2.0)), 0.4)
        assert stationary_covariance(50.0) < 1e-20

    def test_stationary_even_and_decreasing(self):
        lags = np.linspace(0.0, 5.0, 30)
        vals = [stationary_covariance(s) for s in lags]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        for s in lags:
            assert stationary_covariance(-s) == stationary_covariance(s)

    @settings(max_examples=100)
    @given(
        a=st.floats(min_value=-3.0, max_value=3.0, allow_nan=False),
        s=st.floats(min_value=-6.0, max_value=6.0, allow_nan=False),
    )
    def test_stationary_transform_identity(self, a, s):
        lhs = stationary_covariance(s)
        rhs = limit_covariance(math.exp(2 * a + 2 * s), math.exp(2 * a)) * math.exp(
            2 * a + s
        )
        assert math.isclose(lhs, rhs, rel_tol=1e-12)


class TestKernelFactor:
    @pytest.mark.parametrize(
        "u",
        [
            np.array([1.0]),
            np.array([1.0, 2.0, 4.0]),
            np.arange(1.0, 65.0),
            np.logspace(-2, 4, 64),
            np.linspace(0.5, 1.5, 64),
        ],
    )
    def test_factor_reconstructs_kernel(self, u):
        km = KernelMatrix(GridSpec(u))
        L = km.factor()
        assert (np.diag(L) > 0).all()
        assert np.allclose(np.triu(L, 1), 0.0)
        assert km.max_reconstruction_error() <= 1e-10

    @settings(max_examples=30, deadline=None)
    @given(
        m=st.integers(min_value=2, max_value=64),
        seed=st.integers(min_value=0, max_value=10**6),
    )
    def test_factor_succeeds_on_random_grids(self, m, seed):
        g = np.random.default_rng(seed)
        u = np.sort(g.uniform(0.05, 50.0, m))
        u = u[np.concatenate([[True], np.diff(u) > 1e-6])]
        km = KernelMatrix(GridSpec(u))
        assert (np.diag(km.factor()) > 0).all()
        assert km.max_reconstruction_error() <= 1e-10

    def test_near_duplicate_names_pair(self):
        with pytest.raises(ConditioningError) as err:
            KernelMatrix(GridSpec(np.array([0.5, 1.0, 1.0 + 1e-14]))).factor()
        assert err.value.pair is not None
        lo, hi = err.value.pair
        assert math.isclose(lo, 1.0) and math.isclose(hi, 1.0 + 1e-14)


class TestKernelSampler:
    def test_deterministic_given_stream(self):
        grid = GridSpec(np.array([1.0, 3.0]))
        a = sample_kernel(grid, stream(5, "k", 0), size=4)
        b = sample_kernel(grid, stream(5, "k", 0), size=4)
        assert np.array_equal(a, b)

    def test_moments(self):
        grid = GridSpec(np.array([1.0, 2.0]))
        x = sample_kernel(grid, stream(5, "k", 1), size=60_000)
        assert abs(x[:, 0].var(ddof=1) - 0.5) < 0.02
        assert abs(np.cov(x.T)[0, 1] - 1.0 / 3.0) < 0.02
        assert abs(x.mean()) < 0.02

    def test_single_sample_shape(self):
        grid = GridSpec(np.array([1.0, 2.0, 3.0]))
        assert sample_kernel(grid, stream(5, "k", 2)).shape == (3,)


class FrozenZeroRng:
    """Stands in for a Generator; every Gaussian increment is zero."""

    def standard_normal(self, size):
        return np.zeros(size)


class TestPathwiseSampler:
    def test_zero_increments_give_zero_process(self):
        grid = GridSpec(np.array([1.0, 2.0]))
        out = sample_pathwise(grid, 1e-2, 1e-6, FrozenZeroRng())
        assert np.array_equal(out, np.zeros(2))

    def test_truncation_horizon_formula(self):
        y = pathwise_truncation_horizon(1.0, 1e-8)
        assert math.isclose(math.exp(-2 * y) / 2.0, 1e-8, rel_tol=1e-12)

    def test_grid_budget(self):
        grid = GridSpec(np.array([1.0]))
        with pytest.raises(ResourceBudgetError):
            sample_pathwise(grid, 1e-9, 1e-8, stream(5, "p", 0))

    def test_marginal_variance(self):
        grid = GridSpec(np.array([1.0]))
        x = sample_pathwise(grid, 1e-3, 1e-8, stream(5, "p", 1), size=20_000)
        assert abs(x[:, 0].var(ddof=1) - 0.5) < 0.025

    def test_covariance_grid_against_kernel(self):
        grid = GridSpec(np.array([1.0, 2.0, 4.0]))
        x = sample_pathwise(grid, 1e-3, 1e-8, stream(5, "p", 2), size=20_000)
        emp = np.cov(x.T)
        target = KernelMatrix(grid).values
        assert np.abs(emp - target).max() < 0.02

    def test_longer_horizon_shrinks_variance_gap(self):
        # same increments, growing truncation horizon: the missing tail
        # variance exp(-2Y)/2 dominates the gap, so it must shrink
        grid = GridSpec(np.array([1.0]))
        gaps = []
        for tol in (2e-1, 2e-2, 2e-3):
            x = sample_pathwise(grid, 1e-2, tol, stream(5, "ppp", 3), size=30_000)
            gaps.append(abs(x[:, 0].var(ddof=1) - 0.5))
        assert gaps[2] < gaps[0]
        assert gaps[1] < gaps[0]

    def test_batch_consistency(self):
        grid = GridSpec(np.array([1.0, 2.0]))
        a = sample_pathwise(grid, 1e-2, 1e-6, stream(9, "p", 4), size=3)
        b0 = sample_pathwise(grid, 1e-2, 1e-6, stream(9, "p", 4))
        assert np.allclose(a[0], b0)
