import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treelevels import trees
from treelevels.branching import mean_birth_time
from treelevels.errors import ResourceBudgetError
from treelevels.trees import (
    TreeConfig,
    enumerate_exact_distribution,
    exact_mean_profile,
    generate_profile,
    level_counts_batch,
)


class TestConfig:
    def test_rejects_negative_n(self):
        with pytest.raises(ValueError):
            TreeConfig(n=-1, seed=0)

    def test_rejects_bad_cap(self):
        with pytest.raises(ValueError):
            TreeConfig(n=3, seed=0, level_cap=0)


class TestGenerateProfile:
    def test_empty_tree(self):
        p = generate_profile(TreeConfig(n=0, seed=1))
        assert p.n == 0 and p.counts.sum() == 0

    def test_single_vertex(self):
        p = generate_profile(TreeConfig(n=1, seed=1), replicate=5)
        assert p.count(1) == 1 and p.max_level == 1

    def test_two_vertices_both_shapes_occur(self):
        cfg = TreeConfig(n=2, seed=7)
        seen = Counter(tuple(generate_profile(cfg, r).counts[1:]) for r in range(600))
        assert set(seen) == {(2,), (1, 1)}
        assert 200 < seen[(2,)] < 400

    def test_bitwise_determinism(self):
        for n in (5, 40, 500):
            cfg = TreeConfig(n=n, seed=123)
            a = generate_profile(cfg, replicate=9)
            b = generate_profile(cfg, replicate=9)
            assert np.array_equal(a.counts, b.counts)

    def test_distinct_replicates_differ(self):
        cfg = TreeConfig(n=200, seed=123)
        a = generate_profile(cfg, 0).counts
        b = generate_profile(cfg, 1).counts
        assert a.shape != b.shape or not np.array_equal(a, b)

    @settings(max_examples=40, deadline=None)
    @given(
        n=st.integers(min_value=1, max_value=300),
        seed=st.integers(min_value=0, max_value=2**32),
        replicate=st.integers(min_value=0, max_value=1000),
    )
    def test_profile_invariants(self, n, seed, replicate):
        p = generate_profile(TreeConfig(n=n, seed=seed), replicate)
        assert p.counts[1:].sum() + p.overflow == n
        assert p.count(1) >= 1
        assert p.max_level <= n
        assert (p.counts >= 0).all()

    def test_level_cap_tail_bucket(self):
        cfg = TreeConfig(n=50, seed=3, level_cap=1)
        p = generate_profile(cfg, 0)
        assert p.counts.shape[0] == 2
        assert p.count(1) + p.overflow == 50
        assert p.capped == (p.overflow > 0)
        uncapped = generate_profile(TreeConfig(n=50, seed=3), 0)
        assert p.count(1) == uncapped.count(1)

    def test_as_array_padding(self):
        p = generate_profile(TreeConfig(n=3, seed=0), 2)
        arr = p.as_array(10)
        assert arr.shape == (10,) and arr.sum() == 3


class TestBatch:
    def test_matches_single_replicates_small_and_large(self):
        for n in (6, 64, 120, 3000):
            cfg = TreeConfig(n=n, seed=11)
            ks = [1, 2, 3]
            batch = level_counts_batch(cfg, ks, 12)
            for r in range(12):
                p = generate_profile(cfg, r)
                assert batch[r].tolist() == [p.count(k) for k in ks], (n, r)

    def test_offset_block_is_a_slice(self):
        cfg = TreeConfig(n=30, seed=5)
        full = level_counts_batch(cfg, [1, 2], 40)
        part = level_counts_batch(cfg, [1, 2], 10, first_replicate=25)
        assert np.array_equal(part, full[25:35])

    def test_rejects_level_beyond_cap(self):
        cfg = TreeConfig(n=10, seed=0, level_cap=2)
        with pytest.raises(ValueError):
            level_counts_batch(cfg, [3], 4)

    def test_rejects_bad_level(self):
        with pytest.raises(ValueError):
            level_counts_batch(TreeConfig(n=10, seed=0), [0], 4)

    def test_zero_replicates(self):
        out = level_counts_batch(TreeConfig(n=10, seed=0), [1], 0)
        assert out.shape == (0, 1)


class TestEnumeration:
    def test_single_vertex(self):
        assert enumerate_exact_distribution(1, 1) == {1: Fraction(1)}

    def test_two_vertices(self):
        assert enumerate_exact_distribution(2, 1) == {
            1: Fraction(1, 2),
            2: Fraction(1, 2),
        }

    def test_three_vertices_level_two(self):
        assert enumerate_exact_distribution(3, 2) == {
            0: Fraction(1, 6),
            1: Fraction(2, 3),
            2: Fraction(1, 6),
        }

    def test_level_beyond_n(self):
        assert enumerate_exact_distribution(2, 5) == {0: Fraction(1)}

    @pytest.mark.parametrize("n", range(1, 8))
    def test_probabilities_sum_to_one(self, n):
        for k in range(1, n + 1):
            assert sum(enumerate_exact_distribution(n, k).values()) == 1

    def test_rejects_large_n(self):
        with pytest.raises(ValueError):
            enumerate_exact_distribution(10, 1)

    def test_mean_matches_dp_oracle(self):
        # two independent exact routes to the same expectation
        for n in range(1, 8):
            means = exact_mean_profile(n, n)
            for k in range(1, n + 1):
                pmf = enumerate_exact_distribution(n, k)
                exact = float(sum(v * p for v, p in pmf.items()))
                assert math.isclose(means[k], exact, rel_tol=1e-12, abs_tol=1e-12)


class TestExactMeanProfile:
    def test_level_one_is_harmonic(self):
        for n in (1, 2, 3, 10, 1000):
            means = exact_mean_profile(n, 3)
            assert math.isclose(means[1], mean_birth_time(n), rel_tol=1e-12)

    def test_known_values(self):
        assert math.isclose(exact_mean_profile(3, 1)[1], 11.0 / 6.0, rel_tol=1e-14)
        assert math.isclose(exact_mean_profile(2, 2)[2], 0.5, rel_tol=1e-14)
        assert exact_mean_profile(1, 2)[2] == 0.0

    def test_total_mass_is_n(self):
        # levels up to n cover every vertex
        n = 40
        means = exact_mean_profile(n, n)
        assert math.isclose(means.sum(), n, rel_tol=1e-12)

    def test_against_rational_dp(self):
        n, k_max = 200, 8
        f = [Fraction(0)] * (k_max + 1)
        f[1] = Fraction(1)
        totals = list(f)
        for m in range(2, n + 1):
            inv = Fraction(1, m)
            f = [
                f[k] * (1 - inv) + (f[k - 1] if k else Fraction(0)) * inv
                for k in range(k_max + 1)
            ]
            totals = [a + b for a, b in zip(totals, f)]
        got = exact_mean_profile(n, k_max)
        for k in range(1, k_max + 1):
            assert math.isclose(got[k], float(totals[k]), rel_tol=1e-12)

    def test_budget_guard(self):
        with pytest.raises(ResourceBudgetError):
            exact_mean_profile(10**6, 200, work_budget=10**7)


class TestEmpiricalLaw:
    def test_small_tree_pmf_close_to_enumeration(self):
        # smoke-scale version of the acceptance check
        n, reps = 4, 40_000
        counts = level_counts_batch(TreeConfig(n=n, seed=77), [1, 2], reps)
        for j, k in enumerate((1, 2)):
            pmf = enumerate_exact_distribution(n, k)
            obs = np.bincount(counts[:, j], minlength=n + 1)
            tv = 0.5 * sum(
                abs(obs[v] / reps - float(pmf.get(v, 0))) for v in range(n + 1)
            )
            assert tv < 0.02

    def test_mean_level_one_near_harmonic(self):
        n, reps = 50, 20_000
        counts = level_counts_batch(TreeConfig(n=n, seed=5), [1], reps)[:, 0]
        se = counts.std(ddof=1) / math.sqrt(reps)
        assert abs(counts.mean() - mean_birth_time(n)) < 4 * se
