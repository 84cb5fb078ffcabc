#!/usr/bin/env python3
"""Watching the level-count central limit theorems converge.

Convergence here is logarithmic in the tree size, so no single n looks
impressively normal; what the theory owns is the direction of travel.  This
script climbs an n-ladder and tracks (i) the KS distance of the fixed-level
normalization to the standard normal and (ii) the cross-level covariance
against its 1/(i+j-1) limit.  Writes fixed-k-hist.svg for the largest rung.
"""

import math
import os

import numpy as np

from treelevels import (
    TreeConfig,
    empirical_cov,
    ks_one_sample,
    level_counts_batch,
    normalize_fixed_k,
    normalize_multivariate,
)
from treelevels.reporting import svg_histogram
from treelevels.verify import standard_normal_cdf

HERE = os.path.dirname(os.path.abspath(__file__))
SEED = 5
REPS = 3000

print("=== fixed level k=2: KS distance to the standard normal ===")
last_values = None
for n in (1_000, 10_000, 100_000):
    counts = level_counts_batch(TreeConfig(n=n, seed=SEED), [2], REPS)[:, 0]
    values = np.array([normalize_fixed_k(int(x), n, 2) for x in counts])
    rep = ks_one_sample(values, standard_normal_cdf)
    print(
        f"  n={n:>7}: distance {rep.statistic:.4f}, sample mean "
        f"{values.mean():+.3f}, sample var {values.var(ddof=1):.3f}"
    )
    last_values = values
print("the residual mean offset decays like 1/sqrt(log n): slow but steady.")
print()

print("=== covariance of levels (1, 2) vs the 1/(1+2-1) = 0.5 limit ===")
for n in (1_000, 100_000):
    counts = level_counts_batch(TreeConfig(n=n, seed=SEED), [1, 2], REPS)
    vals = np.array(
        [normalize_multivariate(row, n, [1, 2]) for row in counts]
    )
    est = empirical_cov(vals)
    print(
        f"  n={n:>7}: cov {est.cov[0, 1]:.4f} "
        f"(jackknife se {est.se[0, 1]:.4f})"
    )
print()

svg_histogram(
    last_values,
    os.path.join(HERE, "fixed-k-hist.svg"),
    "normalized level-2 count at n=100000 vs standard normal",
    density=lambda x: np.exp(-x * x / 2) / math.sqrt(2 * math.pi),
)
print("wrote fixed-k-hist.svg")
