#!/usr/bin/env python3
"""Exploratory only: how the whole normalized curve behaves in u.

The finite-dimensional laws of the intermediate-level statistic converge to
the limit process, but whether the convergence holds at the level of whole
paths (uniformly in u on compacts) is an open question.  Nothing here is
asserted or tested; this script just plots sup-norm diagnostics so the
curious can stare at them.

Writes sup-norm-diagnostic.svg next to the script.
"""

import math
import os

import numpy as np

from treelevels import (
    GridSpec,
    TreeConfig,
    level_counts_batch,
    normalize_intermediate,
    sample_kernel,
)
from treelevels.reporting import svg_histogram
from treelevels.rng import stream
from treelevels.suites import intermediate_level_scale

HERE = os.path.dirname(os.path.abspath(__file__))
SEED = 31
REPS = 2000
N = 100_000

k_n = intermediate_level_scale(N)
us = np.array([0.5, 0.75, 1.0, 1.25, 1.5, 2.0])
ms = sorted({math.floor(k_n * u) for u in us})
print(f"n = {N}, k_n = {k_n}, levels used: {ms}")

counts = level_counts_batch(TreeConfig(n=N, seed=SEED), ms, REPS)
col = {m: i for i, m in enumerate(ms)}
stat_curves = np.empty((REPS, len(us)))
for j, u in enumerate(us):
    m = math.floor(k_n * u)
    stat_curves[:, j] = [
        normalize_intermediate(int(x), N, k_n, u) for x in counts[:, col[m]]
    ]

limit_curves = sample_kernel(GridSpec(us), stream(SEED, "demo-limit", 0), size=REPS)

sup_sim = np.abs(stat_curves).max(axis=1)
sup_lim = np.abs(limit_curves).max(axis=1)
print("sup over the u-grid of |normalized curve| (no assertion attached):")
print(
    f"  simulated trees: mean {sup_sim.mean():.3f}, "
    f"90th pct {np.quantile(sup_sim, 0.9):.3f}"
)
print(
    f"  limit process:   mean {sup_lim.mean():.3f}, "
    f"90th pct {np.quantile(sup_lim, 0.9):.3f}"
)
print()
print("whether the left column converges to the right one as n grows is,")
print("as far as this package knows, genuinely open; treat the numbers as")
print("scenery, not evidence.")

svg_histogram(
    sup_sim,
    os.path.join(HERE, "sup-norm-diagnostic.svg"),
    f"sup-norm of the normalized curve on {len(us)} u-points (n={N})",
)
print("wrote sup-norm-diagnostic.svg")
