#!/usr/bin/env python3
"""The continuous-time route to the same tree law.

Give every individual an independent unit-mean exponential clock; whenever a
clock rings its owner gains a child.  Stop at the n-th birth, and the
generation sizes of the population match, in law, the level counts of a
uniform random recursive tree on n + 1 vertices.  This script samples both
sides and compares them.
"""

import math

import numpy as np

from treelevels import (
    InterarrivalSpec,
    TreeConfig,
    ks_two_sample,
    level_counts_batch,
    mean_birth_time,
    simulate_cmj,
    simulate_cmj_until_n_births,
)
from treelevels.rng import stream

SEED = 11
spec = InterarrivalSpec.exponential(1.0)

print("=== generation counts at fixed horizons ===")
print("with unit-mean exponential clocks the generation-k population at")
print("time t has mean t**k / k!:")
reps = 4000
for t, k_max in ((2.0, 3), (4.0, 4)):
    acc = np.zeros(k_max + 1)
    for i in range(reps):
        acc += simulate_cmj(spec, t, k_max, stream(SEED, f"demo-cmj:{t}", i)).counts
    means = acc / reps
    targets = [t**k / math.factorial(k) for k in range(1, k_max + 1)]
    print(f"  t={t}: mc means {np.round(means[1:], 3).tolist()}")
    print(f"        targets  {[round(x, 3) for x in targets]}")
print()

print("=== stopping at the n-th birth ===")
n, k, reps = 200, 2, 4000
taus = np.empty(reps)
gen_counts = np.empty(reps, dtype=np.int64)
for i in range(reps):
    tau, gc = simulate_cmj_until_n_births(spec, n, k, stream(SEED, "demo-tau", i))
    taus[i] = tau
    gen_counts[i] = gc.count(k)
print(f"mean birth time of individual {n}: {taus.mean():.4f}")
print(f"harmonic-number prediction:        {mean_birth_time(n):.4f}")
print()

tree_counts = level_counts_batch(TreeConfig(n=n, seed=SEED), [k], reps)[:, 0]
report = ks_two_sample(tree_counts, gen_counts)
print(f"two-sample KS between tree level-{k} counts and generation-{k}")
print(
    f"counts at the {n}-th birth: distance {report.statistic:.4f}, "
    f"p = {report.p_value:.3f} -> {'same law' if report.passed else 'MISMATCH'}"
)
print()
print("tree mean", tree_counts.mean(), "vs branching mean", gen_counts.mean())
