"""Uniform random recursive trees and their level profiles.

A tree on ``n + 1`` vertices grows by attaching vertex ``v`` (for
``v = 1..n``) to a parent chosen uniformly among vertices ``0..v-1``; vertex
0 is the root.  This uniform attachment makes every recursive tree on the
same vertex set equally likely.  Only per-vertex depths are kept long enough
to histogram them; the tree itself is never stored.

Profiles are a pure function of ``(seed, n, level_cap, replicate)``: small
trees are generated in bulk straight from the counter-based Philox engine,
large trees one replicate at a time from an equally keyed numpy generator,
and in both regimes a replicate's profile is independent of how the work was
batched or threaded.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ResourceBudgetError
from .rng import bounded_uniform, derive_keys, philox_words_batch, stream

__all__ = [
    "TreeConfig",
    "LevelProfile",
    "generate_profile",
    "level_counts_batch",
    "enumerate_exact_distribution",
    "exact_mean_profile",
    "MEAN_PROFILE_WORK_BUDGET",
]

# Below this size, whole batches of trees are generated from vectorized
# Philox; above it, per-replicate numpy generators win.  Part of the profile
# definition: changing it would change which bits a replicate consumes.
_SMALL_N_CUTOFF = 64

_ENUMERATION_MAX_N = 9

MEAN_PROFILE_WORK_BUDGET = 10**8


@dataclass(frozen=True)
class TreeConfig:
    """Size, seed, and optional level cap for profile generation.

    ``n`` counts non-root vertices.  Levels above ``level_cap`` (when set)
    are aggregated into a tail bucket instead of being tracked one by one.
    """

    n: int
    seed: int
    level_cap: int | None = None

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"n must be >= 0, got {self.n}")
        if self.level_cap is not None and self.level_cap < 1:
            raise ValueError(f"level_cap must be >= 1, got {self.level_cap}")


@dataclass
class LevelProfile:
    """Occupancy counts of one simulated tree.

    ``counts[k]`` is the number of vertices at level ``k`` for
    ``k = 1..len(counts)-1`` (``counts[0]`` is always 0; the root is
    implicit).  ``overflow`` holds vertices beyond the level cap, and
    ``capped`` flags that aggregation happened.
    """

    n: int
    counts: np.ndarray
    overflow: int = 0
    capped: bool = False

    def count(self, k: int) -> int:
        if 0 < k < self.counts.shape[0]:
            return int(self.counts[k])
        return 0

    @property
    def max_level(self) -> int:
        nz = np.nonzero(self.counts)[0]
        return int(nz[-1]) if nz.size else 0

    def as_array(self, k_max: int) -> np.ndarray:
        """Counts for levels 1..k_max as a dense vector."""
        out = np.zeros(k_max, dtype=np.int64)
        upto = min(k_max, self.counts.shape[0] - 1)
        out[:upto] = self.counts[1 : upto + 1]
        return out


def _tree_tag(n: int) -> str:
    return f"tree:{n}"


def _small_batch_depths(cfg: TreeConfig, replicates: int, first_replicate: int) -> np.ndarray:
    """Depth matrix (replicates, n+1) for the vectorized small-tree path."""
    n = cfg.n
    idx = np.arange(first_replicate, first_replicate + replicates, dtype=np.uint64)
    k0, k1 = derive_keys(cfg.seed, _tree_tag(n), idx)
    words = philox_words_batch(k0, k1, n)
    parents = bounded_uniform(words, np.arange(1, n + 1, dtype=np.uint64))
    depths = np.zeros((replicates, n + 1), dtype=np.int8)
    for v in range(1, n + 1):
        col = np.take_along_axis(depths, parents[:, v - 1 : v], axis=1)
        depths[:, v] = col[:, 0] + 1
    return depths


@lru_cache(maxsize=4)
def _parent_bounds(n: int) -> np.ndarray:
    return np.arange(1, n + 1, dtype=np.int64)


def _depths_doubling(parents: np.ndarray) -> np.ndarray:
    """Per-vertex depths from parent pointers by pointer doubling.

    O(log height) vectorized passes; each pass squares the jump distance, so
    a tree of height h converges in ceil(log2(h)) iterations.
    """
    n = parents.shape[0]
    dtype = np.int32 if n < 2**31 - 1 else np.int64
    jump = np.empty(n + 1, dtype=dtype)
    jump[0] = 0
    jump[1:] = parents
    depth = np.ones(n + 1, dtype=dtype)
    depth[0] = 0
    while jump.any():
        depth += depth[jump]
        jump = jump[jump]
    return depth


def _large_depths(cfg: TreeConfig, replicate: int) -> np.ndarray:
    n = cfg.n
    gen = stream(cfg.seed, _tree_tag(n), replicate)
    parents = gen.integers(0, _parent_bounds(n), dtype=np.int64)
    return _depths_doubling(parents)


def _profile_from_depths(cfg: TreeConfig, depths: np.ndarray) -> LevelProfile:
    counts = np.bincount(depths[1:].astype(np.int64), minlength=1)
    counts[0] = 0
    cap = cfg.level_cap
    overflow = 0
    capped = False
    if cap is not None and counts.shape[0] > cap + 1:
        overflow = int(counts[cap + 1 :].sum())
        counts = counts[: cap + 1].copy()
        capped = overflow > 0
    return LevelProfile(n=cfg.n, counts=counts, overflow=overflow, capped=capped)


def generate_profile(cfg: TreeConfig, replicate: int = 0) -> LevelProfile:
    """Level profile of one uniformly random recursive tree.

    The random stream is derived from ``(cfg.seed, cfg.n, replicate)``; equal
    arguments give bitwise-equal profiles on any machine, thread, or batch.
    """
    if cfg.n == 0:
        return LevelProfile(n=0, counts=np.zeros(1, dtype=np.int64))
    if cfg.n <= _SMALL_N_CUTOFF:
        depths = _small_batch_depths(cfg, 1, replicate)[0]
    else:
        depths = _large_depths(cfg, replicate)
    return _profile_from_depths(cfg, depths)


def level_counts_batch(
    cfg: TreeConfig,
    ks,
    replicates: int,
    first_replicate: int = 0,
) -> np.ndarray:
    """Counts at the requested levels for a contiguous block of replicates.

    Returns an int64 array of shape ``(replicates, len(ks))`` whose row ``r``
    equals ``[generate_profile(cfg, first_replicate + r).count(k) for k in ks]``.
    """
    ks = [int(k) for k in ks]
    if any(k < 1 for k in ks):
        raise ValueError("levels must be >= 1")
    if cfg.level_cap is not None and any(k > cfg.level_cap for k in ks):
        raise ValueError("requested level exceeds level_cap")
    out = np.zeros((replicates, len(ks)), dtype=np.int64)
    if cfg.n == 0 or replicates == 0:
        return out
    if cfg.n <= _SMALL_N_CUTOFF:
        depths = _small_batch_depths(cfg, replicates, first_replicate)
        body = depths[:, 1:]
        for j, k in enumerate(ks):
            out[:, j] = (body == k).sum(axis=1)
        return out
    k_arr = np.asarray(ks, dtype=np.int64)
    k_top = int(k_arr.max())
    for r in range(replicates):
        depths = _large_depths(cfg, first_replicate + r)
        counts = np.bincount(depths[1:], minlength=k_top + 1)
        out[r] = counts[k_arr]
    return out


@lru_cache(maxsize=16)
def _enumerate_level_counters(n: int):
    """Counter of X_n(k) values over all n! equiprobable trees, per level k."""
    by_level = {k: Counter() for k in range(1, n + 1)}
    depth = [0] * (n + 2)
    level_count = [0] * (n + 2)

    def rec(v):
        if v > n + 1:
            for k in range(1, n + 1):
                by_level[k][level_count[k]] += 1
            return
        for p in range(1, v):
            d = depth[p] + 1
            depth[v] = d
            level_count[d] += 1
            rec(v + 1)
            level_count[d] -= 1

    if n >= 1:
        rec(2)
    return by_level


def enumerate_exact_distribution(n: int, k: int) -> dict[int, Fraction]:
    """Exact law of the level-k count by exhaustive tree enumeration.

    Walks all ``n!`` equiprobable recursive trees on ``n + 1`` vertices, so
    ``n`` is capped at 9 (362880 trees).  Probabilities are exact rationals
    and sum to 1.
    """
    if n > _ENUMERATION_MAX_N:
        raise ValueError(
            f"n={n} rejected: exhaustive enumeration is capped at "
            f"n={_ENUMERATION_MAX_N} ({math.factorial(_ENUMERATION_MAX_N)} trees)"
        )
    if n < 0:
        raise ValueError("n must be >= 0")
    if k < 1:
        raise ValueError("level k must be >= 1")
    if n == 0 or k > n:
        return {0: Fraction(1)}
    counter = _enumerate_level_counters(n)[k]
    total = math.factorial(n)
    return {value: Fraction(c, total) for value, c in sorted(counter.items())}


def exact_mean_profile(
    n: int, k_max: int, work_budget: int = MEAN_PROFILE_WORK_BUDGET
) -> np.ndarray:
    """Exact expected level counts E X_n(k) for k = 1..k_max.

    The depth of the vertex added at step m is a sum of independent
    Bernoulli(1/i) indicators, i = 1..m, so the expected profile follows
    from a dynamic program over those depth laws; no sampling involved.
    Returns a vector indexed by level (entry 0 unused, always 0).
    """
    if n < 0 or k_max < 1:
        raise ValueError("need n >= 0 and k_max >= 1")
    if n * k_max > work_budget:
        raise ResourceBudgetError(
            f"mean-profile DP needs {n * k_max} cell updates, "
            f"budget is {work_budget}",
            events=n * k_max,
            budget=work_budget,
        )
    means = np.zeros(k_max + 1, dtype=np.float64)
    if n == 0:
        return means
    # f[k] = P(depth of the vertex added at step m equals k), truncated at
    # k_max: mass only ever moves up, so truncation never affects k <= k_max.
    f = np.zeros(k_max + 1, dtype=np.float64)
    f[1] = 1.0
    means[:] = f
    comp = np.zeros_like(means)  # Kahan compensation
    shifted = np.empty_like(f)
    for m in range(2, n + 1):
        inv = 1.0 / m
        shifted[0] = 0.0
        shifted[1:] = f[:-1]
        f = f * (1.0 - inv) + shifted * inv
        y = f - comp
        t = means + y
        comp = (t - means) - y
        means = t
    means[0] = 0.0
    return means
