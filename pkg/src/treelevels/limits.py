"""The limiting Gaussian process and two independent ways to sample it.

The limit of the normalized intermediate-level counts is the centered
Gaussian process ``T(u) = integral of exp(-u y) dB(y)`` over ``y >= 0``
(B standard Brownian motion), with covariance ``1/(u + v)`` for
``u, v > 0``; each marginal is distributed as ``B(1)/sqrt(2u)``, and the
time-changed process ``exp(u) T(exp(2u))`` is stationary with covariance
``1/(2 cosh(lag))``.  T cannot be extended continuously to u = 0, so grids
must stay strictly positive.

Sampling routes:

* :func:`sample_kernel` draws exact finite-dimensional laws through a
  triangular factor of the covariance matrix.  Covariance matrices of the
  form ``1/(u_i + u_j)`` are Cauchy matrices; their Schur complements are
  diagonally scaled Cauchy matrices again, which gives every Cholesky entry
  in closed form:

      L[i, k] = g_i(k) * sqrt(2 u_k) / (u_i + u_k),
      g_i(k)  = prod_{l < k} (u_i - u_l) / (u_i + u_l).

  Evaluating those products in log space sidesteps the catastrophic
  cancellation that makes textbook floating-point Cholesky break down on
  Cauchy matrices long before m = 64.

* :func:`sample_pathwise` simulates the Brownian path on a step grid and
  evaluates ``T(u) = u * integral exp(-u y) B(y) dy`` by the trapezoid rule
  (an integration-by-parts identity).  The truncation horizon comes from the
  exact tail variance ``exp(-2 u Y) / (2 u)`` at the smallest grid point;
  the covariance carries an O(step) discretization bias.  Brownian paths are
  nowhere differentiable, so higher-order quadrature would buy nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConditioningError, ResourceBudgetError

__all__ = [
    "GridSpec",
    "KernelMatrix",
    "limit_covariance",
    "stationary_covariance",
    "sample_kernel",
    "sample_pathwise",
    "pathwise_truncation_horizon",
    "PATH_GRID_BUDGET",
]

PATH_GRID_BUDGET = 10**7

_NEAR_DUPLICATE_REL_GAP = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Strictly increasing evaluation points, all > 0."""

    u_points: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u_points, dtype=np.float64)
        object.__setattr__(self, "u_points", u)
        if u.ndim != 1 or u.shape[0] < 1:
            raise ValueError("grid needs at least one point")
        if not np.all(u > 0):
            raise ValueError("grid points must be strictly positive")
        if not np.all(np.diff(u) > 0):
            raise ValueError("grid points must be strictly increasing")

    @property
    def m(self) -> int:
        return int(self.u_points.shape[0])


def limit_covariance(u: float, v: float) -> float:
    """Covariance of the limit process at two positive points: 1/(u+v)."""
    if u <= 0 or v <= 0:
        raise ValueError("covariance is defined for strictly positive points")
    return 1.0 / (u + v)


def stationary_covariance(lag: float) -> float:
    """Covariance of the exponentially time-changed process: 1/(2 cosh(lag))."""
    return 1.0 / (2.0 * math.cosh(lag))


@dataclass
class KernelMatrix:
    """Covariance matrix 1/(u_i + u_j) on a grid, with a lazy exact factor."""

    grid: GridSpec
    _factor: np.ndarray | None = field(default=None, repr=False)

    @property
    def values(self) -> np.ndarray:
        u = self.grid.u_points
        return 1.0 / (u[:, None] + u[None, :])

    def factor(self) -> np.ndarray:
        """Lower-triangular L with L @ L.T equal to the kernel matrix.

        Entries come from the closed form above, assembled in log space, so
        the factorization succeeds for any strictly increasing positive grid
        at any size this package uses.  Near-duplicate points (relative gap
        below 1e-12) or a diagonal entry that underflows to zero are hard
        errors naming the offending pair; no silent regularization.
        """
        if self._factor is not None:
            return self._factor
        u = self.grid.u_points
        m = self.grid.m
        gaps = np.diff(u)
        rel = gaps / (u[1:] + u[:-1])
        bad = np.nonzero(rel <= _NEAR_DUPLICATE_REL_GAP)[0]
        if bad.size:
            i = int(bad[0])
            raise ConditioningError(
                f"grid points u[{i}]={u[i]!r} and u[{i + 1}]={u[i + 1]!r} are "
                "too close to factor the covariance",
                pair=(float(u[i]), float(u[i + 1])),
            )
        L = np.zeros((m, m))
        log_g = np.zeros(m)
        for k in range(m):
            log_col = log_g[k:] + 0.5 * math.log(2.0 * u[k]) - np.log(u[k:] + u[k])
            col = np.exp(log_col)
            if col[0] == 0.0:
                j = int(np.argmin(rel)) if m > 1 else 0
                raise ConditioningError(
                    f"pivot underflow at grid point u[{k}]={u[k]!r}; tightest "
                    f"pair is u[{j}]={u[j]!r}, u[{j + 1}]={u[j + 1]!r}",
                    pair=(float(u[j]), float(u[min(j + 1, m - 1)])),
                )
            L[k:, k] = col
            if k + 1 < m:
                log_g[k + 1 :] += np.log(u[k + 1 :] - u[k]) - np.log(u[k + 1 :] + u[k])
        self._factor = L
        return L

    def max_reconstruction_error(self) -> float:
        L = self.factor()
        c = self.values
        return float(np.abs(L @ L.T - c).max() / np.abs(c).max())


def sample_kernel(
    grid: GridSpec, rng: np.random.Generator, size: int | None = None
) -> np.ndarray:
    """Exact zero-mean Gaussian samples of the limit process on a grid.

    Returns shape ``(m,)`` for ``size=None`` or ``(size, m)`` otherwise;
    deterministic given the stream.
    """
    L = KernelMatrix(grid).factor()
    if size is None:
        return L @ rng.standard_normal(grid.m)
    z = rng.standard_normal((size, grid.m))
    return z @ L.T


def pathwise_truncation_horizon(u_min: float, tail_tol: float) -> float:
    """Smallest Y with truncated-tail variance exp(-2 u Y)/(2u) <= tail_tol."""
    if tail_tol <= 0:
        raise ValueError("tail_tol must be > 0")
    y = -math.log(2.0 * u_min * tail_tol) / (2.0 * u_min)
    return max(y, 0.0)


def sample_pathwise(
    grid: GridSpec,
    step: float,
    tail_tol: float,
    rng: np.random.Generator,
    size: int | None = None,
    grid_budget: int = PATH_GRID_BUDGET,
) -> np.ndarray:
    """Samples of the limit process from a discretized Brownian path.

    Simulates B on ``{0, step, 2*step, ..., Y}`` with Y chosen from the tail
    variance at the smallest grid point, then evaluates
    ``u * integral exp(-u y) B(y) dy`` by the trapezoid rule for every grid
    point.  Covariance bias is O(step).  Serves as the independent
    cross-check of :func:`sample_kernel`.
    """
    if step <= 0:
        raise ValueError("step must be > 0")
    u = grid.u_points
    horizon = pathwise_truncation_horizon(float(u[0]), tail_tol)
    n_steps = max(int(math.ceil(horizon / step)), 1)
    if n_steps + 1 > grid_budget:
        raise ResourceBudgetError(
            f"path discretization needs {n_steps + 1} points, budget is "
            f"{grid_budget}",
            events=n_steps + 1,
            budget=grid_budget,
        )
    y = np.arange(n_steps + 1) * step
    # trapezoid weights folded with u * exp(-u y); B(0) = 0 so its half
    # weight is irrelevant but kept for clarity
    w = u[:, None] * np.exp(-u[:, None] * y[None, :]) * step
    w[:, 0] *= 0.5
    w[:, -1] *= 0.5
    sqrt_h = math.sqrt(step)
    if size is None:
        b = np.concatenate([[0.0], np.cumsum(rng.standard_normal(n_steps))]) * sqrt_h
        return w @ b
    out = np.empty((size, grid.m))
    chunk = max(1, min(size, 1 + (1 << 22) // (n_steps + 1)))
    done = 0
    while done < size:
        c = min(chunk, size - done)
        incr = rng.standard_normal((c, n_steps))
        b = np.empty((c, n_steps + 1))
        b[:, 0] = 0.0
        np.cumsum(incr, axis=1, out=b[:, 1:])
        b *= sqrt_h
        out[done : done + c] = b @ w.T
        done += c
    return out
