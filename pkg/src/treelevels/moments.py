"""Closed-form moments of the generation counts under unit-mean exponential clocks.

For the branching population where every individual spawns offspring at the
epochs of a unit-mean exponential renewal sequence, the generation-k count
at time t has mean ``t**k / k!`` and variance

    sum_{i=0}^{k-1} t**(k+i) * (2i)! / ((i!)**2 * (k+i)!).

The second moment of the centered one-generation-down fluctuation sum is the
same series stopped at ``i = k-2``, and the variance splits exactly into that
integral term plus ``t**(2k-1) / (((k-1)!)**2 * (2k-1))``.

Powers like ``t**(2k)`` overflow float64 near k ~ 150 at moderate t, so all
quantities are computed in log space (log-gamma for factorials, log-sum-exp
anchored at the largest term for sums of positive terms) and returned as
:class:`LogValue`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = [
    "LogValue",
    "log_sum_exp",
    "expected_count",
    "count_variance",
    "fluctuation_second_moment",
    "fluctuation_leading_term",
    "tail_coefficient",
    "stirling_bound_margin",
    "variance_decomposition_residual",
    "adaptive_simpson",
]


@dataclass(frozen=True)
class LogValue:
    """A real number carried as (sign, log of absolute value).

    ``sign`` is 0 exactly when the value is zero; ``log_abs`` is meaningless
    in that case and pinned to ``-inf``.
    """

    sign: int
    log_abs: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0, or +1, got {self.sign}")
        if self.sign == 0 and self.log_abs != -math.inf:
            object.__setattr__(self, "log_abs", -math.inf)

    @classmethod
    def from_float(cls, x: float) -> "LogValue":
        if x == 0.0:
            return cls(0, -math.inf)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(0, -math.inf)

    def to_float(self) -> float:
        """Back to a float; saturates to +-inf beyond float64 range."""
        if self.sign == 0:
            return 0.0
        if self.log_abs > 709.0:
            return self.sign * math.inf
        return self.sign * math.exp(self.log_abs)

    def __mul__(self, other: "LogValue") -> "LogValue":
        if self.sign == 0 or other.sign == 0:
            return LogValue.zero()
        return LogValue(self.sign * other.sign, self.log_abs + other.log_abs)

    def __truediv__(self, other: "LogValue") -> "LogValue":
        if other.sign == 0:
            raise ZeroDivisionError("division by exact LogValue zero")
        if self.sign == 0:
            return LogValue.zero()
        return LogValue(self.sign * other.sign, self.log_abs - other.log_abs)

    def __neg__(self) -> "LogValue":
        return LogValue(-self.sign, self.log_abs)

    def __add__(self, other: "LogValue") -> "LogValue":
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        if self.sign == other.sign:
            hi = max(self.log_abs, other.log_abs)
            lo = min(self.log_abs, other.log_abs)
            return LogValue(self.sign, hi + math.log1p(math.exp(lo - hi)))
        # opposite signs: subtract magnitudes
        if self.log_abs == other.log_abs:
            return LogValue.zero()
        if self.log_abs > other.log_abs:
            big, small, sign = self.log_abs, other.log_abs, self.sign
        else:
            big, small, sign = other.log_abs, self.log_abs, other.sign
        return LogValue(sign, big + math.log1p(-math.exp(small - big)))

    def __sub__(self, other: "LogValue") -> "LogValue":
        return self + (-other)


def log_sum_exp(log_terms: np.ndarray) -> float:
    """log(sum(exp(terms))) for all-positive terms, anchored at the max."""
    log_terms = np.asarray(log_terms, dtype=float)
    m = np.max(log_terms)
    if m == -math.inf:
        return -math.inf
    return float(m + np.log(np.sum(np.exp(log_terms - m))))


def expected_count(k: int, t: float) -> LogValue:
    """Mean generation-k population at time t: t**k / k!."""
    if k < 1:
        raise ValueError("generation k must be >= 1")
    if t < 0:
        raise ValueError("time t must be >= 0")
    if t == 0.0:
        return LogValue.zero()
    return LogValue(1, k * math.log(t) - float(gammaln(k + 1)))


def _variance_series(k: int, t: float, i_max: int) -> LogValue:
    """sum_{i=0}^{i_max} t**(k+i) (2i)! / ((i!)**2 (k+i)!) in log space."""
    if t == 0.0 or i_max < 0:
        return LogValue.zero()
    i = np.arange(i_max + 1, dtype=float)
    log_terms = (
        (k + i) * math.log(t)
        + gammaln(2 * i + 1)
        - 2 * gammaln(i + 1)
        - gammaln(k + i + 1)
    )
    return LogValue(1, log_sum_exp(log_terms))


def count_variance(k: int, t: float) -> LogValue:
    """Variance of the generation-k population at time t (closed form)."""
    if k < 1:
        raise ValueError("generation k must be >= 1")
    if t < 0:
        raise ValueError("time t must be >= 0")
    return _variance_series(k, t, k - 1)


def fluctuation_second_moment(k: int, t: float) -> LogValue:
    """Second moment of the centered within-family fluctuation sum.

    Equals the running integral of ``count_variance(k-1, .)`` from 0 to t,
    which is the variance series for k stopped at its second-to-last term.
    """
    if k < 2:
        raise ValueError("defined for generations k >= 2")
    if t < 0:
        raise ValueError("time t must be >= 0")
    return _variance_series(k, t, k - 2)


def fluctuation_leading_term(k: int, t: float) -> LogValue:
    """Large-t leading term of the fluctuation second moment.

    (1/4) * t**(2k) / (k!)**2 * (k/t)**2, evaluated in log space.
    """
    if k < 2:
        raise ValueError("defined for generations k >= 2")
    if t <= 0:
        raise ValueError("time t must be > 0")
    log_val = (
        math.log(0.25)
        + (2 * k - 2) * math.log(t)
        - 2 * float(gammaln(k + 1))
        + 2 * math.log(k)
    )
    return LogValue(1, log_val)


def tail_coefficient(i: int, k: int) -> LogValue:
    """Coefficient (k!)**2 (2i)! / ((i!)**2 (k+i)! k**2) of the i-th tail term.

    Despite appearing alongside powers of t in the tail bound, the
    coefficient itself does not depend on t.  Defined for 1 <= i <= k-3.
    """
    if not 1 <= i <= k - 3:
        raise ValueError(f"need 1 <= i <= k-3, got i={i}, k={k}")
    log_val = (
        2 * float(gammaln(k + 1))
        + float(gammaln(2 * i + 1))
        - 2 * float(gammaln(i + 1))
        - float(gammaln(k + i + 1))
        - 2 * math.log(k)
    )
    return LogValue(1, log_val)


def stirling_bound_margin(i: int, k: int) -> float:
    """log of (Stirling bound) minus log of (coefficient / (sqrt(2) e)).

    The bound is ``4**i * k**(1/2) * (k/e)**(k-i-2)``; a nonnegative margin
    means the bound holds for this (i, k).
    """
    lhs = tail_coefficient(i, k).log_abs - 0.5 * math.log(2.0) - 1.0
    rhs = i * math.log(4.0) + 0.5 * math.log(k) + (k - i - 2) * (math.log(k) - 1.0)
    return rhs - lhs


def variance_decomposition_residual(k: int, t: float) -> float:
    """Relative residual of the exact variance split.

    Checks ``count_variance(k, t) == fluctuation_second_moment(k, t)
    + t**(2k-1) / (((k-1)!)**2 (2k-1))`` and returns
    ``(lhs - rhs) / lhs`` (0 when both sides are exactly zero).
    """
    if k < 2:
        raise ValueError("defined for generations k >= 2")
    if t < 0:
        raise ValueError("time t must be >= 0")
    lhs = count_variance(k, t)
    if t == 0.0:
        return 0.0
    log_last = (
        (2 * k - 1) * math.log(t)
        - 2 * float(gammaln(k))
        - math.log(2 * k - 1)
    )
    rhs = fluctuation_second_moment(k, t) + LogValue(1, log_last)
    return ((lhs - rhs) / lhs).to_float()


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-10,
                     abs_floor: float = 1e-15, max_depth: int = 40) -> float:
    """Adaptive Simpson quadrature with an absolute error floor.

    Subdivision stops once the local Richardson error estimate drops below
    the slice's share of ``tol`` or below ``abs_floor``; integrands here are
    smooth polynomials, so this converges quickly.
    """

    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def recurse(x0, x2, f0, f1, f2, whole, tol_here, depth):
        xm = 0.5 * (x0 + x2)
        xl = 0.5 * (x0 + xm)
        xr = 0.5 * (xm + x2)
        fl = f(xl)
        fr = f(xr)
        left = simpson(x0, xm, f0, fl, f1)
        right = simpson(xm, x2, f1, fr, f2)
        err = (left + right - whole) / 15.0
        if depth >= max_depth or abs(err) <= max(tol_here, abs_floor):
            return left + right + err
        return recurse(x0, xm, f0, fl, f1, left, tol_here / 2.0, depth + 1) + recurse(
            xm, x2, f1, fr, f2, right, tol_here / 2.0, depth + 1
        )

    if a == b:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = simpson(a, b, fa, fm, fb)
    return recurse(a, b, fa, fm, fb, whole, tol, 0)
