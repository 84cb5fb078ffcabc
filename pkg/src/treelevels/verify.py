"""Normalized statistics and the hypothesis tests that tie simulation to theory.

The normalizations center a level count x at ``(log n)**k / k!`` and rescale
by ``(log n)**(k - 1/2)`` with factorial prefactors; for large k both the
center and the scale overflow double precision, so each is assembled in log
space (the positive scale is factored out, the difference is formed as a
signed log quantity, then everything is recombined).  Verdicts come out as
:class:`TestReport` records: Kolmogorov-Smirnov suites pass when the p-value
clears a threshold, moment suites when the z-score stays inside a band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, kolmogorov, ndtr

from .branching import RenewalPath
from .moments import LogValue

__all__ = [
    "NormalizedSample",
    "TestReport",
    "normalize_fixed_k",
    "normalize_multivariate",
    "normalize_intermediate",
    "multivariate_target_cov",
    "renewal_sum",
    "renewal_statistic",
    "ks_one_sample",
    "ks_two_sample",
    "empirical_cov",
    "CovarianceEstimate",
    "variance_with_se",
    "moment_report",
    "standard_normal_cdf",
]

KS_MIN_SAMPLES = 50


@dataclass
class NormalizedSample:
    """One vector of per-replicate statistic values plus its provenance."""

    values: np.ndarray
    n: int | None = None
    k_or_m: int | None = None
    u: float | None = None
    label: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(v)):
            raise ValueError("normalized samples must be finite")
        self.values = v

    @property
    def replicates(self) -> int:
        return int(self.values.shape[0])


@dataclass
class TestReport:
    """Outcome of one verification check."""

    suite: str
    kind: str  # "ks" | "moment" | "trend" | "exact"
    statistic: float
    p_value: float | None
    threshold: float
    passed: bool
    sample_sizes: tuple[int, ...] = ()
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "kind": self.kind,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "threshold": self.threshold,
            "verdict": "pass" if self.passed else "fail",
            "sample_sizes": list(self.sample_sizes),
            "detail": self.detail,
        }


def _log_log_n(n: float) -> float:
    if n < 2:
        raise ValueError("tree size n must be >= 2 (log n must be positive)")
    return math.log(math.log(n))


def _signed_scaled_diff(x: float, log_center: float, log_scale: float) -> float:
    """(x - center) * scale with center and scale given in log space."""
    center = LogValue(1, log_center)
    xv = LogValue.from_float(float(x))
    diff = xv - center
    return (diff * LogValue(1, log_scale)).to_float()


def normalize_fixed_k(x: float, n: float, k: int) -> float:
    """Fixed-level normalization with the sqrt(2k-1) variance-unity factor.

    ``sqrt(2k-1) * (k-1)! * (x - (log n)**k / k!) / (log n)**(k-1/2)``;
    converges in law to a standard normal as n grows with k fixed.
    """
    if k < 1:
        raise ValueError("level k must be >= 1")
    ll = _log_log_n(n)
    log_center = k * ll - float(gammaln(k + 1))
    log_scale = 0.5 * math.log(2 * k - 1) + float(gammaln(k)) - (k - 0.5) * ll
    return _signed_scaled_diff(x, log_center, log_scale)


def normalize_multivariate(xs, n: float, ks) -> np.ndarray:
    """Componentwise normalization without the per-level variance factor.

    The limiting covariance between components i and j is 1/(i+j-1); see
    :func:`multivariate_target_cov`.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    ks = np.atleast_1d(np.asarray(ks, dtype=np.int64))
    if xs.shape != ks.shape:
        raise ValueError("xs and ks must have matching shapes")
    if np.any(ks < 1):
        raise ValueError("levels must be >= 1")
    ll = _log_log_n(n)
    out = np.empty(xs.shape[0])
    for j, (x, k) in enumerate(zip(xs, ks)):
        log_center = k * ll - float(gammaln(k + 1))
        log_scale = float(gammaln(k)) - (k - 0.5) * ll
        out[j] = _signed_scaled_diff(x, log_center, log_scale)
    return out


def multivariate_target_cov(ks) -> np.ndarray:
    """Limit covariance 1/(i+j-1) of the multivariate normalization."""
    ks = np.asarray(ks, dtype=np.float64)
    return 1.0 / (ks[:, None] + ks[None, :] - 1.0)


def normalize_intermediate(x: float, n: float, k_n: float, u: float) -> float:
    """Intermediate-level normalization at scale k_n and index u.

    Uses level ``m = floor(k_n * u)`` and prefactor ``sqrt(floor(k_n))``,
    with the floors applied exactly as written here; the limit law at index
    u has variance 1/(2u).
    """
    m = math.floor(k_n * u)
    if m < 1:
        raise ValueError(f"floor(k_n * u) = {m} must be >= 1")
    ll = _log_log_n(n)
    log_center = m * ll - float(gammaln(m + 1))
    log_scale = (
        0.5 * math.log(math.floor(k_n)) + float(gammaln(m)) - (m - 0.5) * ll
    )
    return _signed_scaled_diff(x, log_center, log_scale)


def renewal_sum(path: RenewalPath, t: float, m: int, mu: float) -> float:
    """Centered polynomial sum over a renewal path.

    ``sum_j (t - S_j)**(m-1) / ((m-1)! mu**(m-1)) - t**m / (m! mu**m)`` over
    arrivals S_j <= t.  Summands are evaluated as ``((t - S_j)/t)**(m-1)``
    with the common scale applied afterwards in log space, so large m does
    not overflow.
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    if m < 1:
        raise ValueError("m must be >= 1")
    if path.horizon < t:
        raise ValueError(
            f"path horizon {path.horizon} is shorter than requested t={t}"
        )
    s = path.arrivals[path.arrivals <= t]
    if m == 1:
        base = float(s.shape[0])
    else:
        base = float(np.sum(((t - s) / t) ** (m - 1)))
    # scale = t**(m-1) / ((m-1)! mu**(m-1)); center/scale = t/(m mu)
    log_scale = (m - 1) * (math.log(t) - math.log(mu)) - float(gammaln(m))
    centered = base - t / (m * mu)
    if centered == 0.0:
        return 0.0
    return math.copysign(
        math.exp(math.log(abs(centered)) + log_scale), centered
    )


def renewal_statistic(
    path: RenewalPath, t: float, m: int, mu: float, sigma2: float, k: float
) -> float:
    """Fully normalized renewal statistic converging to the limit process.

    Normalizes :func:`renewal_sum` by
    ``sqrt(k) * (m-1)! / sqrt(sigma2 * mu**(-2m-1) * t**(2m-1))``; algebra
    collapses the whole prefactor applied to the rescaled sum to
    ``sqrt(k * mu**3 / (sigma2 * t))``, which is how it is evaluated.
    At index u the limit law has variance 1/(2u) for m = floor(k u).
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be > 0 for the normalized statistic")
    if k <= 0:
        raise ValueError("scale k must be > 0")
    if t <= 0:
        raise ValueError("t must be > 0")
    if m < 1:
        raise ValueError("m must be >= 1")
    if path.horizon < t:
        raise ValueError(
            f"path horizon {path.horizon} is shorter than requested t={t}"
        )
    s = path.arrivals[path.arrivals <= t]
    if m == 1:
        base = float(s.shape[0])
    else:
        base = float(np.sum(((t - s) / t) ** (m - 1)))
    return math.sqrt(k * mu**3 / (sigma2 * t)) * (base - t / (m * mu))


def standard_normal_cdf(x: np.ndarray) -> np.ndarray:
    return ndtr(x)


def _ks_p_value(d: float, en: float) -> float:
    """Asymptotic Kolmogorov p-value with the small-sample correction."""
    return float(kolmogorov((en + 0.12 + 0.11 / en) * d))


def ks_one_sample(values, cdf, threshold: float = 0.001, suite: str = "ks1") -> TestReport:
    """One-sample Kolmogorov-Smirnov test against a reference cdf."""
    values = np.sort(np.asarray(values, dtype=np.float64))
    n = values.shape[0]
    if n < KS_MIN_SAMPLES:
        raise ValueError(f"need at least {KS_MIN_SAMPLES} samples, got {n}")
    f = np.asarray(cdf(values), dtype=np.float64)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    d = float(max(d_plus, d_minus))
    p = _ks_p_value(d, math.sqrt(n))
    return TestReport(
        suite=suite,
        kind="ks",
        statistic=d,
        p_value=p,
        threshold=threshold,
        passed=p >= threshold,
        sample_sizes=(n,),
    )


def ks_two_sample(a, b, threshold: float = 0.001, suite: str = "ks2") -> TestReport:
    """Two-sample Kolmogorov-Smirnov test (asymptotic p-value)."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    na, nb = a.shape[0], b.shape[0]
    if min(na, nb) < KS_MIN_SAMPLES:
        raise ValueError(f"need at least {KS_MIN_SAMPLES} samples per side")
    both = np.concatenate([a, b])
    ca = np.searchsorted(a, both, side="right") / na
    cb = np.searchsorted(b, both, side="right") / nb
    d = float(np.abs(ca - cb).max())
    en = math.sqrt(na * nb / (na + nb))
    p = _ks_p_value(d, en)
    return TestReport(
        suite=suite,
        kind="ks",
        statistic=d,
        p_value=p,
        threshold=threshold,
        passed=p >= threshold,
        sample_sizes=(na, nb),
    )


@dataclass
class CovarianceEstimate:
    """Unbiased covariance with delete-one jackknife standard errors."""

    cov: np.ndarray
    se: np.ndarray
    replicates: int


def empirical_cov(samples) -> CovarianceEstimate:
    """Covariance matrix of replicate rows, with jackknife standard errors."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("samples must be a (replicates, dimension) matrix")
    r = x.shape[0]
    if r < 2:
        raise ValueError("need at least 2 replicates for a covariance")
    cov = np.cov(x, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    if r == 2:
        return CovarianceEstimate(cov=cov, se=np.full_like(cov, np.nan), replicates=r)
    s1 = x.sum(axis=0)
    s2 = x.T @ x
    outer = np.einsum("ri,rj->rij", x, x)
    mean_loo = (s1[None, :] - x) / (r - 1)
    loo = (
        s2[None, :, :]
        - outer
        - (r - 1) * np.einsum("ri,rj->rij", mean_loo, mean_loo)
    ) / (r - 2)
    loo_mean = loo.mean(axis=0)
    se = np.sqrt((r - 1) / r * np.sum((loo - loo_mean) ** 2, axis=0))
    return CovarianceEstimate(cov=cov, se=se, replicates=r)


def variance_with_se(values) -> tuple[float, float]:
    """Sample variance and the standard error of that variance estimate.

    SE from the asymptotic formula sqrt((m4 - (r-3)/(r-1) * s**4) / r) with
    m4 the fourth central moment; valid without normality assumptions.
    """
    v = np.asarray(values, dtype=np.float64)
    r = v.shape[0]
    if r < 4:
        raise ValueError("need at least 4 values")
    c = v - v.mean()
    s2 = float(np.sum(c * c) / (r - 1))
    m4 = float(np.mean(c**4))
    inner = m4 - (r - 3) / (r - 1) * s2 * s2
    return s2, math.sqrt(max(inner, 0.0) / r)


def moment_report(
    suite: str,
    value: float,
    target: float,
    se: float,
    z_max: float = 4.0,
    sample_sizes: tuple[int, ...] = (),
    detail: str = "",
) -> TestReport:
    """Pass/fail on |value - target| <= z_max standard errors."""
    z = (value - target) / se if se > 0 else math.inf * np.sign(value - target)
    if value == target:
        z = 0.0
    p = float(2.0 * (1.0 - ndtr(abs(z))))
    return TestReport(
        suite=suite,
        kind="moment",
        statistic=float(z),
        p_value=p,
        threshold=z_max,
        passed=abs(z) <= z_max,
        sample_sizes=sample_sizes,
        detail=detail or f"value={value:.6g} target={target:.6g} se={se:.3g}",
    )
