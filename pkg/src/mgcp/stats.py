"""Statistical tests used by the verification harness."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

__all__ = [
    "BandResult",
    "TestResult",
    "mean_band",
    "variance_band",
    "proportion_band",
    "chisquare_gof",
    "ks_two_sample",
    "anderson_darling_normal",
    "ad_limit_cdf",
]

MIN_EXPECTED = 5.0


@dataclass(frozen=True)
class BandResult:
    estimate: float
    target: float
    half_width: float

    @property
    def z(self) -> float:
        if self.half_width == 0.0:
            return 0.0 if self.estimate == self.target else math.inf
        return abs(self.estimate - self.target) / self.half_width

    @property
    def passed(self) -> bool:
        return abs(self.estimate - self.target) <= self.half_width


@dataclass(frozen=True)
class TestResult:
    statistic: float
    pvalue: float
    dof: int = 0

    def passed(self, significance: float) -> bool:
        return self.pvalue > significance


def mean_band(samples, target: float, sigmas: float = 4.0) -> BandResult:
    """Sample mean against ``target`` with a CLT band of ``sigmas`` standard errors."""
    x = np.asarray(samples, dtype=float)
    se = float(np.std(x, ddof=1)) / math.sqrt(x.size)
    return BandResult(float(np.mean(x)), float(target), sigmas * se)


def variance_band(samples, target: float, sigmas: float = 4.0) -> BandResult:
    """Sample variance against ``target``; the standard error uses the fourth central moment."""
    x = np.asarray(samples, dtype=float)
    n = x.size
    c = x - np.mean(x)
    s2 = float(np.dot(c, c)) / (n - 1)
    m4 = float(np.mean(c**4))
    se = math.sqrt(max(m4 - s2 * s2, 0.0) / n)
    return BandResult(s2, float(target), sigmas * se)


def proportion_band(hits: int, n: int, p: float, sigmas: float = 4.0) -> BandResult:
    """Binomial proportion against ``p``, band from the null variance p(1-p)/n."""
    return BandResult(hits / n, float(p), sigmas * math.sqrt(p * (1.0 - p) / n))


def _merge_small(observed: list[float], expected: list[float]) -> tuple[np.ndarray, np.ndarray]:
    obs, exp = list(observed), list(expected)
    # fold from the right, then sweep any small leading bins forward
    i = len(exp) - 1
    while i > 0:
        if exp[i] < MIN_EXPECTED:
            exp[i - 1] += exp.pop(i)
            obs[i - 1] += obs.pop(i)
        i -= 1
    while len(exp) > 1 and exp[0] < MIN_EXPECTED:
        exp[1] += exp.pop(0)
        obs[1] += obs.pop(0)
    return np.array(obs, dtype=float), np.array(exp, dtype=float)


def chisquare_gof(samples, probs) -> TestResult:
    """Chi-square goodness of fit of integer samples against pmf values ``probs[0..n_max]``.

    Everything above ``n_max`` is pooled into one tail cell with the remaining
    mass; cells with expected count below 5 are merged into neighbours.
    """
    x = np.asarray(samples)
    p = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    n_max = p.size - 1
    r = x.size
    counts = np.bincount(np.minimum(x, n_max + 1).astype(np.int64), minlength=n_max + 2)
    tail = max(0.0, 1.0 - math.fsum(p))
    obs, exp = _merge_small(list(counts.astype(float)), list(r * np.append(p, tail)))
    exp = exp * (obs.sum() / exp.sum())
    if obs.size < 2:
        return TestResult(0.0, 1.0, 0)
    res = stats.chisquare(obs, exp)
    return TestResult(float(res.statistic), float(res.pvalue), int(obs.size - 1))


def ks_two_sample(a, b) -> TestResult:
    res = stats.ks_2samp(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    return TestResult(float(res.statistic), float(res.pvalue))


def ad_limit_cdf(z: float) -> float:
    """Limiting null CDF of the Anderson-Darling statistic (Marsaglia and Marsaglia, 2004)."""
    if z <= 0.0:
        return 0.0
    if z < 2.0:
        poly = 2.00012 + (0.247105 - (0.0649821 - (0.0347962 - (0.0116720 - 0.00168691 * z) * z) * z) * z) * z
        return math.exp(-1.2337141 / z) / math.sqrt(z) * poly
    inner = 1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z
    return math.exp(-math.exp(inner))


def anderson_darling_normal(samples, mean: float, variance: float) -> TestResult:
    """Anderson-Darling test against a fully specified normal law."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    z = (x - mean) / math.sqrt(variance)
    logcdf = stats.norm.logcdf(z)
    logsf = stats.norm.logsf(z)
    i = np.arange(1, n + 1)
    a2 = -n - float(np.sum((2 * i - 1) * (logcdf + logsf[::-1]))) / n
    return TestResult(a2, max(0.0, 1.0 - ad_limit_cdf(a2)))
