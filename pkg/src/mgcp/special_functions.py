"""Three-parameter Mittag-Leffler function and the small Gamma-type kernels.

The Mittag-Leffler series is summed directly. A first pass runs in double
precision with Neumaier compensation; when the alternating terms cancel badly
(the usual situation for negative arguments) the same series is re-summed in
extended precision, with the working precision chosen from the observed
cancellation ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath

__all__ = [
    "X_SWITCH",
    "MlfParams",
    "SeriesResult",
    "SeriesConvergenceError",
    "mlf3",
    "mlf",
    "log_gamma",
    "generalized_binomial",
    "falling_factorial",
    "neumaier_sum",
]

X_SWITCH = 30.0
MAX_TERMS = 6000

_U64 = 2.0**-53
# Float pass is accepted when fewer than ~2 digits are lost to cancellation.
_MAX_FLOAT_CANCELLATION = 64.0


class SeriesConvergenceError(ArithmeticError):
    """A series did not meet its stopping rule within the term budget."""


@dataclass(frozen=True)
class MlfParams:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")


@dataclass(frozen=True)
class SeriesResult:
    value: float
    terms_used: int
    tail_bound: float

    def __float__(self) -> float:
        return self.value


def neumaier_sum(values) -> float:
    """Compensated sum (Neumaier's variant of Kahan summation)."""
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


def log_gamma(x: float) -> float:
    """log Gamma(x) for x > 0."""
    if not x > 0:
        raise ValueError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def falling_factorial(x: float, r: int) -> float:
    """x (x - 1) ... (x - r + 1); equals 1 for r = 0."""
    out = 1.0
    for q in range(r):
        out *= x - q
    return out


def generalized_binomial(alpha: float, r: int) -> float:
    """Binomial coefficient alpha choose r for real alpha and integer r >= 0."""
    if r < 0:
        raise ValueError(f"r must be non-negative, got {r!r}")
    if float(alpha).is_integer() and alpha >= 0:
        return float(math.comb(int(alpha), r))
    out = 1.0
    for q in range(r):
        out *= (alpha - q) / (q + 1)
    return out


def _log_abs_term(j: int, log_coef: float, log_abs_x: float, alpha: float, beta: float) -> float:
    return log_coef + j * log_abs_x - math.lgamma(j * alpha + beta)


def _float_pass(alpha: float, beta: float, gamma: float, x: float, max_terms: int):
    neg = x < 0
    log_abs_x = math.log(abs(x))
    total = 0.0
    comp = 0.0
    abs_sum = 0.0
    max_log = -math.inf
    log_coef = 0.0  # log of Gamma(j + gamma) / (Gamma(gamma) j!)
    prev = math.inf
    small_run = 0
    for j in range(max_terms):
        if j > 0:
            log_coef += math.log((j - 1 + gamma) / j)
        lt = _log_abs_term(j, log_coef, log_abs_x, alpha, beta)
        max_log = max(max_log, lt)
        mag = math.exp(lt) if lt < 700 else math.inf
        if not math.isfinite(mag):
            return None
        term = -mag if (neg and j % 2) else mag
        t = total + term
        if abs(total) >= abs(term):
            comp += (total - t) + term
        else:
            comp += (term - t) + total
        total = t
        abs_sum += mag
        partial = total + comp
        if mag < prev and mag <= 2.0**-56 * abs(partial):
            small_run += 1
        else:
            small_run = 0
        if small_run >= 2:
            ratio = mag / prev if prev > 0 else 0.0
            return partial, j + 1, mag, ratio, abs_sum, max_log
        prev = mag
    raise SeriesConvergenceError(
        f"Mittag-Leffler series for x={x} did not converge in {max_terms} terms"
    )


def _mp_pass(alpha: float, beta: float, gamma: float, x: float, dps: int, max_terms: int):
    with mpmath.workdps(dps):
        a = mpmath.mpf(alpha)
        b = mpmath.mpf(beta)
        g = mpmath.mpf(gamma)
        z = mpmath.mpf(x)
        eps = mpmath.mpf(10) ** -22
        coef = mpmath.mpf(1)
        power = mpmath.mpf(1)
        total = mpmath.mpf(0)
        abs_sum = mpmath.mpf(0)
        prev = mpmath.inf
        small_run = 0
        for j in range(max_terms):
            if j > 0:
                coef = coef * (j - 1 + g) / j
                power = power * z
            term = coef * power * mpmath.rgamma(j * a + b)
            total += term
            mag = abs(term)
            abs_sum += mag
            if mag < prev and mag <= eps * abs(total):
                small_run += 1
            else:
                small_run = 0
            if small_run >= 2:
                ratio = mag / prev if prev > 0 else mpmath.mpf(0)
                return total, j + 1, mag, ratio, abs_sum
            prev = mag
    raise SeriesConvergenceError(
        f"Mittag-Leffler series for x={x} did not converge in {max_terms} terms"
    )


def _geometric_tail(last: float, ratio: float) -> float:
    if ratio >= 1.0:
        return math.inf
    return last * ratio / (1.0 - ratio)


@lru_cache(maxsize=65536)
def _mlf3(alpha: float, beta: float, gamma: float, x: float, max_terms: int) -> SeriesResult:
    if x == 0.0:
        return SeriesResult(1.0 / math.gamma(beta), 1, 0.0)
    # terms only start to shrink once (j alpha)^alpha exceeds |x|
    peak = abs(x) ** (1.0 / alpha) / alpha
    if 2.0 * peak + 50.0 > max_terms:
        raise SeriesConvergenceError(
            f"Mittag-Leffler series for alpha={alpha}, x={x} needs ~{2 * peak:.3g} terms"
            f" (budget {max_terms})"
        )
    out = _float_pass(alpha, beta, gamma, x, max_terms)
    if out is not None:
        value, used, last, ratio, abs_sum, max_log = out
        cancellation = abs_sum / abs(value) if value != 0.0 else math.inf
        if cancellation <= _MAX_FLOAT_CANCELLATION:
            rounding = abs_sum * _U64 * (8.0 + abs(max_log) + math.log2(used + 1))
            return SeriesResult(value, used, _geometric_tail(last, ratio) + rounding)
        digits = math.log10(cancellation) if math.isfinite(cancellation) else 17.0
    else:
        digits = 300.0 / math.log(10.0) + 17.0
    dps = int(25 + digits)
    for _ in range(8):
        total, used, last, ratio, abs_sum = _mp_pass(alpha, beta, gamma, x, dps, max_terms)
        if total == 0:
            dps *= 2
            continue
        lost = float(mpmath.log10(abs_sum / abs(total)))
        if lost + 20 <= dps:
            value = float(total)
            with mpmath.workdps(dps):
                rounding = float(abs_sum * mpmath.mpf(10) ** (-dps) * used) + abs(value) * _U64
            return SeriesResult(value, used, _geometric_tail(float(last), float(ratio)) + rounding)
        dps = max(int(lost + 30), 2 * dps)
    raise SeriesConvergenceError(f"Mittag-Leffler series for x={x}: precision escalation failed")


def mlf3(params: MlfParams, x: float, *, max_terms: int = MAX_TERMS) -> SeriesResult:
    """Three-parameter Mittag-Leffler function E^gamma_{alpha,beta}(x).

    Sums ``sum_j Gamma(j + gamma) x**j / (Gamma(gamma) j! Gamma(j alpha + beta))``.
    Arguments with ``|x| > X_SWITCH`` raise :class:`SeriesConvergenceError`
    instead of returning a value with unknown accuracy.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"x must be finite, got {x!r}")
    if abs(x) > X_SWITCH:
        raise SeriesConvergenceError(
            f"|x|={abs(x)} exceeds the series range {X_SWITCH}; rescale the argument"
        )
    return _mlf3(float(params.alpha), float(params.beta), float(params.gamma), x, max_terms)


def mlf(alpha: float, beta: float, x: float, gamma: float = 1.0) -> float:
    """Shorthand returning only the value of E^gamma_{alpha,beta}(x)."""
    return mlf3(MlfParams(alpha, beta, gamma), x).value
