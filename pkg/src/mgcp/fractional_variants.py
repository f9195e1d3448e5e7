"""Laws of the multiparameter GCP under stable and inverse-stable time changes.

Four variants are covered, all built from independent per-axis subordinators:

* space, multiparameter:  M(D_1(t_1), ..., D_d(t_d)) with stable D_i
* space, multivariate:    M(D_1(t), ..., D_d(t))
* time, multiparameter:   M(L_1(t_1), ..., L_d(t_d)) with inverse-stable L_i
* time, multivariate:     M(L_1(t), ..., L_d(t))

Setting every order to 1 turns the subordinators into the identity and each
variant collapses to the base process.

The Caputo derivative and the governing-equation residuals at the bottom are
verification tools; nothing in the pmf/pgf code depends on them.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Callable
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from mgcp import gcp_core
from mgcp.gcp_core import (
    ENUMERATION_CAP,
    MultiTime,
    PmfTable,
    RateMatrix,
    as_rates,
    as_time,
    enumerate_omega,
    enumerate_theta,
)
from mgcp.special_functions import (
    MlfParams,
    SeriesConvergenceError,
    SeriesResult,
    generalized_binomial,
    mlf3,
)

__all__ = [
    "FractionalOrders",
    "VariantKind",
    "as_orders",
    "space_frac_pgf",
    "space_frac_pgf_multivariate",
    "space_frac_laplace_multivariate",
    "space_frac_pmf",
    "space_frac_pmf_multivariate",
    "space_frac_pmf_table",
    "time_frac_pgf",
    "time_frac_pmf",
    "time_frac_pmf_table",
    "time_frac_factorial_moment",
    "time_frac_mean",
    "time_frac_variance",
    "time_frac_multivariate_pgf",
    "time_frac_multivariate_pmf",
    "time_frac_multivariate_mean",
    "time_frac_multivariate_variance",
    "variant_pgf",
    "variant_pmf_table",
    "caputo_derivative",
    "governing_system_residual",
]

R_SERIES_BUDGET = 2000
_U64 = 2.0**-53


@dataclass(frozen=True, eq=False)
class FractionalOrders:
    """Per-axis subordinator indices, each in (0, 1]; 1 means no time change."""

    alpha: np.ndarray

    def __post_init__(self) -> None:
        arr = np.atleast_1d(np.array(self.alpha, dtype=float, copy=True))
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("orders must be a non-empty vector")
        if not np.all((arr > 0) & (arr <= 1)):
            raise ValueError(f"every order must lie in (0, 1], got {arr.tolist()}")
        arr.flags.writeable = False
        object.__setattr__(self, "alpha", arr)

    @property
    def d(self) -> int:
        return self.alpha.size

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FractionalOrders) and np.array_equal(self.alpha, other.alpha)

    def __hash__(self) -> int:
        return hash(self.alpha.tobytes())

    def __repr__(self) -> str:
        return f"FractionalOrders({self.alpha.tolist()!r})"


class VariantKind(str, enum.Enum):
    BASE = "base"
    SPACE_MULTIPARAMETER = "space_multiparameter"
    SPACE_MULTIVARIATE = "space_multivariate"
    TIME_MULTIPARAMETER = "time_multiparameter"
    TIME_MULTIVARIATE = "time_multivariate"

    @property
    def multivariate(self) -> bool:
        return self in (VariantKind.SPACE_MULTIVARIATE, VariantKind.TIME_MULTIVARIATE)

    @property
    def is_space(self) -> bool:
        return self in (VariantKind.SPACE_MULTIPARAMETER, VariantKind.SPACE_MULTIVARIATE)

    @property
    def is_time(self) -> bool:
        return self in (VariantKind.TIME_MULTIPARAMETER, VariantKind.TIME_MULTIVARIATE)

    @classmethod
    def parse(cls, tag: str | VariantKind) -> VariantKind:
        if isinstance(tag, VariantKind):
            return tag
        aliases = {
            "space": cls.SPACE_MULTIPARAMETER,
            "space-mv": cls.SPACE_MULTIVARIATE,
            "time": cls.TIME_MULTIPARAMETER,
            "time-mv": cls.TIME_MULTIVARIATE,
        }
        if tag in aliases:
            return aliases[tag]
        try:
            return cls(tag)
        except ValueError:
            raise ValueError(f"unknown variant {tag!r}") from None


def as_orders(orders, d: int) -> FractionalOrders:
    if not isinstance(orders, FractionalOrders):
        orders = FractionalOrders(np.atleast_1d(np.asarray(orders, dtype=float)))
    if orders.d != d:
        if orders.d == 1:
            return FractionalOrders(np.full(d, orders.alpha[0]))
        raise ValueError(f"orders have length {orders.d}, expected {d}")
    return orders


def _scalar_time(t) -> float:
    if isinstance(t, MultiTime):
        if t.d != 1:
            raise ValueError("multivariate variants take a scalar time")
        return float(t.t[0])
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    if arr.size != 1:
        raise ValueError("multivariate variants take a scalar time")
    value = float(arr[0])
    if not (math.isfinite(value) and value >= 0):
        raise ValueError(f"time must be finite and >= 0, got {value}")
    return value


def _require_positive_columns(rates: RateMatrix) -> np.ndarray:
    mu = rates.column_sums
    if np.any(mu <= 0):
        bad = [i + 1 for i in np.flatnonzero(mu <= 0)]
        raise ValueError(f"time-changed variants need every column sum > 0; axes {bad} are zero")
    return mu


def _laplace_exponents(rates: RateMatrix, u: float) -> np.ndarray:
    """Per-axis sum_j rates[j, i] (1 - u^j)."""
    if abs(u) > 1:
        raise ValueError(f"pgf argument must satisfy |u| <= 1, got {u}")
    return (1.0 - u ** rates.jump_sizes) @ rates.rates


# --- space-fractional -------------------------------------------------------


def space_frac_pgf(rates, t, orders, u: float) -> float:
    """exp(-sum_i t_i (sum_j rates[j, i] (1 - u^j))^alpha_i)."""
    rates = as_rates(rates)
    t = as_time(t, rates.d)
    orders = as_orders(orders, rates.d)
    psi = _laplace_exponents(rates, u)
    return math.exp(-float(np.sum(t.t * psi**orders.alpha)))


def space_frac_pgf_multivariate(rates, t, orders, u: float) -> float:
    """pgf of the GCP driven by d independent stable subordinators sharing time t."""
    rates = as_rates(rates)
    orders = as_orders(orders, rates.d)
    tau = _scalar_time(t)
    psi = _laplace_exponents(rates, u)
    return math.exp(-tau * float(np.sum(psi**orders.alpha)))


def space_frac_laplace_multivariate(rates, t, orders, eta: float) -> float:
    """E exp(-eta M(t)) for the multivariate space-fractional variant."""
    if eta < 0:
        raise ValueError("eta must be >= 0")
    return space_frac_pgf_multivariate(rates, t, orders, math.exp(-eta))


def _r_series_float(alpha: float, x: float, s: int):
    """sum_{r>=0} (-x)^r / r! * binom(alpha r, s), double precision."""
    r_min = math.ceil(s / alpha) + math.ceil(x) + 2
    total = 0.0
    comp = 0.0
    abs_sum = 0.0
    max_mag = 0.0
    coef = 1.0  # (-x)^r / r!
    small_run = 0
    for r in range(R_SERIES_BUDGET):
        if r > 0:
            coef *= -x / r
        term = coef * generalized_binomial(alpha * r, s)
        tt = total + term
        if abs(total) >= abs(term):
            comp += (total - tt) + term
        else:
            comp += (term - tt) + total
        total = tt
        mag = abs(term)
        abs_sum += mag
        max_mag = max(max_mag, mag)
        if r >= r_min and mag <= 1e-18 * max_mag:
            small_run += 1
            if small_run >= 2:
                return total + comp, r + 1, abs_sum
        else:
            small_run = 0
    raise SeriesConvergenceError(
        f"alternating series (alpha={alpha}, x={x}, s={s}) did not settle in "
        f"{R_SERIES_BUDGET} terms; the time argument is too large for the series"
    )


def _r_series_mp(alpha: float, x: float, s: int, dps: int):
    r_min = math.ceil(s / alpha) + math.ceil(x) + 2
    with mpmath.workdps(dps):
        a = mpmath.mpf(alpha)
        z = mpmath.mpf(x)
        coef = mpmath.mpf(1)
        total = mpmath.mpf(0)
        abs_sum = mpmath.mpf(0)
        max_mag = mpmath.mpf(0)
        tiny = mpmath.mpf(10) ** -22
        small_run = 0
        for r in range(R_SERIES_BUDGET):
            if r > 0:
                coef = coef * (-z) / r
            b = mpmath.mpf(1)
            ar = a * r
            for q in range(s):
                b = b * (ar - q) / (q + 1)
            term = coef * b
            total += term
            mag = abs(term)
            abs_sum += mag
            max_mag = max(max_mag, mag)
            if r >= r_min and mag <= tiny * max_mag:
                small_run += 1
                if small_run >= 2:
                    return total, r + 1, abs_sum
            else:
                small_run = 0
    raise SeriesConvergenceError(
        f"alternating series (alpha={alpha}, x={x}, s={s}) did not settle in {R_SERIES_BUDGET} terms"
    )


@lru_cache(maxsize=65536)
def _r_series(alpha: float, x: float, s: int) -> SeriesResult:
    value, used, abs_sum = _r_series_float(alpha, x, s)
    if abs_sum <= 1e4 * abs(value) or abs_sum < 1e-300:
        return SeriesResult(value, used, abs_sum * _U64 * (s + 8))
    dps = 30 + int(math.log10(abs_sum / max(abs(value), 1e-300 * abs_sum)))
    for _ in range(6):
        total, used, abs_mp = _r_series_mp(alpha, x, s, dps)
        if total != 0:
            lost = float(mpmath.log10(abs_mp / abs(total)))
            if lost + 20 <= dps:
                return SeriesResult(float(total), used, abs(float(total)) * _U64)
            dps = max(int(lost + 30), 2 * dps)
        else:
            dps *= 2
    raise SeriesConvergenceError(f"alternating series (alpha={alpha}, x={x}, s={s}) lost all digits")


def _space_axis_pmf(lams: tuple[float, ...], alpha: float, tau: float, m: int, cap: int) -> tuple[float, float]:
    """pmf of one space-fractional GCP axis at m, with an error bound."""
    if tau == 0.0:
        return (1.0 if m == 0 else 0.0), 0.0
    mu = math.fsum(lams)
    x = mu**alpha * tau
    weights = [lam / mu for lam in lams]
    total = []
    err = 0.0
    for comp in enumerate_omega(len(lams), m, cap=cap):
        s = sum(comp)
        log_w = math.lgamma(s + 1)
        skip = False
        for c, w in zip(comp, weights):
            if c:
                if w == 0.0:
                    skip = True
                    break
                log_w += c * math.log(w) - math.lgamma(c + 1)
        if skip:
            continue
        w = math.exp(log_w) * (-1.0 if s % 2 else 1.0)
        series = _r_series(alpha, x, s)
        total.append(w * series.value)
        err += abs(w) * series.tail_bound
    return math.fsum(total), err


def _space_axis_table(rates: RateMatrix, times: np.ndarray, orders: FractionalOrders, n_max: int, cap: int):
    vals = np.zeros((rates.d, n_max + 1))
    errs = np.zeros((rates.d, n_max + 1))
    for i in range(rates.d):
        lams = tuple(float(v) for v in rates.rates[:, i])
        for m in range(n_max + 1):
            vals[i, m], errs[i, m] = _space_axis_pmf(lams, float(orders.alpha[i]), float(times[i]), m, cap)
    return vals, errs


def _theta_product_sum(vals: np.ndarray, errs: np.ndarray, n: int, cap: int) -> SeriesResult:
    d = vals.shape[0]
    terms = []
    bound = 0.0
    used = 0
    for split in enumerate_theta(n, d, cap=cap):
        prod = 1.0
        for i, m in enumerate(split):
            prod *= vals[i, m]
        terms.append(prod)
        # |prod(a + e) - prod(a)| <= prod(|a| + |e|) - prod(|a|)
        hi = 1.0
        lo = 1.0
        for i, m in enumerate(split):
            hi *= abs(vals[i, m]) + errs[i, m]
            lo *= abs(vals[i, m])
        bound += hi - lo
        used += 1
    value = math.fsum(terms)
    return SeriesResult(value, used, float(bound + abs(value) * _U64 * d))


def space_frac_pmf(rates, t, orders, n: int, *, cap: int = ENUMERATION_CAP) -> SeriesResult:
    """P(M(D(t)) = n) for the multiparameter stable time change.

    Sums over the splits of n across axes, the per-axis compositions, and the
    alternating series in the subordinator exponent.
    """
    rates = as_rates(rates)
    t = as_time(t, rates.d)
    orders = as_orders(orders, rates.d)
    _require_positive_columns(rates)
    if n < 0:
        return SeriesResult(0.0, 0, 0.0)
    vals, errs = _space_axis_table(rates, t.t, orders, n, cap)
    res = _theta_product_sum(vals, errs, n, cap)
    return SeriesResult(min(max(res.value, 0.0), 1.0), res.terms_used, res.tail_bound)


def space_frac_pmf_multivariate(rates, t, orders, n: int, *, cap: int = ENUMERATION_CAP) -> SeriesResult:
    rates = as_rates(rates)
    tau = _scalar_time(t)
    return space_frac_pmf(rates, np.full(rates.d, tau), orders, n, cap=cap)


def space_frac_pmf_table(rates, t, orders, n_max: int, *, multivariate: bool = False) -> PmfTable:
    """Space-fractional pmf for n = 0..n_max (axis tables convolved once)."""
    rates = as_rates(rates)
    orders = as_orders(orders, rates.d)
    _require_positive_columns(rates)
    times = np.full(rates.d, _scalar_time(t)) if multivariate else as_time(t, rates.d).t
    vals, _ = _space_axis_table(rates, times, orders, n_max, ENUMERATION_CAP)
    out = vals[0]
    for i in range(1, rates.d):
        out = np.convolve(out, vals[i])[: n_max + 1]
    return PmfTable(np.clip(out, 0.0, 1.0))


# --- time-fractional --------------------------------------------------------


def time_frac_pgf(rates, t, orders, u: float) -> float:
    """prod_i E_{alpha_i,1}(-t_i^alpha_i sum_j rates[j, i] (1 - u^j))."""
    rates = as_rates(rates)
    t = as_time(t, rates.d)
    orders = as_orders(orders, rates.d)
    psi = _laplace_exponents(rates, u)
    out = 1.0
    for i in range(rates.d):
        a = float(orders.alpha[i])
        out *= mlf3(MlfParams(a, 1.0, 1.0), -(t.t[i] ** a) * psi[i]).value
    return out


@lru_cache(maxsize=65536)
def _time_axis_factor(alpha: float, tau_a: float, mu: float, s: int) -> float:
    """s! * E^{s+1}_{alpha, alpha s + 1}(-tau^alpha mu); multiplied by the rate monomial outside."""
    ml = mlf3(MlfParams(alpha, alpha * s + 1.0, s + 1.0), -tau_a * mu).value
    return math.exp(math.lgamma(s + 1)) * ml


def _time_cell(lams: np.ndarray, counts: tuple[int, ...], alpha: float, tau: float, mu: float) -> float:
    """Contribution of one axis: (sum n)! prod (lam tau^a)^n / n! * E^{s+1}_{a, a s+1}(-tau^a mu)."""
    s = sum(counts)
    if tau == 0.0:
        return 1.0 if s == 0 else 0.0
    tau_a = tau**alpha
    log_mono = 0.0
    for c, lam in zip(counts, lams):
        if c:
            if lam == 0.0:
                return 0.0
            log_mono += c * math.log(lam * tau_a) - math.lgamma(c + 1)
    return math.exp(log_mono) * _time_axis_factor(alpha, tau_a, mu, s)


def _time_pmf_omega_outer(rates: RateMatrix, t: np.ndarray, orders: FractionalOrders, n: int, cap: int) -> float:
    k, d = rates.k, rates.d
    mu = rates.column_sums
    terms = []
    for comp in enumerate_omega(k, n, cap=cap):
        splits = [list(enumerate_theta(c, d, cap=cap)) for c in comp]
        for choice in _product(splits):
            # choice[j][i] = n_ji
            prod = 1.0
            for i in range(d):
                counts = tuple(choice[j][i] for j in range(k))
                prod *= _time_cell(rates.rates[:, i], counts, float(orders.alpha[i]), float(t[i]), float(mu[i]))
                if prod == 0.0:
                    break
            terms.append(prod)
    return math.fsum(terms)


def _product(lists):
    if not lists:
        yield ()
        return
    head, *rest = lists
    for item in head:
        for tail in _product(rest):
            yield (item, *tail)


def _time_axis_pmf(rates: RateMatrix, t: np.ndarray, orders: FractionalOrders, i: int, m: int, cap: int) -> float:
    mu = rates.column_sums
    terms = [
        _time_cell(rates.rates[:, i], comp, float(orders.alpha[i]), float(t[i]), float(mu[i]))
        for comp in enumerate_omega(rates.k, m, cap=cap)
    ]
    return math.fsum(terms)


def _time_pmf_theta_outer(rates: RateMatrix, t: np.ndarray, orders: FractionalOrders, n: int, cap: int) -> float:
    axis = [[_time_axis_pmf(rates, t, orders, i, m, cap) for m in range(n + 1)] for i in range(rates.d)]
    terms = []
    for split in enumerate_theta(n, rates.d, cap=cap):
        prod = 1.0
        for i, m in enumerate(split):
            prod *= axis[i][m]
        terms.append(prod)
    return math.fsum(terms)


def time_frac_pmf(rates, t, orders, n: int, *, form: str = "omega", cap: int = ENUMERATION_CAP) -> float:
    """P(M(L(t)) = n) for the multiparameter inverse-stable time change.

    ``form="omega"`` sums jump-size compositions first and then splits each
    jump count across axes; ``form="theta"`` splits n across axes first and
    sums per-axis generalized fractional counting pmfs. Both orders cover the
    same k x d count matrices.
    """
    rates = as_rates(rates)
    t = as_time(t, rates.d)
    orders = as_orders(orders, rates.d)
    _require_positive_columns(rates)
    if n < 0:
        return 0.0
    if form == "omega":
        value = _time_pmf_omega_outer(rates, t.t, orders, n, cap)
    elif form == "theta":
        value = _time_pmf_theta_outer(rates, t.t, orders, n, cap)
    else:
        raise ValueError(f"form must be 'omega' or 'theta', got {form!r}")
    return min(max(value, 0.0), 1.0)


def time_frac_pmf_table(rates, t, orders, n_max: int, *, multivariate: bool = False) -> PmfTable:
    rates = as_rates(rates)
    orders = as_orders(orders, rates.d)
    _require_positive_columns(rates)
    times = np.full(rates.d, _scalar_time(t)) if multivariate else as_time(t, rates.d).t
    axis = np.array(
        [[_time_axis_pmf(rates, times, orders, i, m, ENUMERATION_CAP) for m in range(n_max + 1)] for i in range(rates.d)]
    )
    out = axis[0]
    for i in range(1, rates.d):
        out = np.convolve(out, axis[i])[: n_max + 1]
    return PmfTable(np.clip(out, 0.0, 1.0))


def _falling(j: int, q: int) -> float:
    out = 1.0
    for p in range(q):
        out *= j - p
    return out


def _time_axis_factorial_derivative(lams: np.ndarray, alpha: float, tau: float, m: int) -> float:
    """m-th u-derivative at u=1 of E_{alpha,1}(-tau^alpha sum_j lam_j (1 - u^j)), divided by m!."""
    if m == 0:
        return 1.0
    # g[q] = sum_j lam_j (j)_q / q!, the Taylor coefficients of the inner exponent at u=1
    g = [0.0] + [
        sum(float(lam) * _falling(j, q) for j, lam in enumerate(lams, start=1)) / math.factorial(q)
        for q in range(1, m + 1)
    ]
    # compositions[r][s]: sum over ordered compositions of s into r positive parts of prod g
    compositions = [[1.0] + [0.0] * m]
    total = 0.0
    for r in range(1, m + 1):
        row = [0.0] * (m + 1)
        prev = compositions[-1]
        for s in range(r, m + 1):
            row[s] = math.fsum(g[q] * prev[s - q] for q in range(1, s - r + 2))
        compositions.append(row)
        total += tau ** (r * alpha) / math.gamma(r * alpha + 1) * row[m]
    return total


def time_frac_factorial_moment(rates, t, orders, n: int, *, cap: int = ENUMERATION_CAP) -> float:
    """E[M (M-1) ... (M-n+1)] for the multiparameter inverse-stable time change."""
    rates = as_rates(rates)
    t = as_time(t, rates.d)
    orders = as_orders(orders, rates.d)
    if n < 0:
        raise ValueError("n must be >= 0")
    axis = [
        [
            _time_axis_factorial_derivative(rates.rates[:, i], float(orders.alpha[i]), float(t.t[i]), m)
            for m in range(n + 1)
        ]
        for i in range(rates.d)
    ]
    terms = []
    for split in enumerate_theta(n, rates.d, cap=cap):
        prod = 1.0
        for i, m in enumerate(split):
            prod *= axis[i][m]
        terms.append(prod)
    return math.factorial(n) * math.fsum(terms)


def _time_moments(rates: RateMatrix, times: np.ndarray, orders: FractionalOrders) -> tuple[float, float]:
    j = rates.jump_sizes
    mean = 0.0
    var = 0.0
    for i in range(rates.d):
        a = float(orders.alpha[i])
        ta = times[i] ** a
        first = float(np.dot(j, rates.rates[:, i])) * ta
        second = float(np.dot(j**2, rates.rates[:, i])) * ta
        g1 = math.gamma(a + 1)
        mean += first / g1
        var += second / g1 + first**2 * (2.0 / math.gamma(2 * a + 1) - 1.0 / g1**2)
    return mean, var


def time_frac_mean(rates, t, orders) -> float:
    rates = as_rates(rates)
    return _time_moments(rates, as_time(t, rates.d).t, as_orders(orders, rates.d))[0]


def time_frac_variance(rates, t, orders) -> float:
    rates = as_rates(rates)
    return _time_moments(rates, as_time(t, rates.d).t, as_orders(orders, rates.d))[1]


def time_frac_multivariate_pgf(rates, t, orders, u: float) -> float:
    rates = as_rates(rates)
    return time_frac_pgf(rates, np.full(rates.d, _scalar_time(t)), orders, u)


def time_frac_multivariate_pmf(rates, t, orders, n: int, *, form: str = "omega") -> float:
    rates = as_rates(rates)
    return time_frac_pmf(rates, np.full(rates.d, _scalar_time(t)), orders, n, form=form)


def time_frac_multivariate_mean(rates, t, orders) -> float:
    rates = as_rates(rates)
    return time_frac_mean(rates, np.full(rates.d, _scalar_time(t)), orders)


def time_frac_multivariate_variance(rates, t, orders) -> float:
    rates = as_rates(rates)
    return time_frac_variance(rates, np.full(rates.d, _scalar_time(t)), orders)


# --- dispatch by variant ----------------------------------------------------


def variant_pgf(rates, t, orders, kind, u: float) -> float:
    kind = VariantKind.parse(kind)
    if kind is VariantKind.BASE:
        return gcp_core.pgf(rates, t, u)
    if kind is VariantKind.SPACE_MULTIPARAMETER:
        return space_frac_pgf(rates, t, orders, u)
    if kind is VariantKind.SPACE_MULTIVARIATE:
        return space_frac_pgf_multivariate(rates, t, orders, u)
    if kind is VariantKind.TIME_MULTIPARAMETER:
        return time_frac_pgf(rates, t, orders, u)
    return time_frac_multivariate_pgf(rates, t, orders, u)


def variant_pmf_table(rates, t, orders, kind, n_max: int) -> PmfTable:
    kind = VariantKind.parse(kind)
    if kind is VariantKind.BASE:
        return gcp_core.pmf_convolution(rates, t, n_max)
    if kind.is_space:
        return space_frac_pmf_table(rates, t, orders, n_max, multivariate=kind.multivariate)
    return time_frac_pmf_table(rates, t, orders, n_max, multivariate=kind.multivariate)


# --- derivative operators and governing equations ---------------------------


def _eval_on(f: Callable, s: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(f(s), dtype=float)
        if out.shape == s.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(f(float(v))) for v in s])


def _central_difference(f: Callable, t: float, h: float) -> float:
    if t - h < 0:
        # one-sided second-order stencil near the origin
        return (-3.0 * f(t) + 4.0 * f(t + h) - f(t + 2 * h)) / (2 * h)
    return (f(t + h) - f(t - h)) / (2 * h)


def caputo_derivative(f: Callable, alpha: float, t: float, *, nodes: int = 2000, h: float = 1e-4) -> float:
    """Caputo derivative of order alpha in (0, 1] of f at t.

    For alpha < 1 the Abel kernel is integrated exactly against the piecewise
    linear interpolant of f on a mesh graded towards s = 0, where the
    functions of interest here have an s^alpha-type corner.
    """
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    if t < 0:
        raise ValueError("t must be >= 0")
    if alpha == 1.0:
        return float(_central_difference(f, t, h * max(1.0, t)))
    if t == 0.0:
        return 0.0
    grading = min(max((2.0 - alpha) / alpha, 1.0), 6.0)
    s = t * (np.arange(nodes + 1) / nodes) ** grading
    fs = _eval_on(f, s)
    slopes = np.diff(fs) / np.diff(s)
    b = 1.0 - alpha
    weights = (t - s[:-1]) ** b - (t - s[1:]) ** b
    value = float(np.sum(slopes * weights)) / math.gamma(2.0 - alpha)
    if not math.isfinite(value):
        raise ArithmeticError("Caputo quadrature produced a non-finite value")
    return value


def _with_axis(t: np.ndarray, i: int, value: float) -> np.ndarray:
    out = np.array(t, dtype=float)
    out[i] = value
    return out


def governing_system_residual(
    rates,
    t,
    orders,
    n: int,
    variant,
    *,
    axis: int = 0,
    u: float = 0.5,
    h: float = 1e-4,
    nodes: int = 2000,
) -> float:
    """|LHS - RHS| of the variant's governing equation.

    ``base``: the forward equation dp/dt_i = -sum_j lam_ji (p(n) - p(n-j)).
    ``time_multiparameter``: the same right-hand side with a Caputo derivative
    of order alpha_i on the left.
    ``space_*``: the pgf equation dG/dt = -(sum_j lam_ji (1 - u^j))^alpha_i G,
    where G is rebuilt from the series pmf (so the check exercises the pmf,
    not the closed-form pgf); ``n`` is ignored and ``u`` selects the point.
    """
    kind = VariantKind.parse(variant)
    rates = as_rates(rates)
    lam = rates.rates[:, axis]

    if kind is VariantKind.BASE:
        tt = as_time(t, rates.d).t

        def p(m: int, ti: float) -> float:
            return gcp_core.pmf_direct(rates, _with_axis(tt, axis, ti), m)

        lhs = _central_difference(lambda ti: p(n, ti), float(tt[axis]), h)
        rhs = -sum(float(lam[j]) * (p(n, tt[axis]) - p(n - j - 1, tt[axis])) for j in range(rates.k))
        return abs(lhs - rhs)

    orders = as_orders(orders, rates.d)
    if kind is VariantKind.TIME_MULTIPARAMETER:
        tt = as_time(t, rates.d).t
        a = float(orders.alpha[axis])

        def p(m: int, ti: float) -> float:
            return time_frac_pmf(rates, _with_axis(tt, axis, ti), orders, m)

        lhs = caputo_derivative(lambda ti: p(n, ti), a, float(tt[axis]), nodes=nodes, h=h)
        rhs = -sum(float(lam[j]) * (p(n, tt[axis]) - p(n - j - 1, tt[axis])) for j in range(rates.k))
        return abs(lhs - rhs)

    if kind.is_space:
        if not 0 <= u < 1:
            raise ValueError("space-fractional residual needs 0 <= u < 1")
        # truncate so that the neglected pgf tail is below 1e-14
        n_max = 40 if u == 0 else max(10, int(math.ceil(math.log(1e-14) / math.log(u))))
        powers = u ** np.arange(n_max + 1)
        psi = _laplace_exponents(rates, u)
        multivariate = kind.multivariate
        tt = np.full(rates.d, _scalar_time(t)) if multivariate else as_time(t, rates.d).t

        def g(shift: float) -> float:
            times = tt + shift if multivariate else _with_axis(tt, axis, tt[axis] + shift)
            table = space_frac_pmf_table(rates, times[0] if multivariate else times, orders, n_max, multivariate=multivariate)
            return float(np.dot(powers, table.probs))

        lhs = (g(h) - g(-h)) / (2 * h)
        if multivariate:
            rate = float(np.sum(psi**orders.alpha))
        else:
            rate = float(psi[axis] ** orders.alpha[axis])
        return abs(lhs + rate * g(0.0))

    raise ValueError(f"no governing system is available for variant {kind.value!r}")
