"""Multiparameter generalized counting process: index sets, pmf, pgf, moments.

The process M(t), t in R^d_+, makes jumps of size j = 1..k. Row j of the rate
matrix holds the jump-j rates along each of the d time axes, so the jump-j
intensity accumulated up to t is the dot product ``rates[j] @ t``. At a fixed
t, M(t) has the law of ``sum_j j * N_j`` with independent
``N_j ~ Poisson(rates[j] @ t)``.

Three pmf evaluators are provided. :func:`pmf_convolution` is the production
path; :func:`pmf_direct` (composition sum) and :func:`pmf_sum_of_gcps`
(sum over splits of n across the time axes) are kept as cross-checks.
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "ENUMERATION_CAP",
    "EnumerationCapError",
    "RateMatrix",
    "MultiTime",
    "PmfTable",
    "as_rates",
    "as_time",
    "count_omega",
    "enumerate_omega",
    "count_theta",
    "enumerate_theta",
    "pmf_direct",
    "pmf_convolution",
    "pmf_sum_of_gcps",
    "pmf_table",
    "pgf",
    "mgf",
    "mean",
    "variance",
    "truncation_index",
]

ENUMERATION_CAP = 10**7

Composition = tuple[int, ...]


class EnumerationCapError(MemoryError):
    """Raised when an index set would exceed the configured size cap."""


@dataclass(frozen=True, eq=False)
class RateMatrix:
    """k x d array of jump rates; entry (j, i) is the rate of jump size j+1 on axis i."""

    rates: np.ndarray
    strict: bool = False

    def __post_init__(self) -> None:
        arr = np.array(self.rates, dtype=float, copy=True)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"rates must be a non-empty k x d array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("rates must be finite")
        if np.any(arr < 0):
            raise ValueError("rates must be non-negative")
        if self.strict:
            if np.any(arr <= 0):
                raise ValueError("strict rates require every entry > 0")
        elif np.any(arr.sum(axis=1) <= 0):
            bad = [int(j) + 1 for j in np.flatnonzero(arr.sum(axis=1) <= 0)]
            raise ValueError(f"rate rows for jump sizes {bad} are identically zero")
        arr.flags.writeable = False
        object.__setattr__(self, "rates", arr)

    @property
    def k(self) -> int:
        return self.rates.shape[0]

    @property
    def d(self) -> int:
        return self.rates.shape[1]

    @property
    def column_sums(self) -> np.ndarray:
        """mu_i = sum_j rates[j, i], the total jump intensity along axis i."""
        return self.rates.sum(axis=0)

    @property
    def jump_sizes(self) -> np.ndarray:
        return np.arange(1, self.k + 1, dtype=float)

    def intensities(self, t: MultiTime) -> np.ndarray:
        """Vector of ``rates[j] @ t`` for each jump size."""
        if t.d != self.d:
            raise ValueError(f"time has {t.d} coordinates, rates have d={self.d}")
        return self.rates @ t.t

    def column(self, i: int) -> RateMatrix:
        return RateMatrix(self.rates[:, i : i + 1])

    def scaled(self, c: float) -> RateMatrix:
        return RateMatrix(self.rates * c)

    def tolist(self) -> list[list[float]]:
        return self.rates.tolist()

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RateMatrix) and np.array_equal(self.rates, other.rates)

    def __hash__(self) -> int:
        return hash((self.rates.shape, self.rates.tobytes()))

    def __repr__(self) -> str:
        return f"RateMatrix({self.rates.tolist()!r})"


@dataclass(frozen=True, eq=False)
class MultiTime:
    """A point of R^d_+; ``s.precedes(t)`` is the component-wise order."""

    t: np.ndarray

    def __post_init__(self) -> None:
        arr = np.atleast_1d(np.array(self.t, dtype=float, copy=True))
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("time must be a non-empty vector")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError(f"time coordinates must be finite and >= 0, got {arr.tolist()}")
        arr.flags.writeable = False
        object.__setattr__(self, "t", arr)

    @property
    def d(self) -> int:
        return self.t.size

    def precedes(self, other: MultiTime) -> bool:
        return bool(np.all(self.t <= other.t))

    def __sub__(self, other: MultiTime) -> MultiTime:
        return MultiTime(self.t - other.t)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, MultiTime) and np.array_equal(self.t, other.t)

    def __hash__(self) -> int:
        return hash(self.t.tobytes())

    def __repr__(self) -> str:
        return f"MultiTime({self.t.tolist()!r})"


@dataclass(frozen=True)
class PmfTable:
    probs: np.ndarray
    n_max: int = field(init=False)
    mass_accounted: float = field(init=False)

    def __post_init__(self) -> None:
        arr = np.array(self.probs, dtype=float, copy=True)
        arr.flags.writeable = False
        object.__setattr__(self, "probs", arr)
        object.__setattr__(self, "n_max", arr.size - 1)
        object.__setattr__(self, "mass_accounted", math.fsum(arr))

    def __getitem__(self, n: int) -> float:
        return float(self.probs[n])

    def __len__(self) -> int:
        return self.probs.size

    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.probs)


def as_rates(rates) -> RateMatrix:
    return rates if isinstance(rates, RateMatrix) else RateMatrix(np.asarray(rates, dtype=float))


def as_time(t, d: int | None = None) -> MultiTime:
    if not isinstance(t, MultiTime):
        t = MultiTime(np.atleast_1d(np.asarray(t, dtype=float)))
    if d is not None and t.d != d:
        if t.d == 1:
            return MultiTime(np.full(d, t.t[0]))
        raise ValueError(f"time has {t.d} coordinates, expected {d}")
    return t


# --- index sets -------------------------------------------------------------


@lru_cache(maxsize=4096)
def count_omega(k: int, n: int) -> int:
    """|Omega(k, n)|: solutions of sum_j j x_j = n (partitions of n into parts <= k)."""
    ways = [1] + [0] * n
    for part in range(1, k + 1):
        for m in range(part, n + 1):
            ways[m] += ways[m - part]
    return ways[n]


def _check_cap(count: int, cap: int, what: str) -> None:
    if count > cap:
        raise EnumerationCapError(f"{what} has {count} elements, above the cap {cap}")


def enumerate_omega(k: int, n: int, *, cap: int = ENUMERATION_CAP) -> Iterator[Composition]:
    """Yield every (x_1, ..., x_k) >= 0 with sum_j j x_j = n, in lexicographic order."""
    if k < 1 or n < 0:
        raise ValueError(f"need k >= 1 and n >= 0, got k={k}, n={n}")
    _check_cap(count_omega(k, n), cap, f"Omega({k}, {n})")
    parts = [0] * k

    def rec(j: int, remaining: int) -> Iterator[Composition]:
        size = j + 1
        if j == k - 1:
            if remaining % size == 0:
                parts[j] = remaining // size
                yield tuple(parts)
            return
        for x in range(remaining // size + 1):
            parts[j] = x
            yield from rec(j + 1, remaining - size * x)

    yield from rec(0, n)


def count_theta(n: int, d: int) -> int:
    return math.comb(n + d - 1, d - 1)


def enumerate_theta(n: int, d: int, *, cap: int = ENUMERATION_CAP) -> Iterator[Composition]:
    """Yield every (n_1, ..., n_d) >= 0 with sum n_i = n, in lexicographic order."""
    if d < 1 or n < 0:
        raise ValueError(f"need d >= 1 and n >= 0, got n={n}, d={d}")
    _check_cap(count_theta(n, d), cap, f"Theta({n}, {d})")
    parts = [0] * d

    def rec(i: int, remaining: int) -> Iterator[Composition]:
        if i == d - 1:
            parts[i] = remaining
            yield tuple(parts)
            return
        for x in range(remaining + 1):
            parts[i] = x
            yield from rec(i + 1, remaining - x)

    yield from rec(0, n)


# --- pmf --------------------------------------------------------------------


def _log_poisson_term(x: int, a: float) -> float:
    if a == 0.0:
        return 0.0 if x == 0 else -math.inf
    return x * math.log(a) - a - math.lgamma(x + 1)


def _composition_pmf(intensities: Sequence[float], n: int, cap: int) -> float:
    terms = []
    for comp in enumerate_omega(len(intensities), n, cap=cap):
        log_term = 0.0
        for x, a in zip(comp, intensities):
            log_term += _log_poisson_term(x, a)
        if log_term > -math.inf:
            terms.append(math.exp(log_term))
    return math.fsum(terms)


def pmf_direct(rates, t, n: int, *, cap: int = ENUMERATION_CAP) -> float:
    """P(M(t) = n) by summing over Omega(k, n) in log space."""
    rates = as_rates(rates)
    t = as_time(t, rates.d)
    if n < 0:
        return 0.0
    return min(1.0, _composition_pmf(rates.intensities(t).tolist(), n, cap))


def _poisson_pmf(a: float, n_max: int) -> np.ndarray:
    x = np.arange(n_max + 1)
    if a == 0.0:
        out = np.zeros(n_max + 1)
        out[0] = 1.0
        return out
    logp = x * math.log(a) - a - np.array([math.lgamma(v + 1) for v in x])
    return np.exp(logp)


def _convolve_truncated(a: np.ndarray, b: np.ndarray, n_max: int) -> np.ndarray:
    return np.convolve(a, b)[: n_max + 1]


def _gcp_table(intensities: Sequence[float], n_max: int) -> np.ndarray:
    out = np.zeros(n_max + 1)
    out[0] = 1.0
    for j, a in enumerate(intensities, start=1):
        dilated = np.zeros(n_max + 1)
        base = _poisson_pmf(float(a), n_max // j)
        dilated[:: j][: base.size] = base
        out = _convolve_truncated(out, dilated, n_max)
    return out


def pmf_convolution(rates, t, n_max: int) -> PmfTable:
    """pmf table for n = 0..n_max as a k-fold convolution of j-dilated Poisson pmfs."""
    rates = as_rates(rates)
    t = as_time(t, rates.d)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    return PmfTable(np.clip(_gcp_table(rates.intensities(t), n_max), 0.0, 1.0))


def pmf_sum_of_gcps(rates, t, n_max: int, *, cap: int = ENUMERATION_CAP) -> PmfTable:
    """pmf table via sum over Theta(n, d) of products of one-axis GCP pmfs.

    The one-axis factor for axis i is the GCP pmf with rates ``rates[:, i]``
    at time ``t_i``, itself evaluated as a composition sum.
    """
    rates = as_rates(rates)
    t = as_time(t, rates.d)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    axis_pmf = []
    for i in range(rates.d):
        intens = (rates.rates[:, i] * t.t[i]).tolist()
        axis_pmf.append([_composition_pmf(intens, m, cap) for m in range(n_max + 1)])
    probs = np.zeros(n_max + 1)
    for n in range(n_max + 1):
        terms = []
        for split in enumerate_theta(n, rates.d, cap=cap):
            prod = 1.0
            for i, m in enumerate(split):
                prod *= axis_pmf[i][m]
                if prod == 0.0:
                    break
            terms.append(prod)
        probs[n] = math.fsum(terms)
    return PmfTable(np.clip(probs, 0.0, 1.0))


def pmf_table(rates, t, n_max: int, method: str = "conv") -> PmfTable:
    if method == "conv":
        return pmf_convolution(rates, t, n_max)
    if method == "direct":
        return PmfTable([pmf_direct(rates, t, n) for n in range(n_max + 1)])
    if method == "sumgcp":
        return pmf_sum_of_gcps(rates, t, n_max)
    raise ValueError(f"unknown pmf method {method!r}; expected direct, conv or sumgcp")


# --- transforms and moments -------------------------------------------------


def pgf(rates, t, u: float) -> float:
    """E u^{M(t)} = exp(-sum_j (rates[j] @ t) (1 - u^j)) for |u| <= 1."""
    rates = as_rates(rates)
    t = as_time(t, rates.d)
    if abs(u) > 1:
        raise ValueError(f"pgf argument must satisfy |u| <= 1, got {u}")
    a = rates.intensities(t)
    return math.exp(-float(np.dot(a, 1.0 - u ** rates.jump_sizes)))


def mgf(rates, t, u: float) -> float:
    """E exp(u M(t)); finite for every real u."""
    rates = as_rates(rates)
    t = as_time(t, rates.d)
    a = rates.intensities(t)
    return math.exp(-float(np.dot(a, 1.0 - np.exp(u * rates.jump_sizes))))


def mean(rates, t) -> float:
    rates = as_rates(rates)
    t = as_time(t, rates.d)
    return float(np.dot(rates.jump_sizes, rates.intensities(t)))


def variance(rates, t) -> float:
    rates = as_rates(rates)
    t = as_time(t, rates.d)
    return float(np.dot(rates.jump_sizes**2, rates.intensities(t)))


def truncation_index(rates, t) -> int:
    """n_max covering all but a negligible tail: mean + 12 sd + 20."""
    return int(math.ceil(mean(rates, t) + 12.0 * math.sqrt(variance(rates, t)) + 20))
