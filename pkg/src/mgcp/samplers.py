"""Exact-in-law samplers for the multiparameter GCP and its time-changed variants.

All randomness flows through :class:`RngStream`, a Philox (counter-based)
generator keyed by ``(seed, stream_id)``. Distinct stream ids give
independent streams by construction, so Monte-Carlo work can be split across
workers without coordination. There is no module-level RNG.

Every sampler takes an optional ``size`` and returns a numpy array when it is
given, a Python scalar otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from mgcp.fractional_variants import FractionalOrders, VariantKind, as_orders
from mgcp.gcp_core import MultiTime, RateMatrix, as_rates, as_time

__all__ = [
    "RngStream",
    "SamplePath",
    "SubordinatorDraw",
    "sample_poisson",
    "sample_mgcp",
    "sample_mgcp_at",
    "sample_mgcp_path",
    "sample_stable",
    "sample_inverse_stable",
    "sample_variant",
    "sample_variant_path",
]


@dataclass
class RngStream:
    """Seeded, independently keyed random stream."""

    seed: int
    stream_id: int = 0
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not (0 <= self.seed < 2**64 and 0 <= self.stream_id < 2**64):
            raise ValueError("seed and stream_id must be 64-bit unsigned integers")
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.Philox(seq))

    def spawn(self, stream_id: int) -> RngStream:
        """A sibling stream with the same seed and a different id."""
        return RngStream(self.seed, stream_id)


@dataclass(frozen=True)
class SamplePath:
    """Counting-process values along a chain of time points."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.grid.shape[0] != self.values.shape[-1]:
            raise ValueError("grid and values must have the same length")
        if np.any(np.diff(self.values, axis=-1) < 0):
            raise ValueError("counting path must be non-decreasing")


@dataclass(frozen=True)
class SubordinatorDraw:
    """A single subordinator value (stable draws have infinite mean)."""

    value: float

    def __post_init__(self) -> None:
        if not self.value >= 0:
            raise ValueError(f"subordinator values are non-negative, got {self.value}")

    def __float__(self) -> float:
        return self.value


def _out(arr: np.ndarray, size):
    return arr if size is not None else arr.item()


def sample_poisson(mean: float, rng: RngStream, size=None):
    """Poisson(mean) variates."""
    mean = float(mean)
    if not (math.isfinite(mean) and mean >= 0):
        raise ValueError(f"Poisson mean must be finite and >= 0, got {mean}")
    return _out(np.asarray(rng.generator.poisson(mean, size=size)), size)


def sample_mgcp_at(rates: RateMatrix, times: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    """One GCP draw per row of ``times`` (shape (R, d)): sum_j j Poisson(rates[j] @ times[r])."""
    intens = np.asarray(times, dtype=float) @ rates.rates.T
    counts = gen.poisson(intens)
    return counts @ np.arange(1, rates.k + 1)


def sample_mgcp(rates, t, rng: RngStream, size=None):
    """Draws of M(t) via independent Poisson counts per jump size."""
    rates = as_rates(rates)
    t = as_time(t, rates.d)
    n = 1 if size is None else int(size)
    times = np.broadcast_to(t.t, (n, rates.d))
    return _out(sample_mgcp_at(rates, times, rng.generator), size)


def _as_grid(grid, d: int) -> np.ndarray:
    if isinstance(grid, (list, tuple)) and grid and isinstance(grid[0], MultiTime):
        arr = np.array([g.t for g in grid])
    else:
        arr = np.asarray(grid, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None] if d == 1 else arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != d:
        if arr.ndim == 2 and arr.shape[1] == 1:
            arr = np.repeat(arr, d, axis=1)
        else:
            raise ValueError(f"grid must have shape (m, {d})")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValueError("grid times must be finite and >= 0")
    if np.any(np.diff(arr, axis=0) < 0):
        raise ValueError("grid must be increasing in the component-wise order")
    return arr


def sample_mgcp_path(rates, grid, rng: RngStream, size=None) -> SamplePath:
    """Path values on a component-wise increasing chain of times.

    Increments over consecutive grid cells are independent GCP draws at the
    cell's time difference, then accumulated.
    """
    rates = as_rates(rates)
    g = _as_grid(grid, rates.d)
    n = 1 if size is None else int(size)
    steps = np.diff(np.vstack([np.zeros(rates.d), g]), axis=0)
    incs = np.empty((n, g.shape[0]), dtype=np.int64)
    for c in range(g.shape[0]):
        incs[:, c] = sample_mgcp_at(rates, np.broadcast_to(steps[c], (n, rates.d)), rng.generator)
    values = np.cumsum(incs, axis=1)
    return SamplePath(g, values if size is not None else values[0])


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0 < alpha < 1:
        raise ValueError(f"stable index must lie in (0, 1), got {alpha}")
    return alpha


def _unit_stable(alpha: float, gen: np.random.Generator, n: int) -> np.ndarray:
    # Kanter's representation: E exp(-w S) = exp(-w^alpha)
    u = gen.uniform(np.nextafter(0.0, 1.0), np.pi, size=n)
    e = gen.standard_exponential(size=n)
    log_s = (
        np.log(np.sin(alpha * u))
        - np.log(np.sin(u)) / alpha
        + (1.0 - alpha) / alpha * (np.log(np.sin((1.0 - alpha) * u)) - np.log(e))
    )
    return np.exp(log_s)


def sample_stable(alpha: float, t: float, rng: RngStream, size=None):
    """One-sided alpha-stable subordinator value D(t), with E exp(-w D(t)) = exp(-t w^alpha)."""
    alpha = _check_alpha(alpha)
    if t < 0:
        raise ValueError("t must be >= 0")
    n = 1 if size is None else int(size)
    draws = float(t) ** (1.0 / alpha) * _unit_stable(alpha, rng.generator, n)
    return draws if size is not None else SubordinatorDraw(float(draws[0]))


def sample_inverse_stable(alpha: float, t: float, rng: RngStream, size=None):
    """Inverse-stable subordinator value L(t) = (t / D(1))^alpha in law."""
    alpha = _check_alpha(alpha)
    if t < 0:
        raise ValueError("t must be >= 0")
    n = 1 if size is None else int(size)
    draws = (float(t) / _unit_stable(alpha, rng.generator, n)) ** alpha
    return draws if size is not None else SubordinatorDraw(float(draws[0]))


def _random_times(times: np.ndarray, orders: FractionalOrders, kind: VariantKind, gen, n: int) -> np.ndarray:
    out = np.empty((n, times.size))
    for i, (tau, a) in enumerate(zip(times, orders.alpha)):
        if a == 1.0 or tau == 0.0:
            out[:, i] = tau
        elif kind.is_space:
            out[:, i] = tau ** (1.0 / a) * _unit_stable(a, gen, n)
        else:
            out[:, i] = (tau / _unit_stable(a, gen, n)) ** a
    return out


def sample_variant(rates, t, orders, kind, rng: RngStream, size=None):
    """Draws of the base process or one of its four time-changed variants.

    Each axis gets its own independent subordinator; the GCP is then sampled at
    the random time vector.
    """
    rates = as_rates(rates)
    kind = VariantKind.parse(kind)
    n = 1 if size is None else int(size)
    if kind is VariantKind.BASE:
        return sample_mgcp(rates, t, rng, size)
    orders = as_orders(orders, rates.d)
    if kind.multivariate:
        arr = np.atleast_1d(np.asarray(t.t if isinstance(t, MultiTime) else t, dtype=float))
        if arr.size != 1:
            raise ValueError(f"{kind.value} takes a scalar time")
        times = np.full(rates.d, float(arr[0]))
        if times[0] < 0:
            raise ValueError("time must be >= 0")
    else:
        times = as_time(t, rates.d).t
    random_times = _random_times(times, orders, kind, rng.generator, n)
    return _out(sample_mgcp_at(rates, random_times, rng.generator), size)


def sample_variant_path(rates, grid, orders, kind, rng: RngStream, size=None) -> SamplePath:
    """Path of the base or a stable-subordinated process along a chain of times.

    Stable subordinators have independent stationary increments, so the random
    times along the chain are exact. Inverse-stable subordinators do not, and
    only single-point grids are accepted for the time-fractional variants.
    """
    rates = as_rates(rates)
    kind = VariantKind.parse(kind)
    if kind is VariantKind.BASE:
        return sample_mgcp_path(rates, grid, rng, size)
    orders = as_orders(orders, rates.d)
    g = _as_grid(grid, rates.d)
    if kind.multivariate and not np.all(g == g[:, :1]):
        raise ValueError(f"{kind.value} takes scalar grid times")
    n = 1 if size is None else int(size)
    gen = rng.generator
    if kind.is_time:
        if g.shape[0] != 1:
            raise ValueError("time-fractional variants are sampled at single time points only")
        times = g[0]
        vals = sample_mgcp_at(rates, _random_times(times, orders, kind, gen, n), gen)[:, None]
        return SamplePath(g, vals if size is not None else vals[0])
    steps = np.diff(np.vstack([np.zeros(rates.d), g]), axis=0)
    incs = np.empty((n, g.shape[0]), dtype=np.int64)
    for c in range(g.shape[0]):
        rand_steps = _random_times(steps[c], orders, kind, gen, n)
        incs[:, c] = sample_mgcp_at(rates, rand_steps, gen)
    values = np.cumsum(incs, axis=1)
    return SamplePath(g, values if size is not None else values[0])
