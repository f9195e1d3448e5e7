"""Experiment configuration: JSON schema, validation and round-trip serialization.

Schema (JSON object)::

    {
      "k": 2, "d": 2,                       required, positive integers
      "rates": [[1.0, 0.5], [0.3, 2.0]],    required, k rows of d non-negative reals
      "variant": "base",                    required, see VariantKind
      "t": [0.7, 1.2],                      required; a number for multivariate variants
      "alpha": [0.6, 0.8],                  optional, each in (0, 1], default all 1
      "n_max": 12,                          optional
      "replicates": 100000,                 optional
      "seed": 42,                           optional
      "tolerances": {"equivalence": 1e-12}  optional overrides of DEFAULT_TOLERANCES
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from mgcp.fractional_variants import FractionalOrders, VariantKind
from mgcp.gcp_core import MultiTime, RateMatrix

__all__ = [
    "DEFAULT_TOLERANCES",
    "ConfigError",
    "MissingFieldError",
    "ShapeMismatchError",
    "AlphaDomainError",
    "NegativeRateError",
    "InvalidFieldError",
    "ExperimentConfig",
    "config_from_dict",
    "load_config",
    "dump_config",
]

DEFAULT_TOLERANCES: dict[str, float] = {
    "equivalence": 1e-12,
    "normalization": 1e-9,
    "reduction": 1e-9,
    "significance": 1e-3,
    "band_sigmas": 4.0,
    "base_residual": 1e-6,
    "space_residual": 1e-6,
    "time_residual": 1e-3,
    "mlf_relative": 1e-10,
}

_REQUIRED = ("k", "d", "rates", "variant", "t")


class ConfigError(ValueError):
    """Base class for configuration problems; ``field`` names the offending key."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field


class MissingFieldError(ConfigError):
    pass


class ShapeMismatchError(ConfigError):
    pass


class AlphaDomainError(ConfigError):
    pass


class NegativeRateError(ConfigError):
    pass


class InvalidFieldError(ConfigError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    k: int
    d: int
    rates: tuple[tuple[float, ...], ...]
    variant: VariantKind
    t: tuple[float, ...] | float
    alpha: tuple[float, ...]
    n_max: int = 12
    replicates: int = 100_000
    seed: int = 42
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    @property
    def rate_matrix(self) -> RateMatrix:
        return RateMatrix(np.array(self.rates))

    @property
    def orders(self) -> FractionalOrders:
        return FractionalOrders(np.array(self.alpha))

    @property
    def time(self) -> MultiTime | float:
        """Scalar for multivariate variants, a MultiTime otherwise."""
        if isinstance(self.t, float):
            return self.t
        return MultiTime(np.array(self.t))

    @property
    def base_time(self) -> MultiTime:
        """The time vector of the untransformed process (scalar times broadcast to d axes)."""
        if isinstance(self.t, float):
            return MultiTime(np.full(self.d, self.t))
        return MultiTime(np.array(self.t))

    def tol(self, name: str) -> float:
        return float(self.tolerances[name])

    def to_dict(self) -> dict:
        overrides = {k: v for k, v in self.tolerances.items() if DEFAULT_TOLERANCES.get(k) != v}
        out = {
            "k": self.k,
            "d": self.d,
            "rates": [list(r) for r in self.rates],
            "variant": self.variant.value,
            "t": self.t if isinstance(self.t, float) else list(self.t),
            "alpha": list(self.alpha),
            "n_max": self.n_max,
            "replicates": self.replicates,
            "seed": self.seed,
        }
        if overrides:
            out["tolerances"] = overrides
        return out

    def with_seed(self, seed: int) -> ExperimentConfig:
        return config_from_dict({**self.to_dict(), "seed": seed})


def _positive_int(obj: dict, key: str, default=None) -> int:
    value = obj.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
        raise InvalidFieldError(key, f"expected a positive integer, got {value!r}")
    return value


def _real(value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InvalidFieldError(key, f"expected a finite number, got {value!r}")
    return float(value)


def config_from_dict(obj: dict) -> ExperimentConfig:
    if not isinstance(obj, dict):
        raise InvalidFieldError("<root>", "configuration must be a JSON object")
    for key in _REQUIRED:
        if key not in obj:
            raise MissingFieldError(key, "required field is missing")
    k = _positive_int(obj, "k")
    d = _positive_int(obj, "d")

    rates = obj["rates"]
    if not isinstance(rates, list) or len(rates) != k:
        got = len(rates) if isinstance(rates, list) else type(rates).__name__
        raise ShapeMismatchError("rates", f"expected {k} rows, got {got}")
    rows = []
    for j, row in enumerate(rates):
        if not isinstance(row, list) or len(row) != d:
            raise ShapeMismatchError("rates", f"row {j} must have {d} entries")
        vals = tuple(_real(v, "rates") for v in row)
        if any(v < 0 for v in vals):
            raise NegativeRateError("rates", f"row {j} has a negative rate")
        rows.append(vals)
    if not any(any(v > 0 for v in row) for row in rows):
        raise InvalidFieldError("rates", "at least one rate must be positive")

    try:
        variant = VariantKind.parse(obj["variant"])
    except ValueError as exc:
        raise InvalidFieldError("variant", str(exc)) from None

    t_raw = obj["t"]
    if variant.multivariate:
        if isinstance(t_raw, list):
            if len(t_raw) != 1:
                raise ShapeMismatchError("t", f"{variant.value} takes a single time")
            t_raw = t_raw[0]
        t: tuple[float, ...] | float = _real(t_raw, "t")
        if t < 0:
            raise InvalidFieldError("t", "time must be >= 0")
    else:
        if not isinstance(t_raw, list):
            t_raw = [t_raw] * d if d == 1 else t_raw
        if not isinstance(t_raw, list) or len(t_raw) != d:
            raise ShapeMismatchError("t", f"expected {d} time coordinates")
        t = tuple(_real(v, "t") for v in t_raw)
        if any(v < 0 for v in t):
            raise InvalidFieldError("t", "time coordinates must be >= 0")

    alpha_raw = obj.get("alpha", [1.0] * d)
    if not isinstance(alpha_raw, list) or len(alpha_raw) != d:
        raise ShapeMismatchError("alpha", f"expected {d} orders")
    alpha = tuple(_real(v, "alpha") for v in alpha_raw)
    if any(not 0 < a <= 1 for a in alpha):
        raise AlphaDomainError("alpha", f"orders must lie in (0, 1], got {list(alpha)}")

    tolerances = dict(DEFAULT_TOLERANCES)
    extra = obj.get("tolerances", {})
    if not isinstance(extra, dict):
        raise InvalidFieldError("tolerances", "expected an object")
    for key, value in extra.items():
        if key not in DEFAULT_TOLERANCES:
            raise InvalidFieldError("tolerances", f"unknown tolerance {key!r}")
        tolerances[key] = _real(value, f"tolerances.{key}")

    seed = obj.get("seed", 42)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise InvalidFieldError("seed", f"expected a 64-bit unsigned integer, got {seed!r}")

    return ExperimentConfig(
        k=k,
        d=d,
        rates=tuple(rows),
        variant=variant,
        t=t,
        alpha=alpha,
        n_max=_positive_int(obj, "n_max", 12),
        replicates=_positive_int(obj, "replicates", 100_000),
        seed=seed,
        tolerances=tolerances,
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidFieldError("<root>", f"{path} is not valid JSON ({exc.msg})") from None
    return config_from_dict(obj)


def dump_config(config: ExperimentConfig) -> str:
    return json.dumps(config.to_dict(), indent=2) + "\n"
