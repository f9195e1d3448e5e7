"""Verification harness: named suites of law-vs-sampler and formula-vs-formula checks.

Each ``check_*`` function takes explicit parameters and returns a list of
:class:`Check` records, so the same checks drive both ``run_suite`` (on a
config) and the acceptance tests (on fixed parameter grids). Every check that
draws random numbers gets its own :class:`RngStream` keyed by the check name,
which keeps reports identical under a fixed seed regardless of which suites
run.
"""

from __future__ import annotations

import csv
import io
import math
import sys
import zlib
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import special

from mgcp import fractional_variants as fv
from mgcp import gcp_core, integrals, samplers, stats
from mgcp.config import ExperimentConfig
from mgcp.fractional_variants import VariantKind
from mgcp.special_functions import MlfParams, mlf3

__all__ = [
    "SUITES",
    "Check",
    "VerificationReport",
    "Table",
    "emit_csv",
    "format_real",
    "run_suite",
    "stream_for",
    "check_equivalence",
    "check_normalization",
    "check_weighted_poisson_law",
    "check_moments",
    "check_reductions",
    "check_variant_law",
    "check_variant_moments",
    "check_space_zero_class",
    "check_governing",
    "check_stable_laplace",
    "check_inverse_stable_mean",
    "check_path_increments",
    "check_integral_samplers",
    "check_small_t_normality",
    "check_mlf_kernel",
]

SUITES = ("normalization", "equivalence", "moments", "reductions", "governing", "samplers", "integrals")


@dataclass(frozen=True)
class Check:
    name: str
    statistic: float
    band: str
    passed: bool


@dataclass
class VerificationReport:
    suite: str
    checks: list[Check] = field(default_factory=list)

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = [
            f"{'PASS' if c.passed else 'FAIL'} {c.name}: statistic={format_real(c.statistic)} band={c.band}"
            for c in self.checks
        ]
        out.append(f"{'PASS' if self.overall else 'FAIL'} suite {self.suite} ({len(self.checks)} checks)")
        return out

    def table(self) -> Table:
        rows = [(self.suite, c.name, c.statistic, c.band, int(c.passed)) for c in self.checks]
        return Table(("suite", "check", "statistic", "band", "pass"), rows)


@dataclass(frozen=True)
class Table:
    header: Sequence[str]
    rows: Sequence[Sequence]


def format_real(x) -> str:
    """Shortest-round-trip-safe decimal form with 17 significant digits."""
    return format(float(x), ".17g")


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_real(v)
    return str(v)


def emit_csv(table: Table, path) -> None:
    """Write ``table`` as an RFC 4180 CSV (CRLF line ends, ASCII, header always present)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow([str(h) for h in table.header])
    for row in table.rows:
        if len(row) != len(table.header):
            raise ValueError(f"row has {len(row)} cells, header has {len(table.header)}")
        writer.writerow([_cell(v) for v in row])
    text = buf.getvalue()
    try:
        data = text.encode("ascii")
    except UnicodeEncodeError as exc:
        raise ValueError(f"non-ASCII content in table for {path}") from exc
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def stream_for(seed: int, name: str) -> samplers.RngStream:
    return samplers.RngStream(seed, zlib.crc32(name.encode("ascii")))


def _band_check(name: str, band: stats.BandResult, sigmas: float) -> Check:
    text = f"|est-target|<={format_real(band.half_width)} (target {format_real(band.target)}, {sigmas:g} sigma)"
    return Check(name, band.estimate, text, band.passed)


def _tol_check(name: str, value: float, tol: float) -> Check:
    return Check(name, value, f"<={tol:g}", bool(value <= tol))


def _p_check(name: str, res: stats.TestResult, significance: float) -> Check:
    return Check(name, res.pvalue, f"p>{significance:g}", res.passed(significance))


# --- deterministic checks ----------------------------------------------------


def check_equivalence(rates, t, n_max: int, tol: float = 1e-12, label: str = "equivalence") -> list[Check]:
    conv = gcp_core.pmf_convolution(rates, t, n_max).probs
    sumg = gcp_core.pmf_sum_of_gcps(rates, t, n_max).probs
    direct = np.array([gcp_core.pmf_direct(rates, t, n) for n in range(n_max + 1)])
    dev = max(np.max(np.abs(conv - direct)), np.max(np.abs(sumg - direct)), np.max(np.abs(conv - sumg)))
    return [_tol_check(f"{label}.max_abs_diff", float(dev), tol)]


def check_normalization(rates, t, tol: float = 1e-9, label: str = "normalization") -> list[Check]:
    n_star = gcp_core.truncation_index(rates, t)
    mass = gcp_core.pmf_table(rates, t, n_star).mass_accounted
    return [_tol_check(f"{label}.missing_mass", max(0.0, 1.0 - mass), tol)]


def check_reductions(rates, t, n_max: int, tol: float = 1e-9, label: str = "reductions") -> list[Check]:
    """All orders equal to 1: every variant formula must reproduce the base law."""
    rates = gcp_core.as_rates(rates)
    t = gcp_core.as_time(t, rates.d)
    ones = np.ones(rates.d)
    base = gcp_core.pmf_convolution(rates, t, n_max).probs
    devs = {
        "space_pmf": np.max(np.abs(fv.space_frac_pmf_table(rates, t, ones, n_max).probs - base)),
        "time_pmf": np.max(np.abs(fv.time_frac_pmf_table(rates, t, ones, n_max).probs - base)),
    }
    us = (0.0, 0.3, 0.7, 1.0)
    devs["space_pgf"] = max(abs(fv.space_frac_pgf(rates, t, ones, u) - gcp_core.pgf(rates, t, u)) for u in us)
    devs["time_pgf"] = max(abs(fv.time_frac_pgf(rates, t, ones, u) - gcp_core.pgf(rates, t, u)) for u in us)
    m, v = gcp_core.mean(rates, t), gcp_core.variance(rates, t)
    devs["time_mean"] = abs(fv.time_frac_mean(rates, t, ones) - m) / max(1.0, m)
    devs["time_variance"] = abs(fv.time_frac_variance(rates, t, ones) - v) / max(1.0, v)
    if np.allclose(t.t, t.t[0]):
        s = float(t.t[0])
        mv = np.abs(fv.space_frac_pmf_table(rates, s, ones, n_max, multivariate=True).probs - base)
        tv = np.abs(fv.time_frac_pmf_table(rates, s, ones, n_max, multivariate=True).probs - base)
        devs["space_mv_pmf"] = np.max(mv)
        devs["time_mv_pmf"] = np.max(tv)
    return [_tol_check(f"{label}.{k}", float(v), tol) for k, v in devs.items()]


def check_governing(rates, t, orders, kind, n: int, tol: float, label: str = "governing") -> list[Check]:
    kind = VariantKind.parse(kind)
    res = fv.governing_system_residual(rates, t, orders, n, kind)
    return [_tol_check(f"{label}.{kind.value}.n{n}", float(res), tol)]


def check_mlf_kernel(tol: float = 1e-10, erfc_tol: float = 1e-8, label: str = "mlf") -> list[Check]:
    """Exponential and erfc identities of the Mittag-Leffler series."""
    one = MlfParams(1.0, 1.0, 1.0)
    xs = np.linspace(-30.0, 5.0, 351)
    exp_err = max(abs(mlf3(one, float(x)).value - math.exp(x)) / math.exp(x) for x in xs)
    half = MlfParams(0.5, 1.0, 1.0)
    ys = np.linspace(0.0, 3.0, 61)
    erfc_err = max(abs(mlf3(half, -float(y)).value - float(special.erfcx(y))) for y in ys)
    return [
        _tol_check(f"{label}.exp_relative", exp_err, tol),
        _tol_check(f"{label}.erfc_identity", erfc_err, erfc_tol),
    ]


# --- Monte-Carlo checks ------------------------------------------------------


def check_weighted_poisson_law(
    rates, t, rng: samplers.RngStream, replicates: int, significance: float = 1e-3, n_max: int = 10, label: str = "law.base"
) -> list[Check]:
    draws = samplers.sample_mgcp(rates, t, rng, size=replicates)
    probs = gcp_core.pmf_convolution(rates, t, n_max).probs
    return [_p_check(f"{label}.chisquare", stats.chisquare_gof(draws, probs), significance)]


def check_moments(rates, t, rng: samplers.RngStream, replicates: int, sigmas: float = 4.0, label: str = "moments.base") -> list[Check]:
    draws = samplers.sample_mgcp(rates, t, rng, size=replicates)
    return [
        _band_check(f"{label}.mean", stats.mean_band(draws, gcp_core.mean(rates, t), sigmas), sigmas),
        _band_check(f"{label}.variance", stats.variance_band(draws, gcp_core.variance(rates, t), sigmas), sigmas),
    ]


def check_variant_law(
    rates, t, orders, kind, rng: samplers.RngStream, replicates: int, significance: float = 1e-3, n_max: int = 10, label: str | None = None
) -> list[Check]:
    kind = VariantKind.parse(kind)
    label = label or f"law.{kind.value}"
    draws = samplers.sample_variant(rates, t, orders, kind, rng, size=replicates)
    probs = fv.variant_pmf_table(rates, t, orders, kind, n_max).probs
    return [_p_check(f"{label}.chisquare", stats.chisquare_gof(draws, probs), significance)]


def check_variant_moments(
    rates, t, orders, kind, rng: samplers.RngStream, replicates: int, sigmas: float = 4.0, label: str | None = None
) -> list[Check]:
    """Mean and variance of time-changed draws; only the time-fractional variants have finite moments."""
    kind = VariantKind.parse(kind)
    label = label or f"moments.{kind.value}"
    if kind is VariantKind.TIME_MULTIPARAMETER:
        m, v = fv.time_frac_mean(rates, t, orders), fv.time_frac_variance(rates, t, orders)
    elif kind is VariantKind.TIME_MULTIVARIATE:
        m, v = fv.time_frac_multivariate_mean(rates, t, orders), fv.time_frac_multivariate_variance(rates, t, orders)
    else:
        raise ValueError(f"{kind.value} has no finite moments")
    draws = samplers.sample_variant(rates, t, orders, kind, rng, size=replicates)
    return [
        _band_check(f"{label}.mean", stats.mean_band(draws, m, sigmas), sigmas),
        _band_check(f"{label}.variance", stats.variance_band(draws, v, sigmas), sigmas),
    ]


def check_space_zero_class(
    rates, t, orders, rng: samplers.RngStream, replicates: int, sigmas: float = 4.0, significance: float = 1e-3,
    multivariate: bool = False, label: str | None = None,
) -> list[Check]:
    """P(count = 0) against the closed form, and the series pmf for n <= 5 against frequencies."""
    kind = VariantKind.SPACE_MULTIVARIATE if multivariate else VariantKind.SPACE_MULTIPARAMETER
    label = label or f"zero_class.{kind.value}"
    draws = samplers.sample_variant(rates, t, orders, kind, rng, size=replicates)
    p0 = fv.variant_pgf(rates, t, orders, kind, 0.0)
    probs = fv.variant_pmf_table(rates, t, orders, kind, 5).probs
    return [
        _band_check(f"{label}.p0", stats.proportion_band(int(np.sum(draws == 0)), replicates, p0, sigmas), sigmas),
        _p_check(f"{label}.chisquare_n5", stats.chisquare_gof(draws, probs), significance),
    ]


def check_stable_laplace(
    alpha: float, t: float, rng: samplers.RngStream, replicates: int, ws=(0.5, 1.0, 2.0), sigmas: float = 4.0, label: str = "stable"
) -> list[Check]:
    draws = samplers.sample_stable(alpha, t, rng, size=replicates)
    out = []
    for w in ws:
        target = math.exp(-t * w**alpha)
        band = stats.mean_band(np.exp(-w * draws), target, sigmas)
        out.append(_band_check(f"{label}.alpha{alpha:g}.laplace_w{w:g}", band, sigmas))
    return out


def check_inverse_stable_mean(
    alpha: float, t: float, rng: samplers.RngStream, replicates: int, sigmas: float = 4.0, label: str = "inverse_stable"
) -> list[Check]:
    draws = samplers.sample_inverse_stable(alpha, t, rng, size=replicates)
    target = t**alpha / math.gamma(alpha + 1.0)
    return [_band_check(f"{label}.alpha{alpha:g}.mean", stats.mean_band(draws, target, sigmas), sigmas)]


def check_path_increments(
    rates, t, rng: samplers.RngStream, replicates: int, significance: float = 1e-3, sigmas: float = 4.0, label: str = "paths"
) -> list[Check]:
    """Two equal grid steps: increments share a law and are uncorrelated."""
    rates = gcp_core.as_rates(rates)
    t = gcp_core.as_time(t, rates.d)
    path = samplers.sample_mgcp_path(rates, [t.t, 2.0 * t.t], rng, size=replicates)
    first = path.values[:, 0]
    second = path.values[:, 1] - path.values[:, 0]
    probs = gcp_core.pmf_convolution(rates, t, 10).probs
    rho = float(np.corrcoef(first, second)[0, 1])
    limit = sigmas / math.sqrt(replicates)
    return [
        _p_check(f"{label}.first_step.chisquare", stats.chisquare_gof(first, probs), significance),
        _p_check(f"{label}.second_step.chisquare", stats.chisquare_gof(second, probs), significance),
        Check(f"{label}.increment_correlation", abs(rho), f"<={format_real(limit)}", abs(rho) <= limit),
        Check(f"{label}.monotone", float(np.min(np.diff(path.values, axis=1))), ">=0", bool(np.all(np.diff(path.values, axis=1) >= 0))),
    ]


def check_integral_samplers(
    rates, t, seed: int, replicates: int, significance: float = 1e-3, sigmas: float = 4.0, nodes: int = 256, label: str = "integral"
) -> list[Check]:
    """Compound-sum vs quadrature samplers for the Riemann integral."""
    rates = gcp_core.as_rates(rates)
    spec = integrals.IntegralSpec(np.ones(rates.d), t, nodes)
    a = integrals.integral_sample_compound(rates, spec, stream_for(seed, f"{label}.compound"), size=replicates)
    b = integrals.integral_sample_quadrature(rates, spec, stream_for(seed, f"{label}.quadrature"), size=replicates)
    m, v = integrals.integral_mean(rates, spec), integrals.integral_variance(rates, spec)
    return [
        _p_check(f"{label}.ks_compound_vs_quadrature", stats.ks_two_sample(a, b), significance),
        _band_check(f"{label}.compound.mean", stats.mean_band(a, m, sigmas), sigmas),
        _band_check(f"{label}.compound.variance", stats.variance_band(a, v, sigmas), sigmas),
        _band_check(f"{label}.quadrature.mean", stats.mean_band(b, m, sigmas), sigmas),
        _band_check(f"{label}.quadrature.variance", stats.variance_band(b, v, sigmas), sigmas),
    ]


def check_small_t_normality(
    rates, t, rng: samplers.RngStream, replicates: int, significance: float = 1e-3, label: str = "integral.small_t"
) -> list[Check]:
    """Anderson-Darling test of compound-sum draws against the small-t Gaussian law."""
    mean, var = integrals.gaussian_asymptotic_params(rates, t)
    draws = integrals.integral_sample_compound(rates, t, rng, size=replicates)
    res = stats.anderson_darling_normal(draws, mean, var)
    return [_p_check(f"{label}.anderson_darling", res, significance)]


# --- suites ------------------------------------------------------------------


def _suite_checks(cfg: ExperimentConfig, suite: str) -> list[Check]:
    rates, orders, kind = cfg.rate_matrix, cfg.orders, cfg.variant
    t, base_t = cfg.time, cfg.base_time
    seed, reps = cfg.seed, cfg.replicates
    sig, sigmas = cfg.tol("significance"), cfg.tol("band_sigmas")
    out: list[Check] = []

    if suite == "normalization":
        out += check_normalization(rates, base_t, cfg.tol("normalization"))
        g1 = fv.variant_pgf(rates, t, orders, kind, 1.0)
        out.append(_tol_check(f"normalization.{kind.value}.pgf_at_1", abs(g1 - 1.0), cfg.tol("normalization")))
    elif suite == "equivalence":
        out += check_equivalence(rates, base_t, cfg.n_max, cfg.tol("equivalence"))
        if kind.is_time:
            n_top = min(cfg.n_max, 8)
            single = fv.time_frac_multivariate_pmf if kind.multivariate else fv.time_frac_pmf
            dev = max(
                abs(single(rates, t, orders, n, form="omega") - single(rates, t, orders, n, form="theta"))
                for n in range(n_top + 1)
            )
            out.append(_tol_check(f"equivalence.{kind.value}.summation_orders", dev, cfg.tol("equivalence")))
    elif suite == "moments":
        out += check_moments(rates, base_t, stream_for(seed, "moments.base"), reps, sigmas)
        if kind.is_time:
            out += check_variant_moments(rates, t, orders, kind, stream_for(seed, f"moments.{kind.value}"), reps, sigmas)
    elif suite == "reductions":
        out += check_reductions(rates, base_t, cfg.n_max, cfg.tol("reduction"))
    elif suite == "governing":
        for n in range(3):
            out += check_governing(rates, base_t, orders, "base", n, cfg.tol("base_residual"))
        if kind.is_space:
            out += check_governing(rates, t, orders, kind, 0, cfg.tol("space_residual"))
        if kind is VariantKind.TIME_MULTIPARAMETER:
            out += check_governing(rates, t, orders, kind, 1, cfg.tol("time_residual"))
    elif suite == "samplers":
        out += check_weighted_poisson_law(rates, base_t, stream_for(seed, "law.base"), reps, sig)
        out += check_path_increments(rates, base_t, stream_for(seed, "paths"), reps, sig, sigmas)
        if kind is not VariantKind.BASE:
            out += check_variant_law(rates, t, orders, kind, stream_for(seed, f"law.{kind.value}"), reps, sig)
        if kind.is_space:
            out += check_space_zero_class(
                rates, t, orders, stream_for(seed, "zero_class"), reps, sigmas, sig, multivariate=kind.multivariate
            )
        fractional = [a for a in orders.alpha if a < 1.0]
        alpha = float(fractional[0]) if fractional else 0.5
        out += check_stable_laplace(alpha, 1.0, stream_for(seed, "stable"), reps, sigmas=sigmas)
        out += check_inverse_stable_mean(alpha, 1.0, stream_for(seed, "inverse_stable"), reps, sigmas)
    elif suite == "integrals":
        out += check_integral_samplers(rates, base_t, seed, reps, sig, sigmas)
        small = gcp_core.MultiTime(np.full(rates.d, 0.1))
        out += check_small_t_normality(rates, small, stream_for(seed, "integral.small_t"), reps, sig)
    else:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES + ('all',))}")
    return out


def run_suite(config: ExperimentConfig, suite: str) -> VerificationReport:
    """Run one named suite, or every suite for ``"all"``."""
    names = SUITES if suite == "all" else (suite,)
    if suite != "all" and suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES + ('all',))}")
    report = VerificationReport(suite)
    for name in names:
        report.checks.extend(_suite_checks(config, name))
    return report
