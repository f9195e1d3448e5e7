import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mgcp import fractional_variants as fv
from mgcp import gcp_core
from mgcp.special_functions import mlf

# For alpha = 1/2 the subordinators have closed laws: D(1) = 1/(2 Z^2) and
# L(t) = sqrt(2 t) |Z| with Z standard normal. These references integrate the
# Poisson pmf against those laws with mpmath quadrature (independent of the
# series code under test).
TIME_HALF_K1 = [0.37134274973520476432, 0.26199216590466853593, 0.16632223800624561885, 0.097009306889000846941]
SPACE_HALF_K1 = [0.35838126165057087145, 0.1838778783075022813, 0.093141403141631968362, 0.054638343481557647984]
TIME_HALF_D2 = [0.27722754227081376, 0.26975044103522349, 0.19273524765571099]
SPACE_HALF_D2 = [0.26122174135754263, 0.17533015835112494, 0.10267271167237585]

R = [[1.0, 0.5], [0.3, 2.0]]
T = (0.7, 1.2)
A = (0.6, 0.8)


@pytest.mark.parametrize("n", range(4))
def test_time_fractional_against_quadrature(n):
    assert fv.time_frac_pmf([[1.3]], 0.9, [0.5], n) == pytest.approx(TIME_HALF_K1[n], rel=1e-12)


@pytest.mark.parametrize("n", range(4))
def test_space_fractional_against_quadrature(n):
    assert fv.space_frac_pmf([[1.3]], 0.9, [0.5], n).value == pytest.approx(SPACE_HALF_K1[n], rel=1e-12)


@pytest.mark.parametrize("n", range(3))
def test_two_axis_against_quadrature(n):
    r, t = [[1.3, 0.4]], (0.9, 0.5)
    assert fv.time_frac_pmf(r, t, [0.5, 0.5], n) == pytest.approx(TIME_HALF_D2[n], rel=1e-12)
    assert fv.space_frac_pmf(r, t, [0.5, 0.5], n).value == pytest.approx(SPACE_HALF_D2[n], rel=1e-12)


def test_time_zero_class_is_mittag_leffler():
    for alpha in (0.5, 0.8):
        assert fv.time_frac_pmf([[1.0]], 1.0, [alpha], 0) == pytest.approx(mlf(alpha, 1.0, -1.0), rel=1e-14)


def test_space_zero_class_closed_form():
    mu = np.array(R).sum(axis=0)
    expected = math.exp(-sum(t * m**a for t, m, a in zip(T, mu, A)))
    assert fv.space_frac_pmf(R, T, A, 0).value == pytest.approx(expected, rel=1e-13)
    assert fv.space_frac_pgf(R, T, A, 0.0) == pytest.approx(expected, rel=1e-15)


def test_space_table_reproduces_pgf():
    table = fv.space_frac_pmf_table(R, T, A, 60)
    u = 0.5
    assert np.dot(table.probs, u ** np.arange(61)) == pytest.approx(fv.space_frac_pgf(R, T, A, u), abs=1e-15)
    # heavy tail: mass is visibly short of one at n = 60
    assert table.mass_accounted < 0.95


def test_time_table_reproduces_pgf_and_moments():
    table = fv.time_frac_pmf_table(R, T, A, 120)
    n = np.arange(121)
    assert table.mass_accounted == pytest.approx(1.0, abs=1e-10)
    for u in (0.2, 0.7):
        assert np.dot(table.probs, u**n) == pytest.approx(fv.time_frac_pgf(R, T, A, u), abs=1e-13)
    m = fv.time_frac_mean(R, T, A)
    assert np.dot(table.probs, n) == pytest.approx(m, rel=1e-9)
    assert np.dot(table.probs, (n - m) ** 2) == pytest.approx(fv.time_frac_variance(R, T, A), rel=1e-8)
    for q in (1, 2, 3):
        falling = np.array([math.perm(int(k), q) for k in n], dtype=float)
        assert np.dot(table.probs, falling) == pytest.approx(fv.time_frac_factorial_moment(R, T, A, q), rel=1e-9)


def test_summation_orders_agree():
    for n in range(8):
        a = fv.time_frac_pmf(R, T, A, n, form="omega")
        b = fv.time_frac_pmf(R, T, A, n, form="theta")
        assert a == pytest.approx(b, abs=1e-15)


def test_time_overdispersion():
    # variance exceeds the mean-matched base variance for alpha < 1
    assert fv.time_frac_variance(R, T, A) > fv.time_frac_mean(R, T, A)


def test_multivariate_matches_equal_times():
    s = 0.9
    mv = fv.time_frac_pmf_table(R, s, A, 6, multivariate=True).probs
    mp = fv.time_frac_pmf_table(R, (s, s), A, 6).probs
    assert np.allclose(mv, mp, atol=1e-15)
    smv = fv.space_frac_pmf_table(R, s, A, 6, multivariate=True).probs
    smp = fv.space_frac_pmf_table(R, (s, s), A, 6).probs
    assert np.allclose(smv, smp, atol=1e-15)


def test_multivariate_laplace_at_zero_is_one():
    assert fv.space_frac_laplace_multivariate(R, 0.8, A, 0.0) == pytest.approx(1.0)


def test_validation():
    with pytest.raises(ValueError):
        fv.FractionalOrders([1.5])
    with pytest.raises(ValueError):
        fv.FractionalOrders([0.0])
    with pytest.raises(ValueError):
        fv.space_frac_pmf([[1.0, 0.0]], (1.0, 1.0), (0.5, 0.5), 0)
    with pytest.raises(ValueError):
        fv.time_frac_pmf(R, T, A, 1, form="other")
    assert fv.VariantKind.parse("space-mv") is fv.VariantKind.SPACE_MULTIVARIATE
    with pytest.raises(ValueError):
        fv.VariantKind.parse("nonsense")


def test_caputo_of_power_functions():
    # D^a t^p = Gamma(p+1)/Gamma(p+1-a) t^(p-a); piecewise-linear product
    # integration is exact for p = 1 and O(N^(a-2)) otherwise
    for a in (0.5, 0.8):
        exact = 1.0 / math.gamma(2 - a)
        assert fv.caputo_derivative(lambda s: s, a, 1.0) == pytest.approx(exact, rel=1e-12)
        exact = 2.0 / math.gamma(3 - a)
        assert fv.caputo_derivative(lambda s: s * s, a, 1.0) == pytest.approx(exact, rel=2e-4)
    assert fv.caputo_derivative(lambda s: s * s, 1.0, 0.5) == pytest.approx(1.0, rel=1e-8)


def test_governing_residuals():
    r = [[1.0], [2.0]]
    assert fv.governing_system_residual(r, 1.0, [0.6], 3, "base") < 1e-6
    assert fv.governing_system_residual(r, 1.0, [0.6], 0, "space") < 1e-6
    assert fv.governing_system_residual(r, 1.0, [0.6], 0, "space-mv") < 1e-6
    with pytest.raises(ValueError):
        fv.governing_system_residual(r, 1.0, [0.6], 1, "time-mv")


@pytest.mark.slow
def test_time_fractional_caputo_residual():
    assert fv.governing_system_residual([[1.0], [2.0]], 1.0, [0.6], 3, "time") < 1e-3


cases = st.tuples(
    st.lists(st.lists(st.floats(0.2, 2.0), min_size=2, max_size=2), min_size=1, max_size=2),
    st.lists(st.floats(0.2, 1.5), min_size=2, max_size=2),
)


@given(cases)
def test_unit_orders_reduce_to_base(case):
    rates, t = case
    base = gcp_core.pmf_convolution(rates, t, 8).probs
    assert np.allclose(fv.space_frac_pmf_table(rates, t, [1, 1], 8).probs, base, atol=1e-12)
    assert np.allclose(fv.time_frac_pmf_table(rates, t, [1, 1], 8).probs, base, atol=1e-12)


@given(cases, st.floats(0.3, 1.0), st.floats(0.0, 1.0))
def test_pgf_bounded_and_monotone(case, alpha, u):
    rates, t = case
    for kind in ("space", "time"):
        g_u = fv.variant_pgf(rates, t, [alpha, alpha], kind, u)
        g_v = fv.variant_pgf(rates, t, [alpha, alpha], kind, min(1.0, u + 0.1))
        assert 0.0 <= g_u <= g_v + 1e-15 <= 1.0 + 1e-12


@given(cases, st.floats(0.4, 1.0))
def test_pmf_values_are_probabilities(case, alpha):
    rates, t = case
    for kind in ("space", "time"):
        p = fv.variant_pmf_table(rates, t, [alpha, alpha], kind, 6).probs
        assert np.all(p >= 0) and math.fsum(p) <= 1 + 1e-12
