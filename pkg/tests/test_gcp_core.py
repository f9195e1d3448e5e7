import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from mgcp import gcp_core as g

# joint Poisson enumeration with scipy, rates [[1,2],[3,4]] at t=(0.5, 0.25)
SCIPY_TABLE = [
    0.030197383422318504,
    0.030197383422318504,
    0.09059215026695551,
    0.08052635579284934,
    0.1333717767819067,
    0.10720071114923069,
]


@pytest.mark.parametrize("method", ["direct", "conv", "sumgcp"])
def test_pmf_matches_scipy_enumeration(method):
    table = g.pmf_table([[1, 2], [3, 4]], (0.5, 0.25), 5, method=method)
    assert np.allclose(table.probs, SCIPY_TABLE, rtol=1e-13, atol=0)


def test_two_jump_sizes_known_value():
    assert g.pmf_direct([[1], [1]], 1.0, 2) == pytest.approx(1.5 * math.exp(-2), rel=1e-14)


def test_poisson_reduction():
    for n in range(15):
        assert g.pmf_direct([[2.5]], 1.3, n) == pytest.approx(stats.poisson.pmf(n, 3.25), rel=1e-13)


def test_zero_time_is_point_mass():
    table = g.pmf_table([[1, 2], [3, 4]], (0.0, 0.0), 4)
    assert table.probs.tolist() == [1.0, 0.0, 0.0, 0.0, 0.0]


def test_zero_rate_entries_are_handled():
    # only axis 1 carries size-1 jumps and only axis 2 carries size-2 jumps
    for n in range(6):
        ref = sum(stats.poisson.pmf(n - 2 * x, 1.5) * stats.poisson.pmf(x, 0.4) for x in range(n // 2 + 1))
        for method in ("direct", "conv", "sumgcp"):
            assert g.pmf_table([[1.5, 0.0], [0.0, 0.4]], (1.0, 1.0), 5, method=method)[n] == pytest.approx(ref, rel=1e-13)


def test_identically_zero_row_rejected():
    with pytest.raises(ValueError, match="jump sizes \\[2\\]"):
        g.RateMatrix([[1.5], [0.0]])


def test_negative_n_is_zero():
    assert g.pmf_direct([[1]], 1.0, -1) == 0.0


def test_moments():
    assert g.mean([[1, 2], [3, 4]], (1, 1)) == pytest.approx(17.0)
    assert g.variance([[1, 2], [3, 4]], (1, 1)) == pytest.approx(31.0)


def test_pgf_and_mgf():
    r, t = [[1, 2], [3, 4]], (0.5, 0.25)
    table = g.pmf_table(r, t, g.truncation_index(r, t))
    for u in (0.0, 0.3, 0.9, 1.0):
        assert g.pgf(r, t, u) == pytest.approx(np.dot(table.probs, u ** np.arange(len(table))), abs=1e-14)
    assert g.mgf(r, t, 0.2) == pytest.approx(np.dot(table.probs, np.exp(0.2 * np.arange(len(table)))), rel=1e-12)
    with pytest.raises(ValueError):
        g.pgf(r, t, 1.5)


def test_composition_counts():
    assert g.count_omega(2, 4) == 3
    assert list(g.enumerate_omega(2, 4)) == sorted(g.enumerate_omega(2, 4))
    assert g.count_omega(3, 6) == len(list(g.enumerate_omega(3, 6)))
    assert g.count_theta(3, 2) == 4
    assert list(g.enumerate_theta(2, 2)) == [(0, 2), (1, 1), (2, 0)]
    with pytest.raises(g.EnumerationCapError):
        list(g.enumerate_theta(50, 6, cap=100))


def test_rate_matrix_validation():
    with pytest.raises(ValueError):
        g.RateMatrix([[-1.0]])
    with pytest.raises(ValueError):
        g.RateMatrix([[0.0, 0.0]])
    with pytest.raises(ValueError):
        g.RateMatrix([[1.0, 0.0]], strict=True)
    r = g.RateMatrix([[1, 2], [3, 4]])
    assert (r.k, r.d) == (2, 2)
    assert r == g.RateMatrix(np.array([[1.0, 2.0], [3.0, 4.0]]))
    with pytest.raises(ValueError):
        r.rates[0, 0] = 5.0


def test_multitime_order():
    a, b = g.MultiTime([0.5, 1.0]), g.MultiTime([1.0, 1.0])
    assert a.precedes(b) and not b.precedes(a)
    assert (b - a) == g.MultiTime([0.5, 0.0])
    with pytest.raises(ValueError):
        g.MultiTime([-0.1])


rate_matrices = st.integers(1, 3).flatmap(
    lambda k: st.integers(1, 3).flatmap(
        lambda d: st.tuples(
            st.lists(st.lists(st.floats(0.1, 3.0), min_size=d, max_size=d), min_size=k, max_size=k),
            st.lists(st.floats(0.0, 2.0), min_size=d, max_size=d),
        )
    )
)


@given(rate_matrices)
def test_three_evaluators_agree(case):
    rates, t = case
    n_max = 12
    conv = g.pmf_convolution(rates, t, n_max).probs
    sumg = g.pmf_sum_of_gcps(rates, t, n_max).probs
    direct = np.array([g.pmf_direct(rates, t, n) for n in range(n_max + 1)])
    assert np.max(np.abs(conv - direct)) < 1e-12
    assert np.max(np.abs(sumg - direct)) < 1e-12


@given(rate_matrices)
def test_mass_and_moments_from_table(case):
    rates, t = case
    n_star = g.truncation_index(rates, t)
    p = g.pmf_table(rates, t, n_star).probs
    n = np.arange(p.size)
    assert math.fsum(p) >= 1 - 1e-9
    m = float(np.dot(n, p))
    assert m == pytest.approx(g.mean(rates, t), rel=1e-9, abs=1e-12)
    assert float(np.dot((n - m) ** 2, p)) == pytest.approx(g.variance(rates, t), rel=1e-8, abs=1e-12)


@given(rate_matrices, st.floats(0.1, 5.0))
def test_scaling_rates_is_scaling_time(case, c):
    rates, t = case
    scaled = g.pmf_convolution(np.array(rates) * c, t, 8).probs
    stretched = g.pmf_convolution(rates, np.array(t) * c, 8).probs
    assert np.allclose(scaled, stretched, atol=1e-14)


@given(rate_matrices, st.floats(0.0, 1.0))
def test_pgf_product_over_axes(case, u):
    # independent axis contributions multiply
    rates, t = case
    arr = np.array(rates)
    total = math.prod(g.pgf(arr[:, [i]], [t[i]], u) for i in range(arr.shape[1]))
    assert g.pgf(rates, t, u) == pytest.approx(total, rel=1e-12, abs=1e-300)
