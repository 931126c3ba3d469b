import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import dfs_smooth, harmonic_fraction, largest_prime_factor, primes_by_trial, s_m_cdf_bruteforce
from smoothlab.errors import InfeasibleExactError, OutOfRangeError, UsageError
from smoothlab.primes import EULER_GAMMA, build_prime_table, euler_product, harmonic, lam
from smoothlab.smooth import (
    SmoothQuery, build_lpf_sieve, exact_bound, harmonic_smooth_sum, lemma51_rhs, psi_count, psi_h,
    psi_h_prob_approx, psi_h_prob_exact, s_m_cdf_exact, smooth_numbers,
)

E_MG = math.exp(-EULER_GAMMA)


@pytest.fixture(scope="module")
def small():
    return build_lpf_sieve(10**4)


def test_lpf_matches_trial_division(small):
    expect = [0] + [largest_prime_factor(k) for k in range(1, 10**4 + 1)]
    assert small.lpf.tolist() == expect


@pytest.mark.parametrize("n, k, v", [(12, 12, 3), (2, 2, 2), (60, 60, 5)])
def test_lpf_examples(n, k, v):
    assert build_lpf_sieve(n).lpf[k] == v


def test_sieve_cap():
    with pytest.raises(UsageError):
        build_lpf_sieve(10**9)
    with pytest.raises(UsageError):
        build_lpf_sieve(1)


@pytest.mark.parametrize("n, m, v", [(10, 2, 4), (100, 3, 20), (10, 10, 10)])
def test_psi_examples(small, n, m, v):
    assert psi_count(small, n, m) == v


def test_psi_edge_cases(small):
    assert psi_count(small, 500, 1) == 1
    assert psi_count(small, 500, 600) == 500
    with pytest.raises(OutOfRangeError):
        psi_count(small, 10**4 + 1, 5)
    with pytest.raises(UsageError):
        psi_count(small, 10, 0)


def test_psi_known_value(sieve):
    # Psi(10^6, 100): a classical tabulated count
    assert psi_count(sieve, 10**6, 100) == 72271


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 3000), st.integers(1, 3000), st.integers(1, 3000), st.integers(1, 3000))
def test_psi_monotone(n, m, dn, dm):
    s = build_lpf_sieve(6000)
    assert psi_count(s, n, m) <= psi_count(s, n + dn, m)
    assert psi_count(s, n, m) <= psi_count(s, n, m + dm)
    assert harmonic_smooth_sum(s, n, m) <= harmonic_smooth_sum(s, n + dn, m + dm)


def test_harmonic_smooth_sum_examples(small):
    assert harmonic_smooth_sum(small, 4, 2) == pytest.approx(1.75)
    assert harmonic_smooth_sum(small, 1, 1) == 1.0
    oracle = math.fsum(1 / k for k in dfs_smooth([2, 3], 100))
    assert harmonic_smooth_sum(small, 100, 3) == pytest.approx(oracle, abs=1e-12)


def test_psi_h_exact_examples(small):
    assert psi_h_prob_exact(small, SmoothQuery(4, 2)) == pytest.approx(0.84, abs=1e-15)
    assert psi_h_prob_exact(small, SmoothQuery(5, 5)) == 1.0
    assert psi_h(small, SmoothQuery(4, 2)) == pytest.approx(4 * 0.84)


def test_psi_h_exact_fraction(small):
    n, m = 300, 7
    num = sum(Fraction(1, k) for k in range(1, n + 1)
              if largest_prime_factor(k) <= m)
    assert psi_h_prob_exact(small, SmoothQuery(n, m)) == pytest.approx(
        float(num / harmonic_fraction(n)), rel=1e-14)


def test_query_validation():
    with pytest.raises(UsageError):
        SmoothQuery(1, 5)
    assert SmoothQuery(10**6, 10**3).upsilon == pytest.approx(2.0)


def test_psi_h_approx_examples(dickman):
    assert psi_h_prob_approx(dickman, SmoothQuery(4, 2), with_gamma=True) == pytest.approx(
        E_MG / 2 * (3 - 2 * math.log(2)), abs=1e-12)
    assert psi_h_prob_approx(dickman, SmoothQuery(97, 97), with_gamma=False) == pytest.approx(1.0)
    v = psi_h_prob_approx(dickman, SmoothQuery(10**6, 10**3), with_gamma=True)
    assert v == pytest.approx(0.4530, abs=1e-4)
    assert psi_h_prob_approx(dickman, SmoothQuery(10**6, 10**3)) == pytest.approx(
        (3 - 2 * math.log(2)) / 2, abs=1e-12)
    val, sat = psi_h_prob_approx(dickman, SmoothQuery(2**30, 2), with_flag=True)
    assert sat
    with pytest.raises(UsageError):
        psi_h_prob_approx(dickman, SmoothQuery(5, 7))


def test_smooth_numbers_matches_dfs():
    for primes, bound in (([2, 3], 100), ([2, 3, 5, 7], 5000), (primes_by_trial(50), 20000)):
        assert smooth_numbers(primes, bound).tolist() == dfs_smooth(primes, bound)
    assert smooth_numbers([], 10).tolist() == [1]


@pytest.fixture(scope="module")
def ptable():
    return build_prime_table(10**5)


def test_s_m_cdf_examples(ptable):
    assert s_m_cdf_exact(ptable, 2, 4.0) == pytest.approx(0.875, abs=1e-15)
    assert s_m_cdf_exact(ptable, 2, 0.0) == pytest.approx(0.5, abs=1e-15)
    z = math.log(100) / lam(ptable, 3)
    oracle = euler_product(ptable, 3) * math.fsum(1 / k for k in dfs_smooth([2, 3], 100))
    assert s_m_cdf_exact(ptable, 3, z) == pytest.approx(oracle, abs=1e-14)


@pytest.mark.parametrize("m, z", [(5, 1.7), (30, 1.0), (30, 2.5), (100, 0.8)])
def test_s_m_cdf_bruteforce(ptable, m, z):
    assert s_m_cdf_exact(ptable, m, z) == pytest.approx(s_m_cdf_bruteforce(m, z), abs=1e-13)


def test_s_m_cdf_vector_and_cap(ptable):
    z = np.array([0.5, 1.0, 2.0])
    v = s_m_cdf_exact(ptable, 30, z)
    assert v.tolist() == [s_m_cdf_exact(ptable, 30, zz) for zz in z]
    with pytest.raises(InfeasibleExactError):
        s_m_cdf_exact(ptable, 10**4, 5.0)
    with pytest.raises(UsageError):
        s_m_cdf_exact(ptable, 30, -1.0)


def test_s_m_cdf_limits(ptable):
    # z = 50 at m = 2: xi_2 <= 25 log 2 / log 2 = 25, so P = 1 - 2^-26
    assert s_m_cdf_exact(ptable, 2, 50.0) == pytest.approx(1 - 2.0**-26, abs=1e-15)


def test_boundary_inclusive(ptable):
    # z lambda_2 = log 8 exactly: k = 8 sits on the boundary and counts
    lam2 = math.log(2) / 2
    assert exact_bound(6.0, lam2) == 8
    assert s_m_cdf_exact(ptable, 2, 6.0) == pytest.approx(1 - 2.0**-4, abs=1e-15)


def test_lemma51_identity_small(small, ptable):
    assert psi_h_prob_exact(small, SmoothQuery(100, 3)) == pytest.approx(
        lemma51_rhs(ptable, 3, 100), abs=1e-10)
    for n, m in ((2000, 2), (2000, 11), (1999, 1999), (517, 23)):
        assert psi_h_prob_exact(small, SmoothQuery(n, m)) == pytest.approx(
            lemma51_rhs(ptable, m, n), abs=1e-10)


def test_harmonic_of_psi(small):
    assert harmonic(10) * psi_h_prob_exact(small, SmoothQuery(10, 3)) == pytest.approx(
        1 + 1 / 2 + 1 / 3 + 1 / 4 + 1 / 6 + 1 / 8 + 1 / 9)
