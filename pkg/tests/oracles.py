"""Slow, independent reference implementations used only by the tests."""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath


def is_prime(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def primes_by_trial(n):
    return [k for k in range(2, n + 1) if is_prime(k)]


def largest_prime_factor(k):
    """Trial division; 1 for k = 1."""
    best, d = 1, 2
    while d * d <= k:
        while k % d == 0:
            best, k = d, k // d
        d += 1
    return max(best, k) if k > 1 else best


def dfs_smooth(primes, bound):
    """Recursive enumeration of products of ``primes`` not exceeding ``bound``."""
    primes = sorted(primes, reverse=True)
    out = []

    def walk(i, prod):
        if i == len(primes):
            out.append(prod)
            return
        p = primes[i]
        while prod <= bound:
            walk(i + 1, prod)
            prod *= p

    walk(0, 1)
    return sorted(out)


def harmonic_fraction(n):
    return sum((Fraction(1, k) for k in range(1, n + 1)), Fraction(0))


def rho_exact(u):
    """Closed forms of rho on [0, 3]; dilogarithm on [2, 3]."""
    u = mpmath.mpf(u)
    if u <= 1:
        return mpmath.mpf(1)
    if u <= 2:
        return 1 - mpmath.log(u)
    if u <= 3:
        return (1 - (1 - mpmath.log(u - 1)) * mpmath.log(u)
                + mpmath.polylog(2, 1 - u) + mpmath.pi**2 / 12)
    raise ValueError("closed form only up to u = 3")


def rho_3_4(u):
    """rho(u) = rho(3) - int_3^u rho(t - 1)/t dt, by mpmath quadrature."""
    mpmath.mp.dps = 30
    return rho_exact(3) - mpmath.quad(lambda t: rho_exact(t - 1) / t, [3, u])


def hq_pmf_bruteforce(n):
    """Law of H_n Q_n as a dict, exact rationals."""
    L = harmonic_fraction(n)
    primes = primes_by_trial(n)
    pmf = {}
    for h in range(1, n + 1):
        qs = [1] + [q for q in primes if q <= n // h]
        w = Fraction(1, 1) / (L * h * len(qs))
        for q in qs:
            pmf[h * q] = pmf.get(h * q, 0) + w
    return pmf


def s_m_cdf_bruteforce(m, z):
    """P[S_m <= z] from the DFS oracle with exact log comparisons in mpmath."""
    primes = primes_by_trial(m)
    lam = math.fsum(math.log(p) / p for p in primes)
    bound = math.floor(math.exp(z * lam) * (1 + 1e-9)) + 1
    ks = [k for k in dfs_smooth(primes, bound) if math.log(k) <= z * lam + 1e-12]
    i_m = math.prod(1 - 1 / p for p in primes)
    return i_m * math.fsum(1.0 / k for k in ks)
