"""
Exact smooth-number quantities.

Two independent routes are provided on purpose:

* a largest-prime-factor sieve, from which Psi(n, m) and the harmonic sums
  over m-smooth k <= n are read off directly, and
* an enumeration of m-smooth integers from their prime-exponent vectors,
  which gives the exact law of S_m = Z_m / lambda_m through
  P[prod p^xi_p = k] = I_m / k for every m-smooth k.

They meet in the identity P[psi(H_n) <= m] = P[S_m <= log n / lambda_m] / (L_n I_m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dickman import rho_integral
from .errors import InfeasibleExactError, OutOfRangeError, UsageError
from .primes import EULER_GAMMA, compensated_cumsum, euler_product, harmonic, lam, sieve_primes

LPF_CAP = 10**8
EXACT_CAP = 10**8
LOG_SLACK = 1e-12


@dataclass(frozen=True)
class LpfSieve:
    """``lpf[k]`` is the largest prime factor of k; ``lpf[1] = 1``."""

    n: int
    lpf: np.ndarray

    def _check(self, n):
        if not 1 <= n <= self.n:
            raise OutOfRangeError(f"n={n} outside sieve range [1, {self.n}]")


@dataclass(frozen=True)
class SmoothQuery:
    n: int
    m: int

    def __post_init__(self):
        if self.n < 2 or self.m < 2:
            raise UsageError(f"smooth query needs n, m >= 2, got ({self.n}, {self.m})")

    @property
    def upsilon(self):
        return math.log(self.n) / math.log(self.m)


def build_lpf_sieve(n, cap=LPF_CAP):
    """Largest-prime-factor table for 1..n.

    Marking multiples of each prime in increasing order leaves the largest
    prime factor in every slot.
    """
    if not 2 <= n <= cap:
        raise UsageError(f"sieve size must lie in [2, {cap}], got {n}")
    lpf = np.ones(n + 1, dtype=np.int32)
    lpf[0] = 0
    for p in sieve_primes(n).tolist():
        lpf[p::p] = p
    lpf.flags.writeable = False
    return LpfSieve(int(n), lpf)


def psi_count(sieve, n, m):
    """Psi(n, m): number of k <= n whose prime factors are all <= m (k=1 counts)."""
    sieve._check(n)
    if m < 1:
        raise UsageError(f"m must be >= 1, got {m}")
    return int(np.count_nonzero(sieve.lpf[1 : n + 1] <= m))


def harmonic_smooth_sum(sieve, n, m):
    """Sum of 1/k over m-smooth k <= n, compensated."""
    sieve._check(n)
    if m < 1:
        raise UsageError(f"m must be >= 1, got {m}")
    k = np.flatnonzero(sieve.lpf[1 : n + 1] <= m) + 1
    return math.fsum(1.0 / k)


def psi_h_prob_exact(sieve, q):
    """P[psi(H_n) <= m] with H_n harmonic on [n]."""
    if q.m >= q.n:
        return 1.0
    return harmonic_smooth_sum(sieve, q.n, q.m) / harmonic(q.n)


def psi_h(sieve, q):
    """The harmonic smooth content n * P[psi(H_n) <= m]."""
    return q.n * psi_h_prob_exact(sieve, q)


def psi_h_prob_approx(table, q, with_gamma=False, with_flag=False):
    """Dickman approximation of P[psi(H_n) <= m].

    The default is ``I[rho](U)/U``, which equals 1 at n = m like the exact
    value.  ``with_gamma`` multiplies by exp(-gamma); that variant is kept
    for comparison scans.  U beyond the table saturates.
    """
    if q.n < q.m:
        raise UsageError("approximation is stated for n >= m")
    u = q.upsilon
    saturated = u > table.u_max
    val = rho_integral(table, min(u, table.u_max)) / u
    if with_gamma:
        val *= math.exp(-EULER_GAMMA)
    return (val, saturated) if with_flag else val


def smooth_numbers(primes, bound):
    """All integers k <= bound built from ``primes`` (k = 1 included), sorted.

    Exponent vectors are enumerated prime by prime in decreasing order, each
    partial product pruned against ``bound``.  The frontier is kept as numpy
    arrays rather than a recursion stack.
    """
    bound = int(bound)
    found = np.array([1], dtype=np.int64)
    if bound < 1:
        return found[:0]
    for p in sorted((int(x) for x in primes), reverse=True):
        lim = bound // p
        parts = [found]
        cur = found[found <= lim] * p
        while cur.size:
            parts.append(cur)
            cur = cur[cur <= lim] * p
        if len(parts) > 1:
            found = np.concatenate(parts)
    found.sort()
    return found


def exact_bound(z, lam_m):
    """Largest integer k with log k <= z * lambda_m (inclusive, slack 1e-12)."""
    return math.floor(math.exp(z * lam_m + LOG_SLACK))


def s_m_cdf_exact(table, m, z, cap=EXACT_CAP):
    """Exact P[S_m <= z] = I_m * sum of 1/k over m-smooth k <= exp(z lambda_m).

    ``z`` may be an array; the enumeration is done once at the largest z.
    Raises :class:`InfeasibleExactError` when exp(z lambda_m) exceeds ``cap``.
    """
    if m < 2:
        raise UsageError(f"m must be >= 2, got {m}")
    z_arr = np.asarray(z, dtype=np.float64)
    if np.any(z_arr < 0):
        raise UsageError("z must be non-negative")
    lam_m = lam(table, m)
    zmax = float(z_arr.max()) if z_arr.size else 0.0
    if zmax * lam_m > math.log(cap):
        raise InfeasibleExactError(
            f"exp(z*lambda_m) = exp({zmax * lam_m:.3f}) exceeds cap {cap}", bound=zmax * lam_m
        )
    ks = smooth_numbers(table.primes_upto(m), exact_bound(zmax, lam_m))
    csum = np.concatenate([[0.0], compensated_cumsum(1.0 / ks)])
    cut = np.log(ks.astype(np.float64))
    idx = np.searchsorted(cut, z_arr * lam_m + LOG_SLACK, side="right")
    out = euler_product(table, m) * csum[idx]
    return float(out) if out.ndim == 0 else out


def lemma51_rhs(table, m, n):
    """P[S_m <= log n / lambda_m] / (L_n I_m), the product-representation side."""
    z = math.log(n) / lam(table, m)
    return s_m_cdf_exact(table, m, z) / (harmonic(n) * euler_product(table, m))
