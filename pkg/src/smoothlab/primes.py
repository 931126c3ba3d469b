"""
Prime tables and Mertens-type partial sums.

A :class:`PrimeTable` holds the primes up to some limit together with the
running sums that the rest of the package keeps asking for:

* ``prefix_lambda[i]``   -- sum of log(p)/p over the first i+1 primes
* ``prefix_recip[i]``    -- sum of 1/p
* ``prefix_log_euler[i]`` -- sum of log(1 - 1/p), so that the Euler product
  prod(1 - 1/p) is ``exp(prefix_log_euler[i])``

All queries take an integer bound ``m`` and look up the last prime <= m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfRangeError, UsageError

EULER_GAMMA = 0.57721566490153286060651209008240243
MAX_PRIME_LIMIT = 10**9
SEGMENTED_ABOVE = 10**8
SEGMENT_SIZE = 1 << 24
HARMONIC_EXACT_MAX = 10**8
_HARMONIC_CHUNK = 1 << 22
_BLOCK = 1024


def compensated_cumsum(x):
    """Cumulative sum with block-wise exact offsets.

    Each block of 1024 terms is summed with ``np.cumsum``; block totals come
    from :func:`math.fsum` and are chained with Neumaier summation, so the
    error never grows beyond one block's worth of rounding.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n == 0:
        return x.copy()
    pad = (-n) % _BLOCK
    blocks = np.concatenate([x, np.zeros(pad)]).reshape(-1, _BLOCK)
    inner = np.cumsum(blocks, axis=1)
    totals = [math.fsum(row) for row in blocks]
    offsets = np.concatenate([[0.0], _exact_running(totals)[:-1]])
    out = inner + offsets[:, None]
    return out.reshape(-1)[:n]


def _exact_running(values):
    """Running sums of ``values`` accurate to one rounding each (Neumaier)."""
    out = np.empty(len(values))
    s = 0.0
    c = 0.0
    for i, v in enumerate(values):
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        out[i] = s + c
    return out


def _simple_sieve(limit):
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def _segmented_sieve(limit):
    base = _simple_sieve(math.isqrt(limit) + 1)
    chunks = [base]
    low = int(base[-1]) + 1
    while low <= limit:
        high = min(low + SEGMENT_SIZE, limit + 1)
        mask = np.ones(high - low, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= high:
                break
            start = max(p * p, -(-low // p) * p)
            mask[start - low :: p] = False
        chunks.append(np.flatnonzero(mask).astype(np.int64) + low)
        low = high
    return np.concatenate(chunks)


def sieve_primes(limit):
    """All primes <= ``limit`` as an int64 array."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    if limit > SEGMENTED_ABOVE:
        return _segmented_sieve(limit)
    return _simple_sieve(limit)


@dataclass(frozen=True)
class PrimeTable:
    limit: int
    primes: np.ndarray
    prefix_lambda: np.ndarray
    prefix_recip: np.ndarray
    prefix_log_euler: np.ndarray
    _c1: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        for arr in (self.primes, self.prefix_lambda, self.prefix_recip, self.prefix_log_euler):
            arr.flags.writeable = False

    def index(self, m):
        """Number of primes <= m (i.e. pi(m)); m must not exceed the limit."""
        if m > self.limit:
            raise OutOfRangeError(f"m={m} exceeds table limit {self.limit}")
        return int(np.searchsorted(self.primes, m, side="right"))

    def pi(self, x):
        """Prime-counting function for x <= limit (real x allowed)."""
        return self.index(math.floor(x))

    def primes_upto(self, m):
        return self.primes[: self.index(m)]

    @property
    def c1_estimate(self):
        """Second Mertens constant estimated from this table (cached)."""
        if not self._c1:
            self._c1.append(estimate_mertens_c1(self))
        return self._c1[0]


def build_prime_table(limit, cap=MAX_PRIME_LIMIT):
    """Sieve the primes up to ``limit`` and precompute their prefix sums."""
    if isinstance(limit, bool) or int(limit) != limit:
        raise UsageError(f"limit must be an integer, got {limit!r}")
    limit = int(limit)
    if not 2 <= limit <= cap:
        raise UsageError(f"limit must lie in [2, {cap}], got {limit}")
    primes = sieve_primes(limit)
    logp = np.log(primes.astype(np.float64))
    pf = primes.astype(np.float64)
    return PrimeTable(
        limit=limit,
        primes=primes,
        prefix_lambda=compensated_cumsum(logp / pf),
        prefix_recip=compensated_cumsum(1.0 / pf),
        prefix_log_euler=compensated_cumsum(np.log1p(-1.0 / pf)),
    )


def lam(table, m):
    """lambda_m = sum over primes p <= m of log(p)/p, in nats."""
    if m < 2:
        raise UsageError(f"lambda needs m >= 2, got {m}")
    return float(table.prefix_lambda[table.index(m) - 1])


def euler_product(table, m):
    """I_m = prod over primes p <= m of (1 - 1/p); 1 for m < 2."""
    k = table.index(m) if m >= 2 else 0
    if k == 0:
        return 1.0
    return math.exp(table.prefix_log_euler[k - 1])


def recip_sum(table, m):
    """Sum of 1/p over primes p <= m."""
    k = table.index(m) if m >= 2 else 0
    return float(table.prefix_recip[k - 1]) if k else 0.0


def expected_z(table, m):
    """E[Z_m] = sum of log(p)/(p - 1) over p <= m."""
    p = table.primes_upto(m).astype(np.float64)
    return math.fsum(np.log(p) / (p - 1.0))


def harmonic(n, exact_max=HARMONIC_EXACT_MAX):
    """The harmonic number L_n = 1 + 1/2 + ... + 1/n.

    Summed (chunk-wise compensated) up to ``exact_max``, Euler-Maclaurin
    beyond; the truncation error of the expansion there is below 1e-40.
    """
    if n < 1:
        raise UsageError(f"harmonic needs n >= 1, got {n}")
    n = int(n)
    if n > exact_max:
        inv = 1.0 / n
        return math.log(n) + EULER_GAMMA + inv / 2 - inv**2 / 12 + inv**4 / 120
    parts = []
    for lo in range(1, n + 1, _HARMONIC_CHUNK):
        hi = min(lo + _HARMONIC_CHUNK, n + 1)
        parts.append(math.fsum(1.0 / np.arange(hi - 1, lo - 1, -1, dtype=np.float64)))
    return math.fsum(parts)


def harmonic_numbers(n):
    """Array ``L`` with ``L[k]`` the k-th harmonic number for 0 <= k <= n."""
    out = np.zeros(n + 1)
    out[1:] = compensated_cumsum(1.0 / np.arange(1, n + 1, dtype=np.float64))
    return out


def next_prime(table, x):
    """Smallest prime strictly larger than ``x`` (the x_+ of the coupling)."""
    i = int(np.searchsorted(table.primes, x, side="right"))
    if i >= table.primes.size:
        raise OutOfRangeError(f"no prime above {x} in table (limit {table.limit})")
    return int(table.primes[i])


def estimate_mertens_c1(table):
    """Estimate c1 in sum 1/p ~ loglog n + c1 from the table itself.

    The raw difference sum(1/p) - loglog(n) has a saw-tooth between primes;
    averaging it at the primes in [N**0.9, N] removes most of it.
    """
    p = table.primes
    if p.size < 4:
        n = table.limit
        return recip_sum(table, n) - math.log(math.log(max(n, 3)))
    lo = int(np.searchsorted(p, table.limit**0.9))
    lo = min(lo, p.size - 2)
    d = table.prefix_recip[lo:] - np.log(np.log(p[lo:].astype(np.float64)))
    return float(np.mean(d))


@dataclass(frozen=True)
class MertensRow:
    n: int
    lam: float
    log_n: float
    first_resid: float
    first_bound: float
    second_resid: float
    second_bound: float
    third_scaled_resid: float
    pi_n: int
    trudgian_resid: float
    trudgian_bound: float
    passed: bool

    COLUMNS = (
        "n", "lambda", "log_n", "first_resid", "first_bound", "second_resid",
        "second_bound", "third_scaled_resid", "pi_n", "trudgian_resid",
        "trudgian_bound", "pass",
    )

    def as_row(self):
        return (
            self.n, self.lam, self.log_n, self.first_resid, self.first_bound,
            self.second_resid, self.second_bound, self.third_scaled_resid,
            self.pi_n, self.trudgian_resid, self.trudgian_bound, self.passed,
        )


def trudgian_residual(pi_n, n):
    """|pi(n) - n/log n - n/log^2 n| and its bound 184 n / log^3 n."""
    ln = math.log(n)
    return abs(pi_n - n / ln - n / ln**2), 184.0 * n / ln**3


def mertens_report(table, n_grid):
    """One :class:`MertensRow` per grid point.

    ``passed`` is the conjunction of the first and second formula bounds and,
    for n >= 229, the prime-counting bound. The third formula has no explicit
    constant; its residual is reported scaled by log n.
    """
    c1 = table.c1_estimate
    e_mg = math.exp(-EULER_GAMMA)
    rows = []
    for n in n_grid:
        n = int(n)
        if n < 3:
            raise UsageError(f"mertens grid points must be >= 3, got {n}")
        k = table.index(n)
        ln = math.log(n)
        lam_n = float(table.prefix_lambda[k - 1])
        first = abs(lam_n - ln)
        second = abs(float(table.prefix_recip[k - 1]) - math.log(ln) - c1)
        third = ln * abs(ln * math.exp(table.prefix_log_euler[k - 1]) - e_mg)
        if n >= 229:
            t_res, t_bound = trudgian_residual(k, n)
            t_ok = t_res <= t_bound
        else:
            t_res, t_bound, t_ok = math.nan, math.nan, True
        ok = first <= 2 / ln and second <= 5 / ln and t_ok
        rows.append(MertensRow(n, lam_n, ln, first, 2 / ln, second, 5 / ln, third,
                               k, t_res, t_bound, ok))
    return rows


@dataclass(frozen=True)
class MertensSweep:
    """Residual arrays of the Mertens-type formulas for every n in [lo, hi]."""

    n: np.ndarray
    first_resid: np.ndarray
    second_resid: np.ndarray
    third_scaled_resid: np.ndarray
    trudgian_resid: np.ndarray
    harmonic_excess: np.ndarray

    @property
    def log_n(self):
        return np.log(self.n.astype(np.float64))

    def first_violations(self, bound=None):
        """n where |lambda_n - log n| exceeds ``bound`` (default 2 / log n)."""
        b = 2.0 / self.log_n if bound is None else bound
        return self.n[self.first_resid > b]

    def second_violations(self):
        return self.n[self.second_resid > 5.0 / self.log_n]

    def trudgian_violations(self):
        ln = self.log_n
        ok = (self.n < 229) | (self.trudgian_resid <= 184.0 * self.n / ln**3)
        return self.n[~ok]

    def harmonic_violations(self):
        e = self.harmonic_excess
        return self.n[(e < 0) | (e > 1)]


def mertens_sweep(table, hi, lo=3):
    """Vectorised :func:`mertens_report` over all n in [lo, hi]."""
    if lo < 3 or hi < lo:
        raise UsageError(f"need 3 <= lo <= hi, got [{lo}, {hi}]")
    table.index(hi)
    n = np.arange(lo, hi + 1, dtype=np.int64)
    nf = n.astype(np.float64)
    ln = np.log(nf)
    k = np.searchsorted(table.primes, n, side="right")
    first = np.abs(table.prefix_lambda[k - 1] - ln)
    second = np.abs(table.prefix_recip[k - 1] - np.log(ln) - table.c1_estimate)
    third = ln * np.abs(ln * np.exp(table.prefix_log_euler[k - 1]) - math.exp(-EULER_GAMMA))
    trud = np.abs(k - nf / ln - nf / ln**2)
    excess = harmonic_numbers(hi)[n] - ln
    return MertensSweep(n, first, second, third, trud, excess)
