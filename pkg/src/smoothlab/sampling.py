"""
Seedable sampling of the stochastic objects and empirical distances.

Every sampler takes a :class:`RandomSource`.  A source is identified by a
seed and a stream id; the same pair always yields the same numbers, and
different stream ids give statistically independent streams (numpy's
``SeedSequence`` spawn keys).  Bulk samplers are vectorised and are the ones
the validation scans use; the scalar versions follow the textbook recipe
one draw at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats

from .dickman import dickman_quantile, quantile_many
from .errors import UsageError
from .primes import compensated_cumsum, euler_product, harmonic, harmonic_numbers, lam

HARMONIC_SAMPLE_CAP = 10**7
PERPETUITY_DEPTH = 60
_TWO53 = float(2**53)


@dataclass
class RandomSource:
    seed: int
    stream: int = 0
    path: tuple = ()
    _gen: np.random.Generator = field(default=None, init=False, repr=False, compare=False)

    @property
    def generator(self):
        if self._gen is None:
            ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,) + self.path)
            self._gen = np.random.Generator(np.random.PCG64(ss))
        return self._gen

    def split(self, i):
        """Independent child stream; the parent's state is untouched."""
        return RandomSource(self.seed, self.stream, self.path + (int(i),))

    def uniform(self, size=None):
        """Uniform variates on the open interval (0, 1)."""
        k = self.generator.integers(0, 2**53, size=size, dtype=np.int64)
        return (k + 0.5) / _TWO53


@dataclass(frozen=True)
class MultiplicityVector:
    m: int
    exponents: dict
    log_product: float

    @property
    def product(self):
        out = 1
        for p, e in self.exponents.items():
            out *= p**e
        return out


@dataclass(frozen=True)
class Ecdf:
    values: np.ndarray
    count: int

    @classmethod
    def from_samples(cls, samples):
        v = np.sort(np.asarray(samples, dtype=np.float64))
        if v.size == 0:
            raise UsageError("empirical CDF needs at least one sample")
        return cls(v, int(v.size))

    def __call__(self, x):
        return np.searchsorted(self.values, x, side="right") / self.count

    def left(self, x):
        """F(x-), the left limit."""
        return np.searchsorted(self.values, x, side="left") / self.count


def sample_geometric(p, rng, size=None):
    """P[xi = k] = (1 - 1/p) p^-k, by inversion: floor(-log U / log p)."""
    if p < 2:
        raise UsageError(f"p must be >= 2, got {p}")
    u = rng.uniform(size)
    k = np.floor(-np.log(u) / math.log(p)).astype(np.int64)
    return int(k) if size is None else k


def sample_s_m(table, m, rng, size=None):
    """Draws of S_m = sum_{p<=m} log(p) xi_p / lambda_m.

    For large p almost every xi_p is zero, so the bulk path only touches the
    Binomial(size, 1/p) draws with xi_p >= 1 and fills those with
    1 + an independent copy of xi_p (memorylessness).
    """
    lam_m = lam(table, m)
    primes = table.primes_upto(m)
    if size is None:
        z = math.fsum(math.log(p) * sample_geometric(int(p), rng) for p in primes)
        return z / lam_m
    gen = rng.generator
    z = np.zeros(size)
    for p in primes.tolist():
        lp = math.log(p)
        if p < 64:
            z += lp * sample_geometric(p, rng, size)
            continue
        hits = gen.binomial(size, 1.0 / p)
        if hits:
            idx = gen.choice(size, hits, replace=False)
            z[idx] += lp * (1 + sample_geometric(p, rng, hits))
    return z / lam_m


@lru_cache(maxsize=8)
def _harmonic_prefix(n):
    return compensated_cumsum(1.0 / np.arange(1, n + 1, dtype=np.float64))


def sample_harmonic_direct(n, rng, size=None):
    """H_n with P[H_n = k] = 1/(L_n k), by binary search on prefix sums."""
    if not 1 <= n <= HARMONIC_SAMPLE_CAP:
        raise UsageError(f"n must lie in [1, {HARMONIC_SAMPLE_CAP}], got {n}")
    prefix = _harmonic_prefix(int(n))
    u = rng.uniform(size) * prefix[-1]
    k = np.minimum(np.searchsorted(prefix, u, side="left"), n - 1) + 1
    return int(k) if size is None else k.astype(np.int64)


def sample_harmonic_rejection(table, n, rng):
    """One harmonic sample as a prime-exponent vector, by rejection on A_n.

    Draws xi_p for p <= n in increasing order and restarts as soon as the
    log-product passes log n (later factors can only increase it).
    Returns the accepted vector and the number of attempts used.
    """
    primes = table.primes_upto(n).tolist()
    log_n = math.log(n) if n >= 1 else 0.0
    attempts = 0
    while True:
        attempts += 1
        exps = {}
        total = 0.0
        for p in primes:
            e = sample_geometric(p, rng)
            if e:
                total += e * math.log(p)
                if total > log_n + 1e-12:
                    break
                exps[p] = e
        else:
            vec = MultiplicityVector(n, exps, total)
            if vec.product <= n:
                return vec, attempts


def _product_trials(table, n, rng, size):
    """Vectorised attempts: integer product of p^xi_p, or n + 1 if above n."""
    prod = np.ones(size, dtype=np.int64)
    alive = np.ones(size, dtype=bool)
    for p in table.primes_upto(n).tolist():
        e = sample_geometric(p, rng, size)
        step = alive & (e > 0)
        if not step.any():
            continue
        emax = int(math.log(n) / math.log(p)) + 1
        pw = np.power(p, np.minimum(e[step], emax), dtype=np.int64)
        ok = np.log(prod[step]) + np.log(pw.astype(np.float64)) <= math.log(n) + 1e-9
        idx = np.flatnonzero(step)
        alive[idx[~ok]] = False
        good = idx[ok]
        prod[good] *= pw[ok]
        alive[good] &= prod[good] <= n
    return np.where(alive, prod, n + 1)


def acceptance_trials(table, n, rng, attempts):
    """Number of accepted attempts out of ``attempts`` (rate estimates L_n I_n)."""
    return int(np.count_nonzero(_product_trials(table, n, rng, attempts) <= n))


def rejection_products(table, n, rng, count, batch=None):
    """``count`` accepted products prod p^xi_p (harmonic samples) and attempts used."""
    batch = batch or max(1024, int(count * 1.7))
    out = []
    got = 0
    attempts = 0
    while got < count:
        trial = _product_trials(table, n, rng, batch)
        hit = np.flatnonzero(trial <= n)
        need = count - got
        if hit.size >= need:
            attempts += int(hit[need - 1]) + 1
            hit = hit[:need]
        else:
            attempts += batch
        out.append(trial[hit])
        got += hit.size
    return np.concatenate(out), attempts


def sample_dickman(table, rng, method="quantile", depth=PERPETUITY_DEPTH, size=None):
    """Dickman draws by CDF inversion or by iterating x <- U (x + 1)."""
    if method == "quantile":
        u = rng.uniform(size)
        if size is None:
            return float(quantile_many(table, np.array([u]), strict=False)[0])
        return quantile_many(table, u, strict=False)
    if method == "perpetuity":
        if depth < 30:
            raise UsageError(f"perpetuity depth must be >= 30, got {depth}")
        x = 0.0 if size is None else np.zeros(size)
        for _ in range(depth):
            x = rng.uniform(size) * (x + 1.0)
        return float(x) if size is None else x
    raise UsageError(f"unknown Dickman sampling method {method!r}")


def dkw_band(count, delta=0.01):
    """Half-width of the DKW uniform confidence band at level 1 - delta."""
    return math.sqrt(math.log(2.0 / delta) / (2.0 * count))


def kolmogorov_distance(ecdf, cdf):
    """sup_x |F_hat(x) - F(x)| evaluated on both sides of every jump."""
    x = np.unique(ecdf.values)
    f = np.asarray(cdf(x), dtype=np.float64)
    return float(max(np.max(np.abs(ecdf(x) - f)), np.max(np.abs(ecdf.left(x) - f))))


def ks_two_sample(a, b):
    """Two-sample KS statistic and p-value."""
    res = stats.ks_2samp(a, b)
    return float(res.statistic), float(res.pvalue)


def empirical_tv(a, b):
    """Total variation between the empirical laws of two integer samples."""
    a = np.asarray(a)
    b = np.asarray(b)
    top = int(max(a.max(), b.max())) + 1
    pa = np.bincount(a, minlength=top) / a.size
    pb = np.bincount(b, minlength=top) / b.size
    return 0.5 * float(np.abs(pa - pb).sum())


def hq_pmf(table, n):
    """Exact pmf of H_n Q_n on 1..n, Q_n uniform on primes <= n/H_n plus 1."""
    L = harmonic(n)
    pmf = np.zeros(n + 1)
    primes = table.primes_upto(n)
    for h in range(1, n + 1):
        qs = primes[: table.pi(n // h)]
        w = 1.0 / (L * h * (qs.size + 1))
        pmf[h] += w
        pmf[h * qs] += w
    return pmf


def tv_uniform_vs_hq(table, n):
    """Exact d_TV between the uniform law on [n] and the law of H_n Q_n."""
    if not 21 <= n <= 10**5:
        raise UsageError(f"n must lie in [21, 1e5], got {n}")
    pmf = hq_pmf(table, n)
    unif = np.full(n + 1, 1.0 / n)
    unif[0] = 0.0
    return 0.5 * math.fsum(np.abs(pmf - unif))


def tv_bound(n):
    return 61.0 * math.log(math.log(n)) / math.log(n)


def binomial_sigma(p, trials):
    return math.sqrt(p * (1 - p) / trials)


def acceptance_probability(table, n):
    """P[A_n] = L_n I_n."""
    return harmonic(n) * euler_product(table, n)


def acceptance_probabilities(table, n_max):
    """L_n I_n for every 1 <= n <= n_max as an array indexed by n."""
    L = harmonic_numbers(n_max)
    idx = np.searchsorted(table.primes, np.arange(n_max + 1), side="right")
    log_i = np.concatenate([[0.0], table.prefix_log_euler])[idx]
    return L * np.exp(log_i)
