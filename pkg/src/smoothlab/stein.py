"""
Constructive pieces of the Dickman-Stein machinery.

* ``f_{1,z}(x) = min(1, z/x) - P[D <= z]``, the explicit part of the Stein
  solution for the test function 1[0, z];
* the bias-transform identity E[D f(D)] = E[f(D + U)], checked by Monte Carlo;
* the geometric size-bias identity E[xi f(xi)] = theta/(1-theta) E[f(xi + xi' + 1)],
  checked by exact truncated summation;
* the atom distribution V_m (value log q / lambda_m with mass
  log q / (q lambda_m)) and its quantile coupling with a uniform.

Moment bookkeeping used in the tests: putting f(x) = 1 in the bias identity
gives E[D] = 1, and f(x) = x gives E[D^2] = E[D] + E[U] = 3/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dickman import dickman_cdf
from .errors import UsageError
from .primes import lam, next_prime
from .sampling import sample_dickman


@dataclass(frozen=True)
class SteinF1:
    z: float
    dickman_cdf_at_z: float

    def __call__(self, x):
        return f1z_eval(self, x)


def make_f1(table, z):
    if z <= 0:
        raise UsageError(f"z must be positive, got {z}")
    return SteinF1(float(z), dickman_cdf(table, z))


def f1z_eval(f, x):
    """min(1, z/x) - P[D <= z] for x > 0."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0):
        raise UsageError("f1 is defined for x > 0 only")
    out = np.minimum(1.0, f.z / x) - f.dickman_cdf_at_z
    return float(out) if out.ndim == 0 else out


def bias_transform_residual(table, f, count, rng, method="quantile"):
    """Monte Carlo E[D f(D)] - E[f(D + U)] and its 3-sigma half-width."""
    if count < 10**5:
        raise UsageError(f"count must be >= 1e5, got {count}")
    d = sample_dickman(table, rng, method=method, size=count)
    u = rng.uniform(count)
    terms = d * f(d) - f(d + u)
    return float(np.mean(terms)), 3.0 * float(np.std(terms, ddof=1)) / math.sqrt(count)


def geometric_truncation(theta, tail=1e-16):
    """Smallest K with P[xi > K] = theta^(K+1) below ``tail``."""
    return max(1, math.ceil(math.log(tail) / math.log(theta)))


def size_bias_check(theta, f, truncation=None):
    """Both sides of E[xi f(xi)] = theta/(1-theta) E[f(xi + xi' + 1)], exactly.

    ``f`` must accept an integer array.  The law of xi + xi' is the
    convolution of the truncated pmfs, exact up to index K.
    """
    if not 0 < theta < 1:
        raise UsageError(f"theta must lie in (0, 1), got {theta}")
    K = truncation or geometric_truncation(theta)
    k = np.arange(K + 1)
    pmf = (1.0 - theta) * theta**k
    lhs = math.fsum(k * np.asarray(f(k), dtype=np.float64) * pmf)
    conv = np.convolve(pmf, pmf)[: K + 1]
    rhs = theta / (1.0 - theta) * math.fsum(np.asarray(f(k + 1), dtype=np.float64) * conv)
    return lhs, rhs


@dataclass(frozen=True)
class VmDistribution:
    """Atoms log(q)/lambda_m with masses log(q)/(q lambda_m), q prime <= m.

    ``a`` and ``b`` follow the textbook endpoint formulas
    a_p = sum_{q <= p} mass_q and b_p = a_p + mass_{p_+}; ``lower`` and
    ``upper`` are the actual constancy intervals [F(p-), F(p)) of the
    left-inverse at the atom of p.
    """

    m: int
    lam: float
    primes: np.ndarray
    values: np.ndarray
    masses: np.ndarray
    a: np.ndarray
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray


def vm_distribution(table, m):
    if m < 2:
        raise UsageError(f"m must be >= 2, got {m}")
    primes = table.primes_upto(m)
    lam_m = lam(table, m)
    logp = np.log(primes.astype(np.float64))
    masses = logp / primes / lam_m
    upper = np.cumsum(masses)
    upper[-1] = 1.0  # exact by definition of lambda_m
    lower = np.concatenate([[0.0], upper[:-1]])
    p_top = next_prime(table, int(primes[-1]))
    nxt = np.append(masses[1:], math.log(p_top) / p_top / lam_m)
    a = np.cumsum(masses)
    return VmDistribution(int(m), lam_m, primes, logp / lam_m, masses, a, a + nxt, lower, upper)


def vm_quantile(dist, u):
    """Left inverse F_m^{-1}(u) of the atom CDF, for 0 <= u < 1."""
    u = np.asarray(u, dtype=np.float64)
    if np.any(u < 0) or np.any(u >= 1):
        raise UsageError("u must lie in [0, 1)")
    i = np.minimum(np.searchsorted(dist.upper, u, side="right"), dist.values.size - 1)
    out = dist.values[i]
    return float(out) if out.ndim == 0 else out


def coupling_gap(dist):
    """max_p log(p) lambda_m max(|a_p - log p/lambda_m|, |b_p - log p/lambda_m|)."""
    dev = np.maximum(np.abs(dist.a - dist.values), np.abs(dist.b - dist.values))
    return float(np.max(np.log(dist.primes.astype(np.float64)) * dist.lam * dev))


def coupling_midpoint_error(dist):
    """max over atoms of |F^{-1}(mid I_p) - mid I_p|, I_p the constancy interval."""
    mid = 0.5 * (dist.lower + dist.upper)
    return float(np.max(np.abs(vm_quantile(dist, mid) - mid)))
