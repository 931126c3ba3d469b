"""
S_m converges to the Dickman law
================================

S_m = sum_{p <= m} log(p) xi_p / lambda_m.  Its exact CDF comes from
enumerating m-smooth integers; when that is too large a Monte Carlo ECDF
with a DKW band is used instead.  The last part looks at the atom law V_m
and its quantile coupling with a uniform variable.
"""

import math

import numpy as np

from smoothlab import (
    Ecdf, RandomSource, build_dickman, build_prime_table, dickman_cdf, dkw_band, s_m_cdf_exact,
    sample_s_m, vm_distribution,
)
from smoothlab.stein import coupling_gap, coupling_midpoint_error

table = build_prime_table(2 * 10**5)
dickman = build_dickman()
z = np.array([0.5, 1.0, 1.5, 2.0, 3.0])

print("target:", np.round(dickman_cdf(dickman, z), 5))
for m in (30, 100, 1000):
    exact = s_m_cdf_exact(table, m, z)
    print(f"m={m:<5} exact: {np.round(exact, 5)}  "
          f"max error x log m = {np.max(np.abs(exact - dickman_cdf(dickman, z))) * math.log(m):.3f}")

m = 10**4
count = 10**6
ecdf = Ecdf.from_samples(sample_s_m(table, m, RandomSource(1), size=count))
print(f"m={m} (Monte Carlo, band {dkw_band(count):.5f}): {np.round(ecdf(z), 5)}")

for m in (10**2, 10**3, 10**4, 10**5):
    d = vm_distribution(table, m)
    print(f"V_m, m={m:>6}: {d.primes.size:5d} atoms, midpoint error x log m "
          f"{coupling_midpoint_error(d) * math.log(m):.3f}, endpoint gap {coupling_gap(d):.2f}")
