"""
Harmonic samples from independent geometrics
============================================

Take independent xi_p with P[xi_p = k] = (1 - 1/p) p^-k for each prime
p <= n.  The product prod p^xi_p, conditioned to be at most n, has the
harmonic law P[H = k] = 1 / (L_n k).  The conditioning event has
probability L_n I_n, which never drops below 1/2 once n >= 21.
"""

import numpy as np

from smoothlab import RandomSource, build_prime_table, sample_harmonic_direct
from smoothlab.sampling import acceptance_probabilities, empirical_tv, rejection_products

table = build_prime_table(10**5)
n = 100
count = 200_000

rng = RandomSource(seed=42)
products, attempts = rejection_products(table, n, rng.split(0), count)
direct = sample_harmonic_direct(n, rng.split(1), size=count)

print(f"n={n}: acceptance rate {count / attempts:.4f}, "
      f"L_n I_n = {acceptance_probabilities(table, n)[n]:.4f}")
print(f"empirical TV between the two samplers: {empirical_tv(products, direct):.4f}")

# the first few probabilities side by side
L = np.sum(1.0 / np.arange(1, n + 1))
for k in (1, 2, 3, 10, 97):
    print(f"k={k:3d}  rejection {np.mean(products == k):.4f}  "
          f"direct {np.mean(direct == k):.4f}  exact {1 / (L * k):.4f}")

a = acceptance_probabilities(table, 10**5)
print(f"min over 21 <= n <= 1e5 of L_n I_n: {a[21:].min():.4f} (at n={21 + int(np.argmin(a[21:]))})")
