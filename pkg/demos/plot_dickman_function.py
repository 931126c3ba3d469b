"""
The Dickman function
====================

rho solves u rho'(u) = -rho(u - 1) with rho = 1 on [0, 1].  The table is
built once, piece by piece, and every later query is a cheap polynomial
evaluation.
"""

import math

import numpy as np

from smoothlab import build_dickman, dickman_cdf, dickman_quantile, rho, rho_integral
from smoothlab.primes import EULER_GAMMA

table = build_dickman(u_max=20, tol=1e-10)
print(f"table: u_max={table.u_max}, nodes/unit={table.nodes_per_unit}, "
      f"certified error {table.achieved:.1e}")

# a few values; rho(u) falls off roughly like u^-u
for u in (1, 1.5, 2, 3, 5, 10, 20):
    print(f"rho({u:>4}) = {rho(table, u):.12e}")

# on [1, 2] there is a closed form
u = np.linspace(1, 2, 5)
print("1 - ln u   :", np.round(1 - np.log(u), 12))
print("table      :", np.round(rho(table, u), 12))

# the integral of rho over [0, inf) is e^gamma, so exp(-gamma) rho is a density
print(f"I[rho](20) = {rho_integral(table, 20):.12f}, e^gamma = {math.exp(EULER_GAMMA):.12f}")

# the Dickman law D has CDF exp(-gamma) I[rho]
for z in (0.5, 1, 2, 3):
    print(f"P[D <= {z}] = {dickman_cdf(table, z):.10f}")
print(f"median of D = {dickman_quantile(table, 0.5):.10f}")
