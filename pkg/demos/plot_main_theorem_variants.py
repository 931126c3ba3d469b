"""
Harmonic smooth content against the Dickman approximation
=========================================================

P[psi(H_n) <= m] is compared with two candidate approximations in
Upsilon = log n / log m:

* I[rho](Upsilon) / Upsilon
* exp(-gamma) I[rho](Upsilon) / Upsilon

At n = m the left side is exactly 1, which only the first form matches.
The scan below shows the scaled error log(n) |exact - approx| for both.
"""

import numpy as np

from smoothlab import ScanConfig, build_dickman, scan_main_theorem
from smoothlab.scans import upsilon_trends

cfg = ScanConfig(n_grid=[10**3, 10**4, 10**5, 10**6], m_points=8)
report = scan_main_theorem(cfg, dickman=build_dickman())

print(" n        m      Upsilon   exact     plain     gamma")
rows = {}
for r in report.records:
    rows.setdefault((r.n, r.m), {})[r.variant] = r
for (n, m), pair in rows.items():
    p, g = pair["plain"], pair["gamma"]
    print(f"{n:>8} {m:>8} {p.upsilon:8.3f} {p.exact:9.5f} {p.approx:9.5f} {g.approx:9.5f}")

for variant in ("plain", "gamma"):
    trend = upsilon_trends(report, cfg.upsilon_grid, variant)
    print(f"{variant:6s}: sup scaled error {report.summary[f'sup_scaled_err_{variant}']:.3f}, "
          f"fitted increase along fixed Upsilon "
          f"{ {u: round(t, 3) for u, t in trend.items()} }")
