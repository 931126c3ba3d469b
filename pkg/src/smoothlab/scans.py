"""
Grid scans that measure the approximation errors, and the full verification run.

Each scan returns a :class:`ScanReport`: canonical-order records plus a
summary whose sup values are plain maxima over the emitted records.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .dickman import build_dickman, dickman_cdf, rho
from .errors import InfeasibleExactError, UsageError
from .primes import build_prime_table, compensated_cumsum, harmonic, lam
from .sampling import Ecdf, RandomSource, dkw_band, sample_s_m
from .smooth import SmoothQuery, build_lpf_sieve, psi_count, psi_h_prob_approx, s_m_cdf_exact

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger(__name__)

MIN_MC_COUNT = 10**4
SCAN_SIEVE_CAP = 10**7
TREND_TOL = 0.5
SCALED_BOUND = 10.0


@dataclass(frozen=True)
class ScanRecord:
    n: int
    m: int
    z: float | None
    upsilon: float | None
    exact: float
    approx: float
    abs_err: float
    scaled_err: float
    method: str = "exact"
    mc_ci: float = 0.0
    variant: str = ""

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]


@dataclass
class ScanReport:
    name: str
    records: list
    summary: dict

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(ScanRecord.columns())
        for r in self.records:
            w.writerow([_fmt(v) for v in asdict(r).values()])
        for key, val in self.summary.items():
            buf.write(f"# {key}={_fmt(val)}\n")
        return buf.getvalue()

    def to_json(self):
        return json.dumps({"scan": self.name, "records": [asdict(r) for r in self.records],
                           "summary": self.summary}, indent=1, sort_keys=True, default=_fmt)

    def write(self, path, fmt="csv"):
        Path(path).write_text(self.to_csv() if fmt == "csv" else self.to_json())


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (np.floating, np.integer)):
        return repr(v.item())
    return v if isinstance(v, (str, int)) else str(v)


def _parse_list(val, cast):
    if isinstance(val, (list, tuple)):
        return [cast(v) for v in val]
    return [cast(float(v)) if cast is int else cast(v) for v in str(val).split(",") if v.strip()]


@dataclass
class ScanConfig:
    n_grid: list = field(default_factory=lambda: [10**3, 10**4, 10**5, 10**6])
    m_points: int = 16
    upsilon_grid: list = field(default_factory=lambda: [1.0, 1.5, 2.0, 2.5])
    m_grid: list = field(default_factory=lambda: [10**2, 10**3, 10**4])
    z_grid: list = field(default_factory=lambda: [0.5, 1.0, 1.5, 2.0, 3.0])
    x_grid: list = field(default_factory=lambda: [1.0, 1.5, 2.0, 2.5, 3.0])
    debruijn_n_grid: list = field(default_factory=lambda: [10**4, 10**5, 10**6, 10**7])
    mc_count: int = 10**6
    seed: int = 42
    gamma: str = "off"
    exact_cap: int = 10**8
    lemma51_max: int = 2000
    mertens_max: int = 10**6
    u_max: float = 20.0
    tol: float = 1e-10
    out: str = ""
    format: str = "csv"

    _LISTS = {"n_grid": int, "upsilon_grid": float, "m_grid": int, "z_grid": float,
              "x_grid": float, "debruijn_n_grid": int}

    def validate(self):
        for name in self._LISTS:
            if not getattr(self, name):
                raise UsageError(f"config grid {name!r} is empty")
        if self.mc_count < MIN_MC_COUNT:
            raise UsageError(f"mc_count must be >= {MIN_MC_COUNT}, got {self.mc_count}")
        if self.gamma not in ("on", "off"):
            raise UsageError(f"gamma must be 'on' or 'off', got {self.gamma!r}")
        if self.format not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got {self.format!r}")
        if max(self.n_grid + self.debruijn_n_grid) > SCAN_SIEVE_CAP:
            raise UsageError(f"scan grids are capped at n <= {SCAN_SIEVE_CAP}")
        return self

    @classmethod
    def from_mapping(cls, data):
        cfg = cls()
        known = {f.name for f in fields(cls)}
        for key, val in data.items():
            key = key.replace("-", "_")
            if key not in known or key.startswith("_"):
                raise UsageError(f"unknown config key {key!r}")
            if key in cls._LISTS:
                val = _parse_list(val, cls._LISTS[key])
            elif key in ("m_points", "mc_count", "seed", "exact_cap", "lemma51_max", "mertens_max"):
                val = int(float(val))
            elif key in ("u_max", "tol"):
                val = float(val)
            setattr(cfg, key, val)
        return cfg.validate()

    @classmethod
    def from_file(cls, path):
        """Flat key = value file (TOML syntax); grids as arrays or comma lists."""
        try:
            data = tomllib.loads(Path(path).read_text())
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        return cls.from_mapping(data)


def fitted_increase(x, y):
    """Least-squares slope of y on x times the span of x."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2 or np.ptp(x) == 0:
        return 0.0
    slope = np.polyfit(x, y, 1)[0]
    return float(slope * np.ptp(x))


def fit_inverse_log(n, err):
    """C minimising sum (err - C / log n)^2."""
    w = 1.0 / np.log(np.asarray(n, dtype=np.float64))
    err = np.asarray(err, dtype=np.float64)
    return float(np.dot(w, err) / np.dot(w, w))


# --------------------------------------------------------------------------
# main theorem

def main_theorem_m_grid(n, points, upsilons, m_min=16):
    ms = set(np.unique(np.round(np.geomspace(m_min, n, points)).astype(np.int64)).tolist())
    for u in upsilons:
        m = int(round(n ** (1.0 / u)))
        if m >= m_min:
            ms.add(min(m, n))
    return sorted(ms)


def _smooth_prob_by_m(lpf, n, ms):
    """P[psi(H_n) <= m] for each m, from one sort of the lpf values."""
    k = np.arange(1, n + 1)
    f = lpf[1 : n + 1]
    order = np.argsort(f, kind="stable")
    csum = np.concatenate([[0.0], compensated_cumsum(1.0 / k[order])])
    idx = np.searchsorted(f[order], ms, side="right")
    # every k <= n is m-smooth once m >= n
    return np.where(np.asarray(ms) >= n, 1.0, csum[idx] / harmonic(n))


def scan_main_theorem(cfg, sieve=None, dickman=None):
    cfg.validate()
    dickman = dickman or build_dickman(cfg.u_max, cfg.tol)
    n_top = max(cfg.n_grid)
    if sieve is None or sieve.n < n_top:
        sieve = build_lpf_sieve(n_top)
    records = []
    for n in sorted(cfg.n_grid):
        ms = main_theorem_m_grid(n, cfg.m_points, cfg.upsilon_grid)
        exact = _smooth_prob_by_m(sieve.lpf, n, ms)
        for m, ex in zip(ms, exact):
            q = SmoothQuery(n, m)
            for variant, gamma in (("gamma", True), ("plain", False)):
                ap = psi_h_prob_approx(dickman, q, with_gamma=gamma)
                err = abs(ex - ap)
                records.append(ScanRecord(n, m, None, q.upsilon, float(ex), ap, err,
                                          math.log(n) * err, variant=variant))
    summary = {}
    for variant in ("gamma", "plain"):
        rows = [r for r in records if r.variant == variant]
        summary[f"sup_scaled_err_{variant}"] = max(r.scaled_err for r in rows)
        summary[f"max_trend_{variant}"] = max(
            _upsilon_trends(rows, cfg.upsilon_grid).values(), default=0.0)
    return ScanReport("main-theorem", records, summary)


def _upsilon_trends(rows, upsilons):
    """Fitted increase of scaled_err against log n along each fixed-upsilon line."""
    out = {}
    for u in upsilons:
        line = {}
        for r in rows:
            if r.m == min(int(round(r.n ** (1.0 / u))), r.n) and r.m >= 16:
                line[r.n] = r.scaled_err
        if len(line) >= 2:
            ns = sorted(line)
            out[u] = fitted_increase(np.log(ns), [line[n] for n in ns])
    return out


def upsilon_trends(report, upsilons, variant):
    return _upsilon_trends([r for r in report.records if r.variant == variant], upsilons)


# --------------------------------------------------------------------------
# Kolmogorov distance of S_m to the Dickman law

def scan_kolmogorov(cfg, table=None, dickman=None):
    cfg.validate()
    if not all(30 <= m <= 10**5 for m in cfg.m_grid):
        raise UsageError("Kolmogorov scan needs every m in [30, 1e5]")
    if not all(0.25 <= z <= 6 for z in cfg.z_grid):
        raise UsageError("Kolmogorov scan needs every z in [0.25, 6]")
    dickman = dickman or build_dickman(cfg.u_max, cfg.tol)
    m_top = max(cfg.m_grid)
    if table is None or table.limit < m_top + 1000:
        table = build_prime_table(max(m_top + 1000, 100))
    zs = np.array(sorted(cfg.z_grid), dtype=np.float64)
    records = []
    for i, m in enumerate(sorted(cfg.m_grid)):
        lam_m = lam(table, m)
        feasible = zs[zs * lam_m <= math.log(cfg.exact_cap)]
        exact = {}
        if feasible.size:
            try:
                vals = np.atleast_1d(s_m_cdf_exact(table, m, feasible, cap=cfg.exact_cap))
                exact = dict(zip(feasible.tolist(), vals.tolist()))
            except InfeasibleExactError:
                exact = {}
        ecdf = None
        if len(exact) < zs.size:
            rng = RandomSource(cfg.seed, stream=1000 + i)
            ecdf = Ecdf.from_samples(sample_s_m(table, m, rng, size=cfg.mc_count))
        band = dkw_band(cfg.mc_count)
        for z in zs.tolist():
            target = dickman_cdf(dickman, z)
            if z in exact:
                val, method, ci = exact[z], "exact", 0.0
            else:
                val, method, ci = float(ecdf(z)), "monte-carlo", band
            err = abs(val - target)
            scale = math.log(m) / (1.0 + 1.0 / z**2)
            records.append(ScanRecord(0, m, z, None, val, target, err, err * scale,
                                      method, ci))
    per_m = {}
    for r in records:
        per_m[r.m] = max(per_m.get(r.m, 0.0), r.scaled_err)
    widen = max((3 * r.mc_ci * math.log(r.m) / (1 + 1 / r.z**2) for r in records), default=0.0)
    ms = sorted(per_m)
    summary = {
        "sup_scaled_err": max(r.scaled_err for r in records),
        "mc_widening": widen,
        "trend_in_m": fitted_increase(np.log(ms), [per_m[m] for m in ms]),
    }
    return ScanReport("kolmogorov", records, summary)


# --------------------------------------------------------------------------
# Psi(n, n^{1/x}) / n against rho(x)

def scan_debruijn(cfg, sieve=None, dickman=None):
    cfg.validate()
    dickman = dickman or build_dickman(cfg.u_max, cfg.tol)
    n_top = max(cfg.debruijn_n_grid)
    if sieve is None or sieve.n < n_top:
        sieve = build_lpf_sieve(n_top)
    records = []
    for n in sorted(cfg.debruijn_n_grid):
        for x in sorted(cfg.x_grid):
            if not 1.0 <= x <= 4.0:
                raise UsageError(f"x grid must lie in [1, 4], got {x}")
            m = math.floor(n ** (1.0 / x) + 1e-9)
            ex = psi_count(sieve, n, m) / n
            ap = rho(dickman, x)
            err = abs(ex - ap)
            records.append(ScanRecord(n, m, None, x, ex, ap, err, math.log(n) * err))
    summary = {"sup_scaled_err": max(r.scaled_err for r in records)}
    for x in sorted(cfg.x_grid):
        rows = [r for r in records if r.upsilon == x]
        summary[f"C_x={x!r}"] = fit_inverse_log([r.n for r in rows], [r.abs_err for r in rows])
    return ScanReport("debruijn", records, summary)


def debruijn_decreasing(report, x):
    errs = [r.abs_err for r in sorted(report.records, key=lambda r: r.n) if r.upsilon == x]
    return all(b <= a + 1e-15 for a, b in zip(errs, errs[1:]))
