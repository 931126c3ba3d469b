"""Command-line entry point: ``smoothlab <command> ...``.

Exit codes: 0 success, 1 a verified property failed, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import verify as V
from .dickman import build_dickman, dickman_cdf, load_table, rho, rho_integral, save_table
from .errors import SmoothlabError, SolverError, UsageError
from .primes import MertensRow, build_prime_table, mertens_report
from .sampling import (
    RandomSource, rejection_products, sample_dickman, sample_harmonic_direct, sample_s_m,
)
from .scans import ScanConfig
from .smooth import SmoothQuery, build_lpf_sieve, psi_count, psi_h_prob_approx, psi_h_prob_exact

log = logging.getLogger("smoothlab")


def _int(text):
    """Integer that also accepts 1e6-style input."""
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if val != int(val):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(val)


def _int_list(text):
    return [_int(t) for t in text.split(",") if t.strip()]


def _float_list(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _emit(text, out=None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dickman(args):
    path = getattr(args, "table", None)
    if path:
        return load_table(path)
    return build_dickman(getattr(args, "u_max", 20.0), getattr(args, "tol", 1e-10))


# --------------------------------------------------------------------------

def cmd_mertens(args):
    limit = args.limit or max(args.n)
    table = build_prime_table(limit)
    rows = mertens_report(table, args.n)
    if args.format == "json":
        data = [dict(zip(MertensRow.COLUMNS, r.as_row())) for r in rows]
        _emit(json.dumps(data, indent=1) + "\n", args.out)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(MertensRow.COLUMNS)
        w.writerows(r.as_row() for r in rows)
        _emit(buf.getvalue(), args.out)
    return 0 if all(r.passed for r in rows) else 1


def cmd_dickman_eval(args):
    table = _dickman(args)
    out = {"u": args.u, "rho": rho(table, args.u)}
    if args.integral:
        out["integral"] = rho_integral(table, args.u)
    if args.cdf:
        val, sat = dickman_cdf(table, args.u, with_flag=True)
        out["cdf"] = val
        out["saturated"] = sat
    print(json.dumps(out))
    return 0


def cmd_dickman_table(args):
    table = build_dickman(args.u_max, args.tol, args.nodes_per_unit)
    save_table(table, args.out)
    print(json.dumps({"out": args.out, "u_max": table.u_max, "achieved": table.achieved}))
    return 0


def _query_out(args, value):
    q = SmoothQuery(args.n, args.m)
    if args.raw:
        print(repr(value))
    else:
        print(json.dumps({"n": q.n, "m": q.m, "upsilon": q.upsilon, "value": value}))
    return 0


def cmd_psi(args):
    SmoothQuery(args.n, args.m)
    return _query_out(args, psi_count(build_lpf_sieve(args.n), args.n, args.m))


def cmd_psih(args):
    q = SmoothQuery(args.n, args.m)
    if args.approx:
        value = psi_h_prob_approx(build_dickman(), q, with_gamma=args.gamma == "on")
    else:
        value = psi_h_prob_exact(build_lpf_sieve(args.n), q)
    return _query_out(args, value)


def cmd_sample(args):
    rng = RandomSource(args.seed, args.stream)
    kind = args.kind
    if kind in ("harmonic", "harmonic-rej") and args.n is None:
        raise UsageError(f"sample {kind} needs --n")
    if kind == "sm" and args.m is None:
        raise UsageError("sample sm needs --m")
    extra = {}
    if kind == "harmonic":
        values = sample_harmonic_direct(args.n, rng, size=args.count)
    elif kind == "harmonic-rej":
        values, attempts = rejection_products(build_prime_table(max(args.n, 2)), args.n, rng,
                                              args.count)
        extra["attempts"] = attempts
    elif kind == "dickman":
        values = sample_dickman(build_dickman(), rng, args.method, size=args.count)
    else:
        values = sample_s_m(build_prime_table(max(args.m, 2)), args.m, rng, size=args.count)
    text = "value\n" + "\n".join(map(repr, values.tolist())) + "\n"
    _emit(text, args.out)
    if args.out:
        summary = {"kind": kind, "count": args.count, "seed": args.seed,
                   "mean": float(np.mean(values)), **extra}
        print(json.dumps(summary))
    return 0


def _report(checks, out=None):
    checks = checks if isinstance(checks, list) else [checks]
    data = V._clean({"checks": [vars(c) for c in checks]})
    _emit(V.dumps(data), out)
    return 0 if all(c.passed for c in checks if c.asserted) else 1


def cmd_verify(args):
    what = args.what
    if what == "all":
        cfg = ScanConfig.from_file(args.config) if args.config else ScanConfig()
        cfg.seed = args.seed
        if args.mc_count is not None:
            cfg.mc_count = args.mc_count
        if args.gamma is not None:
            cfg.gamma = args.gamma
        cfg.validate()
        code, report = V.run_all(cfg, out=args.out, progress=lambda s: log.info("running %s", s))
        for c in report["checks"]:
            tag = "PASS" if c["passed"] else ("FAIL" if c["asserted"] else "NOTE")
            print(f"{tag:4s} {c['name']}")
        print(f"status: {report['status']} (report: {args.out})")
        return code
    if what == "representation":
        table = build_prime_table(max(args.n, 1000))
        return _report([V.check_acceptance(table, args.seed),
                        V.check_representation(table, args.seed, args.n, args.count)], args.out)
    if what == "tv":
        if not 21 <= args.n <= 10**5:
            raise UsageError(f"n must lie in [21, 1e5], got {args.n}")
        return _report(V.check_tv(build_prime_table(args.n), (args.n,)), args.out)
    if what == "stein":
        return _report(V.check_stein(build_dickman(), args.seed, args.count), args.out)
    if what == "sizebias":
        return _report(V.check_sizebias(), args.out)
    if what == "vm":
        if args.m < 3:
            raise UsageError(f"m must be >= 3, got {args.m}")
        return _report(V.check_vm(build_prime_table(args.m + 1000), (args.m,)), args.out)
    raise UsageError(f"unknown verify target {what!r}")


_SCAN_FLAGS = ("n_grid", "m_grid", "z_grid", "x_grid", "upsilon_grid", "debruijn_n_grid",
               "mc_count", "seed", "gamma", "exact_cap", "m_points")


def cmd_scan(args):
    cfg = ScanConfig.from_file(args.config) if args.config else ScanConfig()
    for key in _SCAN_FLAGS:
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    cfg.format = args.format
    cfg.validate()
    dickman = build_dickman(cfg.u_max, cfg.tol)
    if args.which == "main-theorem":
        checks, rep = V.check_main_theorem(cfg, build_lpf_sieve(max(cfg.n_grid)), dickman)
    elif args.which == "kolmogorov":
        table = build_prime_table(max(cfg.m_grid) + 1000)
        check, rep = V.check_kolmogorov(cfg, table, dickman)
        checks = [check]
    else:
        check, rep = V.check_debruijn(cfg, build_lpf_sieve(max(cfg.debruijn_n_grid)), dickman)
        checks = [check]
    _emit(rep.to_csv() if cfg.format == "csv" else rep.to_json() + "\n", args.out)
    for c in checks:
        tag = "PASS" if c.passed else ("FAIL" if c.asserted else "NOTE")
        print(f"{tag} {c.name}", file=sys.stderr)
    return 0 if all(c.passed for c in checks if c.asserted) else 1


# --------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="smoothlab", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("mertens", help="Mertens-type residuals on a grid of n")
    s.add_argument("--n", type=_int_list, default=[100, 1000, 10000])
    s.add_argument("--limit", type=_int, default=None)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out")
    s.set_defaults(func=cmd_mertens)

    s = sub.add_parser("dickman", help="Dickman function evaluation and tables")
    dsub = s.add_subparsers(dest="action", required=True)
    e = dsub.add_parser("eval")
    e.add_argument("--u", type=float, required=True)
    e.add_argument("--integral", action="store_true")
    e.add_argument("--cdf", action="store_true")
    e.add_argument("--table", help="cached table from 'dickman table'")
    e.add_argument("--u-max", type=float, default=20.0)
    e.add_argument("--tol", type=float, default=1e-10)
    e.set_defaults(func=cmd_dickman_eval)
    t = dsub.add_parser("table")
    t.add_argument("--u-max", type=float, default=20.0)
    t.add_argument("--tol", type=float, default=1e-10)
    t.add_argument("--nodes-per-unit", type=_int, default=64)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_dickman_table)

    for name, fn, helptext in (("psi", cmd_psi, "count of m-smooth k <= n"),
                               ("psih", cmd_psih, "P[psi(H_n) <= m], exact or approximate")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--n", type=_int, required=True)
        s.add_argument("--m", type=_int, required=True)
        s.add_argument("--raw", action="store_true")
        if name == "psih":
            s.add_argument("--approx", action="store_true")
            s.add_argument("--gamma", choices=("on", "off"), default="off")
        s.set_defaults(func=fn)

    s = sub.add_parser("sample", help="draw samples")
    s.add_argument("kind", choices=("harmonic", "harmonic-rej", "dickman", "sm"))
    s.add_argument("--n", type=_int)
    s.add_argument("--m", type=_int)
    s.add_argument("--count", type=_int, default=10**6)
    s.add_argument("--seed", type=_int, default=42)
    s.add_argument("--stream", type=_int, default=0)
    s.add_argument("--method", choices=("quantile", "perpetuity"), default="quantile")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("verify", help="verification suites")
    s.add_argument("what", choices=("representation", "tv", "stein", "sizebias", "vm", "all"))
    s.add_argument("--n", type=_int, default=100)
    s.add_argument("--m", type=_int, default=1000)
    s.add_argument("--count", type=_int, default=10**6)
    s.add_argument("--seed", type=_int, default=42)
    s.add_argument("--config")
    s.add_argument("--mc-count", type=_int)
    s.add_argument("--gamma", choices=("on", "off"))
    s.add_argument("--out")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("scan", help="error scans over parameter grids")
    s.add_argument("which", choices=("main-theorem", "kolmogorov", "debruijn"))
    s.add_argument("--config")
    s.add_argument("--n-grid", type=_int_list)
    s.add_argument("--m-grid", type=_int_list)
    s.add_argument("--z-grid", type=_float_list)
    s.add_argument("--x-grid", type=_float_list)
    s.add_argument("--upsilon-grid", type=_float_list)
    s.add_argument("--debruijn-n-grid", type=_int_list)
    s.add_argument("--m-points", type=_int)
    s.add_argument("--mc-count", type=_int)
    s.add_argument("--exact-cap", type=_int)
    s.add_argument("--seed", type=_int)
    s.add_argument("--gamma", choices=("on", "off"))
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out")
    s.set_defaults(func=cmd_scan)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    if args.command == "verify" and args.what == "all" and not args.out:
        args.out = "smoothlab-report.json"
    try:
        return args.func(args)
    except SmoothlabError as exc:
        print(f"smoothlab: error: {exc}", file=sys.stderr)
        return V.EXIT_FAIL if isinstance(exc, SolverError) else V.EXIT_USAGE
    except OSError as exc:
        print(f"smoothlab: error: {exc}", file=sys.stderr)
        return V.EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
