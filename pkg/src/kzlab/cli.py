"""Command-line interface: ``kzlab <command> [flags]``.

Each command writes one JSON object (or CSV rows with ``--format csv``) to
standard output and diagnostics to standard error. Exit status: 0 success,
1 usage error, 2 invalid input, 3 accuracy failure. ``--config FILE`` reads
``key = value`` lines that act as flags placed before the command line, so
explicit flags win. Worker count: ``--workers``, else KZLAB_WORKERS, else 1.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time

from .errors import (AccuracyError, BudgetError, ConfigurationError, DomainError,
                     UnsupportedError, ValidationError)
from .spectral import parse_complex, parse_triple

COMMANDS = ("kloosterman", "kernel", "phi", "scan", "check", "afe-weight", "main-term",
            "diagonal", "zeta", "hecke", "selftest")

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_ACCURACY = 0, 1, 2, 3
INVALID = (ValidationError, DomainError, ConfigurationError, UnsupportedError, BudgetError)


class _Parser(argparse.ArgumentParser):
    """argparse with flag errors raised (mapped to exit 2) instead of exiting."""

    def error(self, message):
        raise ValidationError(message)


def read_config(path) -> list:
    """Turn ``key = value`` lines (``#`` comments) into ``--key value`` arguments."""
    args = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (x.strip() for x in line.split("=", 1))
            args += ["--" + key.replace("_", "-"), value]
    return args


def _complex(text):
    try:
        return parse_complex(text)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def _triple(text):
    try:
        return parse_triple(text)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def _floats(text):
    return [float(x) for x in str(text).split(",") if x]


def _positive(name, value):
    if not value > 0:
        raise ValidationError(f"--{name} must be positive, got {value}")
    return value


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        return _jsonable(x.item())
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def emit(payload: dict, fmt: str, out=None) -> None:
    """One JSON object per run; CSV writes the ``rows`` list if present, else one row."""
    out = sys.stdout if out is None else out
    payload = _jsonable(payload)
    if fmt == "json":
        out.write(json.dumps(payload) + "\n")
        return
    rows = payload.get("rows") if isinstance(payload.get("rows"), list) else [payload]
    keys = []
    for r in rows:
        keys += [k for k in r if k not in keys and not isinstance(r[k], (dict, list))]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=keys, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    out.write(buf.getvalue())


# ---------------------------------------------------------------------------
# commands: each returns the payload dict


def _contour(args):
    from .kernels import ContourSpec

    if args.sigma is None and args.height is None and args.step is None:
        return None
    return ContourSpec(sigma=0.25 if args.sigma is None else args.sigma, H=args.height, step=args.step,
                       tilt=getattr(args, "tilt", None))


def cmd_kloosterman(args):
    from .kloosterman import KloostermanQuery, evaluate

    if args.variant == "tilde":
        idx = (args.n1, args.n2, args.m1)
    else:
        if args.m2 is None:
            raise ValidationError("big sums need --m2")
        idx = (args.n1, args.m2, args.m1, args.n2)
    q = KloostermanQuery(args.variant, idx, args.d1, args.d2)
    v = evaluate(q, args.method, workers=args.workers)
    return {"re": v.value.real, "im": v.value.imag, "value_re": v.value.real,
            "value_im": v.value.imag, "terms": v.terms_enumerated, "method": v.method}


def cmd_kernel(args):
    from .kernels import k_w4, k_w6

    mu = _triple(args.mu)
    if args.which == "w4":
        if args.y is None:
            raise ValidationError("kernel w4 needs --y")
        r = k_w4(args.y, mu, _contour(args), tol=args.tol, workers=args.workers)
    else:
        if args.y1 is None or args.y2 is None:
            raise ValidationError("kernel w6 needs --y1 and --y2")
        r = k_w6(args.y1, args.y2, mu, _contour(args), tol=args.tol, workers=args.workers)
    return r.to_dict()


def _tf(args):
    from .spectral import TestFunctionSpec

    return TestFunctionSpec(_positive("T", args.T), args.theta, args.A0)


def cmd_phi(args):
    from .transforms import build_grid, phi_w4, phi_w5, phi_w6

    tf = _tf(args)
    grid = build_grid(tf, args.W, args.eta)
    if args.which == "w6":
        if args.y2 is None:
            raise ValidationError("phi w6 needs --y2")
        r = phi_w6(args.y, args.y2, tf, grid, tol=args.tol, workers=args.workers)
    else:
        f = phi_w4 if args.which == "w4" else phi_w5
        r = f(args.y, tf, grid, tol=args.tol, workers=args.workers)
    return r.to_dict()


def cmd_scan(args):
    from .transforms import decay_scan

    Ts = _floats(args.T)
    tab = decay_scan(args.transform, Ts, theta=args.theta, A0=args.A0, time_budget=args.time_budget,
                     workers=args.workers)
    return {"rows": tab.rows, "complete": tab.complete,
            "ratios": {str(T): tab.ratio(T) for T in Ts}}


def cmd_check(args):
    from .eisenstein import MaximalEisenstein, MinimalEisenstein, check_identity
    from .hecke import chebyshev_table, hecke_eigenvalues_holomorphic, load_table

    which = {"emin": "Emin", "emax": "Emax", "gemin": "gEmin", "gemax": "gEmax"}[args.identity]
    if which.endswith("min"):
        e = MinimalEisenstein.from_mu(_triple(args.mu))
    else:
        f = load_table(args.f_table, "synthetic") if args.f_table else chebyshev_table(args.N, seed=args.f_seed)
        e = MaximalEisenstein(_complex(args.u), f)
    g = hecke_eigenvalues_holomorphic(args.k, args.N) if which.startswith("g") else None
    r = check_identity(which, e, _complex(args.s), args.N, g=g, method=args.method, tol=args.tol,
                       workers=args.workers)
    return r.to_dict()


def cmd_afe_weight(args):
    from .afe import afe_weight

    c = _contour(args)
    if c is not None:
        from .kernels import ContourSpec

        c = ContourSpec(sigma=3.0 if args.sigma is None else args.sigma, H=args.height,
                        step=args.step, tilt=0.0)
    r = afe_weight(args.kind, _positive("y", args.y), _triple(args.mu), args.k, c,
                   tol=args.tol, workers=args.workers)
    out = r.to_dict()
    out["sigma"] = r.contour.sigma
    return out


def cmd_main_term(args):
    from .afe import MainTermConfig, main_term_integral

    cfg = MainTermConfig(_tf(args), args.k, L1g=args.L1g, tol=args.tol)
    return main_term_integral(cfg, workers=args.workers).to_dict()


def cmd_diagonal(args):
    from .afe import diagonal_weight
    from .hecke import hecke_eigenvalues_holomorphic

    g = hecke_eigenvalues_holomorphic(args.k, args.N)
    return diagonal_weight(_triple(args.mu), args.k, g, L1g=args.L1g, tol=args.tol,
                           workers=args.workers).to_dict()


def cmd_zeta(args):
    from .special import zeta

    z = complex(zeta(_complex(args.s)))
    return {"re": z.real, "im": z.imag}


def cmd_hecke(args):
    from .hecke import cusp_form_coefficients, first_violation, hecke_eigenvalues_holomorphic, load_table

    if args.file:
        t = load_table(args.file, args.kind)
        return {"label": t.label, "kind": t.kind, "N": t.N, "valid": first_violation(t) is None}
    if args.k is None:
        raise ValidationError("hecke needs --k or --file")
    if args.s is not None:
        from .afe import l_central_gl2

        g = hecke_eigenvalues_holomorphic(args.k, max(args.N, 2**17))
        return l_central_gl2(g, _complex(args.s), tol=args.tol, workers=args.workers).to_dict()
    t = hecke_eigenvalues_holomorphic(args.k, args.N)
    a = cusp_form_coefficients(args.k, args.N)
    rows = [{"n": n, "lambda": float(t.values[n - 1].real), "a": int(a[n - 1])}
            for n in range(1, t.N + 1)]
    return {"label": t.label, "rows": rows}


def cmd_selftest(args):
    from .acceptance import run_selftest

    report = run_selftest(workers=args.workers, log=args.log)
    if not report["passed"]:
        raise _SelftestFailure(report)
    return report


class _SelftestFailure(Exception):
    def __init__(self, report):
        super().__init__(report.get("first_failure"))
        self.report = report


# ---------------------------------------------------------------------------
# parser and dispatch


def _common(p: argparse.ArgumentParser, tol=None):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--tol", type=float, default=tol)
    p.add_argument("--config", default=None, help="key = value file; flags override it")


def _spectral(p):
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--A0", type=int, default=1)


def _line(p):
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--height", type=float, default=None)
    p.add_argument("--step", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="kzlab", description="Numerics for GL(3) spectral moments.")
    sub = top.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("kloosterman", help="GL(3) Kloosterman sums")
    p.add_argument("--variant", choices=("tilde", "big"), required=True)
    for name in ("n1", "n2", "m1", "d1", "d2"):
        p.add_argument("--" + name, type=int, required=True)
    p.add_argument("--m2", type=int, default=None)
    p.add_argument("--method", choices=("brute", "crt"), default="crt")
    _common(p)

    p = sub.add_parser("kernel", help="K_w4 / K_w6 kernels")
    p.add_argument("which", choices=("w4", "w6"))
    p.add_argument("--mu", required=True)
    p.add_argument("--y", type=float, default=None)
    p.add_argument("--y1", type=float, default=None)
    p.add_argument("--y2", type=float, default=None)
    p.add_argument("--tilt", type=float, default=None)
    _line(p)
    _common(p, tol=1e-6)

    p = sub.add_parser("phi", help="Phi_w4 / Phi_w5 / Phi_w6 transforms")
    p.add_argument("which", choices=("w4", "w5", "w6"))
    _spectral(p)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--y2", type=float, default=None)
    p.add_argument("--W", type=float, default=None)
    p.add_argument("--eta", type=float, default=None)
    _common(p)

    p = sub.add_parser("scan", help="decay scans of the transforms")
    p.add_argument("--transform", choices=("w4", "w6"), required=True)
    p.add_argument("--T", required=True, help="comma-separated list")
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--A0", type=int, default=1)
    p.add_argument("--time-budget", type=float, default=None)
    _common(p)

    p = sub.add_parser("check", help="Eisenstein coefficient identities")
    p.add_argument("--identity", choices=("emin", "emax", "gemin", "gemax"), required=True)
    p.add_argument("--s", default="3")
    p.add_argument("--N", type=int, default=10**4)
    p.add_argument("--mu", default="0,0;0,0;0,0")
    p.add_argument("--u", default="0,0.4")
    p.add_argument("--f-table", default=None)
    p.add_argument("--f-seed", type=int, default=3)
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--method", choices=("euler", "partial"), default="euler")
    _common(p)

    p = sub.add_parser("afe-weight", help="AFE weights V, V~, W, W~")
    p.add_argument("--kind", choices=("V", "Vt", "Vtilde", "W", "Wt", "Wtilde"), required=True)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--mu", required=True)
    p.add_argument("--k", type=int, default=16)
    _line(p)
    _common(p, tol=1e-10)

    p = sub.add_parser("main-term", help="spectral integral of M(mu, k)")
    _spectral(p)
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--L1g", type=float, default=None)
    _common(p, tol=1e-6)

    p = sub.add_parser("diagonal", help="diagonal weight D(mu)")
    p.add_argument("--mu", required=True)
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--N", type=int, default=2**17)
    p.add_argument("--L1g", type=float, default=None)
    _common(p, tol=1e-8)

    p = sub.add_parser("zeta", help="Riemann zeta")
    p.add_argument("--s", required=True)
    _common(p)

    p = sub.add_parser("hecke", help="Hecke tables and L(s, g)")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--N", type=int, default=10)
    p.add_argument("--s", default=None, help="evaluate L(s, g) instead of listing coefficients")
    p.add_argument("--file", default=None)
    p.add_argument("--kind", default="synthetic")
    _common(p, tol=1e-8)

    p = sub.add_parser("selftest", help="fast acceptance subset")
    _common(p)
    return top


HANDLERS = {"kloosterman": cmd_kloosterman, "kernel": cmd_kernel, "phi": cmd_phi, "scan": cmd_scan,
            "check": cmd_check, "afe-weight": cmd_afe_weight, "main-term": cmd_main_term,
            "diagonal": cmd_diagonal, "zeta": cmd_zeta, "hecke": cmd_hecke, "selftest": cmd_selftest}


def _expand_config(argv: list) -> list:
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise ValidationError("--config needs a path")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2:]
    return rest[:1] + read_config(path) + rest[1:]


def main(argv=None, out=None, err=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    if not argv or argv[0] not in COMMANDS:
        if argv and argv[0] not in ("-h", "--help"):
            err.write(f"kzlab: unknown command {argv[0]!r}\n")
        err.write(parser.format_usage())
        return EXIT_USAGE
    fmt = "json"
    try:
        argv = _expand_config(argv)
        args = parser.parse_args(argv)
        fmt = args.format
        if args.workers is not None and args.workers < 1:
            raise ValidationError("--workers must be >= 1")
        args.log = err
        start = time.perf_counter()
        payload = HANDLERS[args.command](args)
        payload["seconds"] = time.perf_counter() - start
        emit(payload, fmt, out)
        return EXIT_OK
    except _SelftestFailure as exc:
        emit(exc.report, fmt, out)
        err.write(f"kzlab: selftest failed at {exc.report.get('first_failure')}\n")
        return EXIT_ACCURACY
    except AccuracyError as exc:
        err.write(f"kzlab: accuracy error: {exc}\n")
        return EXIT_ACCURACY
    except INVALID as exc:
        err.write(f"kzlab: invalid input: {exc}\n")
        return EXIT_INVALID
    except (OSError, KeyError) as exc:
        err.write(f"kzlab: invalid input: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
