"""Acceptance criteria as library checks, shared by the test suite and ``kzlab selftest``.

Every check returns ``(passed, details)`` where ``details`` holds only
numbers and strings (no timings), so two runs can be compared bit for bit.
``fast=True`` selects the reduced problem sizes used by the selftest.
"""
from __future__ import annotations

import json
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

SEED = 20240611


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:2d} [{flag}] {self.name}: {self.details.get('summary', '')} ({self.seconds:.1f}s)"

    def to_dict(self) -> dict:
        return {"criterion": self.number, "name": self.name, "passed": self.passed,
                "seconds": self.seconds, "details": self.details}


def _max(xs):
    return max(xs) if xs else 0.0


# ---------------------------------------------------------------------------
# 1-2: Kloosterman sums


def c1_kloosterman(workers=None, fast=False):
    from .arith import divisors
    from .kloosterman import (KloostermanQuery, kloosterman_big, kloosterman_fast, kloosterman_tilde,
                              ramanujan_sum)

    d2max, bigmax, dmax = (20, 6, 30) if fast else (60, 12, 100)
    dev = 0.0
    count = 0
    for D2 in range(1, d2max + 1):
        for D1 in divisors(D2):
            for n1 in range(1, 6):
                for n2 in range(1, 6):
                    for m1 in range(1, 6):
                        a = kloosterman_tilde(n1, n2, m1, D1, D2).value
                        b = kloosterman_fast(KloostermanQuery("tilde", (n1, n2, m1), D1, D2), workers).value
                        dev = max(dev, abs(a - b))
                        count += 1
    big = 0.0
    nbig = 0
    for D1 in range(1, bigmax + 1):
        for D2 in range(1, bigmax + 1):
            for idx in np.ndindex(3, 3, 3, 3):
                idx = tuple(int(i) + 1 for i in idx)
                a = kloosterman_big(*idx, D1, D2).value
                b = kloosterman_fast(KloostermanQuery("big", idx, D1, D2), workers).value
                big = max(big, abs(a - b))
                nbig += 1
    ram = 0.0
    for D in range(1, dmax + 1):
        for m in (1, 2, 3, 4, 5, D):
            c = ramanujan_sum(m, D)
            a = kloosterman_tilde(1, 1, m, 1, D).value
            b = kloosterman_fast(KloostermanQuery("tilde", (1, 1, m), 1, D), workers).value
            ram = max(ram, abs(a - c), abs(b - c))
    passed = dev <= 1e-9 and big <= 1e-9 and ram <= 1e-9
    return passed, {"tilde_queries": count, "tilde_max_dev": dev, "big_queries": nbig,
                    "big_max_dev": big, "ramanujan_max_dev": ram,
                    "summary": f"tilde {count} q dev {dev:.1e}, big {nbig} q dev {big:.1e}, c_D dev {ram:.1e}"}


def c2_bezout(workers=None, fast=False):
    from .kloosterman import kloosterman_big

    rng = np.random.default_rng(SEED)
    n = 100 if fast else 1000
    dev = 0.0
    for i in range(n):
        idx = tuple(int(x) for x in rng.integers(1, 6, 4))
        D1, D2 = (int(x) for x in rng.integers(1, 13, 2))
        a = kloosterman_big(*idx, D1, D2).value
        b = kloosterman_big(*idx, D1, D2, resample_seed=SEED + i).value
        dev = max(dev, abs(a - b))
    return dev <= 1e-10, {"evaluations": n, "max_dev": dev,
                          "summary": f"{n} resampled evaluations, max dev {dev:.1e}"}


# ---------------------------------------------------------------------------
# 3: Eisenstein identities


def c3_eisenstein(workers=None, fast=False):
    from .eisenstein import MaximalEisenstein, MinimalEisenstein, check_identity
    from .hecke import chebyshev_table, hecke_eigenvalues_holomorphic

    N = 10**4
    rng = np.random.default_rng(SEED)
    mus = [(0j, 0j, 0j)]
    for _ in range(2):
        a, b = rng.uniform(-3, 3, 2)
        mus.append((1j * a, 1j * b, -1j * (a + b)))
    g = hecke_eigenvalues_holomorphic(16, N)
    f = chebyshev_table(N, seed=3)
    runs = [("Emin", MinimalEisenstein.from_mu(m), None) for m in (mus[:1] if fast else mus)]
    runs.append(("gEmin", MinimalEisenstein.from_mu(mus[1]), g))
    if not fast:
        runs.append(("Emax", MaximalEisenstein(0.4j, f), None))
        runs.append(("gEmax", MaximalEisenstein(-0.25j, f), g))
    out = []
    for which, e, gg in runs:
        r = check_identity(which, e, 3.0, N, g=gg, workers=workers)
        out.append(r.to_dict())
    worst = _max([r["residual"] for r in out])
    resolved = {r["identity"]: r.get("resolved_normalization") for r in out if "resolved_normalization" in r}
    passed = worst <= 1e-8 and all(r["passed"] for r in out)
    return passed, {"checks": out, "max_residual": worst, "resolved": resolved,
                    "summary": f"{len(out)} identities, max residual {worst:.1e}, resolved {resolved}"}


# ---------------------------------------------------------------------------
# 4: AFE weight asymptotics

C4_MU = (20j, -8j, -12j)
C4_K = 16
C4_Y = 100 * 21**3


def c4_afe_weights(workers=None, fast=False):
    from .afe import afe_weight, weight_limit

    rows = {}
    for kind, y in (("V", 1.0), ("Vtilde", C4_Y), ("W", 1.0), ("Wtilde", C4_Y)):
        r = afe_weight(kind, y, C4_MU, C4_K, tol=None, workers=workers)
        lim = weight_limit(kind, C4_MU, C4_K)
        rows[kind] = {"y": y, "re": r.value.real, "im": r.value.imag, "self_error": r.self_error,
                      "limit_re": lim.real, "limit_im": lim.imag, "rel_dev": abs(r.value / lim - 1)}
    dev = _max([r["rel_dev"] for r in rows.values()])
    err = _max([r["self_error"] for r in rows.values()])
    passed = dev <= 1e-3 and err <= 1e-10
    devs = ", ".join(f"{k} {v['rel_dev']:.2e}" for k, v in rows.items())
    return passed, {"weights": rows, "max_rel_dev": dev, "max_self_error": err,
                    "summary": f"|weight/limit - 1|: {devs}; max self_error {err:.1e}"}


# ---------------------------------------------------------------------------
# 5: kernel contour independence and Weyl invariance


def c5_kernels(workers=None, fast=False):
    from .kernels import ContourSpec, k_w4
    from .spectral import WEYL_GROUP, TestFunctionSpec, test_function_h, weyl_apply

    rng = np.random.default_rng(SEED)
    npairs = 3 if fast else 10
    worst_ratio = 0.0
    weyl = 0.0
    for _ in range(npairs):
        y = float(rng.choice([-1, 1]) * 10 ** rng.uniform(-1, 3))
        while True:
            a, b = rng.uniform(-10, 10, 2)
            if abs(a + b) <= 10 and min(abs(a - b), abs(2 * a + b), abs(a + 2 * b)) > 0.3:
                break
        mu = (1j * a, 1j * b, -1j * (a + b))
        r1 = k_w4(y, mu, ContourSpec(sigma=0.25), workers=workers)
        r2 = k_w4(y, mu, ContourSpec(sigma=1 / 3), workers=workers)
        worst_ratio = max(worst_ratio, abs(r1.value - r2.value) / (r1.self_error + r2.self_error))
        for w in WEYL_GROUP:
            rw = k_w4(y, weyl_apply(w, mu), workers=workers)
            weyl = max(weyl, abs(rw.value - r1.value) / abs(r1.value))
    tf = TestFunctionSpec(10.0)
    hweyl = 0.0
    for _ in range(20):
        d = rng.normal(size=2) * tf.R
        mu = (tf.mu0[0] + 1j * d[0], tf.mu0[1] + 1j * d[1], tf.mu0[2] - 1j * (d[0] + d[1]))
        h0 = test_function_h(mu, tf)
        for w in WEYL_GROUP:
            hweyl = max(hweyl, abs(test_function_h(weyl_apply(w, mu), tf) - h0) / abs(h0))
    passed = worst_ratio <= 1.0 and weyl <= 1e-8 and hweyl <= 1e-8
    return passed, {"pairs": npairs, "gap_over_self_error": worst_ratio, "kernel_weyl_rel": weyl,
                    "h_weyl_rel": hweyl,
                    "summary": (f"{npairs} pairs, max |gap|/(err1+err2) {worst_ratio:.2f}, "
                                f"Weyl k_w4 {weyl:.1e}, h {hweyl:.1e}")}


# ---------------------------------------------------------------------------
# 6: decay scans


def c6_decay(workers=None, fast=False):
    from .transforms import decay_scan

    T = 10
    w4 = decay_scan("w4", [T], workers=workers)
    w6 = decay_scan("w6", [T], workers=workers)
    r4 = w4.ratio(T)
    r6 = w6.ratio(T)
    passed = r4 <= 1e-6 and r6 <= 1e-5
    return passed, {"w4_rows": w4.rows, "w6_rows": w6.rows, "w4_ratio": r4, "w6_ratio": r6,
                    "summary": (f"|Phi_w4(T^2.5)|/|Phi_w4(T^3.5)| = {r4:.3g} (need <= 1e-6), "
                                f"Phi_w6 small/large = {r6:.3g} (need <= 1e-5)")}


# ---------------------------------------------------------------------------
# 7-8: diagonal weight and main term

C7_SCALES = (5.0, 10.0, 20.0, 40.0)
C7_DIRECTION = (1.0, -0.4, -0.6)
L_TABLE_N = 2**17


def _weight16_table():
    from .hecke import hecke_eigenvalues_holomorphic

    return hecke_eigenvalues_holomorphic(16, L_TABLE_N)


def c7_diagonal(workers=None, fast=False):
    from .afe import diagonal_weight, l_central_gl2

    g = _weight16_table()
    L1 = l_central_gl2(g, 1.0, workers=workers)
    rows = []
    for t in C7_SCALES:
        mu = tuple(1j * t * c for c in C7_DIRECTION)
        r = diagonal_weight(mu, 16, g, L1g=L1.value.real, workers=workers)
        rows.append({"t": t, "re": r.value.real, "im": r.value.imag, "self_error": r.self_error,
                     "prediction_re": r.prediction.real, "prediction_im": r.prediction.imag,
                     "rel_remainder": abs(r.remainder) / abs(r.prediction),
                     "scale": math.prod(abs(m) for m in mu) ** -0.25})
    rel = [r["rel_remainder"] for r in rows]
    monotone = all(b < a for a, b in zip(rel, rel[1:]))
    passed = monotone and rel[-1] <= 0.05
    return passed, {"L1g": L1.value.real, "L1g_self_error": L1.self_error, "rows": rows,
                    "monotone": monotone,
                    "summary": ("relative remainder " + ", ".join(f"{x:.3f}" for x in rel)
                                + f" (monotone {monotone}; final <= 0.05 needed)")}


C8_TS = (10.0, 20.0, 40.0)


def c8_main_term(workers=None, fast=False):
    from .afe import MainTermConfig, l_central_gl2, main_term_integral
    from .spectral import TestFunctionSpec

    L1 = l_central_gl2(_weight16_table(), 1.0, workers=workers).value.real
    rows = []
    for T in C8_TS:
        r = main_term_integral(MainTermConfig(TestFunctionSpec(T, 0.5), 16, L1g=L1), workers=workers)
        rows.append({"T": T, "re": r.value.real, "im": r.value.imag, "self_error": r.self_error,
                     "per_T_ratio": r.per_T_ratio})
    ratios = [r["per_T_ratio"] for r in rows]
    spread = max(ratios) / min(ratios)
    return spread <= 3.0, {"rows": rows, "spread": spread,
                           "summary": ("|I|/(T^3 R^2) = " + ", ".join(f"{x:.3e}" for x in ratios)
                                       + f"; spread {spread:.2f} (need <= 3)")}


# ---------------------------------------------------------------------------
# 9: special functions


def c9_special(workers=None, fast=False):
    from .hecke import cusp_form_coefficients, delta_product_coefficients, eisenstein_series
    from .special import log_gamma, zeta

    rng = np.random.default_rng(SEED)
    s = rng.uniform(-0.99, 1.99, 20) + 1j * rng.uniform(-40, 40, 20)
    fe = 0.0
    for v in s:
        rhs = 2**v * np.pi ** (v - 1) * np.sin(np.pi * v / 2) * np.exp(log_gamma(1 - v)) * zeta(1 - v)
        fe = max(fe, abs(zeta(v) - rhs) / max(1.0, abs(zeta(v))))
    z = rng.uniform(-4.7, 20.3, 200) + 1j * rng.uniform(-30, 30, 200)
    rec = float(np.max(np.abs(log_gamma(z + 1) - log_gamma(z) - np.log(z))))
    tau = delta_product_coefficients(3)
    e4 = eisenstein_series(4, 3)
    # weight 16 by the plain Cauchy product Delta * E4 (not the packed-integer multiplication)
    f16 = [sum(e4[i] * ([0] + list(tau))[n - i] for i in range(n + 1)) for n in range(4)]
    coeffs = {"a12_2_theta": cusp_form_coefficients(12, 3)[1], "a12_2_product": tau[1],
              "a16_2_theta": cusp_form_coefficients(16, 3)[1], "a16_2_product": f16[2]}
    ok_c = (coeffs["a12_2_theta"] == coeffs["a12_2_product"] == -24
            and coeffs["a16_2_theta"] == coeffs["a16_2_product"] == 216)
    passed = fe <= 1e-9 and rec <= 1e-12 and ok_c
    return passed, {"zeta_fe_residual": fe, "log_gamma_recurrence": rec, "coefficients": coeffs,
                    "summary": f"zeta FE {fe:.1e}, log Gamma recurrence {rec:.1e}, a(2) = -24, 216: {ok_c}"}


# ---------------------------------------------------------------------------
# registry and runner

CRITERIA = {
    1: ("Kloosterman cross-validation", c1_kloosterman, 120.0),
    2: ("Bezout independence", c2_bezout, None),
    3: ("Eisenstein identities", c3_eisenstein, 60.0),
    4: ("AFE weight asymptotics", c4_afe_weights, None),
    5: ("kernel contour independence", c5_kernels, None),
    6: ("decay-lemma scans", c6_decay, 1200.0),
    7: ("diagonal weight", c7_diagonal, None),
    8: ("main-term magnitude", c8_main_term, 600.0),
    9: ("special-function core", c9_special, None),
}


def _clear_caches():
    from . import afe, eisenstein

    afe._L_CACHE.clear()
    eisenstein._min_table.cache_clear()


def run_criterion(number: int, workers=None, fast=False) -> CriterionResult:
    name, func, limit = CRITERIA[number]
    start = time.perf_counter()
    passed, details = func(workers=workers, fast=fast)
    seconds = time.perf_counter() - start
    if limit is not None and not fast:
        details["runtime_limit"] = limit
        if seconds > limit:
            passed = False
            details["summary"] = details.get("summary", "") + f"; runtime {seconds:.0f}s > {limit:.0f}s"
    return CriterionResult(number, name, bool(passed), details, seconds)


def canonical(details: dict) -> str:
    """Deterministic JSON text of a details dict (the bit-identity contract)."""
    from .cli import _jsonable

    return json.dumps(_jsonable(details), sort_keys=True)


def c10_determinism(baseline: dict, workers: int = 4, fast=False) -> CriterionResult:
    """Re-run every criterion with ``workers`` and compare with ``baseline`` (1-worker results)."""
    start = time.perf_counter()
    _clear_caches()
    mismatched = []
    for number, base in sorted(baseline.items()):
        again = run_criterion(number, workers=workers, fast=fast)
        a, b = dict(base.details), dict(again.details)
        if canonical(a) != canonical(b):
            mismatched.append(number)
    passed = not mismatched
    summary = f"1 vs {workers} workers over criteria {sorted(baseline)}: " + (
        "bit-identical" if passed else f"differences in {mismatched}")
    return CriterionResult(10, "determinism", passed, {"mismatched": mismatched, "summary": summary},
                           time.perf_counter() - start)


def h_localization(gaussian_sign="decaying") -> tuple:
    """h at the default grid edge (5R from mu0) relative to h(mu0); a growing Gaussian fails by design."""
    from .spectral import TestFunctionSpec, test_function_h

    tf = TestFunctionSpec(10.0, gaussian_sign=gaussian_sign)
    d = 5 * tf.R / math.sqrt(2)
    far = (tf.mu0[0] + 1j * d, tf.mu0[1] - 1j * d, tf.mu0[2])
    ratio = float(abs(test_function_h(far, tf)) / abs(test_function_h(tf.mu0, tf)))
    return ratio <= 1e-10, {"ratio": ratio, "summary": f"h(mu0 + 5R)/h(mu0) = {ratio:.1e}"}


SELFTEST_CRITERIA = (1, 2, 3, 4, 5, 9)


def run_selftest(workers=None, log=None, gaussian_sign="decaying") -> dict:
    """Fast subset: criteria 1-5 and 9 at reduced sizes, h localisation, and determinism."""
    log = sys.stderr if log is None else log
    checks = []

    def record(res: CriterionResult):
        checks.append(res)
        log.write(res.line() + "\n")

    base = {}
    for n in SELFTEST_CRITERIA:
        res = run_criterion(n, workers=1, fast=True)
        base[n] = res
        record(res)
    start = time.perf_counter()
    ok, det = h_localization(gaussian_sign)
    record(CriterionResult(0, "h localisation", ok, det, time.perf_counter() - start))
    record(c10_determinism(base, workers=2 if workers in (None, 1) else workers, fast=True))
    failed = [c for c in checks if not c.passed]
    return {"passed": not failed, "first_failure": failed[0].name if failed else None,
            "checks": [{"criterion": c.number, "name": c.name, "passed": c.passed,
                        "seconds": c.seconds, "summary": c.details.get("summary", "")} for c in checks]}
