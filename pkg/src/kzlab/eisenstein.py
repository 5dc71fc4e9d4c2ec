"""Hecke coefficients of the minimal and maximal Eisenstein series on GL(3),
their normalising factors, and numerical checks of the Dirichlet-series
factorisations at Re s >= 3.

B(1, n) tables are built by Dirichlet convolution straight from the divisor
sums; B(m, 1) = conj B(1, m) and the general B(m, n) follow from the Hecke
relation sum_{d | (m, n)} mu(d) B(m/d, 1) B(1, n/d).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import arith
from ._numeric import ordered_map, pairwise_sum
from .errors import AccuracyError, ConfigurationError, DomainError, ValidationError
from .hecke import (HeckeTable, SeriesAccuracy, _euler, _parse_table_text, dirichlet_eval,
                    rankin_selberg_series)
from .special import zeta
from .spectral import SpectralPoint

# Exponent of d2 in B_max(1, m) = sum_{d1 d2 = m} lambda_f(d1) d1^(-u) d2^(e u):
# "minus" is e = -2 as printed next to the definition, "plus" is e = +2,
# the one consistent with L(s, E_max) = zeta(s - 2u) L(s + u, f).
D2_CONVENTIONS = {"minus": -2, "plus": 2}
DEFAULT_D2 = "plus"
NORMALIZATIONS = ("with-zeta2s", "bare")
IDENTITIES = ("Emin", "Emax", "gEmin", "gEmax")
NU_POLE_TOL = 1e-8


def _powers(N: int, c: complex) -> np.ndarray:
    """n^(-c) for n <= N, index 0 unused."""
    n = np.arange(N + 1, dtype=float)
    n[0] = 1.0
    out = np.exp(-c * np.log(n))
    out[0] = 0
    return out


@dataclass(frozen=True)
class MinimalEisenstein:
    point: SpectralPoint

    @classmethod
    def from_mu(cls, mu) -> "MinimalEisenstein":
        return cls(SpectralPoint(tuple(mu)))

    @property
    def mu(self):
        return self.point.mu

    def coefficients(self, N: int) -> np.ndarray:
        """B(1, n) for n <= N (index 0 unused)."""
        return _min_table(self.mu, int(N))

    @property
    def growth(self) -> float:
        """a with |B(1, n)| <= d_3(n) n^a."""
        return max(0.0, max(-m.real for m in self.mu))


@lru_cache(maxsize=32)
def _min_table(mu, N):
    out = arith.dirichlet_convolve(_powers(N, mu[0]), _powers(N, mu[1]))
    out = arith.dirichlet_convolve(out, _powers(N, mu[2]))
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class MaximalEisenstein:
    u: complex
    f: HeckeTable
    ad_square_L1: float | None = None
    d2: str = DEFAULT_D2

    def __post_init__(self):
        object.__setattr__(self, "u", complex(self.u))
        if self.d2 not in D2_CONVENTIONS:
            raise ValidationError(f"d2 convention must be one of {tuple(D2_CONVENTIONS)}")
        if not self.f.multiplicative:
            raise ValidationError("f must be a validated multiplicative Hecke table")

    def with_d2(self, d2: str) -> "MaximalEisenstein":
        return MaximalEisenstein(self.u, self.f, self.ad_square_L1, d2)

    def coefficients(self, N: int) -> np.ndarray:
        N = int(N)
        if N > self.f.N:
            raise ValidationError(f"f table has {self.f.N} coefficients, need {N}")
        lam = np.concatenate([[0], self.f.values[:N]]) * _powers(N, self.u)
        return arith.dirichlet_convolve(lam, _powers(N, -D2_CONVENTIONS[self.d2] * self.u))

    @property
    def growth(self) -> float:
        return 2 * abs(self.u.real)

    @property
    def bound_k(self) -> int:
        """k with |B(1, n)| <= d_k(n) n^growth."""
        kf = self.f.bound_class
        if kf is None:
            raise ValidationError("f must satisfy |lambda_f(n)| <= d(n)")
        return kf + 1


def _b_general(B1, m: int, n: int) -> complex:
    if m < 1 or n < 1:
        raise ValidationError("m, n must be positive integers")
    total = 0j
    for d in arith.divisors(math.gcd(m, n)):
        md = arith.mobius(d)
        if md:
            total += md * np.conj(B1[m // d]) * B1[n // d]
    return complex(total)


def b_min(e: MinimalEisenstein, m: int, n: int) -> complex:
    return _b_general(e.coefficients(max(m, n)), int(m), int(n))


def b_max(e: MaximalEisenstein, m: int, n: int) -> complex:
    return _b_general(e.coefficients(max(m, n)), int(m), int(n))


def n_min(e: MinimalEisenstein) -> float:
    """(1/16) prod_j |zeta(1 + 3 nu_j)|^2."""
    nu = e.point.nu
    for j, v in enumerate(nu):
        if abs(3 * v) < NU_POLE_TOL:
            raise DomainError(f"zeta(1 + 3 nu_{j + 1}) is at its pole (nu_{j + 1} = {v})")
    return math.prod(abs(zeta(1 + 3 * v)) ** 2 for v in nu) / 16


def n_max(e: MaximalEisenstein, acc: SeriesAccuracy | None = None) -> float:
    """8 L(1, Ad^2 f) |L(1 + 3u, f)|^2 with the user-supplied L(1, Ad^2 f)."""
    if e.ad_square_L1 is None:
        raise ConfigurationError("n_max needs ad_square_L1 = L(1, Ad^2 f)")
    s = 1 + 3 * e.u
    if s.real < 2:
        raise DomainError(f"L(1 + 3u, f) needs Re(1 + 3u) >= 2 here, got {s.real}")
    L = dirichlet_eval(e.f, s, acc).value
    return 8 * float(e.ad_square_L1) * abs(L) ** 2


def load_gl2_form(path) -> HeckeTable:
    """A GL(2) Maass-form table in the HeckeTable CSV format with a '# t_f=<real>' header."""
    path = Path(path)
    table, meta = _parse_table_text(path.read_text(encoding="utf-8"), "maass-gl2", path.stem)
    if "t_f" not in meta:
        raise ValidationError(f"{path}: missing '# t_f=<real>' header comment")
    try:
        t_f = float(meta["t_f"])
    except ValueError:
        raise ValidationError(f"{path}: t_f={meta['t_f']!r} is not a real number") from None
    out = HeckeTable(table.label, "maass-gl2", t_f, table.values, validate=False)
    object.__setattr__(out, "_multiplicative", True)
    return out


# ---------------------------------------------------------------------------
# Dirichlet-series identities


@dataclass
class IdentityCheck:
    which: str
    s: complex
    N: int
    method: str
    residual: float
    tail_bound: float
    lhs: complex
    rhs: complex
    passed: bool
    candidates: dict = field(default_factory=dict)
    resolved: str | None = None

    def to_dict(self) -> dict:
        out = {"identity": self.which, "s": [self.s.real, self.s.imag], "N": self.N,
               "method": self.method, "residual": self.residual, "tail_bound": self.tail_bound,
               "lhs": [self.lhs.real, self.lhs.imag], "rhs": [self.rhs.real, self.rhs.imag],
               "passed": self.passed}
        if self.candidates:
            out["candidates"] = self.candidates
            out["resolved_normalization"] = self.resolved
        return out


def _prod_err(vals, errs) -> float:
    """Bound for |prod a_j - prod b_j| given |a_j - b_j| <= errs_j, b_j = vals_j."""
    return math.prod(abs(v) + e for v, e in zip(vals, errs)) - math.prod(abs(v) for v in vals)


def _single_lhs(B1, s, N, k, growth, method):
    """sum_{n} B(1, n) n^(-s) and its certified truncation error."""
    sig = s.real - growth
    if method == "euler":
        return _euler(B1[1:], s, N), arith.euler_tail_bound(k, N, sig)
    n = np.arange(1, N + 1, dtype=float)
    return pairwise_sum(B1[1 : N + 1] * np.exp(-s * np.log(n))), arith.divisor_tail_bound(k, N, sig)


def _local_bound_k(kb: int, emax: int = 64) -> int:
    """Smallest K with |c(p^e)| <= d_K(p^e) for the g x E coefficients, e <= emax.

    c(p^e) = sum_{a + 2b = e} lambda_g(p^a) conj B(p^b, p^a) with
    |lambda_g(p^a)| <= a + 1 and |B(1, p^a)|, |B(p^a, 1)| <= d_kb(p^a).
    The bound grows like e^(2 kb) / const, so K = 2 kb + 1 suffices for
    large e; the explicit check covers small e.
    """
    D = [math.comb(a + kb - 1, kb - 1) for a in range(emax + 1)]
    beta = []
    for e in range(emax + 1):
        tot = 0
        for b in range(e // 2 + 1):
            a = e - 2 * b
            tot += (a + 1) * (D[b] * D[a] + (D[b - 1] * D[a - 1] if a and b else 0))
        beta.append(tot)
    K = 2 * kb
    while any(beta[e] > math.comb(e + K - 1, K - 1) for e in range(emax + 1)):
        K += 1
    return K


def _g_lhs(B1, lam, s, N, growth, kb, method, workers):
    """sum_{m, n} lambda_g(n) conj B(m, n) (n m^2)^(-s) and its truncation error."""
    K = _local_bound_k(kb)
    sig = s.real - growth
    if method == "euler":
        primes = arith.primes_upto(N)
        big = primes[primes * primes > N]
        logs = list(np.log1p(lam[big] * np.conj(B1[big]) * np.exp(-s * np.log(big.astype(float)))))
        for p in primes[primes * primes <= N]:
            p = int(p)
            E = int(math.floor(math.log(N) / math.log(p) + 1e-12))
            while p ** (E + 1) <= N:
                E += 1
            while p**E > N:
                E -= 1
            Bp = [complex(B1[p**r]) for r in range(E + 1)]
            Bm = [b.conjugate() for b in Bp]
            local = 0j
            for e in range(E + 1):
                c = 0j
                for b in range(e // 2 + 1):
                    a = e - 2 * b
                    B = Bm[b] * Bp[a] - (Bm[b - 1] * Bp[a - 1] if a and b else 0)
                    c += lam[p**a] * B.conjugate()
                local += c * complex(p) ** (-e * s)
            logs.append(np.log(local))
        logs = np.asarray(logs, dtype=complex)
        value = complex(np.exp(math.fsum(logs.real) + 1j * math.fsum(logs.imag)))
        return value, arith.euler_tail_bound(K, N, sig)
    pw = np.zeros(N + 1, dtype=complex)
    pw[1:] = np.exp(-s * np.log(np.arange(1, N + 1, dtype=float)))
    cB = np.conj(B1)

    def row(m):
        out = 0j
        for d in arith.divisors(m):
            md = arith.mobius(d)
            kmax = N // (m * m * d)
            if md == 0 or kmax < 1:
                continue
            k = np.arange(1, kmax + 1)
            out += md * B1[m // d] * pairwise_sum(lam[d * k] * cB[k] * pw[d * k])
        return out * complex(m) ** (-2 * s)

    ms = list(range(1, math.isqrt(N) + 1))
    value = pairwise_sum(np.array(ordered_map(row, ms, workers), dtype=complex))
    return complex(value), arith.divisor_tail_bound(K, N, sig)


def _series(table: HeckeTable, s, tol):
    v = dirichlet_eval(table, s, SeriesAccuracy(target_tol=math.inf if tol is None else tol))
    return v.value, v.tail_bound


def _finish(which, s, N, method, results, tol):
    """Collapse per-candidate (lhs, rhs, tail) into an IdentityCheck."""
    cands = {}
    for label, (lhs, rhs, tail) in results.items():
        resid = abs(lhs - rhs)
        bound = tail + 1e-13 * (abs(lhs) + abs(rhs))
        cands[label] = {"residual": resid, "tail_bound": bound, "passed": bool(resid <= bound)}
    passing = [k for k, v in cands.items() if v["passed"]]
    resolved = passing[0] if len(passing) == 1 else None
    key = resolved or next(iter(results))
    lhs, rhs, _ = results[key]
    c = cands[key]
    if not math.isfinite(c["tail_bound"]) or (tol is not None and c["tail_bound"] > tol):
        raise AccuracyError(f"{which}: certified bound {c['tail_bound']:.3e} above {tol:.1e} at N={N}",
                            achieved=c["tail_bound"])
    out = IdentityCheck(which, s, N, method, c["residual"], c["tail_bound"], complex(lhs),
                        complex(rhs), c["passed"])
    if len(results) > 1:
        out.candidates, out.resolved = cands, resolved
    return out


def check_identity(which: str, e, s=3.0, N: int = 10**4, g: HeckeTable | None = None,
                   method: str = "euler", tol: float | None = None, workers=None) -> IdentityCheck:
    """|LHS truncated at N - RHS product| for one of the four factorisations.

    Emin:  sum B_min(1, m) m^-s = zeta(s + mu_1) zeta(s + mu_2) zeta(s + mu_3)
    Emax:  sum B_max(1, m) m^-s = zeta(s - 2u) L(s + u, f)
    gEmin: sum lambda_g(n) conj B_min(m, n) (n m^2)^-s = prod_j L(s - mu_j, g)
    gEmax: sum lambda_g(n) conj B_max(m, n) (n m^2)^-s = L(s + 2u, g) L(s - u, g x f)

    ``method`` "euler" truncates the Euler product at prime powers <= N,
    "partial" sums the terms with m (resp. n m^2) <= N. For Emax both d2
    exponent conventions are evaluated, for gEmax both conventions times both
    GL(2) x GL(2) normalisations; ``resolved`` names the single one that
    passes, if exactly one does. A candidate passes when its residual is
    within the certified truncation bound. With ``tol`` set, a bound above
    ``tol`` raises AccuracyError.
    """
    if which not in IDENTITIES:
        raise ValidationError(f"identity must be one of {IDENTITIES}")
    if method not in ("euler", "partial"):
        raise ValidationError("method must be 'euler' or 'partial'")
    s = complex(s)
    N = int(N)
    if s.real < 3:
        raise ValidationError(f"identity checks need Re s >= 3, got {s}")
    if N < 2:
        raise ValidationError("N must be at least 2")
    if which.startswith("g"):
        if g is None:
            raise ConfigurationError(f"{which} needs a holomorphic g table")
        if g.N < N:
            raise ValidationError(f"g table has {g.N} coefficients, need {N}")
        lam = np.concatenate([[0], g.values[:N]])
    results = {}
    if which == "Emin":
        lhs, tail = _single_lhs(e.coefficients(N), s, N, 3, e.growth, method)
        rhs = math.prod(zeta(s + m) for m in e.mu)
        results["literal"] = (lhs, rhs, tail + 1e-14 * abs(rhs))
    elif which == "gEmin":
        lhs, tail = _g_lhs(e.coefficients(N), lam, s, N, e.growth, 3, method, workers)
        parts = [_series(g, s - m, tol) for m in e.mu]
        rhs = math.prod(v for v, _ in parts)
        results["literal"] = (lhs, rhs, tail + _prod_err([v for v, _ in parts], [t for _, t in parts]))
    elif which == "Emax":
        L, lt = _series(e.f, s + e.u, tol)
        z = zeta(s - 2 * e.u)
        rhs = z * L
        rerr = _prod_err([z, L], [1e-14 * abs(z), lt])
        for conv in D2_CONVENTIONS:
            ec = e.with_d2(conv)
            lhs, tail = _single_lhs(ec.coefficients(N), s, N, ec.bound_k, ec.growth, method)
            results[conv] = (lhs, rhs, tail + rerr)
    else:
        Lg, gt = _series(g, s + 2 * e.u, tol)
        for conv in D2_CONVENTIONS:
            ec = e.with_d2(conv)
            lhs, tail = _g_lhs(ec.coefficients(N), lam, s, N, ec.growth, ec.bound_k, method, workers)
            for norm in NORMALIZATIONS:
                rs = rankin_selberg_series(g, e.f, s - e.u, norm, SeriesAccuracy(target_tol=math.inf if tol is None else tol))
                rhs = Lg * rs.value
                results[f"{conv}/{norm}"] = (lhs, rhs, tail + _prod_err([Lg, rs.value], [gt, rs.tail_bound]))
    return _finish(which, s, N, method, results, tol)
