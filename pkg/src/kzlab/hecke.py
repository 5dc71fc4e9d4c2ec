"""Hecke eigenvalue tables, level-one holomorphic eigenforms from
q-expansions, and certified Dirichlet-series evaluation for Re s >= 2.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import gmpy2
import numpy as np

from . import arith
from .errors import AccuracyError, UnsupportedError, ValidationError
from .special import zeta

KINDS = ("holomorphic", "maass-gl2", "synthetic")
# Weights k with dim S_k(SL(2, Z)) = 1, and the Eisenstein factor E_{k-12}.
ONE_DIMENSIONAL = (12, 16, 18, 20, 22, 26)


@dataclass(frozen=True, eq=False)
class HeckeTable:
    """Analytically normalised coefficients lambda(n), n = 1..N.

    ``values[n - 1]`` holds lambda(n). Construction validates the table.
    """

    label: str
    kind: str
    weight_or_spectral: float
    values: np.ndarray
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown table kind {self.kind!r}")
        vals = np.array(self.values, dtype=complex)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.validate:
            bad = first_violation(self)
            if bad is not None:
                raise ValidationError(bad)
        object.__setattr__(self, "_multiplicative", bool(self.validate))

    @property
    def multiplicative(self) -> bool:
        """Whether the table was validated as a Hecke (multiplicative) sequence."""
        return self._multiplicative

    @property
    def N(self) -> int:
        return len(self.values)

    def __getitem__(self, n: int) -> complex:
        return self.values[n - 1]

    @property
    def is_real(self) -> bool:
        return bool(np.all(np.abs(self.values.imag) < 1e-13))

    @property
    def deligne(self) -> bool:
        """True when |lambda(n)| <= d(n) for every stored n."""
        d = arith.divisor_count_k(2, self.N)[1:]
        return bool(np.all(np.abs(self.values) <= d * (1 + 1e-9) + 1e-12))

    @property
    def bound_class(self):
        """1 if |lambda(n)| <= 1, 2 if |lambda(n)| <= d(n), None otherwise."""
        if np.all(np.abs(self.values) <= 1 + 1e-12):
            return 1
        return 2 if self.deligne else None

    def scaled(self, c) -> "HeckeTable":
        """Coefficients multiplied by c (not a Hecke table any more; unvalidated)."""
        return HeckeTable(self.label + f"*{c}", self.kind, self.weight_or_spectral,
                          self.values * c, validate=False)

    def truncated(self, N: int) -> "HeckeTable":
        out = HeckeTable(self.label, self.kind, self.weight_or_spectral,
                         self.values[:N], validate=False)
        object.__setattr__(out, "_multiplicative", self.multiplicative)
        return out


def first_violation(table: HeckeTable, rtol: float = 1e-10):
    """Describe the first violated Hecke relation, or return None."""
    lam = np.concatenate([[0], table.values])
    N = table.N
    if N == 0:
        return "empty table"
    if abs(lam[1] - 1) > rtol:
        return f"lambda(1) = {lam[1]} != 1 (n=1)"
    if N < 2:
        return None
    spf = arith.smallest_prime_factor(N)
    pp = arith.prime_power_part(N)
    n = np.arange(2, N + 1)
    q = pp[2:]
    composite = q != n
    m = n // q
    want = lam[q] * lam[m]
    scale = np.maximum(1.0, np.maximum(np.abs(lam[n]), np.abs(want)))
    bad_mult = composite & (np.abs(lam[n] - want) > rtol * scale)
    bad_hecke = np.zeros_like(bad_mult)
    if table.kind == "holomorphic":
        p = spf[2:]
        higher = ~composite & (q != p)
        want_h = lam[p] * lam[n // p] - lam[np.where(higher, n // (p * p), 0)]
        bad_hecke = higher & (np.abs(lam[n] - want_h) > rtol * np.maximum(1.0, np.abs(lam[n])))
    bad = bad_mult | bad_hecke
    if not bad.any():
        return None
    i = int(np.argmax(bad))
    nn, qq = int(n[i]), int(q[i])
    if bad_mult[i]:
        return (f"multiplicativity fails at n={nn}: lambda({nn})={lam[nn]} but "
                f"lambda({qq})lambda({nn // qq})={want[i]}")
    return f"Hecke recursion fails at n={nn}"


# ---------------------------------------------------------------------------
# q-expansions with exact integer coefficients (Kronecker substitution)


def series_mul(a, b, N):
    """Product of two integer power series truncated after q^N.

    Kronecker substitution: each series is packed into one big integer
    with fixed-width slots (positive and negative parts separately),
    multiplied once, and unpacked with a per-slot offset that restores
    signed coefficients.
    """
    a, b = a[: N + 1], b[: N + 1]
    bits = max(abs(x) for x in a).bit_length() + max(abs(x) for x in b).bit_length()
    w = bits + (N + 1).bit_length() + 2

    def pack(c):
        return gmpy2.pack([max(x, 0) for x in c], w) - gmpy2.pack([max(-x, 0) for x in c], w)

    prod = pack(a) * pack(b)
    total = w * (N + 1)
    half = gmpy2.mpz(1) << (w - 1)
    offset = gmpy2.pack([half] * (N + 1), w)
    slots = gmpy2.unpack(gmpy2.f_mod_2exp(gmpy2.f_mod_2exp(prod, total) + offset, total), w)
    slots += [gmpy2.mpz(0)] * (N + 1 - len(slots))
    return [int(x - half) for x in slots[: N + 1]]


def divisor_sigma_list(k: int, N: int):
    """[0, sigma_k(1), ..., sigma_k(N)] as Python integers."""
    pp = arith.prime_power_part(N) if N >= 2 else np.ones(N + 1, dtype=np.int64)
    spf = arith.smallest_prime_factor(N) if N >= 2 else np.ones(N + 1, dtype=np.int64)
    sig = [0] * (N + 1)
    if N >= 1:
        sig[1] = 1
    for n in range(2, N + 1):
        q = int(pp[n])
        if q == n:
            p = int(spf[n])
            sig[n] = 1 + p**k * sig[n // p]
        else:
            sig[n] = sig[q] * sig[n // q]
    return sig


def eisenstein_series(k: int, N: int):
    """Integer q-expansion of E_4 or E_6 to O(q^(N+1))."""
    c = {4: 240, 6: -504}[k]
    sig = divisor_sigma_list(k - 1, N)
    return [1] + [c * s for s in sig[1:]]


@lru_cache(maxsize=8)
def cusp_form_coefficients(k: int, N: int):
    """Integer coefficients a(1..N) of the normalised eigenform in S_k(SL(2,Z))."""
    if k not in ONE_DIMENSIONAL:
        raise UnsupportedError(f"weight {k}: only one-dimensional S_k, k in {ONE_DIMENSIONAL}")
    E4 = eisenstein_series(4, N)
    E6 = eisenstein_series(6, N)
    E4sq = series_mul(E4, E4, N)
    E4cu = series_mul(E4sq, E4, N)
    E6sq = series_mul(E6, E6, N)
    delta = [(x - y) // 1728 for x, y in zip(E4cu, E6sq)]
    cofactor = {
        12: None,
        16: E4,
        18: E6,
        20: E4sq,
        22: lambda: series_mul(E4, E6, N),
        26: lambda: series_mul(E4sq, E6, N),
    }[k]
    if callable(cofactor):
        cofactor = cofactor()
    f = delta if cofactor is None else series_mul(delta, cofactor, N)
    return tuple(f[1:])


def delta_product_coefficients(N: int):
    """tau(1..N) from q prod (1 - q^n)^24 by direct series multiplication."""
    series = [1] + [0] * N
    for n in range(1, N + 1):
        for _ in range(24):
            for i in range(N, n - 1, -1):
                series[i] -= series[i - n]
    return tuple(series[: N])


def hecke_eigenvalues_holomorphic(k: int, N: int) -> HeckeTable:
    if N > 10**6:
        raise UnsupportedError("holomorphic tables are limited to N <= 10^6")
    a = cusp_form_coefficients(k, N)
    half = (k - 1) / 2
    lam = np.array([float(x) / n**half for n, x in enumerate(a, start=1)])
    return HeckeTable(f"holomorphic-k{k}", "holomorphic", float(k), lam)


def chebyshev_table(N: int, seed: int = 0, label: str | None = None) -> HeckeTable:
    """Synthetic multiplicative table with lambda(p^r) = U_r(x_p), x_p uniform in [-1, 1]."""
    rng = np.random.default_rng(seed)
    lam = np.zeros(N + 1)
    lam[1] = 1.0
    if N >= 2:
        spf = arith.smallest_prime_factor(N)
        pp = arith.prime_power_part(N)
        xs = {}
        for n in range(2, N + 1):
            q = int(pp[n])
            if q == n:
                p = int(spf[n])
                if p not in xs:
                    xs[p] = rng.uniform(-1.0, 1.0)
                x = xs[p]
                # U_r = 2x U_{r-1} - U_{r-2}
                if n == p:
                    lam[n] = 2 * x
                else:
                    lam[n] = 2 * x * lam[n // p] - lam[n // (p * p)]
            else:
                lam[n] = lam[q] * lam[n // q]
    return HeckeTable(label or f"chebyshev-seed{seed}", "synthetic", 0.0, lam[1:])


def constant_table(N: int) -> HeckeTable:
    return HeckeTable("constant-1", "synthetic", 0.0, np.ones(N))


def mobius_hecke_table(N: int) -> HeckeTable:
    return HeckeTable("mobius", "synthetic", 0.0, arith.mobius_table(N)[1:].astype(float))


# ---------------------------------------------------------------------------
# CSV interchange: header "n,re,im", optional "# t_f=<value>" comment line


def _parse_table_text(text: str, kind: str, label: str):
    meta = {}
    rows = []
    reader_lines = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            for item in s[1:].split(","):
                if "=" in item:
                    key, val = item.split("=", 1)
                    meta[key.strip()] = val.strip()
            continue
        reader_lines.append((lineno, s))
    if not reader_lines or [c.strip() for c in reader_lines[0][1].split(",")] != ["n", "re", "im"]:
        raise ValidationError("HeckeTable CSV must start with the header 'n,re,im'")
    for (lineno, s) in reader_lines[1:]:
        row = next(csv.reader(io.StringIO(s)))
        if len(row) != 3:
            raise ValidationError(f"line {lineno}: expected 3 fields, got {len(row)}")
        try:
            n, re_, im_ = int(row[0]), float(row[1]), float(row[2])
        except ValueError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
        if n != len(rows) + 1:
            raise ValidationError(f"line {lineno}: expected n={len(rows) + 1}, got n={n}")
        rows.append((lineno, complex(re_, im_)))
    if not rows:
        raise ValidationError("HeckeTable CSV has no data rows")
    values = np.array([v for _, v in rows])
    table = HeckeTable(label, kind, float(meta.get("t_f", meta.get("k", 0.0))), values, validate=False)
    bad = first_violation(table)
    if bad is not None:
        n_bad = _violation_index(bad)
        where = f" (row at line {rows[n_bad - 1][0]})" if n_bad else ""
        raise ValidationError(bad + where)
    return HeckeTable(label, kind, table.weight_or_spectral, values, validate=False), meta


def _violation_index(message: str):
    import re

    m = re.search(r"n=(\d+)", message)
    return int(m.group(1)) if m else None


def load_table(path, kind: str = "synthetic") -> HeckeTable:
    path = Path(path)
    table, _ = _parse_table_text(path.read_text(encoding="utf-8"), kind, path.stem)
    return table


def dump_table(table: HeckeTable, path, comment: str | None = None) -> None:
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append("n,re,im")
    for n, v in enumerate(table.values, start=1):
        lines.append(f"{n},{float(v.real)!r},{float(v.imag)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Dirichlet series


@dataclass(frozen=True)
class SeriesAccuracy:
    """Truncation point, certified tail bound and the tolerance it was held to."""

    N: int | None = None
    tail_bound: float = math.inf
    target_tol: float = 1e-10


@dataclass(frozen=True)
class SeriesValue:
    value: complex
    accuracy: SeriesAccuracy

    @property
    def tail_bound(self) -> float:
        return self.accuracy.tail_bound


def _sqrt_tail(N: int, sigma: float) -> float:
    # sum_{n > N} n^(1/2 - sigma) for sigma > 3/2
    if sigma <= 1.5:
        return math.inf
    return N ** (1.5 - sigma) / (sigma - 1.5) + N ** (0.5 - sigma)


def _series(coeffs, s, n_use):
    n = np.arange(1, n_use + 1, dtype=float)
    terms = coeffs[:n_use] * np.exp(-complex(s) * np.log(n))
    return complex(math.fsum(terms.real) + 1j * math.fsum(terms.imag))


def _euler(coeffs, s, n_use):
    """prod_{p <= N} sum_{p^r <= N} c(p^r) p^(-r s) for multiplicative c."""
    primes = arith.primes_upto(n_use)
    s = complex(s)
    local = np.ones(len(primes), dtype=complex)
    power = primes.copy()
    alive = np.ones(len(primes), dtype=bool)
    r = 1
    while alive.any():
        idx = np.nonzero(alive)[0]
        q = power[idx]
        local[idx] += coeffs[q - 1] * np.exp(-s * r * np.log(primes[idx].astype(float)))
        nxt = q * primes[idx]
        ok = nxt <= n_use
        alive[idx[~ok]] = False
        power[idx[ok]] = nxt[ok]
        r += 1
        if r > 64:
            break
    logs = np.log(local)
    return complex(np.exp(math.fsum(logs.real) + 1j * math.fsum(logs.imag)))


METHODS = ("auto", "euler", "partial")


def _evaluate(coeffs, s, N, kclass, multiplicative, method, tol, factor=1.0):
    """Shared engine: returns (value, certified error bound, method used)."""
    if method not in METHODS:
        raise ValidationError(f"unknown series method {method!r}")
    sigma = s.real
    if method == "auto":
        method = "euler" if multiplicative and kclass is not None else "partial"
    if method == "euler":
        if not multiplicative or kclass is None:
            raise ValidationError("Euler-product evaluation needs a validated, divisor-bounded table")
        tail = arith.euler_tail_bound(kclass, N, sigma) + 1e-13 * abs(zeta(sigma)) ** kclass
        value = _euler(coeffs, s, N)
    else:
        tail = arith.divisor_tail_bound(kclass, N, sigma) if kclass else _sqrt_tail(N, sigma)
        value = _series(coeffs, s, N)
    tail *= abs(factor)
    if not tail <= tol:
        raise AccuracyError(f"tail bound {tail:.3e} above target {tol:.1e} with N={N}", achieved=tail)
    return factor * value, tail, method


def dirichlet_eval(table: HeckeTable, s, acc: SeriesAccuracy | None = None,
                   method: str = "auto") -> SeriesValue:
    """sum lambda(n) n^(-s) for Re s >= 2 with a certified tail bound.

    Coefficients are bounded by 1 if every stored |lambda(n)| <= 1, by
    d(n) if the table meets that bound, and by n^(1/2) otherwise.

    ``partial`` sums n <= N and bounds the rest by the divisor-sum tail.
    ``euler`` (the default for validated multiplicative tables) takes
    prod_{p <= N} sum_{p^r <= N} lambda(p^r) p^(-rs), whose worst-case
    error is the much smaller d_k-mass of integers with a prime-power
    part above N.
    """
    acc = acc or SeriesAccuracy()
    s = complex(s)
    if s.real < 2:
        raise ValidationError(f"dirichlet_eval needs Re s >= 2, got {s}")
    N = table.N if acc.N is None else min(acc.N, table.N)
    value, tail, _ = _evaluate(table.values, s, N, table.bound_class, table.multiplicative,
                               method, acc.target_tol)
    return SeriesValue(value, SeriesAccuracy(N, tail, acc.target_tol))


def dirichlet_partial(table: HeckeTable, s, N: int) -> complex:
    return _series(table.values, s, min(N, table.N))


def rankin_selberg_series(tg: HeckeTable, tf: HeckeTable, s, normalization: str = "with-zeta2s",
                          acc: SeriesAccuracy | None = None, method: str = "auto") -> SeriesValue:
    """sum lambda_g(n) lambda_f(n) n^(-s), optionally times zeta(2s).

    The coefficients lambda_g(n) lambda_f(n) are multiplicative and bounded
    by d_a(n) d_b(n) <= d_(ab)(n) for the bound classes a, b of the tables.
    """
    if normalization not in ("with-zeta2s", "bare"):
        raise ValidationError(f"unknown normalization {normalization!r}")
    acc = acc or SeriesAccuracy()
    s = complex(s)
    if s.real < 2:
        raise ValidationError(f"rankin_selberg_series needs Re s >= 2, got {s}")
    N = min(tg.N, tf.N) if acc.N is None else min(acc.N, tg.N, tf.N)
    coeffs = tg.values[:N] * tf.values[:N]
    classes = (tg.bound_class, tf.bound_class)
    if None in classes:
        kclass = None
        # |lambda_g lambda_f| <= n, handled as the n^(1/2) bound at sigma - 1/2
        s_bound = s - 0.5
    else:
        kclass = classes[0] * classes[1]
        s_bound = s
    factor = zeta(2 * s) if normalization == "with-zeta2s" else 1.0
    multiplicative = tg.multiplicative and tf.multiplicative
    if kclass is None:
        if method == "euler":
            raise ValidationError("Euler-product evaluation needs divisor-bounded tables")
        tail = _sqrt_tail(N, s_bound.real) * abs(factor)
        if not tail <= acc.target_tol:
            raise AccuracyError(f"tail bound {tail:.3e} above target {acc.target_tol:.1e}", achieved=tail)
        value = factor * _series(coeffs, s, N)
    else:
        value, tail, _ = _evaluate(coeffs, s, N, kclass, multiplicative, method, acc.target_tol, factor)
    return SeriesValue(value, SeriesAccuracy(N, tail, acc.target_tol))
