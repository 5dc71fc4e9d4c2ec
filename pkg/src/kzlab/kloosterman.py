"""The two GL(3) Kloosterman sums, the Ramanujan sum, and a vectorised
CRT-based evaluator.

Every phase is a rational with denominator dividing D2 (tilde sum) or
D1 D2 (big sum). The fast path reduces phases to integer numerators,
accumulates an integer histogram and converts to a complex value once,
so its output does not depend on the worker count or chunk order.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import arith
from ._numeric import CHUNK, ordered_map
from .errors import BudgetError, ValidationError

DEFAULT_BUDGET = 10**9


class Variant(str, enum.Enum):
    TILDE = "tilde"
    BIG = "big"


@dataclass(frozen=True)
class KloostermanQuery:
    """Indices and moduli; ``indices`` is (n1, n2, m1) or (n1, m2, m1, n2)."""

    variant: Variant
    indices: tuple
    D1: int
    D2: int

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        want = 3 if self.variant is Variant.TILDE else 4
        if len(idx) != want:
            raise ValidationError(f"{self.variant.value} sum needs {want} indices, got {len(idx)}")
        if int(self.D1) < 1 or int(self.D2) < 1:
            raise ValidationError("moduli must be positive integers")
        if self.variant is Variant.TILDE and self.D2 % self.D1:
            raise ValidationError(f"tilde sum needs D1 | D2, got D1={self.D1}, D2={self.D2}")


@dataclass(frozen=True)
class KloostermanValue:
    value: complex
    terms_enumerated: int
    method: str


def _e(x) -> complex:
    return cmath.exp(2j * math.pi * x)


def _fsum_complex(terms) -> complex:
    terms = list(terms)
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


def _inverse(a: int, m: int) -> int:
    if m == 1:
        return 0
    return pow(a, -1, m)


def bezout(B: int, C: int, D: int):
    """(Y, Z) with B Y + C Z = 1 mod D, assuming gcd(B, C, D) = 1."""
    if D == 1:
        return 0, 0
    g, x, y = _ext_gcd(B, C)
    if math.gcd(g, D) != 1:
        raise ValidationError(f"gcd(B, C, D) != 1 for B={B}, C={C}, D={D}")
    ginv = pow(g % D, -1, D)
    return (x * ginv) % D, (y * ginv) % D


def _ext_gcd(a: int, b: int):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _triple_coprime(B: int, C: int, D: int) -> bool:
    return math.gcd(math.gcd(B, C), D) == 1


# ---------------------------------------------------------------------------
# Reference evaluators: literal definitions, Python loops


def kloosterman_tilde(n1: int, n2: int, m1: int, D1: int, D2: int) -> KloostermanValue:
    """Brute-force tilde sum over C1 mod D1, C2 mod D2 as in its definition."""
    KloostermanQuery(Variant.TILDE, (n1, n2, m1), D1, D2)
    Q = D2 // D1
    terms = []
    for C1 in range(D1):
        if math.gcd(C1, D1) != 1:
            continue
        C1bar = _inverse(C1, D1)
        for C2 in range(D2):
            if math.gcd(C2, Q) != 1:
                continue
            C2bar = _inverse(C2, Q)
            a = (n2 * C1bar * C2 + n1 * C1) % D1
            b = (m1 * C2bar) % Q
            terms.append(_e(a / D1 + b / Q))
    return KloostermanValue(_fsum_complex(terms), len(terms), "brute")


def _big_terms(D1: int, D2: int, resample=None):
    """Residue data (B1, C1, B2, C2, Y1, Z1, Y2, Z2) of the big sum."""
    out = []
    for B1 in range(D1):
        for C1 in range(D1):
            if not _triple_coprime(B1, C1, D1):
                continue
            Y1, Z1 = bezout(B1, C1, D1)
            for B2 in range(D2):
                s = B1 * B2 + D2 * C1
                if s % D1:
                    continue
                C2 = (-(s // D1)) % D2
                if not _triple_coprime(B2, C2, D2):
                    continue
                Y2, Z2 = bezout(B2, C2, D2)
                if resample is not None:
                    Y1, Z1 = _perturb(B1, C1, D1, Y1, Z1, resample)
                    Y2, Z2 = _perturb(B2, C2, D2, Y2, Z2, resample)
                out.append((B1, C1, B2, C2, Y1, Z1, Y2, Z2))
    return out


def _perturb(B, C, D, Y, Z, rng):
    """Another solution of B Y + C Z = 1 mod D (not reduced mod D)."""
    t, a, b = (int(v) for v in rng.integers(-5, 6, 3))
    Y2, Z2 = Y + t * C + a * D, Z - t * B + b * D
    # B u = 0 mod D is solved by any multiple of D / gcd(B, D); same for C
    Y2 += int(rng.integers(0, 7)) * (D // math.gcd(B, D))
    Z2 += int(rng.integers(0, 7)) * (D // math.gcd(C, D))
    assert (B * Y2 + C * Z2 - 1) % D == 0
    return Y2, Z2


def kloosterman_big(n1: int, m2: int, m1: int, n2: int, D1: int, D2: int,
                    resample_seed=None) -> KloostermanValue:
    """Brute-force big sum.

    The congruence D1 C2 + B1 B2 + D2 C1 = 0 mod D1 D2 is solved for C2
    given (B1, C1, B2). Residues are taken in [0, D). With
    ``resample_seed`` every Bezout pair (Y_j, Z_j) is replaced by a
    randomly shifted solution, which must not change the value.
    """
    KloostermanQuery(Variant.BIG, (n1, m2, m1, n2), D1, D2)
    rng = None if resample_seed is None else np.random.default_rng(resample_seed)
    terms = []
    for B1, C1, B2, C2, Y1, Z1, Y2, Z2 in _big_terms(D1, D2, rng):
        a = (n1 * B1 + m1 * (Y1 * D2 - Z1 * B2)) % D1
        b = (m2 * B2 + n2 * (Y2 * D1 - Z2 * B1)) % D2
        terms.append(_e(a / D1 + b / D2))
    return KloostermanValue(_fsum_complex(terms), len(terms), "brute")


def ramanujan_sum(m: int, D: int) -> int:
    """c_D(m) from the closed form mu(D/g) phi(D) / phi(D/g), g = gcd(m, D)."""
    if D < 1:
        raise ValidationError("ramanujan_sum needs D >= 1")
    g = math.gcd(m, D)
    return arith.mobius(D // g) * arith.euler_phi(D) // arith.euler_phi(D // g)


def ramanujan_sum_enumerated(m: int, D: int) -> complex:
    return _fsum_complex(_e((a * m % D) / D) for a in range(D) if math.gcd(a, D) == 1)


# ---------------------------------------------------------------------------
# Fast path: CRT residue systems, vectorised enumeration, integer histograms


@lru_cache(maxsize=256)
def _residue_system(D: int, Q: int):
    """Residues C mod D with gcd(C, Q) = 1 (Q | D), built by CRT.

    D = prod p^a; for each prime power the admissible residues are all of
    Z/p^a if p does not divide Q, else its units. The CRT product of the
    local systems is mapped back to [0, D). Returns the residues sorted.
    """
    if D == 1:
        arr = np.zeros(1, dtype=np.int64)
    else:
        arr = np.zeros(1, dtype=np.int64)
        mod = 1
        for p, a in sorted(arith.factorize(D).items()):
            q = p**a
            local = np.arange(q, dtype=np.int64)
            if Q % p == 0:
                local = local[local % p != 0]
            # x = arr mod `mod`, x = local mod q
            inv = pow(mod, -1, q)
            t = ((local[None, :] - arr[:, None]) % q) * inv % q
            arr = (arr[:, None] + mod * t).ravel()
            mod *= q
        arr = np.sort(arr)
    arr.setflags(write=False)
    return arr


def _inverse_table(residues: np.ndarray, m: int) -> np.ndarray:
    if m == 1:
        return np.zeros(len(residues), dtype=np.int64)
    units = _residue_system(m, m)
    inv = np.empty(m, dtype=np.int64)
    for u in units.tolist():
        inv[u] = pow(u, -1, m)
    return inv[residues % m]


def _histogram_to_value(hist: np.ndarray, D: int) -> complex:
    r = np.nonzero(hist)[0]
    if len(r) == 0:
        return 0j
    # exact reduction first: r / D with r < D, then one exponential per class
    ang = 2 * np.pi * r / D
    w = hist[r].astype(float)
    return complex(math.fsum(w * np.cos(ang)), math.fsum(w * np.sin(ang)))


def _check_budget(terms: int, budget: int):
    if terms > budget:
        raise BudgetError(f"enumeration needs {terms} terms, budget is {budget}")


def _tilde_fast(n1, n2, m1, D1, D2, workers, budget):
    Q = D2 // D1
    C1 = _residue_system(D1, D1)
    C2 = _residue_system(D2, Q)
    _check_budget(len(C1) * len(C2), budget)
    C1bar = _inverse_table(C1, D1)
    C2bar = _inverse_table(C2, Q)
    # numerator over D2: (n2 C1bar C2 + n1 C1) Q + m1 C2bar D1
    part2 = (m1 % Q) * C2bar % max(Q, 1) * D1 if Q > 1 else np.zeros(len(C2), dtype=np.int64)
    C2mod = C2 % D1
    n1r, n2r = n1 % D1, n2 % D1

    def block(sl):
        a = (n2r * C1bar[sl] % D1)[:, None] * C2mod[None, :] % D1
        a = (a + (n1r * C1[sl] % D1)[:, None]) % D1
        num = (a * Q + part2[None, :]) % D2
        return np.bincount(num.ravel(), minlength=D2)

    hist = _reduce_hist(block, len(C1), workers)
    return _histogram_to_value(hist, D2), len(C1) * len(C2)


def _reduce_hist(block, n, workers):
    slices = [slice(i, min(i + CHUNK, n)) for i in range(0, n, CHUNK)]
    parts = ordered_map(block, slices, workers if n > 4 * CHUNK else 1)
    out = parts[0].astype(np.int64)
    for p in parts[1:]:
        out = out + p
    return out


def _ext_gcd_vec(a: np.ndarray, b: np.ndarray):
    """Vectorised extended Euclid: g, x, y with a x + b y = g."""
    a, b = a.astype(np.int64).copy(), b.astype(np.int64).copy()
    x0, y0 = np.ones_like(a), np.zeros_like(a)
    x1, y1 = np.zeros_like(a), np.ones_like(a)
    while np.any(b):
        nz = b != 0
        q = np.zeros_like(a)
        q[nz] = a[nz] // b[nz]
        r = np.where(nz, a - q * b, 0)
        a, b = np.where(nz, b, a), r
        x0, x1 = np.where(nz, x1, x0), np.where(nz, x0 - q * x1, x1)
        y0, y1 = np.where(nz, y1, y0), np.where(nz, y0 - q * y1, y1)
    return a, x0, y0


@lru_cache(maxsize=128)
def _bezout_table(D: int):
    """Y[B, C], Z[B, C] mod D for all triple-coprime (B, C); -1 marks invalid pairs."""
    B, C = np.meshgrid(np.arange(D, dtype=np.int64), np.arange(D, dtype=np.int64), indexing="ij")
    g, x, y = _ext_gcd_vec(B.ravel(), C.ravel())
    g = g.reshape(D, D)
    x, y = x.reshape(D, D), y.reshape(D, D)
    valid = np.gcd(g, D) == 1
    Y = np.full((D, D), -1, dtype=np.int64)
    Z = np.full((D, D), -1, dtype=np.int64)
    if D == 1:
        Y[:] = 0
        Z[:] = 0
        return Y, Z, valid
    for gv in np.unique(g[valid]).tolist():
        ginv = pow(int(gv) % D, -1, D)
        sel = valid & (g == gv)
        Y[sel] = x[sel] % D * ginv % D
        Z[sel] = y[sel] % D * ginv % D
    return Y, Z, valid


def _big_fast(n1, m2, m1, n2, D1, D2, workers, budget):
    _check_budget(D1 * D1 * D2, budget)
    Y1t, Z1t, ok1 = _bezout_table(D1)
    Y2t, Z2t, ok2 = _bezout_table(D2)
    pairs = np.argwhere(ok1)  # (B1, C1) rows in lexicographic order
    Dp = D1 * D2
    B2 = np.arange(D2, dtype=np.int64)

    def block(sl):
        B1 = pairs[sl, 0][:, None]
        C1 = pairs[sl, 1][:, None]
        s = B1 * B2[None, :] + D2 * C1
        keep = s % D1 == 0
        C2 = (-(s // D1)) % D2
        bb = np.broadcast_to(B2[None, :], C2.shape)
        keep &= ok2[bb, C2]
        Y1 = Y1t[pairs[sl, 0], pairs[sl, 1]][:, None]
        Z1 = Z1t[pairs[sl, 0], pairs[sl, 1]][:, None]
        Y2 = Y2t[bb, C2]
        Z2 = Z2t[bb, C2]
        a = (n1 * B1 + m1 * (Y1 * D2 - Z1 * bb)) % D1
        b = (m2 * bb + n2 * (Y2 * D1 - Z2 * B1)) % D2
        num = (a * D2 + b * D1) % Dp
        return np.bincount(num[keep], minlength=Dp), int(keep.sum())

    slices = [slice(i, min(i + CHUNK, len(pairs))) for i in range(0, len(pairs), CHUNK)]
    parts = ordered_map(block, slices, workers if len(pairs) > 4 * CHUNK else 1)
    hist = np.zeros(Dp, dtype=np.int64)
    terms = 0
    for h, t in parts:
        hist += h
        terms += t
    return _histogram_to_value(hist, Dp), terms


def kloosterman_fast(query: KloostermanQuery, workers=None, budget: int = DEFAULT_BUDGET) -> KloostermanValue:
    """Vectorised evaluation over CRT-built residue systems.

    Chunks of CHUNK rows are enumerated independently (optionally on
    several workers) and combined as exact integer histograms of phase
    numerators, so the result is bit-identical for any worker count.
    """
    if query.variant is Variant.TILDE:
        n1, n2, m1 = query.indices
        value, terms = _tilde_fast(n1, n2, m1, query.D1, query.D2, workers, budget)
    else:
        n1, m2, m1, n2 = query.indices
        value, terms = _big_fast(n1, m2, m1, n2, query.D1, query.D2, workers, budget)
    return KloostermanValue(value, terms, "crt")


def evaluate(query: KloostermanQuery, method: str = "crt", workers=None,
             budget: int = DEFAULT_BUDGET) -> KloostermanValue:
    if method == "crt":
        return kloosterman_fast(query, workers, budget)
    if method != "brute":
        raise ValidationError(f"unknown method {method!r}")
    if query.variant is Variant.TILDE:
        return kloosterman_tilde(*query.indices, query.D1, query.D2)
    return kloosterman_big(*query.indices, query.D1, query.D2)
