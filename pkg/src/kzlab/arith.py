"""Elementary multiplicative number theory on ranges 1..N (numpy sieves)."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=8)
def smallest_prime_factor(N: int) -> np.ndarray:
    spf = np.zeros(N + 1, dtype=np.int64)
    if N >= 1:
        spf[1] = 1
    for p in range(2, N + 1):
        if spf[p] == 0:
            spf[p] = p
            if p * p <= N:
                block = spf[p * p :: p]
                block[block == 0] = p
    spf.setflags(write=False)
    return spf


@lru_cache(maxsize=8)
def prime_power_part(N: int) -> np.ndarray:
    """pp[n] = p^a where p = spf(n) and p^a || n (pp[1] = 1)."""
    spf = smallest_prime_factor(N)
    pp = np.ones(N + 1, dtype=np.int64)
    for n in range(2, N + 1):
        p = spf[n]
        m = n // p
        pp[n] = pp[m] * p if m > 1 and spf[m] == p else p
    pp.setflags(write=False)
    return pp


def factorize(n: int) -> dict:
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def euler_phi(n: int) -> int:
    out = n
    for p in factorize(n):
        out = out // p * (p - 1)
    return out


@lru_cache(maxsize=8)
def mobius_table(N: int) -> np.ndarray:
    mu = np.ones(N + 1, dtype=np.int64)
    mu[0] = 0
    is_comp = np.zeros(N + 1, dtype=bool)
    for p in range(2, N + 1):
        if not is_comp[p]:
            is_comp[2 * p :: p] = True
            mu[p::p] *= -1
            mu[p * p :: p * p] = 0
    mu.setflags(write=False)
    return mu


def divisors(n: int):
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def dirichlet_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a * b)[n] = sum_{de=n} a[d] b[e] for arrays indexed from 1 (index 0 ignored)."""
    N = len(a) - 1
    out = np.zeros(N + 1, dtype=np.result_type(a, b))
    for d in range(1, N + 1):
        if a[d] != 0:
            out[d::d] += a[d] * b[1 : N // d + 1]
    return out


@lru_cache(maxsize=16)
def divisor_count_k(k: int, N: int) -> np.ndarray:
    """d_k(n) for n <= N."""
    one = np.ones(N + 1, dtype=np.int64)
    one[0] = 0
    out = one.copy()
    for _ in range(k - 1):
        out = dirichlet_convolve(out, one)
    out.setflags(write=False)
    return out


def divisor_summatory(N: int) -> int:
    """sum_{n <= N} d(n), exactly, by the hyperbola method."""
    r = math.isqrt(N)
    return 2 * sum(N // d for d in range(1, r + 1)) - r * r


@lru_cache(maxsize=16)
def _summatory_poly(k: int):
    """Coefficients of Q_k with sum_{n<=x} d_k(n) <= x Q_k(1 + log x).

    Q_1 = 1 and Q_k(l) = Q_{k-1}(l) + int_1^l Q_{k-1}, from
    S_k(x) = sum_{d<=x} S_{k-1}(x/d) and comparison with an integral
    (Q_{k-1} is increasing on l >= 1).
    """
    q = np.polynomial.Polynomial([1.0])
    for _ in range(k - 1):
        integ = q.integ()
        q = q + integ - integ(1.0)
    return tuple(q.coef)


def divisor_tail_bound(k: int, N: int, sigma: float) -> float:
    """Upper bound for sum_{n > N} d_k(n) n^(-sigma), sigma > 1.

    Partial summation gives -S(N) N^(-sigma) + sigma int_N^inf S(x)
    x^(-sigma-1) dx with S(x) <= x Q_k(1 + log x); the integral is done in
    closed form by repeated integration by parts. S(N) is used exactly for
    k = 2 and bounded below by 0 for k > 2; k = 1 is the integral test.
    """
    if sigma <= 1:
        return math.inf
    if N < 1:
        from .special import zeta

        return abs(zeta(sigma)) ** k
    a = sigma - 1.0
    if k == 1:
        return N ** (-a) / a
    L = math.log(N)
    base = math.exp(-a * L) / a
    # I_j = int_N^inf (1 + log x)^j x^(-sigma) dx
    integral = base
    total = 0.0
    coef = _summatory_poly(k)
    total += coef[0] * integral
    for j in range(1, len(coef)):
        integral = base * (1 + L) ** j + (j / a) * integral
        total += coef[j] * integral
    bound = sigma * total
    if k == 2:
        bound -= divisor_summatory(N) * N ** (-sigma)
    return bound


@lru_cache(maxsize=8)
def primes_upto(N: int) -> np.ndarray:
    if N < 2:
        return np.zeros(0, dtype=np.int64)
    spf = smallest_prime_factor(N)
    n = np.arange(N + 1)
    return n[(spf == n) & (n >= 2)]


def euler_tail_bound(k: int, N: int, sigma: float) -> float:
    """Worst-case error of the truncated Euler product prod_{p<=N} A_p.

    A_p = sum_{p^r <= N} c(p^r) p^(-r s) for a multiplicative c with
    |c(n)| <= d_k(n). With B_p = (1 - p^-sigma)^-k and e_p the omitted
    part of B_p, the error is at most prod_p B_p - prod_p (B_p - e_p), i.e.
    the d_k-weighted sum over n having some prime-power part above N.
    """
    if sigma <= 1:
        return math.inf
    from .special import zeta

    primes = primes_upto(N).astype(float)
    x = primes ** (-sigma)
    # tau = -sum_{p > N} log(1 - p^-sigma)
    tau = math.log(zeta(sigma).real) + math.fsum(np.log1p(-x))
    logs = []
    for p, xp in zip(primes, x):
        rmax = int(math.floor(math.log(N) / math.log(p) + 1e-12))
        while p ** (rmax + 1) <= N:
            rmax += 1
        while p**rmax > N:
            rmax -= 1
        # omitted part sum_{r > rmax} C(r+k-1, k-1) x^r, relative to B_p
        e = 0.0
        r = rmax + 1
        term = math.comb(r + k - 1, k - 1) * xp**r
        while term > 1e-30 * max(e, 1e-300):
            e += term
            r += 1
            term = math.comb(r + k - 1, k - 1) * xp**r
            if r > rmax + 200:
                break
        logs.append(math.log1p(-e * (1 - xp) ** k))
    total = math.fsum(logs) - k * tau
    return abs(zeta(sigma).real) ** k * -math.expm1(total)
