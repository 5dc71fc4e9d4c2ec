"""Complex log-Gamma, the real Gamma factor and the Riemann zeta function.

Everything here is vectorised over numpy arrays. ``log_gamma`` is the
principal branch (real on the positive axis, analytic off ``(-inf, 0]``).
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError

LOG_2PI = math.log(2.0 * math.pi)
LOG_PI = math.log(math.pi)


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n with B_1 = -1/2."""
    b = [Fraction(1)]
    for m in range(1, n + 1):
        acc = Fraction(0)
        for k in range(m):
            acc += math.comb(m + 1, k) * b[k]
        b.append(-acc / (m + 1))
    return b[n]


# Stirling coefficients B_2m / (2m (2m-1)), m = 1..12.
_STIRLING = np.array(
    [float(bernoulli(2 * m) / (2 * m * (2 * m - 1))) for m in range(1, 13)]
)
# Below this modulus the argument is shifted upwards before Stirling is used.
_STIRLING_RADIUS = 10.0


def _check_gamma_poles(z, tol=1e-10):
    near = (z.real < 0.5) & (np.abs(z - np.round(z.real)) < tol)
    if np.any(near):
        bad = z[near].ravel()[0]
        raise DomainError(f"log_gamma: argument {bad} is within {tol} of a pole")


def _stirling(z):
    w = 1.0 / (z * z)
    series = np.zeros_like(z)
    for c in _STIRLING[::-1]:
        series = series * w + c
    return (z - 0.5) * np.log(z) - z + 0.5 * LOG_2PI + series / z


def log_gamma(z, *, check=True):
    """Principal branch of log Gamma(z).

    Arguments with modulus below 10 (or negative real part) are moved right
    with ``log Gamma(z) = log Gamma(z + n) - sum log(z + k)``; every
    principal ``log(z + k)`` has its cut on the negative real axis, so the
    result is the principal branch everywhere.
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if check:
        _check_gamma_poles(z)
    small = np.abs(z.imag) < _STIRLING_RADIUS
    shift = np.zeros(z.shape, dtype=np.int64)
    need = small & (z.real < _STIRLING_RADIUS)
    shift[need] = np.ceil(_STIRLING_RADIUS - z.real[need]).astype(np.int64)
    left = ~small & (z.real < 0)
    shift[left] = np.ceil(-z.real[left]).astype(np.int64)
    out = _stirling(z + shift)
    if shift.size and shift.max() > 0:
        for k in range(int(shift.max())):
            idx = shift > k
            out[idx] -= np.log(z[idx] + k)
    return out[0] if scalar else out


def gamma_R(s, *, check=True):
    """log of Gamma_R(s) = pi^(-s/2) Gamma(s/2)."""
    s = np.asarray(s, dtype=complex)
    return -0.5 * s * LOG_PI + log_gamma(0.5 * s, check=check)


def gamma_C(s, *, check=True):
    """log of Gamma_C(s) = 2 (2 pi)^(-s) Gamma(s)."""
    s = np.asarray(s, dtype=complex)
    return math.log(2.0) - s * LOG_2PI + log_gamma(s, check=check)


# Euler-Maclaurin correction coefficients B_2k / (2k)!, k = 1..25.
_EM_ORDER = 25
_EM_COEF = [float(bernoulli(2 * k) / math.factorial(2 * k)) for k in range(1, _EM_ORDER + 1)]


def _zeta_scalar(s: complex) -> complex:
    if abs(s - 1.0) < 1e-8:
        raise DomainError(f"zeta: s={s} is within 1e-8 of the pole at s=1")
    if s == 0:
        return -0.5 + 0j
    n_cut = 40 + int(math.ceil(abs(s)))
    n = np.arange(1, n_cut, dtype=float)
    head = np.exp(-s * np.log(n))
    total = math.fsum(head.real) + 1j * math.fsum(head.imag)
    logN = math.log(n_cut)
    total += np.exp((1.0 - s) * logN) / (s - 1.0) + 0.5 * np.exp(-s * logN)
    # rising factorial s (s+1) ... (s+2k-2) times N^(-s-2k+1)
    term = s * np.exp((-s - 1.0) * logN)
    corr = 0j
    for k in range(1, _EM_ORDER + 1):
        piece = _EM_COEF[k - 1] * term
        corr += piece
        if abs(piece) < 1e-19 * abs(total):
            break
        term *= (s + 2 * k - 1) * (s + 2 * k) / (n_cut * n_cut)
    return complex(total + corr)


def zeta(s):
    """Riemann zeta function by Euler-Maclaurin summation.

    The cut-off grows with ``|s|`` so the correction series converges
    geometrically; relative accuracy is about 1e-13 for ``Re s >= -1``.
    """
    if np.ndim(s) == 0:
        return _zeta_scalar(complex(s))
    s = np.asarray(s, dtype=complex)
    return np.array([_zeta_scalar(complex(v)) for v in s.ravel()]).reshape(s.shape)
