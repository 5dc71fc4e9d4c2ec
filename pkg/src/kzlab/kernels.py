"""Mellin-Barnes kernels of the GL(3) Kuznetsov formula and their contour
quadrature.

Pointwise factors are formed in log space and exponentiated once. Contours
are Re s = sigma near the real axis and bend smoothly to the left beyond a
height ``bend``; the Gamma ratios then decay super-exponentially, which
replaces the slowly decaying vertical tails. No poles lie between the bent
and the vertical contour because every pole sits on a horizontal line
Im s = Im(+-mu_j) below the bend.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit, loggamma

from ._numeric import chunked, ordered_map, pairwise_sum, segment_nodes
from .errors import AccuracyError, DomainError, ValidationError

LOG_PI = math.log(math.pi)
LOG_2 = math.log(2.0)
LOG_G_TILDE = -math.log(12288.0) - 3.5 * LOG_PI
POLE_TOL = 1e-6
TRIG_TOL = 1e-8


def _mu(mu):
    mu = tuple(complex(m) for m in mu)
    if len(mu) != 3:
        raise ValidationError("mu must be a triple")
    return mu


def _canonical(mu):
    """Sorted copy of mu: symmetric functions then agree bit for bit under permutations."""
    return tuple(sorted(mu, key=lambda z: (z.real, z.imag)))


def _near_pole(z, tol):
    """True where z is within tol of a non-positive integer."""
    z = np.asarray(z)
    return (z.real < 0.5) & (np.abs(z - np.round(z.real)) < tol)


def _lg(z):
    with np.errstate(all="ignore"):
        return loggamma(z)


def _log_rgamma(z):
    """log(1/Gamma(z)); reflected for Re z < 1/2 so zeros give -inf, not nan."""
    z = np.asarray(z, dtype=complex)
    left = z.real < 0.5
    with np.errstate(all="ignore"):
        refl = _lg(1.0 - z) + log_sin_pi(z) - LOG_PI
    return np.where(left, refl, -_lg(np.where(left, 1.0, z)))


def log_sin_pi(z):
    """A logarithm of sin(pi z), stable for large |Im z| (log 0 = -inf).

    The real part is first reduced by the nearest integer n, using
    sin(pi z) = (-1)^n sin(pi (z - n)), so integers give exact zeros.
    """
    z = np.asarray(z, dtype=complex)
    n = np.round(z.real)
    z = z - n
    up = z.imag >= 0
    with np.errstate(all="ignore"):
        a = -1j * np.pi * z + np.log(np.expm1(2j * np.pi * z)) - math.log(2.0) - 0.5j * np.pi
        b = 1j * np.pi * z + np.log(-np.expm1(-2j * np.pi * z)) - math.log(2.0) - 0.5j * np.pi
    return np.where(up, a, b) + 1j * np.pi * n


def log_cos_pi(z):
    return log_sin_pi(np.asarray(z, dtype=complex) + 0.5)


def _check_gamma_args(args, names, tol=POLE_TOL):
    for z, name in zip(args, names):
        if np.any(_near_pole(z, tol)):
            raise DomainError(f"{name} is within {tol} of a pole")


def _log_g_tilde_terms(s, mu, sign):
    """Four log-terms whose exponentials sum to G~^sign(s, mu).

    With x_j = s - mu_j, duplication and reflection give
    Gamma(x/2) / Gamma((1-x)/2) = 2^(1-x) Gamma(x) cos(pi x/2) / sqrt(pi) and
    Gamma((1+x)/2) / Gamma((2-x)/2) = 2^(1-x) Gamma(x) sin(pi x/2) / sqrt(pi).
    The trigonometric part prod cos +- i prod sin is expanded into
    (e^(-+iA) + sum_k e^(+-iB_k)) / 4 with A = pi/2 (x1+x2+x3) and
    B_k = A - pi x_k, which avoids cancellation on the decaying side.
    """
    s = np.asarray(s, dtype=complex)
    common = LOG_G_TILDE - 3.0 * s * LOG_PI - 2 * LOG_2
    xs = [s - m for m in mu]
    for x in xs:
        common = common + _lg(x) + (1.0 - x) * LOG_2 - 0.5 * LOG_PI
    A = 0.5 * np.pi * (xs[0] + xs[1] + xs[2])
    terms = [common - sign * 1j * A]
    for x in xs:
        terms.append(common + sign * 1j * (A - np.pi * x))
    return np.stack(terms)


def g_tilde(s, mu, sign: int):
    """G~^(+-)(s, mu) = pi^(-3s) / (12288 pi^(7/2)) (prod_1 +- i prod_2)."""
    if sign not in (1, -1):
        raise ValidationError("sign must be +1 or -1")
    mu = _mu(mu)
    s = np.asarray(s, dtype=complex)
    _check_gamma_args([0.5 * (s - m) for m in mu], [f"Gamma((s - mu_{j + 1})/2)" for j in range(3)])
    _check_gamma_args([0.5 * (1 + s - m) for m in mu], [f"Gamma((1 + s - mu_{j + 1})/2)" for j in range(3)])
    mu = _canonical(mu)
    out = np.exp(_log_g_tilde_terms(s, mu, sign)).sum(axis=0)
    return complex(out) if out.ndim == 0 else out


def _log_g_big(s1, s2, mu):
    """log G(s, mu) with 1/Gamma(s1+s2) in its entire form."""
    out = _log_rgamma(s1 + s2)
    for m in mu:
        out = out + _lg(s1 - m) + _lg(s2 + m)
    return out


def g_big(s1, s2, mu):
    """G(s, mu) = prod_j Gamma(s1 - mu_j) Gamma(s2 + mu_j) / Gamma(s1 + s2)."""
    mu = _mu(mu)
    s1 = np.asarray(s1, dtype=complex)
    s2 = np.asarray(s2, dtype=complex)
    _check_gamma_args([s1 - m for m in mu], [f"Gamma(s1 - mu_{j + 1})" for j in range(3)])
    _check_gamma_args([s2 + m for m in mu], [f"Gamma(s2 + mu_{j + 1})" for j in range(3)])
    _check_gamma_args([s1 + s2], ["1/Gamma(s1 + s2)"])
    mu = _canonical(mu)
    out = np.exp(_log_g_big(s1, s2, mu))
    return complex(out) if out.ndim == 0 else out


SIGNS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def _nu(mu):
    return ((mu[0] - mu[1]) / 3, (mu[1] - mu[2]) / 3, (mu[2] - mu[0]) / 3)


def _log_s_mu(eps1, eps2, mu):
    """The s-independent part of log S^(eps1 eps2) (includes the constant)."""
    nu = _nu(mu)
    if (eps1, eps2) == (1, 1):
        return -math.log(24 * math.pi**2) + sum(log_cos_pi(1.5 * v) for v in nu)
    c = -math.log(32 * math.pi**2)
    if (eps1, eps2) == (1, -1):
        return c + 1j * math.pi + log_cos_pi(1.5 * nu[1]) - log_sin_pi(1.5 * nu[0]) - log_sin_pi(1.5 * nu[2])
    if (eps1, eps2) == (-1, 1):
        return c + 1j * math.pi + log_cos_pi(1.5 * nu[0]) - log_sin_pi(1.5 * nu[1]) - log_sin_pi(1.5 * nu[2])
    return c + log_cos_pi(1.5 * nu[2]) - log_sin_pi(1.5 * nu[1]) - log_sin_pi(1.5 * nu[0])


def _log_s_1(eps1, eps2, s1, mu):
    if (eps1, eps2) == (1, 1):
        return 0.0
    if (eps1, eps2) == (1, -1):
        return log_sin_pi(s1 - mu[0])
    if (eps1, eps2) == (-1, 1):
        return log_sin_pi(s1 - mu[0]) + log_sin_pi(s1 - mu[1])
    return log_sin_pi(s1 - mu[1])


def _log_s_2(eps1, eps2, s2, mu):
    if (eps1, eps2) == (1, 1):
        return 0.0
    if (eps1, eps2) == (1, -1):
        return log_sin_pi(s2 + mu[1]) + log_sin_pi(s2 + mu[2])
    if (eps1, eps2) == (-1, 1):
        return log_sin_pi(s2 + mu[2])
    return log_sin_pi(s2 + mu[1])


def _has_sum_sine(eps1, eps2) -> bool:
    return eps1 != eps2


def _check_trig(eps1, eps2, mu, s1=None, s2=None):
    nu = _nu(mu)
    dens = {(1, -1): (0, 2), (-1, 1): (1, 2), (-1, -1): (1, 0)}.get((eps1, eps2), ())
    for j in dens:
        z = 1.5 * nu[j]
        if abs(z - round(z.real)) < TRIG_TOL:
            raise DomainError(f"sin(3 pi nu_{j + 1} / 2) vanishes")
    if s1 is not None and _has_sum_sine(eps1, eps2):
        z = np.asarray(s1 + s2)
        if np.any(np.abs(z - np.round(z.real)) < TRIG_TOL):
            raise DomainError("sin(pi (s1 + s2)) vanishes")


def s_trig(eps1: int, eps2: int, s1, s2, mu):
    """The trigonometric factor S^(eps1 eps2)(s; mu)."""
    if (eps1, eps2) not in SIGNS:
        raise ValidationError("eps1, eps2 must be +-1")
    mu = _mu(mu)
    s1 = np.asarray(s1, dtype=complex)
    s2 = np.asarray(s2, dtype=complex)
    _check_trig(eps1, eps2, mu, s1, s2)
    log = _log_s_mu(eps1, eps2, mu) + _log_s_1(eps1, eps2, s1, mu) + _log_s_2(eps1, eps2, s2, mu)
    if _has_sum_sine(eps1, eps2):
        log = log - log_sin_pi(s1 + s2)
    out = np.exp(log) * np.ones(np.broadcast(s1, s2).shape)
    return complex(out) if out.ndim == 0 else out


class Rule(str, enum.Enum):
    TRAPEZOID = "trapezoid"
    GAUSS_SEGMENT = "gauss-segment"


@dataclass(frozen=True)
class ContourSpec:
    """Contour s(t) = sigma + i t - tilt * bump(t), |t| <= H.

    bump(t) = w log(1 + e^((t - bend)/w)) + w log(1 + e^((-t - bend)/w)) is a
    smooth version of max(0, |t| - bend). ``None`` fields are chosen from the
    integrand (see ``resolve_w4`` / ``resolve_w6``); tilt = 0 gives the plain
    vertical line, whose truncation error is then estimated from the
    endpoint values.
    """

    sigma: float = 0.25
    H: float | None = None
    step: float | None = None
    rule: Rule = Rule.TRAPEZOID
    tilt: float | None = None
    bend: float | None = None
    width: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "rule", Rule(self.rule))
        if not math.isfinite(self.sigma):
            raise ValidationError("sigma must be finite")
        if self.H is not None and self.H <= 0:
            raise ValidationError("H must be positive")
        if self.step is not None and self.step <= 0:
            raise ValidationError("step must be positive")
        if self.H is not None and self.step is not None and self.step > self.H / 50 + 1e-15:
            raise ValidationError(f"step {self.step} exceeds H/50 = {self.H / 50}")
        if self.tilt is not None and self.tilt < 0:
            raise ValidationError("tilt must be non-negative")
        if self.width <= 0:
            raise ValidationError("width must be positive")

    @property
    def resolved(self) -> bool:
        return None not in (self.H, self.step, self.tilt, self.bend)

    def refined(self) -> "ContourSpec":
        """The (2H, step/2) contour used for the self-error estimate."""
        return replace(self, H=2 * self.H, step=self.step / 2)


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    self_error: float
    evaluations: int
    abs_sum: float = math.nan
    contour: ContourSpec | None = None

    def to_dict(self) -> dict:
        return {"re": self.value.real, "im": self.value.imag, "self_error": self.self_error,
                "evaluations": self.evaluations}


def path(t, c: ContourSpec):
    """Points s(t) and derivatives s'(t) of a resolved contour."""
    t = np.asarray(t, dtype=float)
    w, b, a = c.width, c.bend, c.tilt
    u1 = (t - b) / w
    u2 = (-t - b) / w
    bump = w * (np.logaddexp(0.0, u1) + np.logaddexp(0.0, u2))
    dbump = expit(u1) - expit(u2)
    return c.sigma + 1j * t - a * bump, 1j - a * dbump


def _nodes(c: ContourSpec):
    """Parameter nodes and weights on [-H, H] for either rule."""
    if c.rule is Rule.TRAPEZOID:
        n = int(math.ceil(2 * c.H / c.step - 1e-9))
        t = np.linspace(-c.H, c.H, n + 1)
        wts = np.full(n + 1, 2 * c.H / n)
        wts[0] *= 0.5
        wts[-1] *= 0.5
        return t, wts
    return segment_nodes(-c.H, c.H, c.step)


# Target size of the discretisation error, as a power of e.
_DIGITS = 36.0


def _mu_extent(mus):
    arr = np.asarray(mus, dtype=complex).reshape(-1)
    return float(np.max(np.abs(arr.imag), initial=0.0)), float(np.max(arr.real, initial=-np.inf))


def _auto_step(c: ContourSpec, dist: float, omega: float) -> float:
    d = min(dist, 1.0)
    if c.rule is Rule.TRAPEZOID:
        step = 2 * math.pi * d / (_DIGITS + omega * d)
    else:
        step = min(0.6 * d, 2.0 / omega)
    return step


def _finish(c: ContourSpec, bend: float, omega: float, dist: float, default_tilt: float) -> ContourSpec:
    tilt = default_tilt if c.tilt is None else c.tilt
    bend = bend if c.bend is None else c.bend
    H = c.H if c.H is not None else bend + (40.0 / tilt if tilt > 0 else 40.0)
    step = c.step if c.step is not None else _auto_step(c, dist, omega)
    step = min(step, H / 50)
    return replace(c, H=H, step=step, tilt=tilt, bend=bend)


def resolve_w4(c: ContourSpec | None, y: float, mus) -> ContourSpec:
    """Fill in automatic contour parameters for K_w4 at |y| (over all mus)."""
    c = ContourSpec() if c is None else c
    gmax, remax = _mu_extent(mus)
    dist = c.sigma - remax
    if dist < 1e-3:
        raise DomainError(f"sigma={c.sigma} is not right of the pole lines Re s = Re mu_j (max {remax})")
    L = math.log(8 * math.pi**3 * abs(y))
    # beyond the bend prod |t - gamma_j| / 2 >= e pi^3 |y|, so moving left shrinks the integrand
    bend = gmax + max(10.0 * c.width, 2.0 * math.exp((1.0 + math.log(math.pi**3 * abs(y))) / 3.0))
    omega = max(abs(L), abs(3.0 * math.log(bend + gmax + 1.0) - L), 1.0)
    return _finish(c, bend, omega, dist, 1.0)


def _w4_log_integrand(s, mu, y):
    """log terms of |y|^(-s) G~^sgn(y)(s, mu) (shape (4, ...))."""
    sign = 1 if y > 0 else -1
    return _log_g_tilde_terms(s, mu, sign) - s * math.log(abs(y))


def _phase_rate(t, gammas, y):
    """Stirling estimate of d arg(integrand)/dt on the vertical line."""
    return sum(np.log(np.abs(t - g) + 1.0) for g in gammas) - math.log(8 * math.pi**3 * abs(y))


def _evaluate_1d(func, c: ContourSpec, workers):
    """Return (fine value, coarse value, abs sum, evaluations, end values).

    ``func(s)`` gives integrand values at contour points; the factor s'(t)
    and the 1/(2 pi i) are applied here.
    """
    f = c.refined()
    if c.rule is Rule.TRAPEZOID:
        n = int(math.ceil(2 * c.H / c.step - 1e-9))
        t = np.linspace(-2 * c.H, 2 * c.H, 4 * n + 1)
        h = 2 * c.H / n
        wf = np.full(t.size, h / 2)
        wf[0] = wf[-1] = h / 4
        sets = [(t, wf)]
    else:
        sets = [_nodes(f), _nodes(c)]

    def block(args):
        tt, ww = args
        s, ds = path(tt, c)
        return func(s) * ds * ww / (2j * math.pi)

    vals = []
    for tt, ww in sets:
        pieces = [(tt[sl], ww[sl]) for sl in chunked(tt.size)]
        vals.append(np.concatenate(ordered_map(block, pieces, workers)))
    fine = vals[0]
    if c.rule is Rule.TRAPEZOID:
        coarse = fine[n : 3 * n + 1 : 2] * 2.0
        coarse[0] *= 0.5
        coarse[-1] *= 0.5
        nevals = fine.size
    else:
        coarse = vals[1]
        nevals = fine.size + coarse.size
    abs_sum = float(pairwise_sum(np.abs(fine)))
    return pairwise_sum(fine), pairwise_sum(coarse), abs_sum, nevals, sets[0][0]


# Rounding allowance added to every self_error, relative to the absolute sum
# of the quadrature terms: the integrand itself is only accurate to about
# 1e-14 (log Gamma of arguments up to a few hundred, then one exponential).
_EPS = 64 * np.finfo(float).eps


def k_w4(y: float, mu, contour: ContourSpec | None = None, tol: float | None = 1e-8,
         workers=None) -> QuadratureResult:
    """K_w4(y; mu) = int |y|^(-s) G~^sgn(y)(s, mu) ds / (2 pi i)."""
    y = float(y)
    if y == 0 or not math.isfinite(y):
        raise ValidationError("y must be a nonzero real")
    mu = _canonical(_mu(mu))
    c = resolve_w4(contour, y, [mu])

    def func(s):
        with np.errstate(under="ignore"):
            return np.exp(_w4_log_integrand(s, mu, y)).sum(axis=0)

    fine, coarse, abs_sum, nevals, t = _evaluate_1d(func, c, workers)
    err = abs(fine - coarse) + _EPS * abs_sum
    if c.tilt == 0:
        err += _vertical_tail(func, c, [m.imag for m in mu], y)
    return _checked(QuadratureResult(complex(fine), float(err), nevals, abs_sum, c), tol)


def _vertical_tail(func, c, gammas, y):
    """Oscillatory tail estimate |f(H)| / |phase rate| at both ends of a vertical line."""
    ends = np.array([-2 * c.H, 2 * c.H])
    s = c.sigma + 1j * ends
    vals = np.abs(func(s)) / (2 * math.pi)
    rate = np.maximum(np.abs(_phase_rate(ends, gammas, y)), 1e-3)
    return float(np.sum(vals / rate))


def _checked(res: QuadratureResult, tol):
    if tol is None:
        return res
    floor = 1e-13 * res.abs_sum if math.isfinite(res.abs_sum) else 0.0
    if not math.isfinite(res.self_error) or res.self_error > max(tol * abs(res.value), floor):
        raise AccuracyError(
            f"quadrature self_error {res.self_error:.3e} exceeds tolerance for value {res.value:.6e}",
            achieved=res.self_error, values=(res.value,))
    return res


def _signs(y1, y2):
    return (1 if y1 > 0 else -1, 1 if y2 > 0 else -1)


def resolve_w6(c: ContourSpec | None, y1: float, y2: float, mus, eps) -> ContourSpec:
    """Automatic contour for K_w6 (the same contour in s1 and s2).

    (+,+) decays exponentially in every direction, so its default is the
    vertical line. The other variants decay only polynomially along some
    directions and bend left once 2 log|t| - log 2 exceeds log(4 pi^2 |y|) + 1.
    The default step is twice the accuracy step: the refined (2H, step/2)
    grid carries the value and the coarse grid only feeds self_error.
    """
    c = ContourSpec() if c is None else c
    arr = np.asarray(mus, dtype=complex).reshape(-1)
    gmax = float(np.max(np.abs(arr.imag), initial=0.0))
    dist = min(c.sigma - float(np.max(arr.real)), c.sigma + float(np.min(arr.real)), 1.0 - 2 * c.sigma)
    if dist < 1e-3:
        raise DomainError(f"sigma={c.sigma} is within 1e-3 of a pole line of G(s, mu)")
    Y = 4 * math.pi**2 * max(abs(y1), abs(y2))
    logs = max(abs(math.log(4 * math.pi**2 * abs(y1))), abs(math.log(4 * math.pi**2 * abs(y2))))
    if tuple(eps) == (1, 1):
        tilt = 0.0 if c.tilt is None else c.tilt
        base = gmax + 30.0
        bend = base if c.bend is None else c.bend
        H = c.H if c.H is not None else (base if tilt == 0 else bend + 20.0 / tilt)
    else:
        tilt = 1.0 if c.tilt is None else c.tilt
        bend = gmax + max(10.0 * c.width, math.sqrt(2 * math.e * Y)) if c.bend is None else c.bend
        H = c.H if c.H is not None else bend + (20.0 / tilt if tilt > 0 else 40.0)
    omega = logs + 2.0 * math.log(bend + gmax + 1.0)
    if c.step is None:
        d = min(dist, 1.0)
        step = 2.0 * 2 * math.pi * d / (_DIGITS + omega * d)
    else:
        step = c.step
    return replace(c, H=H, step=min(step, H / 50), tilt=tilt, bend=bend)


def _w6_parts(eps, mu, y1, y2):
    """Separable log-factors (f1(s1), f2(s2), g(s1 + s2), constant)."""
    e1, e2 = eps
    l1 = math.log(4 * math.pi**2 * abs(y1))
    l2 = math.log(4 * math.pi**2 * abs(y2))

    def f1(s):
        out = -s * l1 + _log_s_1(e1, e2, s, mu)
        for m in mu:
            out = out + _lg(s - m)
        return out

    def f2(s):
        out = -s * l2 + _log_s_2(e1, e2, s, mu)
        for m in mu:
            out = out + _lg(s + m)
        return out

    if e1 == e2:
        g = _log_rgamma
    else:
        # 1 / (Gamma(z) sin(pi z)) = Gamma(1 - z) / pi
        def g(z):
            return _lg(1.0 - z) - LOG_PI

    return f1, f2, g, _log_s_mu(e1, e2, mu)


def _fine_grid(c: ContourSpec):
    n = int(math.ceil(2 * c.H / c.step - 1e-9))
    t = np.linspace(-2 * c.H, 2 * c.H, 4 * n + 1)
    h = 2 * c.H / n
    w = np.full(t.size, h / 2)
    w[0] = w[-1] = h / 4
    return n, t, w


def _coarse_weights(n, wf):
    wc = wf[n : 3 * n + 1 : 2] * 2.0
    wc[0] *= 0.5
    wc[-1] *= 0.5
    return wc


def _w6_direct(parts, c: ContourSpec, workers):
    f1, f2, g, const = parts
    n, t, w = _fine_grid(c)
    s, ds = path(t, c)
    a1 = f1(s)
    a2 = f2(s)
    coarse_idx = np.arange(n, 3 * n + 1, 2)
    wc = _coarse_weights(n, w)
    wmap = np.zeros(t.size)
    wmap[coarse_idx] = wc
    pref = ds / (2j * math.pi)

    def rows(sl):
        z = s[sl, None] + s[None, :]
        with np.errstate(all="ignore"):
            v = np.exp(const + a1[sl, None] + a2[None, :] + g(z))
        v = np.where(np.isfinite(v), v, 0.0) * (pref[sl, None] * pref[None, :])
        fine = v @ w * w[sl]
        coarse = (v @ wmap) * wmap[sl]
        absum = np.abs(v) @ w * w[sl]
        return np.stack([fine, coarse, absum])

    blocks = ordered_map(rows, chunked(t.size, 64), workers)
    tot = np.concatenate(blocks, axis=1)
    return pairwise_sum(tot[0]), pairwise_sum(tot[1]), float(pairwise_sum(tot[2].real)), t.size**2


def _conv_sum(a, b, g, t, tz):
    """sum_{i,j} a_i b_j g_{i+j} by FFT convolution, split at t1 + t2 = 0.

    g(z) grows like e^(pi |Im z| / 2) exactly where the convolution is
    tiny, so the factors are tilted by e^(+-pi t / 2) before transforming
    (a_i b_j g_(i+j) is unchanged): each half then has bounded factors and
    the FFT rounding is not amplified.
    """
    from scipy.signal import fftconvolve

    total = 0j
    for lam, mask in ((0.5 * math.pi, tz >= 0), (-0.5 * math.pi, tz < 0)):
        with np.errstate(all="ignore"):
            A = a * np.exp(lam * t)
            B = b * np.exp(lam * t)
            G = np.where(mask, g * np.exp(-lam * tz), 0.0)
        A = np.where(np.isfinite(A), A, 0.0)
        B = np.where(np.isfinite(B), B, 0.0)
        G = np.where(np.isfinite(G), G, 0.0)
        total += complex(np.dot(fftconvolve(A, B), G))
    return total


def _w6_conv(parts, c: ContourSpec):
    """Vertical contours: g depends on t1 + t2 only, so the double sum is a convolution."""
    f1, f2, g, const = parts
    n, t, w = _fine_grid(c)
    s = c.sigma + 1j * t
    with np.errstate(all="ignore"):
        a1 = np.exp(const + f1(s)) * w
        a2 = np.exp(f2(s)) * w
        tz = np.linspace(2 * t[0], 2 * t[-1], 2 * t.size - 1)
        gz = np.exp(g(2 * c.sigma + 1j * tz))
    # ds1 ds2 / (2 pi i)^2 with ds = i dt
    scale = 1.0 / (4 * math.pi**2)
    fine = _conv_sum(a1, a2, gz, t, tz) * scale
    idx = np.arange(n, 3 * n + 1, 2)
    wc = _coarse_weights(n, w)
    b1 = a1[idx] / w[idx] * wc
    b2 = a2[idx] / w[idx] * wc
    zc = slice(2 * n, 6 * n + 1, 2)
    coarse = _conv_sum(b1, b2, gz[zc], t[idx], tz[zc]) * scale
    absum = _conv_sum(np.abs(a1), np.abs(a2), np.abs(gz), t, tz).real * scale
    return fine, coarse, absum, t.size**2


def k_w6(y1: float, y2: float, mu, contour: ContourSpec | None = None, tol: float | None = 1e-6,
         variant=None, method: str = "auto", workers=None) -> QuadratureResult:
    """K_w6^(eps1, eps2)(y; mu) by double contour quadrature.

    ``variant`` overrides the sign pair (sgn y1, sgn y2). ``method`` is
    "convolution" (vertical contours only), "direct", or "auto"
    (convolution when the resolved contour is vertical).
    """
    y1, y2 = float(y1), float(y2)
    if y1 == 0 or y2 == 0 or not (math.isfinite(y1) and math.isfinite(y2)):
        raise ValidationError("y1, y2 must be nonzero reals")
    mu = _mu(mu)
    eps = _signs(y1, y2) if variant is None else tuple(variant)
    if eps not in SIGNS:
        raise ValidationError("variant must be a pair of +-1")
    if contour is not None and contour.rule is not Rule.TRAPEZOID:
        raise ValidationError("k_w6 supports the trapezoid rule only")
    if eps == (1, 1):
        mu = _canonical(mu)
    _check_trig(eps[0], eps[1], mu)
    c = resolve_w6(contour, y1, y2, [mu], eps)
    parts = _w6_parts(eps, mu, y1, y2)
    if method == "auto":
        method = "convolution" if c.tilt == 0 else "direct"
    if method == "convolution":
        if c.tilt != 0:
            raise ValidationError("the convolution method needs a vertical contour (tilt = 0)")
        fine, coarse, absum, nev = _w6_conv(parts, c)
    elif method == "direct":
        fine, coarse, absum, nev = _w6_direct(parts, c, workers)
    else:
        raise ValidationError(f"unknown method {method!r}")
    err = abs(fine - coarse) + _EPS * absum
    return _checked(QuadratureResult(complex(fine), float(err), int(nev), absum, c), tol)
