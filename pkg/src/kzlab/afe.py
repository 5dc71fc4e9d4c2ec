"""Gamma factors and approximate-functional-equation weights for L(s, F) and
L(s, g x F) on GL(3), the main term M(mu, k) and its spectral integral, the
diagonal weight D(mu), and a degree-2 AFE for L(s, g).

Every weight is a contour integral over Re u = 3 against G(u) = e^(u^2),
whose Gaussian decay along vertical lines makes a short trapezoid rule
exact to rounding; Gamma ratios are formed in log space.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import loggamma

from . import arith
from ._numeric import chunked, ordered_map, pairwise_sum
from .errors import AccuracyError, ConfigurationError, DomainError, ValidationError
from .hecke import HeckeTable, hecke_eigenvalues_holomorphic
from .kernels import _EPS, ContourSpec, QuadratureResult, Rule, _checked
from .special import log_gamma, zeta
from .spectral import SpectralPoint, TestFunctionSpec
from .transforms import SpectralGrid, _full, _grid_for, _nodes_for, build_grid

LOG_PI = math.log(math.pi)
POLE_TOL = 1e-8
# Weights are integrals over Re u = sigma > 0 (no poles right of u = 0), |Im u| <= H.
# sigma = 3 is the line of the definitions; by default sigma is moved to the
# point of (0, 3] where the integrand is smallest, which avoids cancellation.
AFE_H = 20.0
AFE_SIGMAS = np.linspace(0.25, 3.0, 12)


class GammaKind(str, enum.Enum):
    GL3 = "gl3"
    GL3_DUAL = "gl3-dual"
    RANKIN = "rankin"
    RANKIN_DUAL = "rankin-dual"


@dataclass(frozen=True)
class GammaFactorSpec:
    """gamma(s, F) = prod Gamma_R(s - mu_j); rankin kinds use the weight-k shifts.

    Dual kinds replace mu_j by -mu_j.
    """

    kind: GammaKind
    mu: tuple
    k: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", GammaKind(self.kind))
        mu = SpectralPoint(tuple(self.mu)).mu
        object.__setattr__(self, "mu", mu)
        if self.kind in (GammaKind.RANKIN, GammaKind.RANKIN_DUAL):
            if self.k is None or int(self.k) != self.k or self.k % 2 or self.k < 2:
                raise ValidationError("rankin gamma factors need an even weight k >= 2")
            object.__setattr__(self, "k", int(self.k))

    @property
    def shifts(self):
        """Arguments a_j with gamma(s) = prod_j Gamma_R(s + a_j)."""
        sgn = -1 if self.kind in (GammaKind.GL3, GammaKind.RANKIN) else 1
        base = [sgn * m for m in self.mu]
        if self.kind in (GammaKind.GL3, GammaKind.GL3_DUAL):
            return tuple(base)
        h = (self.k - 1) / 2
        return tuple([b + h for b in base] + [b + h + 1 for b in base])


def _log_gamma_r(z, fast=False):
    z = np.asarray(z, dtype=complex)
    lg = loggamma(0.5 * z) if fast else log_gamma(0.5 * z, check=False)
    return -0.5 * z * LOG_PI + lg


def _check_poles(args, what):
    for a in args:
        z = 0.5 * np.asarray(a, dtype=complex)
        near = (z.real < 0.5) & (np.abs(z - np.round(z.real)) < POLE_TOL)
        if np.any(near):
            raise DomainError(f"{what}: Gamma_R argument {np.asarray(a).ravel()[np.argmax(near.ravel())]} "
                              "is at a pole")


def gamma_factor(spec: GammaFactorSpec, s):
    """log gamma(s) as the sum of the log Gamma_R constituents."""
    s = np.asarray(s, dtype=complex)
    args = [s + a for a in spec.shifts]
    _check_poles(args, f"gamma_factor({spec.kind.value})")
    out = sum(_log_gamma_r(a) for a in args)
    return complex(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# AFE weights V, V~, W, W~


class WeightKind(str, enum.Enum):
    V = "V"
    VTILDE = "Vtilde"
    W = "W"
    WTILDE = "Wtilde"


_WEIGHT_ALIASES = {"Vt": "Vtilde", "Wt": "Wtilde"}

_WEIGHT_FACTORS = {
    WeightKind.V: (GammaKind.GL3, GammaKind.GL3),
    WeightKind.VTILDE: (GammaKind.GL3_DUAL, GammaKind.GL3),
    WeightKind.W: (GammaKind.RANKIN, GammaKind.RANKIN),
    WeightKind.WTILDE: (GammaKind.RANKIN_DUAL, GammaKind.RANKIN),
}


def weight_kind(kind) -> WeightKind:
    return WeightKind(_WEIGHT_ALIASES.get(kind, kind))


def _ratio_spec(kind: WeightKind, mu, k):
    num, den = _WEIGHT_FACTORS[kind]
    kk = k if num in (GammaKind.RANKIN, GammaKind.RANKIN_DUAL) else None
    return GammaFactorSpec(num, mu, kk), GammaFactorSpec(den, mu, kk)


def weight_limit(kind, mu, k: int | None = None) -> complex:
    """Residue of the weight integrand at u = 0: gamma(1/2, num) / gamma(1/2, den).

    V, W give 1; V~ gives prod Gamma(1/4 + mu_j/2) / Gamma(1/4 - mu_j/2),
    W~ gives prod Gamma(k/2 + mu_j) / Gamma(k/2 - mu_j) (zero-sum mu).
    """
    num, den = _ratio_spec(weight_kind(kind), mu, k)
    return complex(np.exp(gamma_factor(num, 0.5) - gamma_factor(den, 0.5)))


def _afe_step(log_y_max: float, shifts, H: float, sigma: float) -> float:
    # analyticity strip of half-width d around the line (1/u has its pole
    # at distance sigma, the Gamma_R poles lie left of Re u = -1/2); the
    # phase rate is |log y| plus 1/2 log|u| per Gamma_R factor
    d = min(1.0, 0.8 * sigma)
    gmax = max((abs(complex(a).imag) for a in shifts), default=0.0)
    omega = abs(log_y_max) + 0.5 * len(shifts) * math.log(gmax + 2 * H + 2.0)
    return 2 * math.pi * d / (36.0 + omega * d)


def _resolve_afe(contour: ContourSpec | None, log_y_max: float, shifts, log_f=None) -> ContourSpec:
    if contour is None:
        sigma = 3.0
        if log_f is not None:
            peak = np.real(log_f(AFE_SIGMAS.astype(complex)))
            sigma = float(AFE_SIGMAS[int(np.argmin(peak))])
        c = ContourSpec(sigma=sigma, H=AFE_H, tilt=0.0)
    else:
        c = contour
    if c.rule is not Rule.TRAPEZOID or (c.tilt not in (None, 0.0)):
        raise ValidationError("AFE weights use the vertical trapezoid rule")
    if c.sigma <= 0:
        raise ValidationError("AFE contours must lie right of u = 0")
    H = AFE_H if c.H is None else c.H
    step = c.step if c.step is not None else min(_afe_step(log_y_max, shifts, H, c.sigma), H / 50)
    return ContourSpec(sigma=c.sigma, H=H, step=step, rule=Rule.TRAPEZOID, tilt=0.0, bend=H)


def _afe_nodes(c: ContourSpec):
    """Nested trapezoid on [-2H, 2H] with spacing step/2, as in the kernel quadratures."""
    n = int(math.ceil(2 * c.H / c.step - 1e-9))
    t = np.linspace(-2 * c.H, 2 * c.H, 4 * n + 1)
    h = 2 * c.H / n
    w = np.full(t.size, h / 2)
    w[0] = w[-1] = h / 4
    return n, c.sigma + 1j * t, w / (2 * math.pi)


def _coarse(fine, n):
    out = fine[n : 3 * n + 1 : 2] * 2.0
    out[0] *= 0.5
    out[-1] *= 0.5
    return out


def _log_ratio(u, num: GammaFactorSpec, den: GammaFactorSpec, s0=0.5):
    lden = sum(_log_gamma_r(s0 + a) for a in den.shifts)
    return sum(_log_gamma_r(s0 + u + a, fast=True) for a in num.shifts) - lden


def _line_integral(log_integrand, c: ContourSpec, tol, adaptive: bool, workers, halvings: int = 4):
    """(1/2 pi i) int over Re u = sigma of exp(log_integrand(u)) du, nested trapezoid.

    With ``adaptive`` the step is halved (at most ``halvings`` times) until
    the self_error meets ``tol`` relative to the value.
    """
    for attempt in range(halvings + 1):
        n, u, w = _afe_nodes(c)

        def block(sl):
            with np.errstate(under="ignore"):
                return np.exp(log_integrand(u[sl])) * w[sl]

        terms = np.concatenate(ordered_map(block, chunked(u.size), workers))
        fine = pairwise_sum(terms)
        coarse = pairwise_sum(_coarse(terms, n))
        abs_sum = float(pairwise_sum(np.abs(terms)))
        err = abs(fine - coarse) + _EPS * abs_sum
        good = tol is None or err <= max(tol * abs(fine), 1e-13 * abs_sum)
        if good or not adaptive or attempt == halvings:
            return complex(fine), float(err), abs_sum, int(u.size), c
        c = ContourSpec(sigma=c.sigma, H=c.H, step=c.step / 2, rule=Rule.TRAPEZOID, tilt=0.0, bend=c.H)


def afe_weight(kind, y: float, mu, k: int | None = None, contour: ContourSpec | None = None,
               tol: float | None = 1e-10, poles=(), workers=None) -> QuadratureResult:
    """(1/2 pi i) int_(3) y^(-u) gamma(1/2 + u, num) / gamma(1/2, den) G(u) du / u.

    The default contour is Re u = sigma with sigma in (0, 3] chosen to
    minimise the integrand (the value does not depend on sigma > 0).

    ``poles`` is an optional sequence of (u_p, r_p): simple poles at u_p,
    with residue r_p, of a Dirichlet-series factor multiplying the weight
    (e.g. zeta poles for Eisenstein L-functions). For each u_p between 0 and
    the contour, the term -r_p y^(-u_p) ratio(u_p) G(u_p) / u_p is added,
    the correction produced when the contour is shifted across u_p.
    """
    kind = weight_kind(kind)
    y = float(y)
    if not (y > 0 and math.isfinite(y)):
        raise ValidationError("y must be a positive real")
    num, den = _ratio_spec(kind, mu, k)
    _check_poles([0.5 + a for a in den.shifts], "afe_weight denominator")
    ly = math.log(y)

    def log_f(u):
        return -u * ly + _log_ratio(u, num, den) + u * u - np.log(u)

    c = _resolve_afe(contour, ly, num.shifts, log_f)

    adaptive = contour is None or contour.step is None
    value, err, abs_sum, nev, c = _line_integral(log_f, c, tol, adaptive, workers)
    for up, rp in poles:
        up = complex(up)
        if not 0 < up.real < c.sigma:
            continue
        value -= complex(rp) * complex(np.exp(log_f(np.array([up]))[0]))
    return _checked(QuadratureResult(value, err, nev, abs_sum, c), tol)


# ---------------------------------------------------------------------------
# Main term


def _log_rg(z):
    """log Gamma(z) + check that z is off the poles."""
    z = np.asarray(z, dtype=complex)
    near = (z.real < 0.5) & (np.abs(z - np.round(z.real)) < POLE_TOL)
    if np.any(near):
        raise DomainError(f"Gamma argument {z[near].ravel()[0]} is at a pole")
    return loggamma(z)


def gamma_ratios(mu, k: int):
    """(prod Gamma(1/4 + mu/2)/Gamma(1/4 - mu/2), prod Gamma(k/2 + mu)/Gamma(k/2 - mu)).

    ``mu`` may be a triple of arrays.
    """
    m = [np.asarray(x, dtype=complex) for x in mu]
    l1 = sum(_log_rg(0.25 + x / 2) - _log_rg(0.25 - x / 2) for x in m)
    l2 = sum(_log_rg(k / 2 + x) - _log_rg(k / 2 - x) for x in m)
    return np.exp(l1), np.exp(l2)


def m_main(mu, k: int, L1g: float):
    """zeta(3/2) + L(1,g) R1 + L(1,g) R2 + zeta(3/2) R1 R2 with the two Gamma-ratio products."""
    r1, r2 = gamma_ratios(mu, k)
    z = zeta(1.5).real
    out = z + L1g * r1 + L1g * r2 + z * r1 * r2
    return complex(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Dirichlet sums against AFE weights

TAIL_SIGMAS = tuple(np.arange(0.5, 14.0, 0.5))
N_START = 64
PRUNE = 1e-24


def _weight_table(log_g, logy: np.ndarray, c: ContourSpec, workers):
    """Weights (1/2 pi i) int y^(-u) exp(log_g(u)) du at every y = exp(logy).

    Returns the fine and the coarse (doubled step) trapezoid values, the
    absolute sums (for the nested self_error, as in _line_integral), a bound
    for the nodes dropped because their Gaussian mass is below PRUNE of the
    peak, and the node count.
    """
    n, u, w = _afe_nodes(c)
    with np.errstate(under="ignore"):
        g = np.exp(log_g(u)) * w
    gc = np.zeros_like(g)
    gc[n : 3 * n + 1 : 2] = _coarse(g, n)
    ga = np.abs(g)
    keep = ga > PRUNE * ga.max()
    dropped = float((ga[~keep].sum() + np.abs(gc[~keep]).sum())
                    * math.exp(c.sigma * max(0.0, -float(logy.min()))))
    u, g, gc, ga = u[keep], g[keep], gc[keep], ga[keep]

    def block(sl):
        e = np.exp(-np.outer(logy[sl], u))
        return e @ g, e @ gc, np.abs(e) @ ga

    parts = ordered_map(block, chunked(logy.size, 1024), workers)
    fine, coarse, absw = (np.concatenate([p[i] for p in parts]) for i in range(3))
    return fine, coarse, absw, dropped, int(keep.size)


def _abs_mass(log_g, sigma: float, H: float) -> float:
    """int |exp(log_g(sigma + it))| dt / 2 pi, the bound |weight(y)| <= y^(-sigma) * mass."""
    c = ContourSpec(sigma=sigma, H=H, step=min(_afe_step(0.0, (), H, sigma), H / 50))
    _, u, w = _afe_nodes(c)
    with np.errstate(under="ignore"):
        return float(pairwise_sum(np.exp(np.real(log_g(u))) * w))


def _coefficient_scale(lam: np.ndarray) -> float:
    """max |lambda(n)| / d(n), so that |lambda(n)| <= scale * d(n) on the table."""
    d = arith.divisor_count_k(2, lam.size)[1:]
    return float(max(1.0, np.max(np.abs(lam) / d))) if lam.size else 1.0


def _pick_length(tail, n_max: int, target: float):
    """Smallest power-of-two multiple of N_START (capped at n_max) whose tail meets target."""
    N = min(N_START, n_max)
    while tail(N) > target and N < n_max:
        N = min(2 * N, n_max)
    return N, tail(N)


@dataclass(frozen=True)
class LValue:
    """An L-value from a smoothed functional equation with its error budget."""

    value: complex
    self_error: float
    fe_residual: float
    terms: int
    evaluations: int

    def to_dict(self) -> dict:
        return {"re": self.value.real, "im": self.value.imag, "self_error": self.self_error,
                "fe_residual": self.fe_residual, "terms": self.terms,
                "evaluations": self.evaluations}


GL2_BALANCE = (1.0, 1.25)
_L_CACHE: dict = {}


def _log_gamma_c(z):
    """log Gamma_C(z) = log(2 (2 pi)^(-z) Gamma(z))."""
    return math.log(2.0) - z * math.log(2 * math.pi) + loggamma(z)


def _check_gl2(g: HeckeTable) -> int:
    if g.kind != "holomorphic" or not g.multiplicative:
        raise ValidationError(f"table {g.label!r} is not a validated holomorphic Hecke table")
    k = int(round(g.weight_or_spectral))
    if k != g.weight_or_spectral or k < 2 or k % 2:
        raise ValidationError(f"holomorphic weight must be an even integer, got {g.weight_or_spectral}")
    return k


def _gl2_afe(g: HeckeTable, k: int, s: complex, X: float, target: float, workers):
    """L(s, g) = sum lambda(n) n^-s V_s(n/X) + eps sum lambda(n) n^(s-1) V*_s(n X).

    gamma(s) = Gamma_C(s + (k-1)/2), eps = i^k, and the weights integrate
    y^(-u) gamma(s + u)/gamma(s) G(u)/u, resp. gamma(1 - s + u)/gamma(s).
    Returns (value, error, terms, evaluations).
    """
    a = (k - 1) / 2
    eps = (1j) ** k
    lgs = _log_gamma_c(s + a)

    def log_g1(u):
        return _log_gamma_c(s + a + u) - lgs + u * u - np.log(u)

    def log_g2(u):
        return _log_gamma_c(1 - s + a + u) - lgs + u * u - np.log(u)

    lam = np.conj(g.values)
    kappa = _coefficient_scale(lam)
    masses = [(t, _abs_mass(log_g1, t, AFE_H), _abs_mass(log_g2, t, AFE_H)) for t in TAIL_SIGMAS]

    def tail(N):
        best = math.inf
        for t, m1, m2 in masses:
            b = (X**t * m1 * arith.divisor_tail_bound(2, N, s.real + t)
                 + X ** (-t) * m2 * arith.divisor_tail_bound(2, N, 1 - s.real + t))
            best = min(best, b)
        return kappa * best

    N, tl = _pick_length(tail, g.N, target)
    n = np.arange(1, N + 1, dtype=float)
    ln = np.log(n)
    total = err = absum = 0.0
    nev = 0
    for log_g, logy, coef in ((log_g1, ln - math.log(X), lam[:N] * np.exp(-s * ln)),
                              (log_g2, ln + math.log(X), eps * lam[:N] * np.exp((s - 1) * ln))):
        c = _resolve_afe(None, float(abs(logy).max()), [s + a], lambda u: log_g(u))
        fine, coarse, absw, dropped, m = _weight_table(log_g, logy, c, workers)
        f = pairwise_sum(coef * fine)
        total += f
        err += abs(f - pairwise_sum(coef * coarse)) + dropped * float(np.abs(coef).sum())
        absum += float(pairwise_sum(np.abs(coef) * absw))
        nev += m
    return complex(total), float(err + _EPS * absum + tl), N, nev


def l_central_gl2(g: HeckeTable, s=0.5, tol: float | None = 1e-8, workers=None) -> LValue:
    """L(s, g) for a level-one holomorphic Hecke eigenform by its smoothed functional equation.

    The sum is evaluated at the two balances X in GL2_BALANCE; the value is
    independent of X exactly when the functional equation holds, so their
    difference is reported as ``fe_residual`` and bounds the self_error.
    """
    k = _check_gl2(g)
    s = complex(s)
    key = (g.label, g.N, hash(g.values.tobytes()), s, tol)
    if key in _L_CACHE:
        return _L_CACHE[key]
    target = 0.1 * tol if tol is not None else 1e-10
    runs = [_gl2_afe(g, k, s, X, target, workers) for X in GL2_BALANCE]
    value, err, N, nev = runs[0]
    resid = abs(value - runs[1][0])
    out = LValue(value, max(err, resid), resid, N, nev + runs[1][3])
    if tol is not None and out.self_error > tol * max(1.0, abs(value)):
        raise AccuracyError(
            f"L(s, g) self_error {out.self_error:.3e} exceeds tolerance (fe residual {resid:.3e})",
            achieved=out.self_error, values=(value,))
    _L_CACHE[key] = out
    return out


# ---------------------------------------------------------------------------
# Diagonal weight


@dataclass(frozen=True)
class DiagonalResult:
    """D(mu) with the residue prediction L(1,g) gamma(1/2, F~)/gamma(1/2, F)."""

    value: complex
    self_error: float
    prediction: complex
    L1g: float
    terms: int
    evaluations: int

    @property
    def remainder(self) -> complex:
        return self.value - self.prediction

    def to_dict(self) -> dict:
        r = self.remainder
        return {"re": self.value.real, "im": self.value.imag, "self_error": self.self_error,
                "prediction_re": self.prediction.real, "prediction_im": self.prediction.imag,
                "remainder_abs": abs(r), "remainder_rel": abs(r) / abs(self.prediction),
                "L1g": self.L1g, "terms": self.terms, "evaluations": self.evaluations}


def _weight_log_integrand(kind: WeightKind, mu, k):
    num, den = _ratio_spec(kind, mu, k)
    _check_poles([0.5 + a for a in den.shifts], "diagonal weight denominator")

    def log_g(u):
        return _log_ratio(u, num, den) + u * u - np.log(u)

    return log_g, num.shifts


def diagonal_weight(mu, k: int, g: HeckeTable, contour: ContourSpec | None = None,
                    L1g: float | None = None, tol: float | None = 1e-8,
                    workers=None) -> DiagonalResult:
    """D(mu) = (2 pi i)^-2 iint L(1 + u1 + u2, g) gamma(1/2 + u1, F~)/gamma(1/2, F)
    gamma(1/2 + u2, g x F)/gamma(1/2, g x F) G(u1) G(u2) du1/u1 du2/u2.

    On Re u1, Re u2 > 0 the L-series converges absolutely, so the double
    integral factors as sum_n lambda(n)/n V~(n) W(n) with the single AFE
    weights of this module; the n-sum is truncated with a divisor tail bound
    from |weight(y)| <= y^(-sigma) int |integrand|. ``contour`` (if given)
    fixes the line for both weights. ``L1g`` defaults to l_central_gl2(g, 1)
    for validated tables (NaN otherwise, e.g. for rescaled tables).
    """
    if k % 2 or k < 2:
        raise ValidationError("k must be an even positive integer")
    mu = (mu if isinstance(mu, SpectralPoint) else SpectralPoint(tuple(mu))).mu
    lv, sv = _weight_log_integrand(WeightKind.VTILDE, mu, k)
    lw, sw = _weight_log_integrand(WeightKind.W, mu, k)
    if L1g is None:
        L1g = l_central_gl2(g, 1.0, workers=workers).value.real if g.multiplicative else math.nan
    prediction = complex(L1g * weight_limit(WeightKind.VTILDE, mu, k))

    lam = np.conj(g.values)
    kappa = _coefficient_scale(lam)
    mv = [(t, _abs_mass(lv, t, AFE_H)) for t in TAIL_SIGMAS]
    mw = [(t, _abs_mass(lw, t, AFE_H)) for t in TAIL_SIGMAS]

    def tail(N):
        return kappa * min(a * b * arith.divisor_tail_bound(2, N, 1 + t1 + t2)
                           for t1, a in mv for t2, b in mw)

    scale = max(1.0, abs(prediction)) if math.isfinite(abs(prediction)) else 1.0
    target = (0.1 * tol if tol is not None else 1e-10) * scale
    N, tl = _pick_length(tail, g.N, target)
    ln = np.log(np.arange(1, N + 1, dtype=float))
    coef = lam[:N] / np.arange(1, N + 1)
    tabs = []
    for log_g, shifts in ((lv, sv), (lw, sw)):
        c = contour if contour is not None else _resolve_afe(None, float(ln[-1]), shifts, log_g)
        c = _resolve_afe(c, float(ln[-1]), shifts)
        tabs.append(_weight_table(log_g, ln, c, workers))
    (fv, cv, av, dv, nv), (fw, cw, aw, dw, nw) = tabs
    fine = pairwise_sum(coef * fv * fw)
    coarse = pairwise_sum(coef * cv * cw)
    ac = np.abs(coef)
    absum = float(pairwise_sum(ac * av * aw))
    drop = float(pairwise_sum(ac * (dv * (aw + dw) + dw * av)))
    err = abs(fine - coarse) + _EPS * absum + drop + tl
    out = DiagonalResult(complex(fine), float(err), prediction, float(L1g), N, nv + nw)
    if tol is not None and not err <= tol * max(1.0, abs(out.value)):
        raise AccuracyError(f"diagonal weight self_error {err:.3e} exceeds tolerance",
                            achieved=err, values=(out.value,))
    return out


# ---------------------------------------------------------------------------
# Spectral integral of the main term

MAIN_PREFACTOR = 1.0 / (192 * math.pi**5)
L1G_TABLE_N = 2**17
MAIN_HALVINGS = 3


@dataclass(frozen=True)
class MainTermConfig:
    """Inputs of main_term_integral.

    ``L1g`` is computed from the level-one weight-k form when omitted (or
    from ``g`` if given). ``m_func`` replaces M(mu, k) (arrays in, array
    out), e.g. a constant for mass checks; ``grid`` overrides the default
    lattice of build_grid(tf).
    """

    tf: TestFunctionSpec
    k: int = 16
    grid: SpectralGrid | None = None
    L1g: float | None = None
    g: HeckeTable | None = None
    m_func: object = field(default=None, repr=False)
    tol: float | None = 1e-6

    def __post_init__(self):
        if self.k % 2 or self.k < 12:
            raise ConfigurationError("k must be an even weight >= 12 with a level-one cusp form")

    def resolved_L1g(self, workers=None) -> float:
        if self.L1g is not None:
            return float(self.L1g)
        g = self.g if self.g is not None else hecke_eigenvalues_holomorphic(self.k, L1G_TABLE_N)
        return l_central_gl2(g, 1.0, workers=workers).value.real


@dataclass(frozen=True)
class MainTermResult:
    value: complex
    self_error: float
    per_T_ratio: float
    L1g: float
    evaluations: int

    def to_dict(self) -> dict:
        return {"re": self.value.real, "im": self.value.imag, "self_error": self.self_error,
                "per_T_ratio": self.per_T_ratio, "L1g": self.L1g, "evaluations": self.evaluations}


def main_term_integral(cfg: MainTermConfig, workers=None) -> MainTermResult:
    """(1/192 pi^5) iint M(mu, k) h(mu) spec(mu) over Re mu = 0 on a lattice.

    The grid error is the difference to the even sublattice (step 2 eta).
    ``per_T_ratio`` = |value| / (T^3 R^2); spec keeps one sign on the
    spectral plane, so this is the |spec|-weighted magnitude.
    """
    tf = cfg.tf
    if tf.T > 40:
        raise ConfigurationError("main_term_integral is limited to desk scale T <= 40")
    if cfg.grid is not None:
        return _main_term_on(cfg, _grid_for(tf, cfg.grid), workers)
    # M's Gamma-ratio phases turn at rate ~ log(T + k) per unit of mu, which
    # R/8 does not resolve; refine until the sublattice check passes
    eta = min(tf.R / 8, 0.5 / math.log(tf.T + cfg.k))
    for attempt in range(MAIN_HALVINGS + 1):
        try:
            return _main_term_on(cfg, build_grid(tf, eta=eta), workers)
        except AccuracyError:
            if attempt == MAIN_HALVINGS:
                raise
            eta /= 2


def _main_term_on(cfg: MainTermConfig, grid: SpectralGrid, workers) -> MainTermResult:
    tf = cfg.tf
    if cfg.m_func is None:
        L1g = cfg.resolved_L1g(workers)
        mu, w_full, w_sub = _nodes_for(grid, True)

        def mfun(m):
            return np.asarray(m_main(m, cfg.k, L1g), dtype=complex)
    else:
        L1g = math.nan if cfg.L1g is None else float(cfg.L1g)
        mu, w_full, w_sub = _full(grid)

        def mfun(m):
            return np.broadcast_to(np.asarray(cfg.m_func(m), dtype=complex), m[0].shape)

    def block(sl):
        mb = mfun(tuple(x[sl] for x in mu))
        return mb * w_full[sl], mb * w_sub[sl]

    parts = ordered_map(block, chunked(w_full.size), workers)
    full = np.concatenate([p[0] for p in parts])
    sub = np.concatenate([p[1] for p in parts])
    value = MAIN_PREFACTOR * pairwise_sum(full)
    coarse = MAIN_PREFACTOR * pairwise_sum(sub)
    abs_sum = MAIN_PREFACTOR * float(pairwise_sum(np.abs(full)))
    err = abs(value - coarse) + _EPS * abs_sum
    out = MainTermResult(complex(value), float(err), float(abs(value) / (tf.T**3 * tf.R**2)),
                         L1g, int(w_full.size))
    if cfg.tol is not None and not err <= cfg.tol * abs(out.value):
        raise AccuracyError(f"main-term grid error {err:.3e} exceeds tolerance",
                            achieved=err, values=(out.value,))
    return out
