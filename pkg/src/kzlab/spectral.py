"""Langlands / spectral parameter algebra on the SL(3) Cartan, the Weyl
group, the localised test function h and the spectral density.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError


def _triple(mu):
    mu = tuple(complex(x) for x in mu)
    if len(mu) != 3:
        raise ValidationError(f"expected a triple, got {len(mu)} components")
    return mu


def nu_from_mu(mu, tol=1e-10):
    mu1, mu2, mu3 = _triple(mu)
    residual = mu1 + mu2 + mu3
    if abs(residual) > tol:
        raise ValidationError(f"Langlands parameters must sum to zero (residual {residual})")
    nu1 = (mu1 - mu2) / 3
    nu2 = (mu2 - mu3) / 3
    return (nu1, nu2, -nu1 - nu2)


def mu_from_nu(nu1, nu2):
    nu1, nu2 = complex(nu1), complex(nu2)
    return (2 * nu1 + nu2, nu2 - nu1, -nu1 - 2 * nu2)


def in_lambda_prime(mu, c, tol=1e-12) -> bool:
    """Membership in Lambda'_c: bounded real parts, zero sum, and
    {-mu_j} equal to {conj(mu_j)} as multisets."""
    mu = _triple(mu)
    if abs(sum(mu)) > tol or any(abs(m.real) > c + tol for m in mu):
        return False
    neg = sorted((-m for m in mu), key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    conj = sorted((m.conjugate() for m in mu), key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    return all(abs(a - b) <= tol for a, b in zip(neg, conj))


@dataclass(frozen=True)
class SpectralPoint:
    mu: tuple
    nu: tuple = field(init=False)

    def __post_init__(self):
        mu = _triple(self.mu)
        if abs(sum(mu)) > 1e-12 * max(1.0, max(abs(m) for m in mu)):
            raise ValidationError(f"mu must sum to zero, got residual {sum(mu)}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "nu", nu_from_mu(mu, tol=1e-10 * max(1.0, max(abs(m) for m in mu))))

    @classmethod
    def from_nu(cls, nu1, nu2):
        return cls(mu_from_nu(nu1, nu2))

    @property
    def norm(self) -> float:
        return math.sqrt(sum(abs(m) ** 2 for m in self.mu))

    def in_lambda_prime(self, c) -> bool:
        return in_lambda_prime(self.mu, c)


# Matrix representatives of the Weyl group of SL(3, R).
_WEYL_MATRICES = {
    "I": ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
    "w2": ((1, 0, 0), (0, 0, 1), (0, 1, 0)),
    "w3": ((0, 1, 0), (1, 0, 0), (0, 0, 1)),
    "w4": ((0, 1, 0), (0, 0, 1), (1, 0, 0)),
    "w5": ((0, 0, 1), (1, 0, 0), (0, 1, 0)),
    "w6": ((0, 0, 1), (0, 1, 0), (1, 0, 0)),
}


def _perm_from_matrix(m):
    """Read off sigma from w diag(a) w^-1 = diag(a_sigma(1), ..., a_sigma(3))."""
    w = np.array(m, dtype=float)
    probe = np.array([1.0, 10.0, 100.0])
    conj = w @ np.diag(probe) @ np.linalg.inv(w)
    diag = np.diag(conj)
    return tuple(int(np.argmin(np.abs(probe - d))) for d in diag)


@dataclass(frozen=True)
class WeylElement:
    id: str
    perm: tuple

    def __call__(self, mu):
        return weyl_apply(self, mu)


WEYL_GROUP = tuple(WeylElement(k, _perm_from_matrix(m)) for k, m in _WEYL_MATRICES.items())
WEYL = {w.id: w for w in WEYL_GROUP}


def weyl_apply(w: WeylElement, mu):
    """Permute the coordinates of ``mu``; works on triples of scalars or arrays."""
    p = w.perm
    return (mu[p[0]], mu[p[1]], mu[p[2]])


class GaussianSign(str, enum.Enum):
    PAPER_LITERAL = "paper-literal"
    DECAYING = "decaying"


# Default direction for mu0: |mu_j| and |nu_j| all of size comparable to ||mu||.
DEFAULT_DIRECTION = (2.5, -0.5, -2.0)


def default_mu0(T: float, direction=DEFAULT_DIRECTION):
    d = np.asarray(direction, dtype=float)
    d = d - d.mean()
    d = d / np.linalg.norm(d)
    return tuple(complex(0.0, T * x) for x in d)


@dataclass(frozen=True)
class TestFunctionSpec:
    """Parameters of the test function h localising at radius R = T^theta around mu0."""

    __test__ = False  # not a pytest class

    T: float
    theta: float = 0.5
    A0: int = 1
    mu0: tuple | None = None
    gaussian_sign: GaussianSign = GaussianSign.DECAYING
    scale: float = 1.0
    check_generic: bool = True

    def __post_init__(self):
        if self.T <= 0:
            raise ValidationError("T must be positive")
        if not 0 < self.theta < 1:
            raise ValidationError("theta must lie in (0, 1)")
        if int(self.A0) != self.A0 or self.A0 < 1:
            raise ValidationError("A0 must be a positive integer")
        mu0 = default_mu0(self.T) if self.mu0 is None else _triple(self.mu0)
        if any(abs(m.real) > 1e-12 for m in mu0):
            raise ValidationError("mu0 must be purely imaginary")
        SpectralPoint(mu0)
        if self.check_generic and not all(self.T / 10 <= abs(m) <= 10 * self.T for m in mu0):
            raise ValidationError(f"mu0={mu0} is not in generic position: need |mu0_j| in [T/10, 10T]")
        object.__setattr__(self, "mu0", mu0)
        object.__setattr__(self, "gaussian_sign", GaussianSign(self.gaussian_sign))

    @property
    def R(self) -> float:
        return self.T ** self.theta

    @property
    def nu0(self):
        return nu_from_mu(self.mu0)

    def scaled(self, c: float) -> "TestFunctionSpec":
        return TestFunctionSpec(self.T, self.theta, self.A0, self.mu0, self.gaussian_sign,
                                self.scale * c, self.check_generic)


def _psi(x, sign: GaussianSign):
    q = x[0] ** 2 + x[1] ** 2 + x[2] ** 2
    return np.exp(q) if sign is GaussianSign.DECAYING else np.exp(-q)


def polynomial_P(mu, spec: TestFunctionSpec):
    """P(mu): forced zeros at nu_j = +-(1+2n)/3, each factor j scaled by |nu0_j|^2."""
    mu = tuple(np.asarray(m, dtype=complex) for m in mu)
    nu = ((mu[0] - mu[1]) / 3, (mu[1] - mu[2]) / 3, (mu[2] - mu[0]) / 3)
    nu0 = spec.nu0
    out = np.ones(np.broadcast(*mu).shape, dtype=complex)
    for n in range(1, spec.A0 + 1):
        c = (1 + 2 * n) / 3
        for j in range(3):
            out = out * (nu[j] - c) * (nu[j] + c) / abs(nu0[j]) ** 2
    return out


def test_function_h(mu, spec: TestFunctionSpec):
    """h(mu) = P(mu)^2 (sum_w psi((w mu - mu0)/R))^2.

    Real and non-negative on the spectral plane; complex in general.
    Accepts scalar triples or triples of equally shaped arrays.
    """
    mu = tuple(np.asarray(m, dtype=complex) for m in mu)
    R = spec.R
    mu0 = spec.mu0
    total = 0
    for w in WEYL_GROUP:
        wm = weyl_apply(w, mu)
        total = total + _psi(tuple((wm[j] - mu0[j]) / R for j in range(3)), spec.gaussian_sign)
    val = spec.scale * polynomial_P(mu, spec) ** 2 * total ** 2
    if all(np.all(np.abs(m.real) < 1e-14) for m in mu):
        val = val.real
    return val[()] if np.ndim(val) == 0 else val


test_function_h.__test__ = False


def spec_measure(mu, pole_tol=1e-8):
    """prod_j 3 nu_j tan(3 pi nu_j / 2)."""
    mu = tuple(np.asarray(m, dtype=complex) for m in mu)
    nu = ((mu[0] - mu[1]) / 3, (mu[1] - mu[2]) / 3, (mu[2] - mu[0]) / 3)
    out = 1
    for v in nu:
        z = 1.5 * v - 0.5
        if np.any(np.abs(z - np.round(z.real)) < pole_tol):
            raise DomainError("spec_measure: nu_j is at a pole of tan(3 pi nu / 2)")
        out = out * 3 * v * np.tan(1.5 * np.pi * v)
    out = np.asarray(out)
    return complex(out) if out.ndim == 0 else out


def parse_triple(text: str):
    """Parse "re1,im1;re2,im2[;re3,im3]"; a missing third entry is inferred."""
    parts = [p for p in text.replace(" ", "").split(";") if p]
    if len(parts) not in (2, 3):
        raise ValidationError(f"triple literal needs 2 or 3 components: {text!r}")
    vals = []
    for p in parts:
        bits = p.split(",")
        if len(bits) == 1:
            vals.append(complex(float(bits[0]), 0.0))
        elif len(bits) == 2:
            vals.append(complex(float(bits[0]), float(bits[1])))
        else:
            raise ValidationError(f"bad complex literal {p!r}")
    if len(vals) == 2:
        vals.append(-vals[0] - vals[1])
    elif abs(sum(vals)) > 1e-10:
        raise ValidationError(f"triple {text!r} does not sum to zero")
    return tuple(vals)


def parse_complex(text: str) -> complex:
    bits = text.replace(" ", "").split(",")
    if len(bits) == 1:
        return complex(float(bits[0]), 0.0)
    if len(bits) == 2:
        return complex(float(bits[0]), float(bits[1]))
    raise ValidationError(f"bad complex literal {text!r}")
