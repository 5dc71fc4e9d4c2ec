import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kzlab.afe import (GammaFactorSpec, MainTermConfig, afe_weight, diagonal_weight,
                       gamma_factor, gamma_ratios, l_central_gl2, m_main, main_term_integral,
                       weight_limit)
from kzlab.errors import ConfigurationError, DomainError, ValidationError
from kzlab.hecke import HeckeTable, constant_table, hecke_eigenvalues_holomorphic
from kzlab.kernels import ContourSpec
from kzlab.spectral import WEYL_GROUP, TestFunctionSpec, weyl_apply
from kzlab.special import zeta
from kzlab.transforms import SpectralGrid, build_grid

MU = (20j, -8j, -12j)
LOG_GR = lambda z: -z / 2 * math.log(math.pi) + math.lgamma(z / 2)  # noqa: E731


# ---------------------------------------------------------------------------
# gamma factors


def test_gamma_factor_examples():
    assert abs(gamma_factor(GammaFactorSpec("gl3", (0, 0, 0)), 1.0)) < 1e-13
    want = 3 * (LOG_GR(2.0) + LOG_GR(3.0))
    assert abs(gamma_factor(GammaFactorSpec("rankin", (0, 0, 0), 4), 0.5) - want) < 1e-13
    sym = (3j, 0j, -3j)
    for s in (0.5, 0.3 + 2j):
        a = gamma_factor(GammaFactorSpec("gl3", sym), s)
        b = gamma_factor(GammaFactorSpec("gl3-dual", sym), s)
        assert abs(a - b) < 1e-13


def test_gamma_factor_against_mpmath():
    mu, s = (1 + 2j, -0.5j, -1 - 1.5j), 0.7 + 0.4j
    want = sum(-(s - m) / 2 * mpmath.log(mpmath.pi) + mpmath.loggamma((s - m) / 2) for m in mu)
    got = gamma_factor(GammaFactorSpec("gl3", mu), s)
    assert abs(np.exp(got) - complex(mpmath.exp(want))) < 1e-12 * abs(complex(mpmath.exp(want)))


def test_gamma_factor_errors():
    with pytest.raises(DomainError):
        gamma_factor(GammaFactorSpec("gl3", (0, 0, 0)), 0.0)
    with pytest.raises(ValidationError):
        GammaFactorSpec("rankin", (0, 0, 0), 3)
    with pytest.raises(ValidationError):
        GammaFactorSpec("gl3", (1j, 1j, 1j))


# ---------------------------------------------------------------------------
# weights


def _mp_weight(y, num, den, sigma=1.0):
    """Independent oracle: mpmath quadrature of the weight integral on Re u = sigma."""
    lgr = lambda z: -z / 2 * mpmath.log(mpmath.pi) + mpmath.loggamma(z / 2)  # noqa: E731
    lden = sum(lgr(0.5 + a) for a in den)

    def f(t):
        u = sigma + 1j * t
        return mpmath.exp(-u * mpmath.log(y) + sum(lgr(0.5 + u + a) for a in num) - lden + u * u) / u

    return complex(mpmath.quad(f, [-12, -4, 0, 4, 12]) / (2 * mpmath.pi))


def test_afe_weight_against_mpmath():
    num = [-m for m in MU]
    for y in (0.3, 1.0, 50.0):
        r = afe_weight("V", y, MU)
        with mpmath.workdps(30):
            want = _mp_weight(y, num, num)
        assert abs(r.value - want) < 1e-11
        assert r.self_error <= 1e-10


def test_afe_weight_height_and_line_independence():
    for kind in ("V", "Vtilde", "W", "Wtilde"):
        a = afe_weight(kind, 2.0, MU, 16, contour=ContourSpec(sigma=1.0, H=20.0, step=0.05, tilt=0.0))
        b = afe_weight(kind, 2.0, MU, 16, contour=ContourSpec(sigma=1.0, H=40.0, step=0.05, tilt=0.0))
        c = afe_weight(kind, 2.0, MU, 16, contour=ContourSpec(sigma=3.0, H=20.0, tilt=0.0), tol=None)
        assert abs(a.value - b.value) < 1e-12
        assert abs(a.value - c.value) < 1e-8 + c.self_error


def test_afe_weight_limits_small_y():
    # residue at u = 0 dominates once y is small against the conductor
    for kind in ("V", "Vtilde", "W", "Wtilde"):
        lim = weight_limit(kind, MU, 16)
        r = afe_weight(kind, 1e-3, MU, 16)
        assert abs(r.value / lim - 1) < 1e-7
    r1, r2 = gamma_ratios(MU, 16)
    assert abs(weight_limit("Vt", MU) - r1) < 1e-12
    assert abs(weight_limit("Wt", MU, 16) - r2) < 1e-12
    assert weight_limit("V", MU) == pytest.approx(1.0, abs=1e-13)


def test_afe_weight_decay():
    r = afe_weight("V", 100 * 21**3, MU)
    assert abs(r.value) <= 1e-6


def LOG_GR_C(z):
    return complex(-z / 2 * mpmath.log(mpmath.pi) + mpmath.loggamma(z / 2))


def test_afe_weight_pole_hook():
    c = ContourSpec(sigma=1.0, H=20.0, tilt=0.0)
    base = afe_weight("V", 3.0, MU, contour=c)
    up, rp = 0.5, 0.7
    corrected = afe_weight("V", 3.0, MU, contour=c, poles=[(up, rp)])
    num, den = [-m for m in MU], [-m for m in MU]
    lden = sum(LOG_GR_C(0.5 + a) for a in den)
    f = np.exp(-up * math.log(3.0) + sum(LOG_GR_C(0.5 + up + a) for a in num) - lden + up * up) / up
    assert abs(corrected.value - (base.value - rp * f)) < 1e-13
    # poles left of the line are not crossed
    left = afe_weight("V", 3.0, MU, contour=ContourSpec(sigma=0.25, H=20.0, tilt=0.0), poles=[(up, rp)])
    assert abs(left.value - base.value) < 1e-10


def test_afe_weight_validation():
    with pytest.raises(ValidationError):
        afe_weight("V", -1.0, MU)
    with pytest.raises(ValidationError):
        afe_weight("V", 1.0, MU, contour=ContourSpec(sigma=-1.0, tilt=0.0))
    with pytest.raises(ValidationError):
        afe_weight("V", 1.0, MU, contour=ContourSpec(sigma=1.0, tilt=0.5))
    with pytest.raises(ValueError):
        afe_weight("X", 1.0, MU)


# ---------------------------------------------------------------------------
# main-term formula


def test_m_main_examples():
    L1 = 1.25
    assert abs(m_main((0, 0, 0), 16, L1) - (2 * zeta(1.5).real + 2 * L1)) < 1e-12
    assert abs(m_main((3j, 0j, -3j), 16, L1).imag) < 1e-12
    # terms 1-2 are k-independent: difference of two k's only through R2
    mu = (2j, 1j, -3j)
    r1, r2a = gamma_ratios(mu, 12)
    _, r2b = gamma_ratios(mu, 16)
    z = zeta(1.5).real
    assert abs(m_main(mu, 12, L1) - m_main(mu, 16, L1) - (L1 + z * r1) * (r2a - r2b)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(-30, 30), st.floats(-30, 30))
def test_m_main_weyl_invariant(a, b):
    mu = (1j * a, 1j * b, -1j * (a + b))
    ref = m_main(mu, 16, 1.4)
    for w in WEYL_GROUP:
        assert abs(m_main(weyl_apply(w, mu), 16, 1.4) - ref) <= 1e-12 * max(1.0, abs(ref))


def test_m_main_pole():
    with pytest.raises(DomainError):
        m_main((-0.5, 0.25, 0.25), 16, 1.0)


# ---------------------------------------------------------------------------
# degree-2 L-values


def _q_coefficients(k, N):
    """Integer q-expansion of the level-one weight-k eigenform (k = 12, 16), by hand."""
    delta = [0] * (N + 1)
    prod = [1] + [0] * N
    for n in range(1, N + 1):  # prod (1 - q^n)^24
        for _ in range(24):
            for m in range(N, n - 1, -1):
                prod[m] -= prod[m - n]
    for n in range(1, N + 1):
        delta[n] = prod[n - 1]
    if k == 12:
        return delta
    e4 = [1] + [240 * sum(d**3 for d in range(1, n + 1) if n % d == 0) for n in range(1, N + 1)]
    return [sum(e4[i] * delta[n - i] for i in range(n + 1)) for n in range(N + 1)]


def _mp_l_value(k, s, N=40):
    """L(s, g) from Lambda(s) = sum a(n)[(2 pi n)^-s Gamma(s, 2 pi n) + i^k (2 pi n)^(s-k) Gamma(k-s, 2 pi n)]."""
    a = _q_coefficients(k, N)
    with mpmath.workdps(30):
        w = mpmath.mpf(s) + mpmath.mpf(k - 1) / 2
        eps = mpmath.mpc(1j) ** k
        lam = 0
        for n in range(1, N + 1):
            x = 2 * mpmath.pi * n
            lam += a[n] * (x ** (-w) * mpmath.gammainc(w, x) + eps * x ** (w - k) * mpmath.gammainc(k - w, x))
        return complex(lam * (2 * mpmath.pi) ** w / mpmath.gamma(w))


@pytest.fixture(scope="module")
def g16():
    return hecke_eigenvalues_holomorphic(16, 2**16)


@pytest.fixture(scope="module")
def g12():
    return hecke_eigenvalues_holomorphic(12, 2**16)


def test_q_oracle_coefficients():
    assert _q_coefficients(12, 3)[2] == -24
    assert _q_coefficients(16, 3)[2] == 216


@pytest.mark.parametrize("k,s", [(12, 0.5), (16, 0.5), (16, 1.0)])
def test_l_central_gl2_against_incomplete_gamma(k, s, g12, g16):
    g = g12 if k == 12 else g16
    r = l_central_gl2(g, s)
    assert abs(r.value - _mp_l_value(k, s)) < 1e-9
    assert r.fe_residual <= 1e-8
    assert r.self_error <= 1e-8 * max(1.0, abs(r.value))


def test_l_central_gl2_stable_under_truncation(g16):
    a = l_central_gl2(hecke_eigenvalues_holomorphic(16, 2**15), 1.0, tol=None)
    b = l_central_gl2(g16, 1.0, tol=None)
    assert abs(a.value - b.value) <= 1e-8 + a.self_error


def test_l_central_gl2_rejects_tables():
    with pytest.raises(ValidationError):
        l_central_gl2(constant_table(100), 0.5)
    bad = HeckeTable("scaled", "holomorphic", 16.0, 2 * hecke_eigenvalues_holomorphic(16, 100).values,
                     validate=False)
    with pytest.raises(ValidationError):
        l_central_gl2(bad, 0.5)


# ---------------------------------------------------------------------------
# diagonal weight

L1_16 = 1.39870251545394  # l_central_gl2(weight-16 form, 1), checked above against the oracle


def test_diagonal_weight_matches_weight_products(g16):
    mu = (5j, -2j, -3j)
    r = diagonal_weight(mu, 16, g16, L1g=L1_16, tol=None)
    lam = g16.values
    want = sum(lam[n - 1] / n * afe_weight("Vtilde", n, mu, 16, tol=None).value
               * afe_weight("W", n, mu, 16, tol=None).value for n in range(1, r.terms + 1))
    assert abs(r.value - want) < 1e-12
    assert r.self_error < 1e-9
    assert abs(r.prediction - L1_16 * weight_limit("Vtilde", mu)) < 1e-13


def test_diagonal_weight_linear_in_table(g16):
    mu = (10j, -4j, -6j)
    base = diagonal_weight(mu, 16, g16, L1g=L1_16)
    scaled = HeckeTable("x3", "holomorphic", 16.0, 3 * g16.values, validate=False)
    r = diagonal_weight(mu, 16, scaled, L1g=3 * L1_16)
    assert abs(r.value - 3 * base.value) < 1e-9
    assert math.isnan(diagonal_weight(mu, 16, scaled, tol=None).L1g)


def test_diagonal_weight_zero_mu_ratio(g16):
    r = diagonal_weight((0, 0, 0), 16, g16, L1g=L1_16, tol=None)
    assert abs(r.prediction - L1_16) < 1e-13
    assert r.self_error < 1e-8


def test_diagonal_weight_remainder_scale(g16):
    # all |mu_j| in [5, 40]; the remainder relative to prod |mu_j|^(-1/4) never exceeds
    # the constant read off at the first point
    scan = []
    for t in (12.5, 20.0, 27.5, 35.0, 40.0):
        mu = (1j * t, -0.4j * t, -0.6j * t)
        r = diagonal_weight(mu, 16, g16, L1g=L1_16)
        scale = math.prod(abs(m) for m in mu) ** -0.25
        scan.append(abs(r.remainder) / abs(r.prediction) / scale)
    assert all(c <= scan[0] * 1.01 for c in scan)


# ---------------------------------------------------------------------------
# main-term integral

TF10 = TestFunctionSpec(10.0)


def test_main_term_linear_in_h():
    a = main_term_integral(MainTermConfig(TF10, 16, L1g=L1_16))
    b = main_term_integral(MainTermConfig(TF10.scaled(2.0), 16, L1g=L1_16))
    assert abs(b.value - 2 * a.value) <= 1e-12 * abs(a.value)
    assert a.per_T_ratio == pytest.approx(abs(a.value) / (10.0**3 * TF10.R**2))


def test_main_term_axis_relabelling():
    grid = build_grid(TF10, eta=0.1)
    swapped = SpectralGrid(grid.center, grid.W, grid.eta, grid.ij[:, ::-1].copy(),
                           (grid.mu[1], grid.mu[0], grid.mu[2]), grid.weight)
    a = main_term_integral(MainTermConfig(TF10, 16, grid=grid, L1g=L1_16))
    b = main_term_integral(MainTermConfig(TF10, 16, grid=swapped, L1g=L1_16))
    assert abs(a.value - b.value) <= 1e-12 * abs(a.value)


def test_main_term_gaussian_mass():
    eta = 0.1
    i = np.arange(-80, 81)
    I, J = (x.ravel() for x in np.meshgrid(i, i, indexing="ij"))
    t1, t2 = eta * I, eta * J
    w = np.exp(-(t1**2 + t2**2 + (t1 + t2) ** 2)) * eta**2
    grid = SpectralGrid(TF10.mu0, 8.0, eta, np.stack([I, J], axis=1),
                        (1j * t1, 1j * t2, -1j * (t1 + t2)), w.astype(complex), symmetric=False)
    r = main_term_integral(MainTermConfig(TF10, 16, grid=grid, m_func=lambda m: 1.0))
    want = math.pi / math.sqrt(3) / (192 * math.pi**5)
    assert abs(r.value - want) <= 1e-6 * want


def test_main_term_config_errors():
    with pytest.raises(ConfigurationError):
        MainTermConfig(TF10, 15)
    with pytest.raises(ConfigurationError):
        main_term_integral(MainTermConfig(TestFunctionSpec(50.0), 16, L1g=L1_16))
    with pytest.raises(ValidationError):
        main_term_integral(MainTermConfig(TF10, 16, grid=build_grid(TestFunctionSpec(12.0)), L1g=1.0))
