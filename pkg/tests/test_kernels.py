import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kzlab.errors import AccuracyError, DomainError, ValidationError
from kzlab.kernels import (ContourSpec, Rule, g_big, g_tilde, k_w4, k_w6, log_cos_pi,
                           log_sin_pi, s_trig)
from kzlab.spectral import WEYL_GROUP, weyl_apply

MU = (1j, 0.4j, -1.4j)


def _mp_g_tilde(s, mu, sign, dps=60):
    with mp.workdps(dps):
        p1 = mp.fprod([mp.gamma((s - m) / 2) * mp.rgamma((1 - s + m) / 2) for m in mu])
        p2 = mp.fprod([mp.gamma((1 + s - m) / 2) * mp.rgamma((2 - s + m) / 2) for m in mu])
        pre = mp.pi ** (-3 * s) / (12288 * mp.pi ** mp.mpf(3.5))
        return complex(pre * (p1 + sign * 1j * p2)), complex(pre * p2)


def _k_w4_residues(y, mu, nmax=120):
    """Closing the contour to the left: residues at s = mu_j - 2n and mu_j - 1 - 2n."""
    eps = 1 if y > 0 else -1
    with mp.workdps(60):
        Y = mp.mpf(abs(y))
        mu = [mp.mpc(m) for m in mu]
        pre = lambda s: mp.pi ** (-3 * s) / (12288 * mp.pi ** mp.mpf(3.5))  # noqa: E731
        tot = mp.mpc(0)
        for j in range(3):
            for n in range(nmax):
                c = 2 * (-1) ** n / mp.factorial(n)
                s0 = mu[j] - 2 * n
                num = mp.fprod([mp.gamma((s0 - mu[k]) / 2) for k in range(3) if k != j])
                den = mp.fprod([mp.rgamma((1 - s0 + mu[k]) / 2) for k in range(3)])
                tot += c * Y ** (-s0) * pre(s0) * num * den
                s1 = mu[j] - 1 - 2 * n
                num = mp.fprod([mp.gamma((1 + s1 - mu[k]) / 2) for k in range(3) if k != j])
                den = mp.fprod([mp.rgamma((2 - s1 + mu[k]) / 2) for k in range(3)])
                tot += eps * 1j * c * Y ** (-s1) * pre(s1) * num * den
        return complex(tot)


def test_log_trig_helpers():
    z = np.array([0.3 + 0.2j, -1.7 - 4j, 2.5 + 60j, 0.25 - 300j])
    for v, f, g in ((z, log_sin_pi, np.sin), (z, log_cos_pi, np.cos)):
        small = np.abs(v.imag) < 50
        assert np.allclose(np.exp(f(v[small])), g(np.pi * v[small]), rtol=1e-13)
    assert np.isfinite(log_sin_pi(0.25 - 300j))


def test_g_tilde_at_mu_zero():
    with mp.workdps(40):
        ref = mp.pi ** -0.75 / (12288 * mp.pi ** 3.5) * (
            mp.gamma(0.125) ** 3 / mp.gamma(0.375) ** 3 + 1j * mp.gamma(0.625) ** 3 / mp.gamma(0.875) ** 3)
    assert abs(g_tilde(0.25, (0, 0, 0), 1) - complex(ref)) <= 1e-13 * abs(complex(ref))


@pytest.mark.parametrize("s", [0.25, 0.3 + 5j, -2.5 - 30j, 0.25 + 200j, 3 - 100j])
def test_g_tilde_high_precision(s):
    mu = (2j, -0.5j, -1.5j)
    for sign in (1, -1):
        with mp.workdps(400):
            p1 = mp.fprod([mp.gamma((s - m) / 2) * mp.rgamma((1 - s + m) / 2) for m in mu])
            p2 = mp.fprod([mp.gamma((1 + s - m) / 2) * mp.rgamma((2 - s + m) / 2) for m in mu])
            ref = complex(mp.pi ** (-3 * s) / (12288 * mp.pi ** mp.mpf(3.5)) * (p1 + sign * 1j * p2))
        assert abs(g_tilde(s, mu, sign) - ref) <= 1e-11 * abs(ref)


def test_g_tilde_symmetry_and_sign_difference():
    s = 0.25 + 3j
    mu = (2j, -0.5j, -1.5j)
    assert g_tilde(s, mu, 1) == g_tilde(s, (mu[1], mu[0], mu[2]), 1)
    _, second = _mp_g_tilde(s, mu, 1)
    diff = g_tilde(s, mu, 1) - g_tilde(s, mu, -1)
    assert abs(diff - 2j * second) <= 1e-13 * abs(second)


def test_g_tilde_pole_guard():
    with pytest.raises(DomainError, match=r"mu_2"):
        g_tilde(0.5j + 1e-8, (1j, 0.5j, -1.5j), 1)
    with pytest.raises(DomainError, match=r"1 \+ s - mu_1"):
        g_tilde(-1 + 1j, (1j, 0.5j, -1.5j), -1)
    with pytest.raises(ValidationError):
        g_tilde(0.25, MU, 0)


def test_g_tilde_no_overflow_large_arguments():
    for s in (0.25 + 1000j, 0.25 - 1000j):
        v = g_tilde(s, (1000j, -500j, -500j), 1)
        assert math.isfinite(abs(v))


def test_g_big_examples():
    assert abs(g_big(1, 1, (0, 0, 0)) - 1) < 1e-14
    s = 0.3 + 0.7j
    ref = complex(mp.gamma(s) ** 6 / mp.gamma(2 * s))
    assert abs(g_big(s, s, (0, 0, 0)) - ref) <= 1e-13 * abs(ref)
    mu = (2j, -0.5j, -1.5j)
    s1, s2 = 0.25 + 1j, 0.25 - 2j
    assert g_big(s1, s2, mu) == g_big(s1, s2, (mu[2], mu[0], mu[1]))
    ref = complex(mp.fprod([mp.gamma(s1 - m) * mp.gamma(s2 + m) for m in mu]) / mp.gamma(s1 + s2))
    assert abs(g_big(s1, s2, mu) - ref) <= 1e-13 * abs(ref)
    with pytest.raises(DomainError):
        g_big(-0.5 + 1j, -0.5 - 1j, (0, 0, 0))


def _mp_s(e1, e2, s1, s2, mu):
    nu = [(mu[0] - mu[1]) / 3, (mu[1] - mu[2]) / 3, (mu[2] - mu[0]) / 3]
    S, C, p = mp.sin, mp.cos, mp.pi
    if (e1, e2) == (1, 1):
        return C(1.5 * p * nu[0]) * C(1.5 * p * nu[1]) * C(1.5 * p * nu[2]) / (24 * p**2)
    if (e1, e2) == (1, -1):
        return -C(1.5 * p * nu[1]) * S(p * (s1 - mu[0])) * S(p * (s2 + mu[1])) * S(p * (s2 + mu[2])) / (
            32 * p**2 * S(1.5 * p * nu[0]) * S(1.5 * p * nu[2]) * S(p * (s1 + s2)))
    if (e1, e2) == (-1, 1):
        return -C(1.5 * p * nu[0]) * S(p * (s1 - mu[0])) * S(p * (s1 - mu[1])) * S(p * (s2 + mu[2])) / (
            32 * p**2 * S(1.5 * p * nu[1]) * S(1.5 * p * nu[2]) * S(p * (s1 + s2)))
    return C(1.5 * p * nu[2]) * S(p * (s1 - mu[1])) * S(p * (s2 + mu[1])) / (
        32 * p**2 * S(1.5 * p * nu[1]) * S(1.5 * p * nu[0]))


@pytest.mark.parametrize("eps", [(1, 1), (1, -1), (-1, 1), (-1, -1)])
def test_s_trig_against_mpmath(eps):
    mu = (2j, -0.5j, -1.5j)
    s1, s2 = 0.3 + 2j, 0.25 - 1j
    with mp.workdps(30):
        ref = complex(_mp_s(*eps, s1, s2, mu))
    assert abs(s_trig(*eps, s1, s2, mu) - ref) <= 1e-11 * abs(ref)


def test_s_trig_examples():
    assert abs(s_trig(1, 1, 0.1, 0.2, (0, 0, 0)) - 1 / (24 * math.pi**2)) < 1e-16
    mu = (2j, -0.5j, -1.5j)
    assert s_trig(1, 1, 0.25, 0.25, mu) == s_trig(1, 1, 0.7 + 3j, -0.1 - 2j, mu)
    # (-,-) contains sin(pi (s1 - mu2)): forced zero at s1 = mu2 + 2
    assert s_trig(-1, -1, mu[1] + 2, 0.3, mu) == 0
    with pytest.raises(DomainError, match="nu_2"):
        s_trig(-1, -1, 0.25, 0.25, (2j, -1j, -1j))
    with pytest.raises(DomainError, match="nu_1"):
        s_trig(1, -1, 0.25, 0.25, (-1j, -1j, 2j))
    with pytest.raises(DomainError, match="s1 \\+ s2"):
        s_trig(1, -1, 0.5 + 1j, 0.5 - 1j, mu)


@pytest.mark.parametrize("y, mu", [(0.5, MU), (-2.0, (2j, -0.5j, -1.5j)), (10.0, (3j, 1j, -4j))])
def test_k_w4_against_residue_series(y, mu):
    ref = _k_w4_residues(y, mu)
    res = k_w4(y, mu)
    assert abs(res.value - ref) <= 1e-11 * abs(ref)
    assert res.self_error <= 1e-8 * abs(res.value)


def test_k_w4_contour_independence():
    for y in (10.0, -10.0, 0.01, 3162.0):
        vals = [k_w4(y, MU, ContourSpec(sigma=sg)).value for sg in (0.25, 1 / 3, 1.0)]
        assert abs(vals[0] - vals[1]) <= 1e-11 * abs(vals[0])
        assert abs(vals[0] - vals[2]) <= 1e-11 * abs(vals[0])


def test_k_w4_weyl_invariance_is_exact():
    base = k_w4(3.0, MU).value
    for w in WEYL_GROUP:
        assert k_w4(3.0, weyl_apply(w, MU)).value == base


def test_k_w4_conjugation_identity():
    for y in (0.7, -4.0):
        a = k_w4(y, MU).value
        b = k_w4(-y, tuple(-m for m in MU)).value
        assert abs(a.conjugate() - b) <= 1e-12 * abs(a)


def test_k_w4_refinement_and_rules_agree():
    base = k_w4(2.0, MU)
    ref = base.contour.refined()
    fine = k_w4(2.0, MU, ref)
    assert abs(fine.value - base.value) <= 1e-12 * abs(base.value)
    # vertical lines converge only conditionally; the error estimate must cover the gap
    vert = k_w4(2.0, MU, ContourSpec(sigma=0.25, tilt=0.0, H=400.0), tol=None)
    assert abs(vert.value - base.value) <= vert.self_error
    gl = k_w4(2.0, MU, ContourSpec(sigma=0.25, rule=Rule.GAUSS_SEGMENT))
    assert abs(gl.value - base.value) <= 1e-10 * abs(base.value)
    assert abs(base.value) <= base.abs_sum


def test_k_w4_coarse_contour_raises():
    with pytest.raises(AccuracyError):
        k_w4(2.0, MU, ContourSpec(sigma=0.25, H=20.0, step=0.4, tilt=0.0))
    res = k_w4(2.0, MU, ContourSpec(sigma=0.25, H=20.0, step=0.4, tilt=0.0), tol=None)
    assert res.self_error > 1e-8 * abs(res.value)


def test_k_w4_domain_errors():
    with pytest.raises(DomainError):
        k_w4(1.0, (-0.4, 0.2, 0.2), ContourSpec(sigma=0.1))
    with pytest.raises(ValidationError):
        k_w4(0.0, MU)


def test_contour_spec_validation():
    with pytest.raises(ValidationError):
        ContourSpec(H=10.0, step=1.0)
    with pytest.raises(ValidationError):
        ContourSpec(tilt=-1.0)
    c = ContourSpec(H=100.0, step=0.1, tilt=1.0, bend=20.0)
    assert c.resolved and c.refined().H == 200.0 and c.refined().step == 0.05


def test_k_w4_workers_bit_identical():
    a = k_w4(5.0, MU, workers=1)
    b = k_w4(5.0, MU, workers=4)
    assert a.value == b.value and a.self_error == b.self_error


def test_k_w6_convolution_matches_direct():
    y1, y2 = 0.01, 0.02
    a = k_w6(y1, y2, MU, method="convolution")
    b = k_w6(y1, y2, MU, a.contour, method="direct")
    assert abs(a.value - b.value) <= 1e-10 * abs(a.value)
    assert abs(a.value) <= a.abs_sum


def test_k_w6_contour_independence_and_swap():
    a = k_w6(0.01, 0.02, MU)
    b = k_w6(0.01, 0.02, MU, ContourSpec(sigma=0.35, tilt=0.0))
    assert abs(a.value - b.value) <= 1e-8 * abs(a.value)
    c = k_w6(0.02, 0.01, tuple(-m for m in MU))
    assert abs(a.value - c.value) <= 1e-8 * abs(a.value)
    for w in WEYL_GROUP:
        assert k_w6(0.01, 0.02, weyl_apply(w, MU)).value == a.value


def test_k_w6_variant_selection():
    mixed = k_w6(0.5, -0.7, MU)
    assert mixed.contour.tilt > 0
    forced = k_w6(0.5, -0.7, MU, variant=(1, 1), tol=None)
    assert abs(forced.value - mixed.value) > 1e-6 * abs(mixed.value)
    with pytest.raises(ValidationError):
        k_w6(0.01, 0.02, MU, variant=(1, 0))
    with pytest.raises(ValidationError):
        k_w6(0.5, -0.7, MU, method="convolution")


_imag = st.floats(-3, 3, allow_nan=False)


@settings(max_examples=25, deadline=None)
@given(a=_imag, b=_imag, t=st.floats(-50, 50), sign=st.sampled_from([1, -1]))
def test_g_tilde_is_permutation_invariant(a, b, t, sign):
    mu = (1j * a, 1j * b, -1j * (a + b))
    s = 0.25 + 1j * t
    ref = g_tilde(s, mu, sign)
    for w in WEYL_GROUP:
        assert g_tilde(s, weyl_apply(w, mu), sign) == ref


@settings(max_examples=10, deadline=None)
@given(a=_imag, b=_imag, y=st.floats(0.01, 100) | st.floats(-100, -0.01))
def test_k_w4_bounded_by_absolute_sum(a, b, y):
    mu = (1j * a, 1j * b, -1j * (a + b))
    res = k_w4(y, mu, tol=None)
    assert abs(res.value) <= res.abs_sum
    assert res.self_error <= 1e-8 * abs(res.value) + 1e-13 * res.abs_sum
