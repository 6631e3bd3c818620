import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from tentfarey.specfun import (
    bessel_j,
    bessel_kernel,
    dilog,
    laguerre,
    laguerre_functions,
    quad_gen_laguerre,
    quad_legendre,
)


def test_bessel_at_origin():
    assert bessel_j(1, 0.0) == 0.0
    assert bessel_j(0, 0.0) == 1.0


def test_bessel_matches_taylor_series():
    x = 2.0
    ref = math.fsum((-1) ** m * (x / 2) ** (2 * m + 1) / (math.factorial(m) * math.factorial(m + 1)) for m in range(40))
    assert abs(bessel_j(1, x) - ref) <= 1e-13 * abs(ref)


@pytest.mark.parametrize("p", [0, 1, 2, 3, 5])
def test_bessel_against_scipy(p):
    x = np.concatenate([np.linspace(0.0, 50.0, 2001), np.linspace(50.0, 400.0, 500)])
    got = bessel_j(p, x)
    ref = special.jv(p, x)
    small = x <= 50
    # relative where the function is not near a zero, absolute otherwise
    err = np.abs(got - ref)
    assert np.all(err[small] <= 1e-13 * np.maximum(np.abs(ref[small]), 1.0) + 1e-15)
    assert np.all(err[~small] <= 1e-13)


def test_bessel_against_mpmath_high_precision():
    for p, x in [(1, 3.7), (3, 11.2), (1, 39.9), (2, 45.0)]:
        ref = float(mpmath.besselj(p, x))
        assert abs(bessel_j(p, x) - ref) <= 1e-13 * max(abs(ref), 1.0)


def test_bessel_domain():
    with pytest.raises(ValueError):
        bessel_j(1, -1.0)
    with pytest.raises(ValueError):
        bessel_j(-1, 1.0)


def test_bessel_kernel_continuity_at_zero():
    # J_p(2 sqrt u)/u^(p/2) -> 1/p! as u -> 0
    for p in (1, 3):
        assert bessel_kernel(p, 0.0) == pytest.approx(1.0 / math.factorial(p), rel=1e-15)
        u = np.array([3.9, 4.0, 4.1, 30.0])
        ref = special.jv(p, 2 * np.sqrt(u)) / u ** (p / 2)
        assert np.allclose(bessel_kernel(p, u), ref, rtol=1e-12, atol=1e-15)


def test_laguerre_small_cases():
    assert laguerre(0, 1, 7.3) == 1.0
    for x in (-1.0, 0.0, 0.4, 3.0):
        assert laguerre(1, 1, x) == pytest.approx(2 - x, abs=1e-15)


def _explicit_sum(k, alpha, x: Fraction) -> Fraction:
    return sum(Fraction(math.comb(k + alpha, k - l)) * (-x) ** l / math.factorial(l) for l in range(k + 1))


def test_laguerre_rational_oracle():
    assert laguerre(3, 1, 1.0) == pytest.approx(float(_explicit_sum(3, 1, Fraction(1))), abs=1e-15)
    for k in range(0, 13):
        for x in (Fraction(1, 3), Fraction(5, 2), Fraction(9)):
            ref = float(_explicit_sum(k, 1, x))
            assert laguerre(k, 1, float(x)) == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_laguerre_overflow_is_reported():
    with pytest.raises(OverflowError):
        laguerre(400, 1, 1e300)


def test_laguerre_functions_orthonormal():
    rule = quad_gen_laguerre(3, 80)
    F = laguerre_functions(30, 3, rule.nodes)
    # rows carry e^{-x/2}, so the plain (e^{x}-scaled) weights apply
    G = (F * rule.scaled_weights) @ F.T
    assert np.max(np.abs(G - np.eye(30))) < 1e-12


def test_dilog_values():
    assert dilog(0.0) == 0.0
    assert dilog(1.0) == pytest.approx(math.pi ** 2 / 6, abs=1e-15)
    ref = math.pi ** 2 / 12 - math.log(2) ** 2 / 2
    series = math.fsum(0.5 ** k / k ** 2 for k in range(1, 201))
    assert dilog(0.5) == pytest.approx(ref, abs=1e-14)
    assert dilog(0.5) == pytest.approx(series, abs=1e-14)
    with pytest.raises(ValueError):
        dilog(1.5)


@pytest.mark.parametrize("q", [i / 10 for i in range(1, 10)])
def test_dilog_reflection(q):
    lhs = dilog(q) + dilog(1 - q) - math.pi ** 2 / 6 + math.log(q) * math.log(1 - q)
    assert abs(lhs) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=-50.0, max_value=1.0))
def test_dilog_against_mpmath(q):
    assert dilog(q) == pytest.approx(float(mpmath.polylog(2, q)), rel=1e-13, abs=1e-14)


def test_gen_laguerre_single_node():
    rule = quad_gen_laguerre(1, 1)
    assert rule.integrate(lambda t: t) == pytest.approx(2.0, rel=1e-15)


def test_gen_laguerre_exponential():
    rule = quad_gen_laguerre(1, 20)
    assert abs(rule.integrate(lambda t: np.exp(-t)) - 0.25) <= 1e-12


@pytest.mark.parametrize("alpha,n", [(1, 5), (1, 40), (3, 25), (0, 60), (1, 300)])
def test_gen_laguerre_moments(alpha, n):
    rule = quad_gen_laguerre(alpha, n)
    # far weights fall below the double range; their logs stay exact
    assert np.all(np.isfinite(rule.log_weights))
    assert np.all(rule.weights >= 0) and np.all(rule.weights[: n // 2] > 0)
    assert np.all(np.diff(rule.nodes) > 0)
    for j in range(0, min(2 * n, 60)):
        exact = math.exp(math.lgamma(alpha + j + 1))
        got = float(np.exp(np.logaddexp.reduce(rule.log_weights + j * np.log(rule.nodes))))
        assert got == pytest.approx(exact, rel=1e-11)


def test_gen_laguerre_against_scipy_nodes():
    x, w = special.roots_genlaguerre(50, 1.0)
    rule = quad_gen_laguerre(1, 50)
    assert np.allclose(rule.nodes, x, rtol=1e-13)
    assert np.allclose(rule.weights, w, rtol=1e-10, atol=1e-300)


def test_laguerre_orthogonality_norm_sqrt_k():
    rule = quad_gen_laguerre(1, 30)
    for k in range(8):
        for j in range(8):
            ip = rule.integrate(lambda t: laguerre(k, 1, t) * laguerre(j, 1, t))
            assert ip == pytest.approx((k + 1) * (k == j), abs=1e-10)


@pytest.mark.parametrize("a,b", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_bessel_laplace_identity(a, b):
    # int_0^inf e^{-a s} J_1(b s) ds, via the alpha = 0 rule after s = u / a
    rule = quad_gen_laguerre(0, 200)
    s = rule.nodes / a
    got = float(np.dot(rule.weights, bessel_j(1, b * s))) / a
    h = math.hypot(a, b)
    assert abs(got - (h - a) / (b * h)) <= 1e-8


def test_legendre_exact_cubic():
    rule = quad_legendre(0.0, 1.0, 16)
    assert rule.integrate(lambda x: x ** 3) == pytest.approx(0.25, abs=1e-15)
    assert np.all(rule.weights > 0)
    assert np.all(np.diff(rule.nodes) > 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=40), st.floats(-3, 3), st.floats(0.1, 4))
def test_legendre_polynomial_exactness(n, a, width):
    rule = quad_legendre(a, a + width, n)
    deg = 2 * n - 1
    got = rule.integrate(lambda x: x ** deg)
    exact = ((a + width) ** (deg + 1) - a ** (deg + 1)) / (deg + 1)
    assert got == pytest.approx(exact, rel=1e-11, abs=1e-11 * max(1.0, abs(a) + width) ** (deg + 1))


def test_quadrature_arguments():
    with pytest.raises(ValueError):
        quad_gen_laguerre(1, 0)
    with pytest.raises(ValueError):
        quad_legendre(1.0, 0.0, 4)
