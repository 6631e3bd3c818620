import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from tentfarey.maps import Params
from tentfarey.measures import density_e, density_h, pf_apply, pf_branch_apply
from tentfarey.spectral import (
    BasisSpec,
    CoeffVector,
    NotInL2Error,
    borel_transform,
    borel_transform_fn,
    density_preimage,
    eigen_M_closed,
    eigen_N_closed,
    eigen_N_norm_factor,
    eigen_N_params,
    eigenvalue_N,
    kernel_check,
    matrix_M,
    matrix_N,
    matrix_P,
    matrix_to_csv,
    preimage_coeffs,
    project,
    r0_polynomial_eigenfunction,
    spectrum_P,
    spectrum_to_json,
    trace_closed,
    trace_fixed_points,
)
from tentfarey.spectral import _laguerre_2t, eigen_M_norm_factor

X_GRID = np.linspace(0.05, 1.0, 40)


# ------------------------------------------------------------------ basis

@pytest.mark.parametrize("q,scale", [(0, 1.0), (1, 1.0), (0, 3.0), (2, 1.7)])
def test_basis_norms_by_quadrature(q, scale):
    b = BasisSpec(q, 12, scale)
    for k in (0, 3, 11):
        f = lambda t: special.eval_genlaguerre(k, b.alpha, scale * t) ** 2 * np.exp(-(scale - 1) * t) * t ** b.alpha * np.exp(-t)
        val, _ = integrate.quad(f, 0, np.inf, limit=400)
        assert b.norms()[k] ** 2 == pytest.approx(val, rel=1e-9)


def test_basis_validation_and_helpers():
    with pytest.raises(ValueError):
        BasisSpec(-1, 5)
    with pytest.raises(ValueError):
        BasisSpec(0, 0)
    b = BasisSpec.adapted(Params(0.5), 1, 30)
    assert b.scale == pytest.approx(3.0) and b.alpha == 3 and b.is_adapted_to(Params(0.5))
    assert BasisSpec.adapted(Params(1.0)).scale == 1.0
    assert b.with_N(10).N == 10 and b.with_q(0).q == 0
    with pytest.raises(ValueError):
        CoeffVector(b, np.zeros(3))


def test_projection_round_trip():
    b = BasisSpec(0, 30, 2.0)
    c = np.zeros(30)
    c[[0, 4, 9]] = [1.0, -0.5, 0.25]
    v = CoeffVector(b, c)
    back = project(v, b)
    assert np.allclose(back.coeffs, c, atol=1e-12)
    t = np.array([0.1, 1.0, 7.0])
    ref = sum(ck * special.eval_genlaguerre(k, 1, 2.0 * t) * np.exp(-0.5 * t) for k, ck in enumerate(c))
    assert np.allclose(v(t), ref, rtol=1e-12)


# ------------------------------------------------------------------ Borel

@pytest.mark.parametrize("r", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("k", [1, 2, 5])
def test_borel_of_M_eigenfunction(r, k):
    p = Params(r)
    d = p.delta
    fn = lambda t: t ** (k - 1) * np.exp(-(r / d) * t)
    ref = math.factorial(k) * d ** (k + 1) * X_GRID ** (k - 1) / (d + r * X_GRID) ** (k + 1)
    assert np.allclose(borel_transform_fn(fn, X_GRID), ref, rtol=1e-12, atol=1e-14)
    v = project(fn, BasisSpec.adapted(p))
    assert np.allclose(borel_transform(v, X_GRID), ref, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("k", [0, 1, 4, 9])
def test_borel_of_laguerre_2t(k):
    v = _laguerre_2t(BasisSpec(0, 30), k)
    ref = (k + 1) * (1 - 2 * X_GRID) ** k
    assert np.allclose(borel_transform(v, X_GRID), ref, rtol=1e-10, atol=1e-11)
    fn = lambda t: special.eval_genlaguerre(k, 1, 2 * t)
    assert np.allclose(borel_transform_fn(fn, X_GRID), ref, rtol=1e-10, atol=1e-11)


def test_borel_definition_by_direct_integral():
    # x^-2 int e^{-t/x} phi(t) t dt with scipy, for a generic CoeffVector on a non-unit scale
    b = BasisSpec(0, 8, 1.6)
    v = CoeffVector(b, np.array([1.0, -0.3, 0.2, 0.0, 0.05, 0.0, 0.0, 0.01]))
    for x in (0.05, 0.3, 1.0):
        val, _ = integrate.quad(lambda t: np.exp(-t / x) * v(t) * t, 0, np.inf, limit=400)
        assert borel_transform(v, x) == pytest.approx(val / x ** 2, rel=1e-9)
    with pytest.raises(ValueError):
        borel_transform(v, 0.0)
    with pytest.raises(ValueError):
        borel_transform_fn(lambda t: t, -1.0)


@pytest.mark.parametrize("r", [0.0, 0.3, 0.5, 0.9])
def test_preimages_map_to_densities(r):
    p = Params(r)
    e, h = density_e(p), density_h(p)
    assert np.max(np.abs(borel_transform(preimage_coeffs(p, "e"), X_GRID) - e(X_GRID))) <= 1e-9
    assert np.max(np.abs(borel_transform(preimage_coeffs(p, "h"), X_GRID) - h(X_GRID))) <= 1e-9
    assert np.allclose(borel_transform_fn(density_preimage(p, "e"), X_GRID), e(X_GRID), rtol=1e-12)


def test_gauss_preimage_and_exclusion():
    p = Params(1.0)
    with pytest.raises(NotInL2Error):
        density_preimage(p, "e")
    h = density_h(p)
    assert np.max(np.abs(borel_transform(preimage_coeffs(p, "h"), X_GRID) - h(X_GRID))) <= 1e-9
    with pytest.raises(ValueError):
        density_preimage(p, "x")


# ------------------------------------------------------------------ M

@pytest.mark.parametrize("r", [0.0, 0.2, 0.5, 0.8])
def test_matrix_M_closed_vs_quadrature(r):
    p = Params(r)
    b = BasisSpec.adapted(p, 0, 30)
    A = matrix_M(p, b, "closed").entries
    B = matrix_M(p, b, "quadrature").entries
    assert np.max(np.abs(A - B)) <= 1e-12
    assert np.all(np.tril(A, -1) == 0.0)


def test_matrix_M_applied_matches_definition():
    p = Params(0.4)
    b = BasisSpec(1, 40, 1.0)
    fn = lambda t: np.exp(-0.7 * t) * (1 + t)
    v = project(fn, b)
    got = matrix_M(p, b).apply(v)
    ref = project(lambda t: p.rho ** -2 * np.exp(-p.r * t / p.rho) * fn(t / p.rho), b)
    assert np.allclose(got.orthonormal, ref.orthonormal, atol=1e-10)


def test_matrix_M_gauss_is_multiplication():
    p = Params(1.0)
    b = BasisSpec(0, 60)
    A = matrix_M(p, b).entries
    assert np.max(np.abs(A - A.T)) <= 1e-12
    v = project(lambda t: np.exp(-t) * t, b)
    ref = project(lambda t: np.exp(-2 * t) * t, b)
    # truncation only disturbs the last rows
    got = matrix_M(p, b).apply(v).orthonormal
    assert np.max(np.abs(got[:20] - ref.orthonormal[:20])) <= 1e-10


@pytest.mark.parametrize("r", [0.0, 0.2, 0.5, 0.8])
def test_M_eigenvalues(r):
    p = Params(r)
    ev = np.sort(matrix_M(p, BasisSpec.adapted(p)).eigvals().real)[::-1]
    assert np.max(np.abs(ev[:10] - p.rho ** -np.arange(1, 11))) <= 1e-8
    assert eigen_M_closed(Params(0.5), 1)[0] == pytest.approx(2 / 3)


@pytest.mark.parametrize("r", [0.2, 0.5, 0.8])
def test_M_eigenfunction_residuals(r):
    p = Params(r)
    b = BasisSpec.adapted(p)
    A = matrix_M(p, b)
    for k in range(1, 9):
        mu, v = eigen_M_closed(p, k, b)
        res = np.linalg.norm(A.entries @ v.orthonormal - mu * v.orthonormal)
        assert res <= 1e-8
        assert v.norm() == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("r", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("k", [1, 2, 4])
def test_A_k_normalizes(r, k):
    p = Params(r)
    c = r / p.delta
    val, _ = integrate.quad(lambda t: t ** (2 * k - 2) * np.exp(-2 * c * t) * t * np.exp(-t), 0, np.inf)
    assert eigen_M_norm_factor(p, k) == pytest.approx(1 / math.sqrt(val), rel=1e-12)
    with pytest.raises(ValueError):
        eigen_M_closed(Params(1.0), 1)


# ------------------------------------------------------------------ N

@pytest.mark.parametrize("r", [0.0, 0.3, 0.5, 1.0])
@pytest.mark.parametrize("scale", [1.0, 2.0])
def test_N_rank_vs_bessel(r, scale):
    p = Params(r)
    b = BasisSpec(0, 30, scale)
    A = matrix_N(p, b, "rank").entries
    B = matrix_N(p, b, "bessel").entries
    assert np.max(np.abs(A - B)) <= 1e-9


def test_N_rank_vs_bessel_q1():
    p = Params(0.5)
    b = BasisSpec(1, 20)
    assert np.max(np.abs(matrix_N(p, b, "rank").entries - matrix_N(p, b, "bessel").entries)) <= 1e-9
    with pytest.raises(ValueError):
        matrix_N(p, b, "other")


@pytest.mark.parametrize("r", [0.0, 0.5, 1.0])
def test_N_eigenvalues_alternate(r):
    p = Params(r)
    ev = matrix_N(p, BasisSpec(0, 50)).eigvals()
    ref = np.array([eigenvalue_N(p, k) for k in range(1, 9)])
    assert np.max(np.abs(ev[:8] - ref)) <= 1e-8
    assert np.all(np.sign(ev[:8].real) == (-1.0) ** np.arange(8))


def test_N_eigenvalue_examples():
    assert eigenvalue_N(Params(0.5), 1) == pytest.approx(6 / (1 + math.sqrt(7)) ** 2, abs=1e-15)
    for k in range(1, 6):
        assert eigenvalue_N(Params(0.0), k) == pytest.approx((-1) ** (k - 1) * 2.0 ** -k, abs=1e-15)
        g = (math.sqrt(5) - 1) / 2
        assert eigenvalue_N(Params(1.0), k) == pytest.approx((-1) ** (k - 1) * g ** (2 * k), abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 1.0), st.integers(1, 10))
def test_N_eigenvalue_two_forms(r, k):
    p = Params(r)
    _, beta = eigen_N_params(p)
    alt = (-1) ** (k - 1) * p.rho ** -k * (1 + beta) ** (-2 * k)
    assert eigenvalue_N(p, k) == pytest.approx(alt, rel=1e-14, abs=1e-300)


@pytest.mark.parametrize("r", [0.0, 0.5, 1.0])
def test_N_eigenfunction_residuals(r):
    p = Params(r)
    b = BasisSpec(0, 50)
    A = matrix_N(p, b)
    for k in range(1, 7):
        nu, v = eigen_N_closed(p, k, b)
        assert np.linalg.norm(A.entries @ v.orthonormal - nu * v.orthonormal) <= 1e-8


@pytest.mark.parametrize("r", [0.0, 0.4, 0.7, 1.0])
@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_B_k_normalizes(r, k):
    p = Params(r)
    al, be = eigen_N_params(p)
    f = lambda t: (special.eval_genlaguerre(k - 1, 1, al * t) * np.exp(-be * t)) ** 2 * t * np.exp(-t)
    val, _ = integrate.quad(f, 0, np.inf, limit=200)
    assert eigen_N_norm_factor(p, k) == pytest.approx(1 / math.sqrt(val), rel=1e-10)


# ------------------------------------------------------------------ traces

@pytest.mark.parametrize("r", [0.0, 0.3, 0.5])
def test_traces_match_closed_forms(r):
    p = Params(r)
    ba = BasisSpec.adapted(p)
    b1 = BasisSpec(0, 50)
    tM = matrix_M(p, ba).trace()
    N1 = matrix_N(p, b1)
    assert abs(tM - trace_closed(p, "M")) <= 1e-7
    assert abs(N1.trace() - trace_closed(p, "N")) <= 1e-8
    assert abs((N1 @ N1).trace() - trace_closed(p, "N2")) <= 1e-8


def test_trace_examples():
    assert trace_closed(Params(0.0), "P") == pytest.approx(4 / 3, abs=1e-15)
    assert trace_closed(Params(0.0), "N2") == pytest.approx(1 / 3, abs=1e-15)
    assert trace_closed(Params(0.0), "N") == pytest.approx(1 / 3, abs=1e-15)
    assert trace_closed(Params(1.0), "N") == pytest.approx((math.sqrt(5) - 1) / (2 * math.sqrt(5)), abs=1e-15)
    assert trace_closed(Params(1.0), "M") == math.inf
    assert trace_closed(Params(0.5), "P") == pytest.approx(2.311018, abs=1e-6)
    with pytest.raises(ValueError):
        trace_closed(Params(0.5), "Q")
    tr1 = matrix_N(Params(1.0), BasisSpec(0, 40)).trace()
    assert tr1 == pytest.approx(trace_closed(Params(1.0), "N"), abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 0.999))
def test_trace_fixed_point_route(r):
    p = Params(r)
    assert trace_fixed_points(p) == pytest.approx(trace_closed(p, "P"), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.one_of(st.just(0.0), st.floats(1e-6, 1.0)))
def test_trace_N2_below_trace_N(r):
    p = Params(r)
    if r == 0.0:
        assert trace_closed(p, "N2") == pytest.approx(trace_closed(p, "N"), abs=1e-15)
    else:
        assert trace_closed(p, "N2") < trace_closed(p, "N")


# ------------------------------------------------------------------ kernel and symmetry

@pytest.mark.parametrize("r", [0.0, 0.5, 1.0])
@pytest.mark.parametrize("k", [1, 3, 5])
def test_kernel_check(r, k):
    assert kernel_check(Params(r), k) <= 1e-7
    with pytest.raises(ValueError):
        kernel_check(Params(r), 2)


@pytest.mark.parametrize("r", [0.0, 0.5, 1.0])
@pytest.mark.parametrize("k", [0, 2, 4])
def test_N_and_M_on_even_laguerre(r, k):
    p = Params(r)
    b = BasisSpec(0, 50)
    v = _laguerre_2t(b, k).orthonormal
    lhs = matrix_N(p, b).entries @ v
    rhs = (-1) ** k * matrix_M(p, b).entries @ v
    assert np.max(np.abs(lhs - rhs)) <= 1e-8 * np.linalg.norm(v)


def test_odd_image_killed_by_transfer_operator():
    for r in (0.0, 0.5, 1.0):
        x = np.linspace(0, 1, 201)
        assert np.max(np.abs(pf_apply(Params(r), lambda y: 2 * (1 - 2 * y), x))) <= 1e-13


def test_symmetry_at_r1():
    A = matrix_P(Params(1.0), BasisSpec(0, 50)).entries
    assert np.max(np.abs(A - A.T)) <= 1e-10


# ------------------------------------------------------------------ Borel images of eigenfunctions

@pytest.mark.parametrize("r", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_chi_k_eigen_of_left_branch(r, k):
    p = Params(r)
    d = p.delta
    chi = lambda x: math.factorial(k) * d ** (k + 1) * x ** (k - 1) / (d + r * x) ** (k + 1)
    lhs = pf_branch_apply(p, chi, X_GRID, 0)
    assert np.max(np.abs(lhs - p.rho ** -k * chi(X_GRID))) <= 1e-9


@pytest.mark.parametrize("r", [0.0, 0.5, 1.0])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_xi_k_eigen_of_right_branch(r, k):
    p = Params(r)
    al, be = eigen_N_params(p)
    psi = lambda t: special.eval_genlaguerre(k - 1, 1, al * t) * np.exp(-be * t)
    xi = lambda x: borel_transform_fn(psi, np.atleast_1d(x))
    lhs = pf_branch_apply(p, xi, X_GRID, 1)
    assert np.max(np.abs(lhs - eigenvalue_N(p, k) * xi(X_GRID))) <= 1e-9


# ------------------------------------------------------------------ r = 0 polynomial eigenfunctions

def test_r0_spectrum_and_phi2():
    rep = spectrum_P(Params(0.0), BasisSpec(0, 40))
    ev = rep.eigenvalues
    assert np.max(np.abs(ev[:5] - 4.0 ** -np.arange(5))) <= 1e-8
    assert np.allclose(r0_polynomial_eigenfunction(1) * 2, [4.0, -6.0, 1.0], rtol=1e-15)
    assert np.allclose(r0_polynomial_eigenfunction(1), [2.0, -3.0, 0.5], rtol=1e-15)
    assert np.allclose(r0_polynomial_eigenfunction(0), [1.0])


def test_r0_phi4_constant():
    c = r0_polynomial_eigenfunction(2)
    assert np.allclose(c, [-8 / 3, 0.0, 10 / 3, -5 / 6, 1 / 24], rtol=1e-15, atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_r0_polynomial_is_eigenvector(n):
    b = BasisSpec(0, 40)
    P = matrix_P(Params(0.0), b)
    c = r0_polynomial_eigenfunction(n)
    v = project(lambda t: np.polynomial.polynomial.polyval(t, c), b)
    res = P.entries @ v.orthonormal - 4.0 ** -n * v.orthonormal
    assert np.linalg.norm(res) <= 1e-10 * v.norm()
    # independent check through the Borel image and the transfer operator
    f = lambda x: borel_transform(v, np.atleast_1d(x))
    x = np.linspace(0.05, 1, 30)
    assert np.max(np.abs(pf_apply(Params(0.0), f, x) - 4.0 ** -n * f(x))) <= 1e-9 * np.max(np.abs(f(x)))


# ------------------------------------------------------------------ reports and dumps

def test_spectrum_report_and_dumps():
    p = Params(0.5)
    rep = spectrum_P(p, BasisSpec.adapted(p, 0, 30), which="M")
    assert rep.stability[0] <= 1e-12
    assert rep.traces["closed"] == pytest.approx(2.0)
    doc = json.loads(spectrum_to_json(rep))
    assert set(doc) == {"params", "basis", "eigenvalues", "traces"}
    assert doc["eigenvalues"][0]["value"] == pytest.approx(2 / 3, abs=1e-12)
    text = matrix_to_csv(matrix_M(p, BasisSpec(0, 4)))
    lines = text.strip().split("\n")
    assert lines[0].startswith("# r=0.5,q=0,N=4")
    assert len(lines) == 5 and all(len(row.split(",")) == 4 for row in lines[1:])


@pytest.mark.slow
def test_r09_spectrum_real_in_unit_interval():
    p = Params(0.9)
    rep = spectrum_P(p, BasisSpec(0, 60))
    stable = rep.eigenvalues[rep.stability < 1e-8]
    assert stable.size > 0
    assert np.all(np.abs(stable.imag) <= 1e-8)
    assert np.all((stable.real >= -1e-8) & (stable.real <= 1 + 1e-8))
