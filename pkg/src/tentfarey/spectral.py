"""Transfer-operator matrices on L2(m_q), dm_q(t) = t^(2q+1) e^(-t) dt.

Functions live on (0, inf) and are expanded in scaled Laguerre functions

    b_k(t) = L_k^(p)(gamma t) exp(-(gamma - 1) t / 2),   p = 2q + 1,

which are orthogonal in L2(m_q) with ||b_k||^2 = Gamma(k+p+1) / (k! gamma^(p+1)).
gamma = 1 gives plain Laguerre polynomials. The generalized Borel transform

    B_q[phi](x) = x^(-2(1+q)) int e^(-t/x) phi(t) t^p dt

turns M_{r,q} + N_{r,q} into the transfer operator of F_r.

Matrices are stored in the orthonormal basis b_k/||b_k||; CoeffVector
holds coefficients on the b_k themselves.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .maps import Params, _as_params, fixed_point_x1, inverse_branch
from .specfun import bessel_kernel, laguerre, laguerre_functions, quad_gen_laguerre

__all__ = [
    "BasisSpec",
    "CoeffVector",
    "OperatorMatrix",
    "NotInL2Error",
    "project",
    "borel_transform",
    "borel_transform_fn",
    "matrix_M",
    "matrix_N",
    "matrix_P",
    "eigen_M_closed",
    "eigen_N_closed",
    "eigenvalue_N",
    "trace_closed",
    "trace_fixed_points",
    "kernel_check",
    "spectrum_P",
    "SpectrumReport",
    "density_preimage",
    "preimage_coeffs",
    "r0_polynomial_eigenfunction",
    "matrix_to_csv",
    "spectrum_to_json",
]


class NotInL2Error(ValueError):
    """The requested function is not square integrable against m_q."""


# ------------------------------------------------------------------- basis

@dataclass(frozen=True)
class BasisSpec:
    """Truncated scaled-Laguerre basis: q, dimension N and scale gamma."""

    q: int = 0
    N: int = 50
    scale: float = 1.0

    def __post_init__(self):
        if self.q < 0 or self.N < 1 or not self.scale > 0:
            raise ValueError("need q >= 0, N >= 1, scale > 0")

    @classmethod
    def adapted(cls, p: Params, q: int = 0, N: int = 50) -> "BasisSpec":
        """Scale (1+r)/(1-r): M_{r,q} is upper triangular in this basis (r < 1)."""
        p = _as_params(p)
        if p.intermittent or p.r == 0.0:
            return cls(q, N, 1.0)
        return cls(q, N, (1.0 + p.r) / p.delta)

    @property
    def alpha(self) -> int:
        return 2 * self.q + 1

    @property
    def decay(self) -> float:
        """c with b_k = L_k(gamma t) e^{-c t}."""
        return 0.5 * (self.scale - 1.0)

    def with_q(self, q: int) -> "BasisSpec":
        return replace(self, q=q)

    def with_N(self, N: int) -> "BasisSpec":
        return replace(self, N=N)

    def log_norms(self) -> np.ndarray:
        k = np.arange(self.N)
        a = self.alpha
        return 0.5 * (gammaln(k + a + 1) - gammaln(k + 1) - (a + 1) * math.log(self.scale))

    def norms(self) -> np.ndarray:
        return np.exp(self.log_norms())

    def half_functions(self, t, n: int | None = None) -> np.ndarray:
        """Orthonormal basis functions times e^{-t/2}, shape (n, len(t))."""
        n = self.N if n is None else n
        g = self.scale
        return laguerre_functions(n, self.alpha, g * np.asarray(t, dtype=float)) * g ** (0.5 * (self.alpha + 1))

    def is_adapted_to(self, p: Params) -> bool:
        p = _as_params(p)
        return (not p.intermittent) and p.r > 0 and math.isclose(self.scale, (1 + p.r) / p.delta, rel_tol=1e-14)


@lru_cache(maxsize=64)
def _rule(alpha: float, n: int):
    r = quad_gen_laguerre(alpha, n)
    return r.nodes, r.scaled_weights


def _nodes(alpha: float, n: int, kappa: float):
    """Nodes t and weights W with int g(t) t^alpha dt ~ sum W g(t) for g ~ poly * e^{-kappa t}."""
    u, sw = _rule(float(alpha), int(n))
    return u / kappa, sw / kappa ** (alpha + 1)


@dataclass(frozen=True)
class CoeffVector:
    """phi = sum coeffs[k] b_k."""

    basis: BasisSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.basis.N,):
            raise ValueError("coefficient length must equal basis.N")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_orthonormal(cls, basis: BasisSpec, v) -> "CoeffVector":
        return cls(basis, np.asarray(v, dtype=float) / basis.norms())

    @property
    def orthonormal(self) -> np.ndarray:
        return self.coeffs * self.basis.norms()

    def norm(self) -> float:
        return float(np.linalg.norm(self.orthonormal))

    def normalized(self) -> "CoeffVector":
        return CoeffVector(self.basis, self.coeffs / self.norm())

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        ta = np.atleast_1d(t)
        vals = self.orthonormal @ self.basis.half_functions(ta)
        # far out the e^{-t/2}-scaled values underflow; the function is 0 there anyway
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.where(vals == 0.0, 0.0, vals * np.exp(0.5 * ta))
        return float(out[0]) if t.ndim == 0 else out


def project(fn: Callable, basis: BasisSpec, n_quad: int | None = None) -> CoeffVector:
    """Orthogonal projection of fn onto the truncated basis (Gauss-Laguerre)."""
    n_quad = n_quad or max(2 * basis.N + 16, 240)
    kappa = 0.5 * (basis.scale + 1.0)
    t, W = _nodes(basis.alpha, n_quad, kappa)
    vals = np.asarray(fn(t), dtype=float) * np.exp(-0.5 * t)
    F = basis.half_functions(t)
    return CoeffVector.from_orthonormal(basis, F @ (W * vals))


# ------------------------------------------------------------ Borel transform

def borel_transform(phi: CoeffVector, x):
    """B_q[phi](x) for a basis expansion, in closed form term by term.

    B_q[b_k](x) = Gamma(k+p+1)/k! (1 + c x)^(-(p+1)) ((1 - (1+gamma) x/2)/(1 + c x))^k.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0):
        raise ValueError("x must be positive")
    b = phi.basis
    a, g, c = b.alpha, b.scale, b.decay
    k = np.arange(b.N)
    xs = np.atleast_1d(xa)
    ratio = (1.0 - 0.5 * (1.0 + g) * xs) / (1.0 + c * xs)
    # coefficient times Gamma(k+a+1)/k!, then a Horner sum in `ratio`
    w = phi.coeffs * np.exp(gammaln(k + a + 1) - gammaln(k + 1))
    acc = np.zeros_like(xs)
    for wk in w[::-1]:
        acc = acc * ratio + wk
    out = acc / (1.0 + c * xs) ** (a + 1)
    return float(out[0]) if xa.ndim == 0 else out


def borel_transform_fn(fn: Callable, x, q: int = 0, n_quad: int = 200):
    """B_q[fn](x) = int s^p e^{-s} fn(s x) ds for a callable fn (any x > 0)."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa <= 0):
        raise ValueError("x must be positive")
    s, W = _nodes(2 * q + 1, n_quad, 1.0)
    Wt = W * np.exp(-s)
    out = np.array([float(np.dot(Wt, fn(s * xv))) for xv in xa])
    return float(out[0]) if np.ndim(x) == 0 else out


# ------------------------------------------------------------ operators

@dataclass(frozen=True)
class OperatorMatrix:
    """Truncated operator; ``entries`` act on orthonormal coordinates."""

    basis: BasisSpec
    params: Params
    entries: np.ndarray
    which: str
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def coeff_matrix(self) -> np.ndarray:
        """Matrix acting on CoeffVector.coeffs (b_k convention)."""
        n = self.basis.norms()
        return self.entries * n[None, :] / n[:, None]

    def apply(self, v: CoeffVector) -> CoeffVector:
        return CoeffVector.from_orthonormal(self.basis, self.entries @ v.orthonormal)

    def trace(self) -> float:
        return math.fsum(np.diag(self.entries))

    def eigvals(self) -> np.ndarray:
        ev = np.linalg.eigvals(self.entries)
        return ev[np.argsort(-np.abs(ev), kind="stable")]

    def _combine(self, other: "OperatorMatrix", entries, which) -> "OperatorMatrix":
        if other.basis != self.basis or other.params != self.params:
            raise ValueError("operators live on different bases")
        return OperatorMatrix(self.basis, self.params, entries, which)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return self._combine(other, self.entries + other.entries, f"{self.which}+{other.which}")

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return self._combine(other, self.entries @ other.entries, f"{self.which}{other.which}")


def _log_binom(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def _matrix_M_closed(p: Params, basis: BasisSpec) -> np.ndarray:
    # multiplication theorem: L_k(gamma t/rho) = sum_j C(k+a, k-j) rho^-j (1-1/rho)^(k-j) L_j(gamma t)
    N, a, q = basis.N, basis.alpha, basis.q
    rho, delta = p.rho, p.delta
    j = np.arange(N)[:, None]
    k = np.arange(N)[None, :]
    upper = k >= j
    jj, kk = np.broadcast_arrays(j, k)
    logc = np.full((N, N), -np.inf)
    d = np.where(upper, kk - jj, 0)
    lc = (
        _log_binom(kk + a, d)
        - (1 + q + kk) * math.log(rho)
        + (d * math.log(delta) if delta > 0 else np.where(d == 0, 0.0, -np.inf))
    )
    logc = np.where(upper, lc, -np.inf)
    ln = basis.log_norms()
    # orthonormal: E = D C D^{-1}
    return np.exp(logc + ln[:, None] - ln[None, :])


def _matrix_M_quad(p: Params, basis: BasisSpec, n_quad: int) -> np.ndarray:
    rho, q, g = p.rho, basis.q, basis.scale
    kappa = 0.5 * g + 0.5 * g / rho + 0.5 * (1.0 + p.r) / rho
    t, W = _nodes(basis.alpha, n_quad, kappa)
    left = basis.half_functions(t)
    # (M e_k)(t) e^{-t/2} = rho^-(1+q) e^{-(1+r)t/(2 rho)} E_k(t/rho)
    right = basis.half_functions(t / rho) * np.exp(-0.5 * (1.0 + p.r) * t / rho) * rho ** -(1 + q)
    return (left * W) @ right.T


def matrix_M(p: Params, basis: BasisSpec, method: str = "auto", n_quad: int | None = None) -> OperatorMatrix:
    """M_{r,q} phi(t) = rho^-(1+q) e^{-r t/rho} phi(t/rho).

    method "auto" uses the exact triangular entries when the basis is adapted
    to r, quadrature otherwise.
    """
    p = _as_params(p)
    if method not in ("auto", "closed", "quadrature"):
        raise ValueError("method must be auto, closed or quadrature")
    if method == "closed" and not basis.is_adapted_to(p) and not (p.r == 0.0 and basis.scale == 1.0):
        raise ValueError("closed-form entries need the adapted basis")
    closed = method == "closed" or (
        method == "auto" and (basis.is_adapted_to(p) or (p.r == 0.0 and basis.scale == 1.0))
    )
    if closed:
        E = _matrix_M_closed(p, basis)
    else:
        E = _matrix_M_quad(p, basis, n_quad or 2 * basis.N + 16)
    return OperatorMatrix(basis, p, E, "M", {"method": "closed" if closed else "quadrature"})


def _rank_left(p: Params, basis: BasisSpec, K: int) -> np.ndarray:
    """A[j, k] = <e_j, h_k>, h_k = rho^-(1+q+k) t^k e^{-r t/rho} / sqrt(k! (k+p)!)."""
    rho, q, a = p.rho, basis.q, basis.alpha
    kappa = 0.5 * basis.scale + p.r / rho + 0.5
    n_quad = (basis.N + K) // 2 + 24
    t, W = _nodes(a, n_quad, kappa)
    k = np.arange(K)[:, None]
    logh = (
        k * np.log(t / rho)[None, :]
        - 0.5 * (gammaln(k + 1) + gammaln(k + a + 1))
        - (p.r / rho + 0.5) * t[None, :]
        - (1 + q) * math.log(rho)
    )
    H = np.exp(logh)
    return (basis.half_functions(t) * W) @ H.T


def _rank_right(basis: BasisSpec, K: int, multiplier: Callable | None = None, alpha_shift: int = 0) -> np.ndarray:
    """C[k, l] = <L-orthonormal_k, m(t) e_l>, exact when m is None and scale == 1."""
    a = basis.alpha
    if multiplier is None and basis.scale == 1.0:
        return np.eye(K, basis.N)
    kappa = 0.5 + 0.5 * basis.scale
    n_quad = (basis.N + K) // 2 + 48
    t, W = _nodes(a - alpha_shift, n_quad, kappa)
    unit = BasisSpec(basis.q, K, 1.0)
    left = unit.half_functions(t)
    right = basis.half_functions(t)
    if multiplier is not None:
        right = right * multiplier(t)
    return (left * W) @ right.T


def _matrix_N_rank(p: Params, basis: BasisSpec, max_terms: int = 1200) -> np.ndarray:
    if basis.scale == 1.0:
        return _rank_left(p, basis, basis.N)
    # off the unit scale the expansion is infinite; grow it until it settles
    K = basis.N + 16
    E = _rank_left(p, basis, K) @ _rank_right(basis, K)
    while K < max_terms:
        K = min(K + max(16, K // 2), max_terms)
        E_new = _rank_left(p, basis, K) @ _rank_right(basis, K)
        settled = np.max(np.abs(E_new - E)) <= 1e-13 * max(1.0, np.max(np.abs(E_new)))
        E = E_new
        if settled:
            return E
    raise ArithmeticError(f"rank expansion of N did not settle within {max_terms} terms")


def _matrix_N_bessel(p: Params, basis: BasisSpec, n_quad: int) -> np.ndarray:
    rho, q, a, g = p.rho, basis.q, basis.alpha, basis.scale
    # outer variable t carries e^{(delta/rho) t}; inner s carries the plain weight
    kt = 0.5 * g + 0.5 * p.r / rho
    ks = 0.5 * g + 0.5
    t, Wt = _nodes(a, n_quad, kt)
    s, Ws = _nodes(a, n_quad, ks)
    Ft = basis.half_functions(t) * np.exp((p.delta / rho - 0.5) * t)
    Fs = basis.half_functions(s) * np.exp(-0.5 * s)
    Kmat = bessel_kernel(a, np.outer(t, s) / rho)
    return rho ** -(1 + q) * (Ft * Wt) @ Kmat @ (Fs * Ws).T


def matrix_N(p: Params, basis: BasisSpec, method: str = "rank", n_quad: int | None = None) -> OperatorMatrix:
    """N_{r,q} phi(t) = rho^-(1+q) e^{delta t/rho} int K_p(st/rho) phi(s) dm_q(s),
    K_p(u) = J_p(2 sqrt u) / u^(p/2).

    "rank" uses the expansion of the kernel in Laguerre products, "bessel"
    the direct double quadrature of the kernel.
    """
    p = _as_params(p)
    if method == "rank":
        E = _matrix_N_rank(p, basis)
    elif method == "bessel":
        E = _matrix_N_bessel(p, basis, n_quad or 4 * basis.N + 100)
    else:
        raise ValueError("method must be rank or bessel")
    return OperatorMatrix(basis, p, E, "N", {"method": method})


def matrix_P(p: Params, basis: BasisSpec) -> OperatorMatrix:
    p = _as_params(p)
    return matrix_M(p, basis) + matrix_N(p, basis)


# ------------------------------------------------------- closed forms

def eigenvalue_N(p: Params, k: int) -> float:
    """nu_k = (-1)^(k-1) (4 rho / (1 + sqrt(1 + 4 rho))^2)^k."""
    p = _as_params(p)
    s = math.sqrt(1.0 + 4.0 * p.rho)
    return (-1) ** (k - 1) * (4.0 * p.rho / (1.0 + s) ** 2) ** k


def _fix_phase(v: CoeffVector) -> CoeffVector:
    c = v.coeffs
    nz = np.flatnonzero(np.abs(c) > 1e-12 * np.max(np.abs(c)))
    if nz.size and c[nz[0]] < 0:
        return CoeffVector(v.basis, -c)
    return v


def eigen_M_closed(p: Params, k: int, basis: BasisSpec | None = None) -> tuple[float, CoeffVector]:
    """mu_k = rho^-(k+q) with eigenfunction t^(k-1) e^{-(r/delta) t}, unit norm."""
    p = _as_params(p)
    if p.intermittent:
        raise ValueError("M_1 has continuous spectrum; no eigenfunctions")
    if k < 1:
        raise ValueError("k must be >= 1")
    basis = basis or BasisSpec.adapted(p)
    c = p.r / p.delta
    v = project(lambda t: t ** (k - 1) * np.exp(-c * t), basis)
    return p.rho ** -(k + basis.q), _fix_phase(v.normalized())


def eigen_M_norm_factor(p: Params, k: int) -> float:
    """A_k = ((1+r)/delta)^k / sqrt((2k-1)!), the unit-norm factor for q = 0."""
    p = _as_params(p)
    return math.exp(k * math.log((1 + p.r) / p.delta) - 0.5 * math.lgamma(2 * k))


def eigen_N_params(p: Params) -> tuple[float, float]:
    """(alpha_r, beta_r) of the N_r eigenfunctions L_{k-1}^1(alpha t) e^{-beta t}."""
    p = _as_params(p)
    s = math.sqrt(1.0 + 4.0 * p.rho)
    return s / p.rho, (1.0 + s) / (2.0 * p.rho) - 1.0


def eigen_N_norm_factor(p: Params, k: int) -> float:
    """B_k as listed for the N_r eigenfunctions (q = 0)."""
    p = _as_params(p)
    s = math.sqrt(1.0 + 4.0 * p.rho)
    y = p.delta ** 2 / (1.0 + 4.0 * p.rho)
    tot = math.fsum(math.comb(k, j) * math.comb(k - 1, j) * y ** j for j in range(k))
    return s / (p.rho * math.sqrt(k)) * (1.0 - p.delta / s) ** k / math.sqrt(tot)


def eigen_N_closed(p: Params, k: int, basis: BasisSpec | None = None) -> tuple[float, CoeffVector]:
    """nu_k and the unit-norm eigenfunction L_{k-1}^1(alpha_r t) e^{-beta_r t} (q = 0)."""
    p = _as_params(p)
    basis = basis or BasisSpec(0, 50, 1.0)
    if basis.q != 0:
        raise ValueError("closed-form N eigenfunctions are for q = 0")
    al, be = eigen_N_params(p)
    v = project(lambda t: laguerre(k - 1, 1, al * t) * np.exp(-be * t), basis)
    return eigenvalue_N(p, k), _fix_phase(v.normalized())


def trace_closed(p: Params, which: str) -> float:
    """Closed-form traces of M, N, N^2 and P = M + N."""
    p = _as_params(p)
    s = math.sqrt(1.0 + 4.0 * p.rho)
    which = which.upper()
    if which in ("M", "P") and p.intermittent:
        return math.inf
    if which == "M":
        return 1.0 / p.delta
    if which == "N":
        return 0.5 * (1.0 - 1.0 / s)
    if which in ("N2", "N^2", "N²"):
        return 0.5 * ((1.0 + 2.0 * p.rho) / s - 1.0)
    if which == "P":
        return 1.0 / p.delta + (s - 1.0) / (2.0 * s)
    raise ValueError("which must be M, N, N2 or P")


def trace_fixed_points(p: Params) -> float:
    """sum over the two branch fixed points of |Phi_i'(x_i)| / (1 - Phi_i'(x_i))."""
    p = _as_params(p)
    out = []
    for i, x in ((0, 0.0), (1, fixed_point_x1(p))):
        d = inverse_branch(p, i).derivative(x)
        out.append(abs(d) / (1.0 - d))
    return math.fsum(out)


def kernel_check(p: Params, k: int, basis: BasisSpec | None = None) -> float:
    """||(M + N) c|| / ||c|| for c the coefficients of L_k^1(2t) (odd k)."""
    p = _as_params(p)
    basis = basis or BasisSpec(0, 50, 1.0)
    if k % 2 == 0 or not 2 * k < basis.N:
        raise ValueError("k must be odd and below N/2")
    v = _laguerre_2t(basis, k)
    P = matrix_P(p, basis)
    return float(np.linalg.norm(P.entries @ v.orthonormal) / v.norm())


def _laguerre_2t(basis: BasisSpec, k: int) -> CoeffVector:
    if basis.scale == 1.0 and basis.q == 0:
        # L_k^1(2t) = sum_j C(k+1, k-j) 2^j (-1)^(k-j) L_j^1(t)
        c = np.zeros(basis.N)
        for j in range(k + 1):
            c[j] = math.comb(k + 1, k - j) * 2.0 ** j * (-1) ** (k - j)
        return CoeffVector(basis, c)
    return project(lambda t: laguerre(k, basis.alpha, 2 * t), basis)


@dataclass(frozen=True)
class SpectrumReport:
    params: Params
    basis: BasisSpec
    eigenvalues: np.ndarray
    stability: np.ndarray
    traces: dict

    def real_values(self, tol: float = 1e-10) -> np.ndarray:
        ev = self.eigenvalues
        return np.where(np.abs(ev.imag) <= tol, ev.real, np.nan)


def spectrum_P(p: Params, basis: BasisSpec | None = None, which: str = "P") -> SpectrumReport:
    """Eigenvalues by descending modulus with a stability delta against N - 10."""
    p = _as_params(p)
    basis = basis or BasisSpec.adapted(p)

    def build(b):
        if which == "M":
            return matrix_M(p, b)
        if which == "N":
            return matrix_N(p, b)
        return matrix_P(p, b)

    A = build(basis)
    ev = A.eigvals()
    coarse = build(basis.with_N(max(basis.N - 10, 1))).eigvals()
    stab = np.array([np.min(np.abs(coarse - v)) for v in ev])
    traces = {"matrix": A.trace()}
    try:
        traces["closed"] = trace_closed(p, which)
    except ValueError:
        pass
    return SpectrumReport(p, basis, ev, stab, traces)


def density_preimage(p: Params, kind: str) -> Callable:
    """phi_r (Borel pre-image of e_r) or psi_r (pre-image of h_r) as a callable."""
    from .measures import normalizer_K

    p = _as_params(p)
    K = normalizer_K(p)
    if kind == "e":
        if p.intermittent:
            raise NotInL2Error("phi_1(t) = 1/(t log 2) is not in L2(m)")
        if p.r == 0.0:
            return lambda t: np.full_like(np.asarray(t, dtype=float), K)
        c = p.r / p.delta
        return lambda t: K * -np.expm1(-c * np.asarray(t, dtype=float)) / (p.r * np.asarray(t, dtype=float))
    if kind == "h":
        if p.r == 0.0:
            return lambda t: np.full_like(np.asarray(t, dtype=float), K / 2.0)
        c = p.r / p.rho
        return lambda t: K * -np.expm1(-c * np.asarray(t, dtype=float)) / (p.r * np.asarray(t, dtype=float))
    raise ValueError("kind must be 'e' or 'h'")


def preimage_coeffs(p: Params, kind: str, N: int = 50) -> CoeffVector:
    """density_preimage projected onto a basis suited to it.

    Both pre-images are averages of e^{-st} over s in [0, c]; the scale
    sqrt(1 + 2c) balances the Laguerre convergence rates at the two ends.
    """
    p = _as_params(p)
    fn = density_preimage(p, kind)
    c = 0.0 if p.r == 0.0 else p.r / (p.delta if kind == "e" else p.rho)
    return project(fn, BasisSpec(0, N, math.sqrt(1.0 + 2.0 * c)))


def r0_polynomial_eigenfunction(n: int) -> np.ndarray:
    """Monomial coefficients of the degree-2n polynomial eigenfunction of M_0 + N_0.

    Solved exactly on monomials: M_0 t^k = t^k / 2^(k+1) and
    N_0 t^k = (k!/2) L_k^1(t/2). Normalised so the leading coefficient is 1/(2n)!.
    """
    from fractions import Fraction

    deg = 2 * n
    size = deg + 1
    A = [[Fraction(0)] * size for _ in range(size)]
    for k in range(size):
        A[k][k] += Fraction(1, 2 ** (k + 1))
        # (k!/2) L_k^1(t/2) = (k!/2) sum_l C(k+1, k-l) (-t/2)^l / l!
        for l in range(k + 1):
            A[l][k] += Fraction(math.factorial(k), 2) * math.comb(k + 1, k - l) * Fraction((-1) ** l, 2 ** l * math.factorial(l))
    lam = Fraction(1, 2 ** deg)
    # upper-triangular solve of (A - lam) a = 0 with a_deg fixed
    a = [Fraction(0)] * size
    a[deg] = Fraction(1, math.factorial(deg))
    for i in range(deg - 1, -1, -1):
        s = sum(A[i][j] * a[j] for j in range(i + 1, size))
        a[i] = -s / (A[i][i] - lam)
    return np.array([float(v) for v in a])


# ------------------------------------------------------------------ dumps

def _fmt(x: float) -> str:
    return repr(float(x)) if math.isfinite(x) else str(x)


def matrix_to_csv(A: OperatorMatrix) -> str:
    buf = io.StringIO()
    buf.write(f"# r={_fmt(A.params.r)},q={A.basis.q},N={A.basis.N},scale={_fmt(A.basis.scale)},which={A.which}\n")
    w = csv.writer(buf, lineterminator="\n")
    for row in A.entries:
        w.writerow([f"{v:.17g}" for v in row])
    return buf.getvalue()


def spectrum_to_json(rep: SpectrumReport) -> str:
    def num(z):
        z = complex(z)
        return z.real if abs(z.imag) < 1e-14 else [z.real, z.imag]

    doc = {
        "params": {"r": rep.params.r, "rho": rep.params.rho, "delta": rep.params.delta},
        "basis": {"q": rep.basis.q, "N": rep.basis.N, "scale": rep.basis.scale},
        "eigenvalues": [{"value": num(v), "stability_delta": float(s)} for v, s in zip(rep.eigenvalues, rep.stability)],
        "traces": {k: float(v) for k, v in rep.traces.items()},
    }
    return json.dumps(doc, indent=2)
