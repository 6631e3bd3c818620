"""Special functions and Gauss rules used throughout the package.

Everything here is a pure function of its arguments. Orders of Bessel and
Laguerre functions are nonnegative integers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

__all__ = [
    "QuadratureRule",
    "bessel_j",
    "bessel_kernel",
    "laguerre",
    "laguerre_functions",
    "dilog",
    "quad_gen_laguerre",
    "quad_legendre",
    "NodeFindingError",
]

_SERIES_MAX = 4.0
_MILLER_MAX = 40.0


class NodeFindingError(RuntimeError):
    """Newton polishing of a quadrature node did not converge."""

    def __init__(self, index: int, kind: str):
        super().__init__(f"{kind}: node {index} failed to converge")
        self.index = index


# ---------------------------------------------------------------- Bessel J_p

def _j_series(p: int, x: np.ndarray) -> np.ndarray:
    h = 0.25 * x * x
    term = (0.5 * x) ** p / math.factorial(p)
    out = term.copy()
    for m in range(1, 60):
        term = term * (-h) / (m * (m + p))
        out += term
        if np.all(np.abs(term) <= 1e-17 * np.abs(out)):
            break
    return out


def _j_miller(p: int, x: np.ndarray) -> np.ndarray:
    xmax = float(np.max(x))
    start = 2 * ((max(p, int(xmax)) + 20 + int(math.sqrt(40.0 * max(p, xmax)))) // 2)
    jp1 = np.zeros_like(x)
    j = np.full_like(x, 1e-300)
    norm = np.zeros_like(x)
    want = np.zeros_like(x)
    for k in range(start, 0, -1):
        jm1 = (2.0 * k / x) * j - jp1
        jp1, j = j, jm1
        # j now holds J_{k-1} (unnormalised)
        if k - 1 == p:
            want = j.copy()
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j
        big = np.abs(j) > 1e250
        if np.any(big):
            s = np.where(big, 1e-250, 1.0)
            j, jp1, norm, want = j * s, jp1 * s, norm * s, want * s
    norm += j
    return want / norm


def _j_hankel(p: int, x: np.ndarray) -> np.ndarray:
    mu = 4.0 * p * p
    P = np.ones_like(x)
    Q = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, 40):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if k % 2 == 1:
            Q += (-1) ** ((k - 1) // 2) * term
        else:
            P += (-1) ** (k // 2) * term
        if np.all(np.abs(term) < 1e-17):
            break
    w = x - (0.5 * p + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (P * np.cos(w) - Q * np.sin(w))


def bessel_j(p: int, x):
    """Bessel function of the first kind J_p(x) for integer p >= 0 and x >= 0."""
    if p < 0 or int(p) != p:
        raise ValueError("order must be a nonnegative integer")
    p = int(p)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or not np.all(np.isfinite(xa)):
        raise ValueError("bessel_j needs finite x >= 0")
    flat = np.atleast_1d(xa).ravel()
    out = np.empty_like(flat)
    small = flat <= _SERIES_MAX
    mid = (flat > _SERIES_MAX) & (flat <= _MILLER_MAX)
    big = flat > _MILLER_MAX
    if small.any():
        out[small] = _j_series(p, flat[small])
    if mid.any():
        out[mid] = _j_miller(p, flat[mid])
    if big.any():
        out[big] = _j_hankel(p, flat[big])
    out = out.reshape(xa.shape)
    return float(out) if out.ndim == 0 else out


def bessel_kernel(p: int, u):
    """J_p(2 sqrt(u)) / u^(p/2), an entire function of u >= 0."""
    ua = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.empty_like(ua)
    small = ua <= 4.0
    if small.any():
        us = ua[small]
        term = np.full_like(us, 1.0 / math.factorial(p))
        acc = term.copy()
        for m in range(1, 60):
            term = term * (-us) / (m * (m + p))
            acc += term
            if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(acc), 1e-300)):
                break
        out[small] = acc
    if (~small).any():
        ub = ua[~small]
        out[~small] = bessel_j(p, 2.0 * np.sqrt(ub)) / ub ** (0.5 * p)
    if np.ndim(u) == 0:
        return float(out[0])
    return out.reshape(np.shape(u))


# ------------------------------------------------------------------ Laguerre

def laguerre(k: int, alpha: int, x):
    """Generalized Laguerre polynomial L_k^(alpha)(x) by the three-term recurrence."""
    if k < 0:
        raise ValueError("k must be >= 0")
    xa = np.asarray(x, dtype=float)
    prev = np.zeros_like(xa)
    cur = np.ones_like(xa)
    for j in range(k):
        prev, cur = cur, ((2 * j + 1 + alpha - xa) * cur - (j + alpha) * prev) / (j + 1)
    if not np.all(np.isfinite(cur)) and np.all(np.isfinite(xa)):
        raise OverflowError(f"L_{k}^({alpha}) overflowed")
    return float(cur) if cur.ndim == 0 else cur


def laguerre_functions(n: int, alpha: float, x) -> np.ndarray:
    """Orthonormal Laguerre functions, shape (n, len(x)).

    Row k holds p_k(x) exp(-x/2), where p_k are the polynomials orthonormal
    for the weight x^alpha e^{-x} on (0, inf). The exponential factor is
    carried through the recurrence so large x neither overflows nor
    underflows prematurely.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((n, x.size))
    if n == 0:
        return out
    out[0] = np.exp(-0.5 * x - 0.5 * math.lgamma(alpha + 1.0))
    if n > 1:
        out[1] = (1.0 + alpha - x) * out[0] / math.sqrt(1.0 + alpha)
    for k in range(1, n - 1):
        a = math.sqrt((k + 1) * (k + 1 + alpha))
        b = math.sqrt(k * (k + alpha))
        out[k + 1] = ((2 * k + 1 + alpha - x) * out[k] - b * out[k - 1]) / a
    return out


# ---------------------------------------------------------------- dilogarithm

def _li2_series(q: float) -> float:
    s, term, k = 0.0, q, 1
    while abs(term) > 1e-18 * max(abs(s), 1e-300) and k < 200:
        s += term / (k * k)
        k += 1
        term *= q
    return s


def dilog(q: float) -> float:
    """Real dilogarithm Li2(q) for q <= 1."""
    q = float(q)
    if q > 1.0:
        raise ValueError("dilog is only defined here for q <= 1")
    if q == 1.0:
        return math.pi ** 2 / 6.0
    if q == 0.0:
        return 0.0
    if q < 0.0:
        # Landen: maps q < 0 into (0, 1)
        y = q / (q - 1.0)
        return -dilog(y) - 0.5 * math.log1p(-q) ** 2
    if q <= 0.5:
        return _li2_series(q)
    return math.pi ** 2 / 6.0 - math.log(q) * math.log1p(-q) - _li2_series(1.0 - q)


# ---------------------------------------------------------------- quadrature

@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule. ``log_weights`` is kept so very small weights stay usable."""

    nodes: np.ndarray
    weights: np.ndarray
    log_weights: np.ndarray
    kind: str
    alpha: float = 0.0
    interval: tuple[float, float] = (0.0, math.inf)

    def __len__(self) -> int:
        return self.nodes.size

    @property
    def scaled_weights(self) -> np.ndarray:
        """Weights times e^{x}, for integrands that already carry e^{-x}."""
        return np.exp(self.log_weights + self.nodes)

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def _scaled_laguerre(n: int, alpha: float, x: np.ndarray):
    """Orthonormal p_0..p_{n-1} at x as (values, log_scale) with per-column rescaling.

    values[k] * exp(log_scale) == p_k(x); keeps the recurrence finite for any x.
    """
    vals = np.empty((n, x.size))
    logs = np.zeros(x.size)
    vals[0] = math.exp(-0.5 * math.lgamma(alpha + 1.0))
    if n > 1:
        vals[1] = (1.0 + alpha - x) * vals[0] / math.sqrt(1.0 + alpha)
    for k in range(1, n - 1):
        a = math.sqrt((k + 1) * (k + 1 + alpha))
        b = math.sqrt(k * (k + alpha))
        vals[k + 1] = ((2 * k + 1 + alpha - x) * vals[k] - b * vals[k - 1]) / a
        big = np.abs(vals[k + 1]) > 1e100
        if big.any():
            vals[: k + 2, big] *= 1e-100
            logs[big] += 100.0 * math.log(10.0)
    return vals, logs


def quad_gen_laguerre(alpha: float, n: int) -> QuadratureRule:
    """n-point Gauss rule for the weight t^alpha e^{-t} on (0, inf)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(n)
    diag = 2 * k + 1 + alpha
    off = np.sqrt(k[1:] * (k[1:] + alpha))
    x = np.sort(eigvalsh_tridiagonal(diag, off))
    x = np.maximum(x, 1e-300)

    def step(x):
        vals, _ = _scaled_laguerre(n + 1, alpha, x)
        deriv = n * vals[n] - math.sqrt(n * (n + alpha)) * vals[n - 1]
        return x * vals[n] / deriv

    for _ in range(100):
        dx = step(x)
        x = x - dx
        # the final correction sits at rounding level, which grows with n,
        # so 1e-15 relative is not always reachable: accept that level and
        # take one extra step
        done = np.abs(dx) <= max(1e-14, 1e-16 * n) * np.maximum(1.0, x)
        if done.all():
            x = x - step(x)
            break
    else:
        raise NodeFindingError(int(np.flatnonzero(~done)[0]), "generalized-laguerre")
    vals, logs = _scaled_laguerre(n, alpha, x)
    logw = -np.log(np.sum(vals * vals, axis=0)) - 2.0 * logs
    return QuadratureRule(x, np.exp(logw), logw, "generalized-laguerre", float(alpha))


def quad_legendre(a: float, b: float, n: int) -> QuadratureRule:
    """n-point Gauss-Legendre rule on [a, b]."""
    if n < 1 or not a < b:
        raise ValueError("need n >= 1 and a < b")
    i = np.arange(1, n + 1)
    x = np.cos(math.pi * (i - 0.25) / (n + 0.5))
    for _ in range(100):
        p0, p1 = np.ones_like(x), x.copy()
        for j in range(2, n + 1):
            p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
        if n == 1:
            p0, p1 = np.zeros_like(x), x.copy()
            p0[:] = 1.0
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.all(np.abs(dx) <= 1e-15):
            break
    else:
        bad = int(np.argmax(np.abs(dx)))
        raise NodeFindingError(bad, "legendre")
    p0, p1 = np.ones_like(x), x.copy()
    for j in range(2, n + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    if n == 1:
        p0 = np.ones_like(x)
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    half = 0.5 * (b - a)
    nodes = a + half * (x + 1.0)
    weights = half * w
    return QuadratureRule(nodes, weights, np.log(weights), "legendre", 0.0, (a, b))
