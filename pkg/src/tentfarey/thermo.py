"""Partition functions, finite-n free energy and related bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .maps import Params, _as_params, _f_base, word_matrices
from .measures import SMALL_R_CHI, density_e, lyapunov_closed, nu_total
from .specfun import dilog, quad_legendre

__all__ = [
    "FreeEnergyEstimate",
    "partition_Z",
    "free_energy",
    "gamma_r",
    "lyapunov_lambda",
    "rate_function_point",
    "ess_radius_bounds",
]

QUAD_ORDER = 32


@dataclass(frozen=True)
class FreeEnergyEstimate:
    beta: float
    n: int
    f_n: float
    branch_count: int
    quadrature_order: int
    delta_prev: float = math.nan  # f_n - f_{n-1}


def _require_finite_measure(p: Params):
    if p.intermittent:
        raise ValueError("r = 1 has an infinite invariant measure; p_r is undefined")


POLE_GAP = 0.1


def _pole_gap(p: Params, mats: np.ndarray) -> np.ndarray:
    """Distance from [0, 1] to the nearest real pole of a branch integrand.

    The poles sit where Phi_w' blows up (y = -d/c) and where Phi_w(y) hits the
    pole -delta/r of e_r.
    """
    a, b, c, d = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        poles = np.stack([-d / c, -(p.delta * d + p.r * b) / (p.delta * c + p.r * a)])
    poles = np.where(np.isfinite(poles), poles, np.inf)
    dist = np.maximum(np.maximum(-poles, poles - 1.0), 0.0)
    return dist.min(axis=0)


def _graded_integral(f, gap: float, rule) -> float:
    """Integral over [0, 1] on panels halving towards both ends down to gap/2."""
    levels = int(math.ceil(math.log2(1.0 / max(gap, 1e-300)))) + 2
    cuts = [2.0 ** -j for j in range(1, levels + 1)]
    edges = sorted({0.0, 1.0, *cuts, *(1.0 - t for t in cuts)})
    total = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        total.append((hi - lo) * float(f(lo + (hi - lo) * rule.nodes) @ rule.weights))
    return math.fsum(total)


def partition_Z(p: Params, beta: float, n: int, order: int = QUAD_ORDER) -> float:
    """Z_n(beta) = int |(F^n)'|^beta dp_r by exact branch decomposition.

    On the branch with inverse Phi_w the substitution x = Phi_w(y) gives
    int_0^1 |Phi_w'(y)|^(1-beta) e_r(Phi_w(y)) dy.
    """
    p = _as_params(p)
    _require_finite_measure(p)
    if not 1 <= n <= 20:
        raise ValueError("n must be in 1..20")
    rule = quad_legendre(0.0, 1.0, order)
    e = density_e(p)

    def integrand(a, b, c, d, y):
        den = c * y + d
        dphi = np.abs((a * d - b * c) / den ** 2)
        return dphi ** (1.0 - beta) * e((a * y + b) / den)

    parts = []
    for _, mats in word_matrices(_f_base(p), n):
        a, b = mats[:, 0, 0, None], mats[:, 0, 1, None]
        c, d = mats[:, 1, 0, None], mats[:, 1, 1, None]
        gap = _pole_gap(p, mats)
        ok = gap >= POLE_GAP
        parts.extend(integrand(a[ok], b[ok], c[ok], d[ok], rule.nodes) @ rule.weights)
        for i in np.flatnonzero(~ok):
            f = lambda y, i=i: integrand(a[i], b[i], c[i], d[i], y)
            parts.append(_graded_integral(f, gap[i], rule))
    return math.fsum(parts) / nu_total(p)


def free_energy(p: Params, beta: float, n: int, order: int = QUAD_ORDER) -> FreeEnergyEstimate:
    """f_n(beta) = log Z_n(beta) / n, with the change from n-1 attached."""
    p = _as_params(p)
    fn = math.log(partition_Z(p, beta, n, order)) / n
    prev = math.log(partition_Z(p, beta, n - 1, order)) / (n - 1) if n > 1 else math.nan
    return FreeEnergyEstimate(float(beta), n, fn, 2 ** n, order, fn - prev)


def lyapunov_lambda(p: Params) -> float:
    """lambda_r = chi / nu_r([0,1]), the exponent under the normalized law p_r."""
    p = _as_params(p)
    _require_finite_measure(p)
    return lyapunov_closed(p) / nu_total(p)


def gamma_r(p: Params) -> float:
    """The constant in the lower free-energy bound; 0 at both endpoints."""
    p = _as_params(p)
    if p.r in (0.0, 1.0):
        return 0.0
    if p.r < SMALL_R_CHI:
        # the closed form cancels here; use gamma_r = lambda_r - log rho
        return max(lyapunov_closed(p) / nu_total(p) - math.log(p.rho), 0.0)
    rho = p.rho
    L2 = -math.log1p(-0.5 * p.r)
    val = (
        math.pi ** 2 / 6.0
        - 2.0 * dilog(1.0 / rho)
        + L2 * math.log(4.0 - 2.0 * p.r)
        - math.log(2.0) ** 2
    ) / math.log1p(-p.r)
    return max(val, 0.0) if val > -1e-15 else val


def rate_function_point(p: Params, beta: float, n: int, h: float = 1e-4) -> tuple[float, float]:
    """(alpha, phi) with alpha = f_n'(beta) - lambda_r and phi = beta alpha - (f_n(beta) - beta lambda_r)."""
    p = _as_params(p)
    lam = lyapunov_lambda(p)
    f = lambda b: math.log(partition_Z(p, b, n)) / n
    d1 = (f(beta + h) - f(beta - h)) / (2 * h)
    d2 = (f(beta + h / 2) - f(beta - h / 2)) / h
    deriv = (4 * d2 - d1) / 3  # Richardson
    alpha = deriv - lam
    phi = beta * alpha - (f(beta) - beta * lam)
    return alpha, phi


def ess_radius_bounds(p: Params, k: int) -> tuple[float, float]:
    """(exp(-k(log rho + gamma_r)), exp(-k log rho))."""
    p = _as_params(p)
    if k < 0:
        raise ValueError("k must be >= 0")
    lr = math.log(p.rho)
    return math.exp(-k * (lr + gamma_r(p))), math.exp(-k * lr)
