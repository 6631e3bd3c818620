"""Invariant densities, Kac's formula, sampling and Lyapunov exponents."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .maps import Params, _as_params, _c_array, passage_time_tau, PARTITION_GUARD
from .specfun import dilog, quad_legendre

__all__ = [
    "DensityClosedForm",
    "OrbitStats",
    "UnsupportedModeError",
    "normalizer_K",
    "density_e",
    "density_h",
    "nu_total",
    "pf_apply",
    "pf_branch_apply",
    "kac_expected_return",
    "sample_mu",
    "sample_p",
    "mean_return_time_mc",
    "lyapunov_closed",
    "lyapunov_birkhoff",
    "integrate_unit",
    "rng_for",
]

# stream ids for SeedSequence spawn keys, one per random operation
STREAM_SAMPLE_MU = 1
STREAM_SAMPLE_P = 2
STREAM_KAC = 3
STREAM_BIRKHOFF = 4


class UnsupportedModeError(ValueError):
    """A mode that has no meaning for the requested parameter."""


def rng_for(seed: int, stream: int) -> np.random.Generator:
    """PCG64 generator for (seed, operation stream)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


# below this r the dilogarithm expression for chi cancels; the defining integral takes over
SMALL_R_CHI = 1e-3


def _log_ratio(a: float, r: float) -> float:
    """-log(1 - a r) / r, by its series when r is tiny (no 0/0)."""
    if r < 1e-6:
        return a + a * a * r / 2.0 + a ** 3 * r * r / 3.0
    return -math.log1p(-a * r) / r


def normalizer_K(p: Params) -> float:
    """K_r = r / log(2/rho), with limits 2 (r=0) and 1/log 2 (r=1)."""
    p = _as_params(p)
    return 1.0 / _log_ratio(0.5, p.r)


def nu_total(p: Params) -> float:
    """nu_r([0,1]) = (K/r) log(1/(1-r)); +inf at r = 1."""
    p = _as_params(p)
    if p.intermittent:
        return math.inf
    return normalizer_K(p) * _log_ratio(1.0, p.r)


@dataclass(frozen=True)
class DensityClosedForm:
    """e_r = K/(1-r+rx) (F-invariant) or h_r = K/(2-r+rx) (G-invariant)."""

    kind: str
    params: Params
    K: float

    def __call__(self, x):
        shift = self.params.delta if self.kind == "e" else self.params.rho
        with np.errstate(divide="ignore"):
            return self.K / (shift + self.params.r * np.asarray(x, dtype=float))

    def mass(self, a: float = 0.0, b: float = 1.0) -> float:
        """Closed-form integral over [a, b]."""
        p = self.params
        shift = p.delta if self.kind == "e" else p.rho
        if p.r == 0.0:
            return self.K * (b - a) / shift
        if shift == 0.0 and a == 0.0:
            return math.inf
        return self.K / p.r * math.log((shift + p.r * b) / (shift + p.r * a))


def density_e(p: Params) -> DensityClosedForm:
    p = _as_params(p)
    return DensityClosedForm("e", p, normalizer_K(p))


def density_h(p: Params) -> DensityClosedForm:
    p = _as_params(p)
    return DensityClosedForm("h", p, normalizer_K(p))


def pf_branch_apply(p: Params, f: Callable, x, branch: int):
    """One branch of the transfer operator: |Phi_i'(x)| f(Phi_i(x))."""
    p = _as_params(p)
    x = np.asarray(x, dtype=float)
    den = p.rho + p.r * x
    y = x / den
    w = p.rho / den ** 2
    return w * (f(y) if branch == 0 else f(1.0 - y))


def pf_apply(p: Params, f: Callable, x):
    """P f(x) = rho/(rho + r x)^2 [f(x/(rho + r x)) + f(1 - x/(rho + r x))]."""
    out = pf_branch_apply(p, f, x, 0) + pf_branch_apply(p, f, x, 1)
    return float(out) if np.ndim(out) == 0 else out


def kac_expected_return(p: Params) -> float:
    """Mean first-passage time into [1/2, 1] under mu_r: log(1/(1-r))/log(2/rho)."""
    p = _as_params(p)
    if p.intermittent:
        return math.inf
    return _log_ratio(1.0, p.r) / _log_ratio(0.5, p.r)


def _inv_cdf_h(p: Params, u: np.ndarray) -> np.ndarray:
    if p.r == 0.0:
        return u
    ell = _log_ratio(0.5, p.r)  # log(2/rho) / r
    if p.r < 1e-6:
        return p.rho * u * ell * (1.0 + 0.5 * u * p.r * ell)
    return p.rho * np.expm1(u * p.r * ell) / p.r


def _inv_cdf_e(p: Params, u: np.ndarray) -> np.ndarray:
    if p.r == 0.0:
        return u
    ell = _log_ratio(1.0, p.r)  # log(1/delta) / r
    if p.r < 1e-6:
        return p.delta * u * ell * (1.0 + 0.5 * u * p.r * ell)
    return p.delta * np.expm1(u * p.r * ell) / p.r


def sample_mu(p: Params, count: int, seed: int) -> np.ndarray:
    """i.i.d. draws from mu_r (density h_r) by inverse CDF."""
    p = _as_params(p)
    if count < 1:
        raise ValueError("count must be >= 1")
    u = rng_for(seed, STREAM_SAMPLE_MU).random(count)
    return _inv_cdf_h(p, u)


def sample_p(p: Params, count: int, seed: int) -> np.ndarray:
    """i.i.d. draws from the normalized F-invariant law p_r (r < 1)."""
    p = _as_params(p)
    if p.intermittent:
        raise UnsupportedModeError("p_r is undefined at r = 1 (infinite invariant measure)")
    u = rng_for(seed, STREAM_SAMPLE_P).random(count)
    return _inv_cdf_e(p, u)


@dataclass(frozen=True)
class OrbitStats:
    """Monte Carlo / Birkhoff estimate; variance_estimate is the variance of the mean."""

    n_samples: int
    mean: float
    variance_estimate: float
    seed: int
    restarts: int = 0

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance_estimate)

    def within(self, value: float, sigmas: float = 3.0) -> bool:
        return abs(self.mean - value) <= sigmas * self.stderr


def mean_return_time_mc(p: Params, samples: int, seed: int) -> OrbitStats:
    """Monte Carlo mean of tau under mu_r."""
    p = _as_params(p)
    x = _inv_cdf_h(p, rng_for(seed, STREAM_KAC).random(samples))
    x = x[x > 0.0]
    tau = _tau_safe(p, x)
    keep = tau > 0
    t = tau[keep].astype(float)
    return OrbitStats(t.size, float(t.mean()), float(t.var(ddof=1) / t.size), seed)


def _tau_safe(p: Params, x: np.ndarray) -> np.ndarray:
    """tau without raising; 0 marks points within the partition-point guard."""
    if p.intermittent:
        n = np.floor(1.0 / x)
    else:
        n = np.ceil(np.log(p.r + p.delta / x) / math.log(p.rho))
    n = np.maximum(n, 1.0)
    c_lo, c_hi = _c_array(p, n), _c_array(p, n - 1)
    n = np.where(x <= c_lo, n + 1, np.where(x > c_hi, n - 1, n))
    c_lo, c_hi = _c_array(p, n), _c_array(p, n - 1)
    bad = (np.abs(x - c_lo) <= PARTITION_GUARD * c_lo) | ((np.abs(x - c_hi) <= PARTITION_GUARD * c_hi) & (n > 1))
    return np.where(bad, 0, n).astype(np.int64)


def lyapunov_closed(p: Params) -> float:
    """chi for nu_r in closed form (dilogarithm expression).

    For 0 < r < SMALL_R_CHI the expression loses digits to cancellation, so
    the defining integral of log|F'| against e_r is used there.
    """
    p = _as_params(p)
    if p.r == 0.0:
        return 2.0 * math.log(2.0)
    if p.intermittent:
        return math.pi ** 2 / (6.0 * math.log(2.0))
    if p.r < SMALL_R_CHI:
        return _lyapunov_integral(p)
    rho = p.rho
    L2 = -math.log1p(-0.5 * p.r)  # log(2/rho)
    Ld = -math.log1p(-p.r)  # log(1/delta)
    bracket = math.pi ** 2 / 6.0 - math.log(2.0) ** 2 - 2.0 * dilog(1.0 / rho)
    return math.log(rho) * Ld / L2 - math.log(4.0 - 2.0 * p.r) - bracket / L2


def _lyapunov_integral(p: Params) -> float:
    e = density_e(p)
    lr, r = math.log(p.rho), p.r
    left = lambda x: (lr - 2.0 * np.log1p(-r * x)) * e(x)
    right = lambda x: (lr - 2.0 * np.log(p.delta + r * x)) * e(x)
    return integrate_unit(left, 0.0, 0.5) + integrate_unit(right, 0.5, 1.0)


def integrate_unit(f: Callable, a: float = 0.0, b: float = 1.0, panels: int = 8, order: int = 64) -> float:
    """Composite Gauss-Legendre integral of f over [a, b]."""
    rule = quad_legendre(-1.0, 1.0, order)
    edges = np.linspace(a, b, panels + 1)
    parts = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        h = 0.5 * (hi - lo)
        parts.append(h * float(np.dot(rule.weights, f(lo + h * (rule.nodes + 1.0)))))
    return math.fsum(parts)


def lyapunov_birkhoff(
    p: Params,
    which: str = "G",
    n_iter: int = 10 ** 6,
    burn_in: int = 1000,
    seed: int = 0,
    n_chains: int = 1000,
) -> OrbitStats:
    """Birkhoff average of log|F'| (which="F") or log|G'| (which="G").

    Runs ``n_chains`` independent orbits from stationary draws (p_r for F,
    mu_r for G) for n_iter/n_chains steps each after ``burn_in``. The
    variance of the mean comes from the spread of chain means.
    """
    p = _as_params(p)
    which = which.upper()
    if which not in ("F", "G"):
        raise ValueError("which must be 'F' or 'G'")
    if which == "F" and p.intermittent:
        raise UnsupportedModeError("F-mode Birkhoff averages are undefined at r = 1 (infinite invariant measure)")
    n_chains = max(2, min(n_chains, n_iter))
    steps = max(1, n_iter // n_chains)
    rng = rng_for(seed, STREAM_BIRKHOFF)
    draw = (lambda k: _inv_cdf_e(p, rng.random(k))) if which == "F" else (lambda k: _inv_cdf_h(p, rng.random(k)))
    x = draw(n_chains)
    sums = np.zeros(n_chains)
    restarts = 0
    step = _f_step if which == "F" else _g_step
    for it in range(burn_in + steps):
        x, logd, bad = step(p, x)
        if bad.any():
            k = int(bad.sum())
            restarts += k
            fresh = draw(k)
            x[bad] = fresh
            _, logd_new, _ = step(p, fresh.copy())
            logd[bad] = logd_new
        if it >= burn_in:
            sums += logd
    means = sums / steps
    return OrbitStats(
        n_samples=steps * n_chains,
        mean=float(means.mean()),
        variance_estimate=float(means.var(ddof=1) / n_chains),
        seed=seed,
        restarts=restarts,
    )


def _f_step(p: Params, x: np.ndarray):
    r, rho = p.r, p.rho
    left = x <= 0.5
    den = np.where(left, 1.0 - r * x, p.delta + r * x)
    y = np.where(left, rho * x, rho * (1.0 - x)) / den
    logd = math.log(rho) - 2.0 * np.log(den)
    bad = (y <= 0.0) | (y > 1.0) if r > 0 else np.zeros(x.shape, dtype=bool)
    return np.clip(y, 0.0, 1.0), logd, bad


def _g_step(p: Params, x: np.ndarray):
    bad = x <= 0.0
    xs = np.where(bad, 0.5, x)
    n = _tau_safe(p, xs)
    bad |= n == 0
    n = np.where(n == 0, 1, n)
    c = _c_array(p, n - 1)
    den = p.delta + p.r * xs
    y = p.rho * (1.0 - xs / c) / den
    logd = np.log(p.rho * (p.delta + p.r * c) / c) - 2.0 * np.log(den)
    bad |= (y <= 0.0) | (y > 1.0)
    return np.clip(y, 0.0, 1.0), logd, bad
