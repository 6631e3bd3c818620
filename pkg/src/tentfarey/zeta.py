"""The operators Q_{z,q}, Fredholm determinants and the two-variable zeta function.

    Q_{z,q} = (-1)^q N_{r,q} (1/z - M_{r,q})^{-1} = (-1)^q z N_{r,q} (1 - z M_{r,q})^{-1}
    zeta_2(s, z) = det(1 - s Q_{z,1}) / det(1 - s Q_{z,0})

The second form of Q is used so that z = 0 is allowed. Periodic-orbit sums
for F_r and the induced map G_r serve as independent checks.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .maps import Params, _as_params, _g_blocks, g_digit_bounds, orbit_sum_F, periodic_points_G
from .spectral import (
    BasisSpec,
    OperatorMatrix,
    _rank_left,
    _rank_right,
    matrix_M,
    matrix_N,
)

__all__ = [
    "FredholmSeries",
    "PoleProximityError",
    "XiResult",
    "ZetaResult",
    "q_matrix",
    "q_series_matrix",
    "grand_partition_Xi",
    "trace_formula",
    "newton_det_coeffs",
    "fredholm_det",
    "zeta_two_variable",
    "zeta_grid",
    "log_zeta2_s_coeffs",
    "log_zeta2_z_coeffs",
    "orbit_log_coeffs_F",
    "orbit_log_coeffs_G",
    "zeta_to_json",
]

POLE_GAP = 1e-8


class PoleProximityError(ArithmeticError):
    """z (or s) sits on or too close to a pole of the requested quantity."""

    def __init__(self, msg: str, k: int | None = None):
        super().__init__(msg)
        self.k = k


def _default_basis(p: Params, q: int, N: int = 50) -> BasisSpec:
    # N is exact on the unit scale and the resolvent damps the (1 - zM)
    # truncation error, so Q is most accurate there
    return BasisSpec(q, N, 1.0)


def _check_z(p: Params, q: int, z: float):
    if p.intermittent:
        if z > 1.0:
            raise PoleProximityError(f"z = {z} lies in (1, inf), where Q_z is not defined at r = 1")
        return
    if z == 0.0:
        return
    # poles at z = rho^(k+q), k >= 1
    w = 1.0 / z
    lr = math.log(p.rho)
    for k in range(1, 4000):
        mu = math.exp(-(k + q) * lr)
        if abs(w - mu) < POLE_GAP:
            raise PoleProximityError(f"1/z is within {POLE_GAP} of the eigenvalue rho^-{k + q} of M", k)
        if mu < w * 1e-3 and mu < POLE_GAP:
            break


def _intermittent_q(p: Params, q: int, z: float, basis: BasisSpec, max_terms: int = 1200) -> np.ndarray:
    # M_1 multiplies by e^{-t}, so the resolvent multiplies by 1/(1 - z e^{-t});
    # the t^(p-1) rule absorbs one factor t and keeps the z = 1 case smooth
    if z == 1.0:
        mult = lambda t: t / -np.expm1(-t)
    else:
        mult = lambda t: t / (1.0 - z * np.exp(-t))
    K = basis.N + 16
    E = _rank_left(p, basis, K) @ _rank_right(basis, K, mult, alpha_shift=1)
    while K < max_terms:
        K = min(K + max(16, K // 2), max_terms)
        E_new = _rank_left(p, basis, K) @ _rank_right(basis, K, mult, alpha_shift=1)
        settled = np.max(np.abs(E_new - E)) <= 1e-13 * max(1.0, np.max(np.abs(E_new)))
        E = E_new
        if settled:
            break
    return (-1) ** q * z * E


def q_matrix(p: Params, q: int, z: float, basis: BasisSpec | None = None) -> OperatorMatrix:
    """Truncated Q_{z,q}; at r = 1 the resolvent of M_1 is applied exactly."""
    p = _as_params(p)
    basis = basis or _default_basis(p, q)
    if basis.q != q:
        basis = basis.with_q(q)
    z = float(z)
    _check_z(p, q, z)
    if p.intermittent:
        if basis.scale != 1.0:
            raise ValueError("r = 1 needs the unit-scale basis")
        E = _intermittent_q(p, q, z, basis)
        return OperatorMatrix(basis, p, E, "Q(z)", {"z": z, "method": "exact-resolvent"})
    M = matrix_M(p, basis).entries
    Nm = matrix_N(p, basis).entries
    A = np.eye(basis.N) - z * M
    # X (I - zM) = zN  <=>  (I - zM)^T X^T = z N^T
    lu = lu_factor(A.T)
    E = (-1) ** q * z * lu_solve(lu, Nm.T).T
    return OperatorMatrix(basis, p, E, "Q(z)", {"z": z, "method": "lu"})


def q_series_matrix(p: Params, q: int, z: float, basis: BasisSpec, n_cut: int) -> np.ndarray:
    """(-1)^q sum_{n=1}^{n_cut} z^n N M^(n-1), the power series of Q_{z,q}."""
    p = _as_params(p)
    basis = basis.with_q(q)
    M = matrix_M(p, basis).entries
    Nm = matrix_N(p, basis).entries
    out = np.zeros_like(M)
    term = Nm * z
    for _ in range(n_cut):
        out += term
        term = z * term @ M
    return (-1) ** q * out


# ---------------------------------------------------------------- orbit sums

@dataclass(frozen=True)
class XiResult:
    n: int
    z: float
    value: float
    tail_bound: float
    digit_cutoff: int
    words: int

    def flagged(self, tol: float) -> bool:
        """True when the digit cutoff cannot certify ``tol``."""
        return not self.tail_bound <= tol


def grand_partition_Xi(p: Params, n: int, z: float, digit_cutoff: int = 60) -> XiResult:
    """Xi_n(z) = sum over G-words of length n of z^(a_1+..+a_n) / |(G^n)'(x_w)|.

    Digits run up to ``digit_cutoff``; the neglected words are bounded with
    the per-atom sup of 1/|G'|.
    """
    p = _as_params(p)
    if not 1 <= n <= 4:
        raise ValueError("n must be in 1..4")
    if abs(z) > 1.0:
        raise ValueError("|z| must be <= 1")
    if digit_cutoff < 1:
        raise ValueError("digit_cutoff must be >= 1")
    parts = []
    count = 0
    logz = math.log(abs(z)) if z != 0 else -math.inf
    for digits, _, mult in _g_blocks(p, n, digit_cutoff):
        tot = digits.sum(axis=1)
        if z == 0:
            continue
        w = np.exp(tot * logz - np.log(np.abs(mult)))
        if z < 0:
            w = w * np.where(tot % 2 == 1, -1.0, 1.0)
        parts.extend(w)
        count += len(tot)
    head, tail = g_digit_bounds(p, z, digit_cutoff)
    return XiResult(n, float(z), math.fsum(parts), (head + tail) ** n - head ** n, digit_cutoff, count)


def trace_formula(p: Params, n: int, z: float, basis: BasisSpec | None = None) -> float:
    """tr Q_{z,0}^n - tr Q_{z,1}^n."""
    p = _as_params(p)
    b0 = basis.with_q(0) if basis else None
    b1 = basis.with_q(1) if basis else None
    Q0 = q_matrix(p, 0, z, b0).entries
    Q1 = q_matrix(p, 1, z, b1).entries
    return _trace_power(Q0, n) - _trace_power(Q1, n)


def _trace_power(A: np.ndarray, n: int) -> float:
    return math.fsum(np.diag(np.linalg.matrix_power(A, n)))


def orbit_log_coeffs_F(p: Params, n_max: int) -> list[float]:
    """Z_n(F_r)/n for n = 1..n_max (coefficients of log zeta_F)."""
    p = _as_params(p)
    return [orbit_sum_F(p, n) / n for n in range(1, n_max + 1)]


def orbit_log_coeffs_G(p: Params, n_max: int, digit_cutoff: int = 64) -> tuple[list[float], list[float]]:
    """(Z_n(G_r)/n, tail bound / n) for n = 1..n_max."""
    p = _as_params(p)
    vals, tails = [], []
    for n in range(1, n_max + 1):
        e = periodic_points_G(p, n, digit_cutoff)
        vals.append(e.weight_sum / n)
        tails.append(e.tail_bound / n)
    return vals, tails


# ------------------------------------------------------------ determinants

def newton_det_coeffs(traces) -> np.ndarray:
    """Coefficients d_0..d_n of det(1 - sA) from t_k = tr A^k, k = 1..n."""
    t = np.asarray(traces, dtype=float)
    d = np.zeros(t.size + 1)
    d[0] = 1.0
    for m in range(1, t.size + 1):
        d[m] = -math.fsum(t[k - 1] * d[m - k] for k in range(1, m + 1)) / m
    return d


@dataclass(frozen=True)
class FredholmSeries:
    """Truncated series of det(1 - s Q_{z,q})."""

    traces: np.ndarray
    det_coeffs: np.ndarray
    params: dict
    s_grid: tuple = ()
    values: tuple = ()
    tails: tuple = ()

    @property
    def n_max(self) -> int:
        return self.traces.size

    def __call__(self, s: float) -> float:
        return float(np.polynomial.polynomial.polyval(s, self.det_coeffs))

    def tail_estimate(self, s: float) -> float:
        """Size of the last two retained terms at s."""
        d = self.det_coeffs
        return float(abs(d[-1]) * abs(s) ** (d.size - 1) + abs(d[-2]) * abs(s) ** (d.size - 2))

    def converged(self, s: float, tol: float = 1e-8) -> bool:
        return self.tail_estimate(s) <= tol * max(1.0, abs(self(s)))

    def newton_residual(self) -> float:
        """max |m d_m + sum_k t_k d_{m-k}|, zero up to rounding by construction."""
        d, t = self.det_coeffs, self.traces
        res = [abs(m * d[m] + math.fsum(t[k - 1] * d[m - k] for k in range(1, m + 1))) for m in range(1, d.size)]
        return max(res) if res else 0.0


def fredholm_det(
    p: Params,
    q: int,
    z: float,
    s_grid=(1.0,),
    basis: BasisSpec | None = None,
    n_max: int = 24,
) -> FredholmSeries:
    """det(1 - s Q_{z,q}) on s_grid from traces of powers of Q via Newton's identities."""
    p = _as_params(p)
    Q = q_matrix(p, q, z, basis)
    traces = []
    X = np.eye(Q.basis.N)
    for _ in range(n_max):
        X = X @ Q.entries
        traces.append(math.fsum(np.diag(X)))
    traces = np.array(traces)
    d = newton_det_coeffs(traces)
    fs = FredholmSeries(traces, d, {"r": p.r, "q": q, "z": float(z), "N": Q.basis.N, "n_max": n_max})
    s_grid = tuple(float(s) for s in s_grid)
    vals = tuple(fs(s) for s in s_grid)
    tails = tuple(fs.tail_estimate(s) for s in s_grid)
    return FredholmSeries(traces, d, fs.params, s_grid, vals, tails)


@dataclass(frozen=True)
class ZetaResult:
    params: Params
    z: float
    s_grid: tuple
    det0: tuple
    det1: tuple
    zeta2: tuple
    tail_estimates: tuple
    meta: dict = field(default_factory=dict)


def zeta_grid(p: Params, z: float, s_grid, basis: BasisSpec | None = None, n_max: int = 24) -> ZetaResult:
    p = _as_params(p)
    N = basis.N if basis else 50
    b0 = basis.with_q(0) if basis else None
    b1 = basis.with_q(1) if basis else None
    f0 = fredholm_det(p, 0, z, s_grid, b0, n_max)
    f1 = fredholm_det(p, 1, z, s_grid, b1, n_max)
    out = []
    for s, d0, d1 in zip(f0.s_grid, f0.values, f1.values):
        if abs(d0) < 1e-12:
            raise PoleProximityError(f"det(1 - s Q_(z,0)) vanishes near s = {s}: pole of zeta_2")
        out.append(d1 / d0)
    tails = tuple(max(a, b) for a, b in zip(f0.tails, f1.tails))
    return ZetaResult(p, float(z), f0.s_grid, f0.values, f1.values, tuple(out), tails, {"N": N, "n_max": n_max})


def zeta_two_variable(p: Params, s: float, z: float, basis: BasisSpec | None = None, n_max: int = 24) -> float:
    return zeta_grid(p, z, (s,), basis, n_max).zeta2[0]


def log_zeta2_s_coeffs(p: Params, z: float, n_max: int, basis: BasisSpec | None = None) -> np.ndarray:
    """Taylor coefficients in s of log zeta_2(s, z): (tr Q_{z,0}^n - tr Q_{z,1}^n)/n."""
    p = _as_params(p)
    b0 = basis.with_q(0) if basis else None
    b1 = basis.with_q(1) if basis else None
    Q0 = q_matrix(p, 0, z, b0).entries
    Q1 = q_matrix(p, 1, z, b1).entries
    out = []
    X0, X1 = np.eye(Q0.shape[0]), np.eye(Q1.shape[0])
    for n in range(1, n_max + 1):
        X0, X1 = X0 @ Q0, X1 @ Q1
        out.append((math.fsum(np.diag(X0)) - math.fsum(np.diag(X1))) / n)
    return np.array(out)


def _z_power_traces(p: Params, q: int, basis: BasisSpec, m_max: int) -> np.ndarray:
    """T[n, m] = [z^m] tr Q_{z,q}^n for 1 <= n <= m <= m_max."""
    basis = basis.with_q(q)
    M = matrix_M(p, basis).entries
    Nm = matrix_N(p, basis).entries
    sign = (-1) ** q
    # A[k] = [z^k] Q_z = (-1)^q N M^(k-1)
    A = [None]
    term = Nm.copy()
    for _ in range(m_max):
        A.append(sign * term)
        term = term @ M
    T = np.zeros((m_max + 1, m_max + 1))
    n_dim = basis.N
    power = [np.zeros((n_dim, n_dim)) for _ in range(m_max + 1)]
    power[0] = np.eye(n_dim)  # coefficients of Q_z^0
    for n in range(1, m_max + 1):
        new = [np.zeros((n_dim, n_dim)) for _ in range(m_max + 1)]
        for m in range(n, m_max + 1):
            acc = np.zeros((n_dim, n_dim))
            for k in range(1, m - n + 2):
                if m - k >= n - 1:
                    acc += power[m - k] @ A[k]
            new[m] = acc
        power = new
        for m in range(n, m_max + 1):
            T[n, m] = math.fsum(np.diag(power[m]))
    return T


def log_zeta2_z_coeffs(p: Params, m_max: int, basis: BasisSpec | None = None, s: float = 1.0) -> np.ndarray:
    """Taylor coefficients c_1..c_m_max in z of log zeta_2(s, z).

    log zeta_2(s, z) = sum_n s^n/n (tr Q_{z,0}^n - tr Q_{z,1}^n), and Q_z^n = O(z^n),
    so only n <= m contributes to [z^m].
    """
    p = _as_params(p)
    if p.intermittent:
        raise ValueError("the z-series uses the power series of the resolvent of M, r < 1 only")
    basis = basis or _default_basis(p, 0)
    T0 = _z_power_traces(p, 0, basis, m_max)
    T1 = _z_power_traces(p, 1, basis, m_max)
    c = np.zeros(m_max)
    for m in range(1, m_max + 1):
        c[m - 1] = math.fsum(s ** n / n * (T0[n, m] - T1[n, m]) for n in range(1, m + 1))
    return c


def zeta_to_json(res: ZetaResult) -> str:
    doc = {
        "params": {"r": res.params.r, "rho": res.params.rho, "delta": res.params.delta, **res.meta},
        "z": res.z,
        "s_grid": list(res.s_grid),
        "det0": list(res.det0),
        "det1": list(res.det1),
        "zeta2": list(res.zeta2),
        "tail_estimates": list(res.tail_estimates),
    }
    return json.dumps(doc, indent=2)
