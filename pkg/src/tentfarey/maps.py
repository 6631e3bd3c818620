"""The map family F_r, its Moebius inverse branches and the induced maps G_r.

F_r(x) = rho x / (1 - r x) on [0, 1/2] and rho (1 - x) / (1 - r + r x) on
(1/2, 1], with rho = 2 - r. r = 0 is the tent map, r = 1 the Farey map.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

__all__ = [
    "Params",
    "MoebiusMap",
    "BranchWord",
    "PeriodicPoint",
    "OrbitEnumeration",
    "PartitionPointError",
    "map_eval",
    "map_derivative",
    "inverse_branch",
    "moebius_fixed_point",
    "fixed_point_x1",
    "inverse_branch_iterate",
    "partition_point_c",
    "renorm_residual",
    "passage_time_tau",
    "induced_map_eval",
    "induced_branch",
    "induced_derivative",
    "periodic_points_F",
    "periodic_points_G",
    "orbit_sum_F",
    "word_matrices",
    "g_digit_bounds",
]

PARTITION_GUARD = 1e-12


class PartitionPointError(ValueError):
    """Raised when x sits on (or within the guard of) a partition point c_n."""


@dataclass(frozen=True)
class Params:
    """Family parameter r in [0, 1]; rho and delta are derived."""

    r: float

    def __post_init__(self):
        r = float(self.r)
        if not 0.0 <= r <= 1.0 or math.isnan(r):
            raise ValueError(f"r must lie in [0, 1], got {self.r!r}")
        object.__setattr__(self, "r", r)

    @property
    def rho(self) -> float:
        return 2.0 - self.r

    @property
    def delta(self) -> float:
        return 1.0 - self.r

    @property
    def intermittent(self) -> bool:
        return self.r == 1.0

    def geometric_sum(self, n: int) -> float:
        """sum_{k<n} rho^k, stable as rho -> 1."""
        if self.r == 1.0:
            return float(n)
        return math.expm1(n * math.log1p(self.delta)) / self.delta


def _as_params(p) -> Params:
    return p if isinstance(p, Params) else Params(p)


# ----------------------------------------------------------------- Moebius

@dataclass(frozen=True)
class MoebiusMap:
    """x -> (a x + b) / (c x + d)."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if self.det == 0.0:
            raise ValueError("degenerate Moebius map (zero determinant)")

    @classmethod
    def from_matrix(cls, m) -> "MoebiusMap":
        (a, b), (c, d) = np.asarray(m, dtype=float)
        return cls(float(a), float(b), float(c), float(d))

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __call__(self, x):
        return (self.a * x + self.b) / (self.c * x + self.d)

    def derivative(self, x):
        return self.det / (self.c * x + self.d) ** 2

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        """self o other, normalized."""
        return MoebiusMap.from_matrix(self.matrix @ other.matrix).normalized()

    __matmul__ = compose

    def normalized(self) -> "MoebiusMap":
        s = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        return MoebiusMap(self.a / s, self.b / s, self.c / s, self.d / s)

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a).normalized()

    def fixed_point(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return moebius_fixed_point(self, (lo, hi))


class BranchWord(tuple):
    """Nonempty symbol sequence: over {0, 1} for F, digits >= 1 for G."""

    def __new__(cls, symbols, alphabet: str = "F"):
        obj = super().__new__(cls, (int(s) for s in symbols))
        if not obj:
            raise ValueError("empty branch word")
        if alphabet == "F" and any(s not in (0, 1) for s in obj):
            raise ValueError("F-words use symbols 0 and 1")
        if alphabet == "G" and any(s < 1 for s in obj):
            raise ValueError("G-words use digits >= 1")
        return obj

    def __repr__(self) -> str:
        return f"BranchWord({tuple(self)})"


class PeriodicPoint(NamedTuple):
    word: BranchWord
    x: float
    multiplier: float


@dataclass(frozen=True)
class OrbitEnumeration:
    """Periodic points of G over a digit cutoff plus a rigorous bound on the rest."""

    points: list
    tail_bound: float
    digit_cutoff: int

    @property
    def weight_sum(self) -> float:
        return math.fsum(1.0 / abs(pt.multiplier) for pt in self.points)


# ------------------------------------------------------------ map evaluation

def _check_unit(x) -> np.ndarray:
    xa = np.asarray(x, dtype=float)
    if np.any((xa < 0.0) | (xa > 1.0)) or np.any(np.isnan(xa)):
        raise ValueError("x must lie in [0, 1]")
    return xa


def _ret(v):
    return float(v) if np.ndim(v) == 0 else v


def map_eval(p: Params, x):
    """F_r(x); x = 1/2 belongs to the left branch."""
    p = _as_params(p)
    xa = _check_unit(x)
    r, rho = p.r, p.rho
    with np.errstate(divide="ignore", invalid="ignore"):
        left = rho * xa / (1.0 - r * xa)
        right = rho * (1.0 - xa) / (p.delta + r * xa)
    return _ret(np.where(xa <= 0.5, left, right))


def map_derivative(p: Params, x):
    p = _as_params(p)
    xa = _check_unit(x)
    r, rho = p.r, p.rho
    with np.errstate(divide="ignore", invalid="ignore"):
        left = rho / (1.0 - r * xa) ** 2
        right = -rho / (p.delta + r * xa) ** 2
    return _ret(np.where(xa <= 0.5, left, right))


def inverse_branch(p: Params, i: int) -> MoebiusMap:
    """Phi_0(x) = x/(rho + r x) and Phi_1 = 1 - Phi_0."""
    p = _as_params(p)
    if i == 0:
        return MoebiusMap(1.0, 0.0, p.r, p.rho)
    if i == 1:
        return MoebiusMap(-p.delta, p.rho, p.r, p.rho)
    raise ValueError("branch index must be 0 or 1")


def inverse_branch_iterate(p: Params, n: int) -> MoebiusMap:
    """Phi_0^n(x) = (rho^n / x + r sum_{k<n} rho^k)^{-1}."""
    p = _as_params(p)
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return MoebiusMap(1.0, 0.0, 0.0, 1.0)
    return MoebiusMap(1.0, 0.0, p.r * p.geometric_sum(n), p.rho ** n).normalized()


def partition_point_c(p: Params, n: int) -> float:
    """c_n = Phi_0^n(1); equals (1-r)/(rho^n - r) for r < 1 and 1/(n+1) at r = 1."""
    p = _as_params(p)
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 1.0
    if p.intermittent:
        return 1.0 / (n + 1)
    return 1.0 / (p.rho ** n + p.r * p.geometric_sum(n))


def _stable_roots(A, B, C):
    """Both roots of A x^2 + B x + C = 0 (arrays), avoiding cancellation."""
    disc = B * B - 4.0 * A * C
    scale = np.maximum(B * B, np.abs(4.0 * A * C))
    disc = np.where((disc < 0) & (disc > -1e-12 * np.maximum(scale, 1e-300)), 0.0, disc)
    sq = np.sqrt(np.maximum(disc, 0.0))
    qq = -0.5 * (B + np.where(B >= 0, sq, -sq))
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(A != 0, qq / A, np.nan)
        r2 = np.where(qq != 0, C / qq, np.where(A != 0, -B / (2 * A), np.nan))
        lin = A == 0
        r1 = np.where(lin, -C / B, r1)
        r2 = np.where(lin, -C / B, r2)
    return r1, r2, disc < 0


def _fixed_points(mats: np.ndarray, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    """Fixed points in [lo, hi] of a stack of contracting Moebius matrices."""
    a, b, c, d = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1]
    r1, r2, neg = _stable_roots(c, d - a, -b)
    tol = 1e-12
    ok1 = (r1 >= lo - tol) & (r1 <= hi + tol)
    ok2 = (r2 >= lo - tol) & (r2 <= hi + tol)
    x = np.where(ok1, r1, r2)
    bad = ~(ok1 | ok2) | neg
    if bad.any():
        for i in np.flatnonzero(bad):
            x[i] = _bisect_fixed(mats[i], lo, hi)
    return np.clip(x, lo, hi)


def _bisect_fixed(m: np.ndarray, lo: float, hi: float) -> float:
    (a, b), (c, d) = m
    g = lambda x: (a * x + b) / (c * x + d) - x
    glo, ghi = g(lo), g(hi)
    if glo * ghi > 0:
        raise ArithmeticError("no fixed point in the interval (bad branch word)")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0.0 or hi - lo < 1e-17:
            return mid
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def moebius_fixed_point(m: MoebiusMap, interval=(0.0, 1.0)) -> float:
    """Unique fixed point of a contraction m of [lo, hi] into itself."""
    lo, hi = interval
    try:
        x = float(_fixed_points(m.matrix[None], lo, hi)[0])
    except ArithmeticError as exc:
        raise ArithmeticError(f"{m} has no fixed point in {interval}") from exc
    if abs(m(x) - x) > 1e-13:
        x = _bisect_fixed(m.matrix, lo, hi)
    return x


def fixed_point_x1(p: Params) -> float:
    """The fixed point of the right branch."""
    p = _as_params(p)
    if p.r == 0.0:
        return 2.0 / 3.0
    # rationalized form of (sqrt(9-4r) - (3-2r)) / (2r), no 0/0 as r -> 0
    return 2.0 * p.rho / (math.sqrt(9.0 - 4.0 * p.r) + 3.0 - 2.0 * p.r)


def renorm_residual(p: Params, x) -> float:
    """|alpha Phi_0(Phi_0(x/beta)) - Phi_0(x)| with alpha = 3-r, beta = (3-r)/(2-r)."""
    p = _as_params(p)
    phi = inverse_branch(p, 0)
    alpha = 3.0 - p.r
    beta = (3.0 - p.r) / (2.0 - p.r)
    xa = np.asarray(x, dtype=float)
    return _ret(np.abs(alpha * phi(phi(xa / beta)) - phi(xa)))


# ---------------------------------------------------------- induced map

def passage_time_tau(p: Params, x):
    """tau(x): the n with c_n < x < c_{n-1}."""
    p = _as_params(p)
    xa = np.asarray(x, dtype=float)
    if np.any((xa <= 0.0) | (xa > 1.0)):
        raise ValueError("tau needs x in (0, 1]")
    if p.intermittent:
        n = np.floor(1.0 / xa)
    else:
        n = np.ceil(np.log(p.r + p.delta / xa) / math.log(p.rho))
    n = np.maximum(n, 1.0).astype(np.int64)
    c_lo = _c_array(p, n)
    c_hi = _c_array(p, n - 1)
    # one correction step against rounding in the closed form
    n = np.where(xa <= c_lo, n + 1, np.where(xa > c_hi, n - 1, n))
    c_lo = _c_array(p, n)
    c_hi = _c_array(p, n - 1)
    near = (np.abs(xa - c_lo) <= PARTITION_GUARD * np.maximum(c_lo, 1e-300)) | (
        (np.abs(xa - c_hi) <= PARTITION_GUARD * c_hi) & (n > 1)
    )
    if np.any(near):
        raise PartitionPointError("x is a partition point c_n; tau is ill-defined")
    return int(n) if n.ndim == 0 else n


def _c_array(p: Params, n: np.ndarray) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if p.intermittent:
        return 1.0 / (n + 1.0)
    s = np.expm1(n * math.log1p(p.delta)) / p.delta
    return 1.0 / (p.rho ** n + p.r * s)


def induced_branch(p: Params, n: int) -> MoebiusMap:
    """G_{r,n}(x) = rho (1 - x / c_{n-1}) / (1 - r + r x), mapping A_n onto [0, 1]."""
    p = _as_params(p)
    if n < 1:
        raise ValueError("branch index n must be >= 1")
    c = partition_point_c(p, n - 1)
    return MoebiusMap(-p.rho / c, p.rho, p.r, p.delta)


def _induced_raw(p: Params, x: np.ndarray, n: np.ndarray):
    c = _c_array(p, n - 1)
    den = p.delta + p.r * x
    g = p.rho * (1.0 - x / c) / den
    dg = -p.rho * (p.delta + p.r * c) / (c * den * den)
    return g, dg


def induced_map_eval(p: Params, x):
    """G_r(x) = F_r^{tau(x)}(x)."""
    p = _as_params(p)
    xa = np.asarray(x, dtype=float)
    n = passage_time_tau(p, xa)
    g, _ = _induced_raw(p, xa, np.asarray(n))
    return _ret(np.clip(g, 0.0, 1.0))


def induced_derivative(p: Params, x):
    p = _as_params(p)
    xa = np.asarray(x, dtype=float)
    n = passage_time_tau(p, xa)
    _, dg = _induced_raw(p, xa, np.asarray(n))
    return _ret(dg)


# ------------------------------------------------------ periodic orbits

def _normalize_stack(m: np.ndarray) -> np.ndarray:
    s = np.max(np.abs(m.reshape(m.shape[0], 4)), axis=1)
    return m / s[:, None, None]


def word_matrices(base: np.ndarray, n: int, chunk: int = 1 << 16) -> Iterator[tuple[int, np.ndarray]]:
    """Products base[w1] @ ... @ base[wn] for all words, lexicographic order.

    Yields (offset, stack) blocks of at most ``chunk`` words; word index in
    base-len(base) positional notation with w1 most significant.
    """
    k = base.shape[0]
    total = k ** n
    # split into prefix and suffix lengths so a suffix block fits in a chunk
    s = n
    while k ** s > chunk and s > 1:
        s -= 1
    suffix = _all_products(base, s)
    pre_len = n - s
    if pre_len == 0:
        yield 0, suffix
        return
    prefixes = _all_products(base, pre_len) if k ** pre_len <= chunk else None
    for i in range(k ** pre_len):
        if prefixes is not None:
            pm = prefixes[i]
        else:
            pm = np.eye(2)
            idx = _digits(i, k, pre_len)
            for dgt in idx:
                pm = pm @ base[dgt]
            pm = pm / np.max(np.abs(pm))
        block = _normalize_stack(np.einsum("ij,njk->nik", pm, suffix))
        yield i * k ** s, block
    assert total == k ** n


def _digits(i: int, k: int, length: int) -> list[int]:
    out = []
    for _ in range(length):
        i, r = divmod(i, k)
        out.append(r)
    return out[::-1]


def _all_products(base: np.ndarray, n: int) -> np.ndarray:
    w = np.eye(2)[None]
    k = base.shape[0]
    for _ in range(n):
        w = np.einsum("nij,kjl->nkil", w, base).reshape(-1, 2, 2)
        w = _normalize_stack(w)
    assert w.shape[0] == k ** n
    return w


def _f_base(p: Params) -> np.ndarray:
    return np.stack([inverse_branch(p, 0).matrix, inverse_branch(p, 1).matrix])


def _fixed_and_multiplier(mats: np.ndarray):
    x = _fixed_points(mats)
    a, b, c, d = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1]
    dphi = (a * d - b * c) / (c * x + d) ** 2
    return x, 1.0 / dphi


def periodic_points_F(p: Params, n: int) -> list[PeriodicPoint]:
    """All 2^n fixed points of F^n with multipliers (F^n)'(x), lexicographic."""
    p = _as_params(p)
    if not 1 <= n <= 24:
        raise ValueError("n must be in 1..24")
    out = []
    for off, block in word_matrices(_f_base(p), n):
        x, mult = _fixed_and_multiplier(block)
        for j in range(block.shape[0]):
            w = BranchWord(_digits(off + j, 2, n), "F")
            out.append(PeriodicPoint(w, float(x[j]), float(mult[j])))
    return out


def orbit_sum_F(p: Params, n: int) -> float:
    """Z_n(F) = sum over fixed points of F^n of 1/|(F^n)'|, without building the list."""
    p = _as_params(p)
    if not 1 <= n <= 24:
        raise ValueError("n must be in 1..24")
    parts = []
    for _, block in word_matrices(_f_base(p), n):
        _, mult = _fixed_and_multiplier(block)
        parts.extend(1.0 / np.abs(mult))
    return math.fsum(parts)


def _g_base(p: Params, cutoff: int) -> np.ndarray:
    phi1 = inverse_branch(p, 1).matrix
    mats = []
    for a in range(1, cutoff + 1):
        m = inverse_branch_iterate(p, a - 1).matrix @ phi1
        mats.append(m / np.max(np.abs(m)))
    return np.stack(mats)


def g_digit_bounds(p: Params, z: float, cutoff: int) -> tuple[float, float]:
    """(sum_{a<=cutoff} s_a |z|^a, bound on sum_{a>cutoff} s_a |z|^a).

    s_a = c_{a-1}(delta + r c_{a-1})/rho is the sup of 1/|G'| on A_a; it is
    attained at the right endpoint because |G'| decreases along the atom.
    """
    p = _as_params(p)
    az = abs(z)
    s = [_g_sup(p, a) * az ** a for a in range(1, cutoff + 1)]
    head = math.fsum(s)
    nxt = _g_sup(p, cutoff + 1) * az ** (cutoff + 1)
    ratio = az / p.rho
    if ratio < 1.0 and not (p.intermittent and az == 1.0):
        tail = nxt / (1.0 - ratio)
    elif p.intermittent and az <= 1.0:
        # s_a = 1/a^2 at r = 1: integral bound for the tail
        tail = 1.0 / cutoff
    else:
        tail = math.inf
    return head, tail


def _g_sup(p: Params, a: int) -> float:
    c = partition_point_c(p, a - 1)
    return c * (p.delta + p.r * c) / p.rho


def _g_blocks(p: Params, n: int, cutoff: int):
    base = _g_base(p, cutoff)
    for off, block in word_matrices(base, n):
        x, mult = _fixed_and_multiplier(block)
        idx = off + np.arange(block.shape[0])
        digits = np.empty((block.shape[0], n), dtype=np.int64)
        rem = idx.copy()
        for pos in range(n - 1, -1, -1):
            digits[:, pos] = rem % cutoff + 1
            rem //= cutoff
        yield digits, x, mult


def periodic_points_G(p: Params, n: int, digit_cutoff: int) -> OrbitEnumeration:
    """Fixed points of G^n for digit words with every digit <= digit_cutoff."""
    p = _as_params(p)
    if not 1 <= n <= 6:
        raise ValueError("n must be in 1..6")
    if not 1 <= digit_cutoff <= 64:
        raise ValueError("digit_cutoff must be in 1..64")
    pts = []
    for digits, x, mult in _g_blocks(p, n, digit_cutoff):
        for j in range(len(x)):
            pts.append(PeriodicPoint(BranchWord(digits[j], "G"), float(x[j]), float(mult[j])))
    head, tail = g_digit_bounds(p, 1.0, digit_cutoff)
    return OrbitEnumeration(pts, (head + tail) ** n - head ** n, digit_cutoff)
