"""Acceptance gate: each check recomputes one published claim from scratch.

Every ``criterion_*`` function returns a CriterionResult. Tolerances are
the ones the claims are held to; nothing is relaxed to make a check pass.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .maps import Params, fixed_point_x1, renorm_residual
from .measures import (
    density_e,
    density_h,
    kac_expected_return,
    lyapunov_birkhoff,
    lyapunov_closed,
    mean_return_time_mc,
    pf_apply,
)
from .spectral import (
    BasisSpec,
    NotInL2Error,
    borel_transform,
    eigenvalue_N,
    matrix_M,
    matrix_N,
    matrix_P,
    preimage_coeffs,
    project,
    r0_polynomial_eigenfunction,
    trace_closed,
    trace_fixed_points,
)
from .thermo import free_energy, gamma_r
from .zeta import (
    grand_partition_Xi,
    log_zeta2_s_coeffs,
    log_zeta2_z_coeffs,
    orbit_log_coeffs_F,
    orbit_log_coeffs_G,
    q_matrix,
    trace_formula,
    zeta_two_variable,
)

__all__ = ["CriterionResult", "CRITERIA", "run_all", "format_table"]


@dataclass
class CriterionResult:
    number: int
    claim: str
    passed: bool
    detail: str
    values: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.claim}: {self.detail}"


def _fmt(x) -> str:
    return f"{x:.3g}"


def criterion_1() -> CriterionResult:
    worst = {}
    for r in (0.2, 0.5, 0.8):
        p = Params(r)
        ev = matrix_M(p, BasisSpec.adapted(p, 0, 50)).eigvals()[:8]
        want = p.rho ** -np.arange(1, 9, dtype=float)
        worst[r] = float(np.max(np.abs(ev - want)))
    ok = max(worst.values()) <= 1e-8
    return CriterionResult(1, "spectrum of M_r is rho^-k", ok, "max error " + _fmt(max(worst.values())), worst)


def criterion_2() -> CriterionResult:
    worst, signs_ok = {}, True
    for r in (0.0, 0.5, 1.0):
        p = Params(r)
        ev = matrix_N(p, BasisSpec(0, 50)).eigvals()[:6]
        want = np.array([eigenvalue_N(p, k) for k in range(1, 7)])
        worst[r] = float(np.max(np.abs(ev - want)))
        signs_ok &= bool(np.all(np.sign(ev.real) == (-1.0) ** np.arange(6)))
        if r == 1.0:
            g = (math.sqrt(5.0) - 1.0) / 2.0
            gold = np.array([(-1) ** (k - 1) * g ** (2 * k) for k in range(1, 7)])
            worst["golden"] = float(np.max(np.abs(ev - gold)))
    ok = max(worst.values()) <= 1e-8 and signs_ok
    return CriterionResult(
        2, "spectrum of N_r is nu_k", ok, f"max error {_fmt(max(worst.values()))}, alternating signs {signs_ok}", worst
    )


def criterion_3() -> CriterionResult:
    errs = {}
    for r in [i / 10 for i in range(10)]:
        p = Params(r)
        tM = matrix_M(p, BasisSpec.adapted(p, 0, 50)).trace()
        Nm = matrix_N(p, BasisSpec(0, 50))
        tN, tN2 = Nm.trace(), (Nm @ Nm).trace()
        errs[r] = {
            "M": abs(tM - trace_closed(p, "M")),
            "N": abs(tN - trace_closed(p, "N")),
            "N2": abs(tN2 - trace_closed(p, "N2")),
            "P": abs(tM + tN - trace_closed(p, "P")),
        }
    p0 = Params(0.0)
    b0 = BasisSpec(0, 50)
    trP0 = matrix_P(p0, b0).trace()
    fp = max(abs(trace_fixed_points(Params(r)) - trace_closed(Params(r), "P")) for r in [i / 10 for i in range(10)])
    worst = max(max(e.values()) for e in errs.values())
    bad = sorted({f"{k}@r={r}" for r, e in errs.items() for k, v in e.items() if v > 1e-7})
    ok = worst <= 1e-7 and abs(trP0 - 4.0 / 3.0) <= 1e-10 and fp <= 1e-12
    detail = f"worst matrix-trace error {_fmt(worst)}; tr P(0) error {_fmt(abs(trP0 - 4 / 3))}; fixed-point route {_fmt(fp)}"
    if bad:
        detail += "; over tolerance: " + ", ".join(bad)
    return CriterionResult(3, "traces of M, N, N^2, P", ok, detail, {"errors": errs, "trP0": trP0, "fixed_point": fp})


LISTED_R0_EIGENFUNCTIONS = {
    0: [1.0],
    1: [2.0, -3.0, 0.5],
    2: [-32.0 / 15.0, 0.0, 10.0 / 3.0, -5.0 / 6.0, 1.0 / 24.0],
}


def _cosine(u, v) -> float:
    return float(abs(u @ v) / (np.linalg.norm(u) * np.linalg.norm(v)))


def criterion_4() -> CriterionResult:
    p = Params(0.0)
    b = BasisSpec(0, 50)
    P = matrix_P(p, b)
    ev, V = np.linalg.eig(P.entries)
    order = np.argsort(-np.abs(ev))
    ev, V = ev[order], V[:, order]
    val_err = float(np.max(np.abs(ev[:4] - 4.0 ** -np.arange(4))))
    cos_listed, cos_solved = {}, {}
    for n, coeffs in LISTED_R0_EIGENFUNCTIONS.items():
        i = int(np.argmin(np.abs(ev - 4.0 ** -n)))
        w = V[:, i].real
        poly = lambda c: (lambda t: np.polynomial.polynomial.polyval(t, c))
        cos_listed[n] = _cosine(project(poly(coeffs), b).orthonormal, w)
        cos_solved[n] = _cosine(project(poly(r0_polynomial_eigenfunction(n)), b).orthonormal, w)
    worst = min(cos_listed.values())
    ok = val_err <= 1e-8 and worst >= 1 - 1e-9
    detail = (
        f"eigenvalue error {_fmt(val_err)}; 1 - cosine vs listed "
        + ", ".join(f"phi_{2 * n}: {_fmt(1 - c)}" for n, c in cos_listed.items())
        + f"; vs exact solve {_fmt(1 - min(cos_solved.values()))}"
    )
    return CriterionResult(4, "r=0 spectrum 4^-n and polynomial eigenfunctions", ok, detail,
                           {"eig_err": val_err, "listed": cos_listed, "solved": cos_solved})


def criterion_5() -> CriterionResult:
    grid = np.arange(1, 1001) / 1000.0
    xb = np.linspace(0.05, 1.0, 200)
    pf_res, pre_res = {}, {}
    excluded = []
    for r in [i / 10 for i in range(11)]:
        p = Params(r)
        e = density_e(p)
        pf_res[r] = float(np.max(np.abs(pf_apply(p, e, grid) - e(grid)) / e(grid)))
        for kind, dens in (("e", e), ("h", density_h(p))):
            try:
                c = preimage_coeffs(p, kind)
            except NotInL2Error:
                excluded.append(f"{kind}@r={r:g}")
                continue
            pre_res[f"{kind}@{r:g}"] = float(np.max(np.abs(borel_transform(c, xb) - dens(xb))))
    ok = max(pf_res.values()) <= 1e-12 and max(pre_res.values()) <= 1e-9
    detail = (
        f"P e_r residual (relative) {_fmt(max(pf_res.values()))}; Borel pre-images {_fmt(max(pre_res.values()))}; "
        f"not in L2: {', '.join(excluded)}"
    )
    return CriterionResult(5, "invariant densities and their pre-images", ok, detail, {"pf": pf_res, "preimage": pre_res})


def criterion_6(samples: int = 10 ** 6, seed: int = 2024) -> CriterionResult:
    vals = {}
    ok = True
    for r in (0.3, 0.6, 0.9):
        p = Params(r)
        st = mean_return_time_mc(p, samples, seed)
        exact = kac_expected_return(p)
        z = (st.mean - exact) / st.stderr
        vals[r] = {"mc": st.mean, "stderr": st.stderr, "exact": exact, "z": z}
        ok &= abs(z) <= 3.0
    d = 2.0 ** -10
    st = mean_return_time_mc(Params(1.0 - d), samples, seed)
    asym = math.log(1.0 / d) / math.log(2.0)
    rel = abs(st.mean - asym) / asym
    vals["asymptotic"] = {"mc": st.mean, "log(1/delta)/log 2": asym, "relative": rel}
    ok &= rel <= 0.15
    detail = ", ".join(f"r={r}: {v['z']:+.2f} sigma" for r, v in vals.items() if r != "asymptotic")
    detail += f"; delta=2^-10 relative gap {_fmt(rel)}"
    return CriterionResult(6, "Kac mean return time", ok, detail, vals)


def criterion_7(steps: int = 10 ** 7, seed: int = 7) -> CriterionResult:
    e0 = abs(lyapunov_closed(Params(0.0)) - 2 * math.log(2))
    e1 = abs(lyapunov_closed(Params(1.0)) - math.pi ** 2 / (6 * math.log(2)))
    # the closed form must also approach the endpoints continuously
    near = abs(lyapunov_closed(Params(1e-9)) - 2 * math.log(2)) + abs(
        lyapunov_closed(Params(1 - 1e-9)) - math.pi ** 2 / (6 * math.log(2))
    )
    vals = {"endpoint_errors": (e0, e1), "near_endpoints": near}
    ok = max(e0, e1) <= 1e-10
    zs = []
    for r in (0.5, 1.0):
        st = lyapunov_birkhoff(Params(r), "G", steps, seed=seed)
        z = (st.mean - lyapunov_closed(Params(r))) / st.stderr
        vals[r] = {"birkhoff": st.mean, "stderr": st.stderr, "z": z, "restarts": st.restarts}
        zs.append(z)
        ok &= abs(z) <= 3.0
    detail = f"endpoint errors {_fmt(e0)}, {_fmt(e1)}; Birkhoff r=0.5 {zs[0]:+.2f} sigma, r=1 {zs[1]:+.2f} sigma"
    return CriterionResult(7, "Lyapunov exponents", ok, detail, vals)


def criterion_8() -> CriterionResult:
    x = np.linspace(0.0, 1.0, 1000)
    res = {r: float(np.max(renorm_residual(Params(r), x))) for r in (0.0, 0.25, 0.5, 0.75, 1.0)}
    ok = max(res.values()) <= 1e-14
    return CriterionResult(8, "renormalisation fixed point", ok, "max residual " + _fmt(max(res.values())), res)


def _slack(f, beta, p) -> float:
    lr = math.log(p.rho)
    upper = beta * lr
    lower = beta * (lr + gamma_r(p))
    return max(0.0, f - upper, lower - f)


def criterion_9() -> CriterionResult:
    ok = True
    out = {}
    for r in (0.2, 0.5, 0.8):
        p = Params(r)
        for beta in (-3.0, -1.0, -0.5):
            sl = [_slack(free_energy(p, beta, n).f_n, beta, p) for n in (8, 12, 16)]
            out[(r, beta)] = sl
            ok &= sl[-1] <= 5e-2 and sl[0] >= sl[1] >= sl[2]
    f0 = max(abs(free_energy(Params(r), 0.0, n).f_n) for r in (0.0, 0.2, 0.5, 0.8) for n in (8, 16))
    tent = max(abs(free_energy(Params(0.0), b, n).f_n - b * math.log(2)) for b in (-3.0, -1.0, 0.5, 2.0) for n in (4, 8))
    ok &= f0 <= 1e-14 and tent <= 1e-14
    worst = max(s[-1] for s in out.values())
    detail = f"max slack at n=16 {_fmt(worst)}; |f_n(0)| {_fmt(f0)}; tent error {_fmt(tent)}"
    return CriterionResult(9, "free-energy envelope", ok, detail, {"slack": {str(k): v for k, v in out.items()}, "f0": f0, "tent": tent})


def criterion_10() -> CriterionResult:
    p = Params(0.5)
    # zeta_2(s, 1) = zeta_G(s)
    got = log_zeta2_s_coeffs(p, 1.0, 3)
    want, tails = orbit_log_coeffs_G(p, 3, 64)
    err_g = float(np.max(np.abs(got - np.array(want))))
    # zeta_2(1, z) = (1 - z) zeta_F(z), compared coefficientwise in log form
    c = log_zeta2_z_coeffs(p, 8)
    zf = np.array(orbit_log_coeffs_F(p, 8))
    m = np.arange(1, 9)
    err_f = float(np.max(np.abs(c - (zf - 1.0 / m))))
    err_f_rho = float(np.max(np.abs(c - (zf - p.rho ** -m / m))))
    # tent map: zeta_2(1, z) identically 1
    zs = np.linspace(-0.5, 0.5, 11)
    tent = float(max(abs(zeta_two_variable(Params(0.0), 1.0, z) - 1.0) for z in zs))
    ok = err_g <= 1e-5 and err_f <= 1e-5 and tent <= 1e-10
    detail = (
        f"zeta_G series {_fmt(err_g)}; (1-z) zeta_F series {_fmt(err_f)} "
        f"[(1-z/rho) zeta_F: {_fmt(err_f_rho)}]; tent zeta_2(1,z)-1 up to {_fmt(tent)}"
    )
    return CriterionResult(10, "zeta_2 identities", ok, detail,
                           {"G": err_g, "F(1-z)": err_f, "F(1-z/rho)": err_f_rho, "tent": tent, "G_tails": tails})


def criterion_11() -> CriterionResult:
    out = {}
    ok = True
    for r in (0.0, 0.5):
        for z in (0.5, 0.9):
            for n in (1, 2):
                xi = grand_partition_Xi(Params(r), n, z, 60)
                tf = trace_formula(Params(r), n, z)
                out[(r, z, n)] = {"Xi": xi.value, "trace": tf, "diff": abs(xi.value - tf), "tail": xi.tail_bound}
                ok &= abs(xi.value - tf) <= 1e-5 and not xi.flagged(1e-5)
    worst = max(v["diff"] for v in out.values())
    tail = max(v["tail"] for v in out.values())
    return CriterionResult(11, "trace formula for Xi_n", ok, f"max difference {_fmt(worst)}, max tail bound {_fmt(tail)}",
                           {str(k): v for k, v in out.items()})


def criterion_12() -> CriterionResult:
    out = {}
    for r in (0.0, 0.5):
        p = Params(r)
        b = BasisSpec(0, 50)
        M = matrix_M(p, b).entries
        P = matrix_P(p, b).entries
        eye = np.eye(b.N)
        for z in (0.3, 0.7):
            Q = q_matrix(p, 0, z, b).entries
            out[(r, z)] = float(np.max(np.abs((eye - Q) @ (eye - z * M) - (eye - z * P))))
    worst = max(out.values())
    return CriterionResult(12, "resolvent identity", worst <= 1e-9, "max defect " + _fmt(worst), {str(k): v for k, v in out.items()})


def criterion_13() -> CriterionResult:
    a, b = 0.1, 0.9
    out = {}
    ok = True
    for j in (4, 5, 6):
        d = 2.0 ** -j
        p = Params(1.0 - d)
        need = int(math.ceil(math.log(1.0 / a) / math.log(p.rho))) + 20
        ev = matrix_M(p, BasisSpec.adapted(p, 0, need)).eigvals().real
        count = int(np.sum((ev >= a) & (ev <= b)))
        pred = math.log((b - a) / (a * b)) / d
        out[j] = {"count": count, "predicted": pred}
        ok &= abs(count - pred) <= 2.0
    p1 = Params(1.0)
    S = matrix_P(p1, BasisSpec(0, 50)).entries
    sym = float(np.max(np.abs(S - S.T)))
    ok &= sym <= 1e-10
    detail = ", ".join(f"delta=2^-{j}: {v['count']} vs {v['predicted']:.1f}" for j, v in out.items())
    detail += f"; symmetry defect at r=1 {_fmt(sym)}"
    return CriterionResult(13, "intermittency transition", ok, detail, {"counts": out, "symmetry": sym})


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
    12: criterion_12,
    13: criterion_13,
}


def run_criterion(k: int) -> CriterionResult:
    t = time.perf_counter()
    res = CRITERIA[k]()
    res.seconds = time.perf_counter() - t
    return res


def run_all(which=None) -> list[CriterionResult]:
    return [run_criterion(k) for k in (which or sorted(CRITERIA))]


def format_table(results) -> str:
    return "\n".join(r.line() for r in results)
