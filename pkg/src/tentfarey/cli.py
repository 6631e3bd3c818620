"""Command-line front end: ``tentfarey <command> [flags]``.

Every command writes a long-format table (CSV or JSON) whose header echoes
the full configuration. Exit codes: 0 success, 1 usage, 2 numeric failure,
3 acceptance failure.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .maps import Params, fixed_point_x1, orbit_sum_F
from .measures import (
    UnsupportedModeError,
    density_e,
    density_h,
    kac_expected_return,
    lyapunov_birkhoff,
    lyapunov_closed,
    mean_return_time_mc,
)
from .specfun import NodeFindingError

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_ACCEPTANCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _grid(text: str) -> list[float]:
    """'lo:hi:step' (inclusive) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"bad grid {text!r}, expected lo:hi:step")
        lo, hi, step = map(float, parts)
        if step <= 0 or hi < lo:
            raise UsageError(f"bad grid {text!r}")
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [round(lo + i * step, 12) for i in range(n)]
    vals = [float(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise UsageError("empty grid")
    return vals


def _r_values(args) -> list[float]:
    if args.r_grid:
        rs = _grid(args.r_grid)
    elif args.r is not None:
        rs = [args.r]
    else:
        rs = [0.5]
    for r in rs:
        if not 0.0 <= r <= 1.0:
            raise UsageError(f"r = {r} is outside [0, 1]")
    return rs


def _config(args) -> dict:
    skip = {"func", "out", "no_timestamp"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _header(args, meta: dict) -> dict:
    head = {"program": "tentfarey", "version": __version__, "numpy": np.__version__, "config": _config(args)}
    head.update(meta)
    if not args.no_timestamp:
        head["generated"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return head


def _num(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))  # shortest string that round-trips
    return v


def _emit(args, columns: list[str], rows: list[list], meta: dict | None = None) -> str:
    head = _header(args, meta or {})
    if args.format == "json":
        doc = {"meta": head, "rows": [dict(zip(columns, r)) for r in rows]}
        text = json.dumps(doc, indent=2, default=_json_default) + "\n"
    else:
        buf = io.StringIO()
        for k, v in head.items():
            buf.write(f"# {k}: {json.dumps(v, default=_json_default, sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_num(v) for v in r])
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(type(o).__name__)


# ------------------------------------------------------------------ commands

def cmd_map(args) -> int:
    rows = []
    n = args.n or 8
    for r in _r_values(args):
        p = Params(r)
        st = mean_return_time_mc(p, args.samples, args.seed)
        rows.append([r, n, 2 ** n, orbit_sum_F(p, n), fixed_point_x1(p), st.mean, st.stderr, kac_expected_return(p)])
    cols = ["r", "n", "periodic_points", "Z_n", "x1", "tau_mean", "tau_stderr", "tau_kac"]
    _emit(args, cols, rows, {"samples": args.samples})
    return EXIT_OK


def cmd_measure(args) -> int:
    mode = args.mode
    rows = []
    iters = int(float(args.iters))
    for r in _r_values(args):
        p = Params(r)
        if mode in ("F", "G"):
            st = lyapunov_birkhoff(p, mode, iters, seed=args.seed)
            exact = lyapunov_closed(p) if mode == "G" else _f_exponent(p)
            rows.append([r, mode, st.mean, st.stderr, exact, (st.mean - exact) / st.stderr, st.restarts])
        elif mode == "kac":
            st = mean_return_time_mc(p, iters, args.seed)
            exact = kac_expected_return(p)
            rows.append([r, mode, st.mean, st.stderr, exact, (st.mean - exact) / st.stderr, 0])
        elif mode == "density":
            e, h = density_e(p), density_h(p)
            for x in np.linspace(0.0, 1.0, args.points):
                rows.append([r, mode, float(x), float(e(x)), float(h(x))])
        else:
            raise UsageError(f"unknown mode {mode!r}")
    if mode == "density":
        cols = ["r", "mode", "x", "e_r", "h_r"]
    else:
        cols = ["r", "mode", "estimate", "stderr", "closed_form", "z_score", "restarts"]
    _emit(args, cols, rows, {"iters": iters})
    return EXIT_OK


def _f_exponent(p: Params) -> float:
    from .thermo import lyapunov_lambda

    return lyapunov_lambda(p)


def cmd_thermo(args) -> int:
    from .thermo import ess_radius_bounds, free_energy, gamma_r

    betas = _grid(args.beta_grid) if args.beta_grid else [-3.0, -1.0, -0.5, 0.0, 0.5, 1.0]
    for b in betas:
        if not -4.0 <= b <= 2.0:
            raise UsageError(f"beta = {b} is outside [-4, 2]")
    n = args.n or 12
    rows = []
    for r in _r_values(args):
        p = Params(r)
        if p.intermittent:
            raise UnsupportedModeError("thermo needs r < 1 (p_r is undefined at r = 1)")
        lr, g = math.log(p.rho), gamma_r(p)
        for b in betas:
            est = free_energy(p, b, n)
            rows.append([r, b, n, est.f_n, b * lr, b * (lr + g), est.delta_prev])
        for k in range(1, 4):
            lo, hi = ess_radius_bounds(p, k)
            rows.append([r, -k, n, math.nan, hi, lo, math.nan])
    cols = ["r", "beta", "n", "f_n", "bound_logrho", "bound_logrho_gamma", "delta_prev"]
    _emit(args, cols, rows, {"note": "rows with f_n = nan hold essential-radius bounds for k = -beta"})
    return EXIT_OK


def cmd_spectrum(args) -> int:
    from .spectral import BasisSpec, eigenvalue_N, spectrum_P, trace_closed

    N = args.N or 50
    which = args.mode.upper()
    rows, traces = [], {}
    for r in _r_values(args):
        p = Params(r)
        reps = []
        if which in ("MN", "M") and not p.intermittent:
            reps.append(("M", spectrum_P(p, BasisSpec.adapted(p, args.q, N), "M")))
        if which in ("MN", "N"):
            reps.append(("N", spectrum_P(p, BasisSpec(args.q, N), "N")))
        if which == "P":
            reps.append(("P", spectrum_P(p, BasisSpec.adapted(p, args.q, N), "P")))
        merged = []
        for name, rep in reps:
            traces[f"{r:g}:{name}"] = rep.traces
            for k, (v, s) in enumerate(zip(rep.eigenvalues, rep.stability), start=1):
                closed = math.nan
                if name == "M":
                    closed = p.rho ** -(k + args.q)
                elif name == "N" and args.q == 0:
                    closed = eigenvalue_N(p, k)
                merged.append((abs(v), complex(v), name, k, closed, float(s)))
        merged.sort(key=lambda t: -t[0])
        for _, v, name, k, closed, s in merged:
            rows.append([v.real, v.imag, name, k, closed, s, r])
        if which == "MN":
            traces[f"{r:g}:closed"] = {
                k: trace_closed(p, k) for k in ("M", "N", "N2", "P") if not (p.intermittent and k in ("M", "P"))
            }
    cols = ["eigenvalue", "imag", "operator", "k", "closed_form", "stability_delta", "r"]
    _emit(args, cols, rows, {"N": N, "q": args.q, "traces": traces})
    return EXIT_OK


def cmd_zeta(args) -> int:
    from .zeta import grand_partition_Xi, trace_formula, zeta_grid

    s_grid = _grid(args.s_grid) if args.s_grid else [0.0, 0.5, 1.0]
    z = 0.5 if args.z is None else args.z
    N = args.N or 50
    from .spectral import BasisSpec

    rows = []
    for r in _r_values(args):
        p = Params(r)
        res = zeta_grid(p, z, s_grid, BasisSpec(0, N), args.n_max)
        for s, d0, d1, zz, t in zip(res.s_grid, res.det0, res.det1, res.zeta2, res.tail_estimates):
            rows.append([r, "zeta2", z, s, zz, d0, d1, t])
        if abs(z) <= 1.0:
            for n in range(1, (args.n or 2) + 1):
                xi = grand_partition_Xi(p, n, z, args.cutoff)
                tf = trace_formula(p, n, z, BasisSpec(0, N))
                rows.append([r, "trace_formula", z, n, xi.value, tf, xi.value - tf, xi.tail_bound])
    cols = ["r", "kind", "z", "s_or_n", "value", "det0_or_trace", "det1_or_diff", "tail"]
    _emit(args, cols, rows, {"N": N, "n_max": args.n_max, "digit_cutoff": args.cutoff})
    return EXIT_OK


def cmd_reproduce(args) -> int:
    from .acceptance import CRITERIA, run_criterion

    which = sorted(CRITERIA) if not args.only else [int(v) for v in args.only.split(",")]
    results = []
    for k in which:
        res = run_criterion(k)
        results.append(res)
        print(res.line(), file=sys.stderr, flush=True)
    rows = [[r.number, r.claim, "pass" if r.passed else "fail", r.detail, round(r.seconds, 3)] for r in results]
    _emit(args, ["criterion", "claim", "status", "detail", "seconds"], rows)
    return EXIT_OK if all(r.passed for r in results) else EXIT_ACCEPTANCE


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--r", type=float, help="map parameter in [0, 1]")
    common.add_argument("--r-grid", help="lo:hi:step (inclusive) or comma list")
    common.add_argument("--q", type=int, default=0)
    common.add_argument("--N", type=int, help="truncation dimension")
    common.add_argument("--n", type=int, help="period / word length")
    common.add_argument("--beta-grid")
    common.add_argument("--z", type=float)
    common.add_argument("--s-grid")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out")
    common.add_argument("--no-timestamp", action="store_true")

    ap = _Parser(prog="tentfarey", description="Tent-Farey interval maps: measures, spectra, zeta functions.")
    ap.add_argument("--version", action="version", version=f"tentfarey {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("map", parents=[common], help="periodic orbits and passage times")
    sp.add_argument("--samples", type=int, default=100000)
    sp.set_defaults(func=cmd_map)

    sp = sub.add_parser("measure", parents=[common], help="densities, Kac, Lyapunov exponents")
    sp.add_argument("--mode", choices=("F", "G", "kac", "density"), default="G")
    sp.add_argument("--iters", default="1e6")
    sp.add_argument("--points", type=int, default=101)
    sp.set_defaults(func=cmd_measure)

    sp = sub.add_parser("thermo", parents=[common], help="finite-n free energy and bounds")
    sp.set_defaults(func=cmd_thermo)

    sp = sub.add_parser("spectrum", parents=[common], help="eigenvalues of M, N, M+N")
    sp.add_argument("--mode", choices=("MN", "M", "N", "P"), default="MN")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("zeta", parents=[common], help="two-variable zeta and trace formula")
    sp.add_argument("--n-max", type=int, default=24)
    sp.add_argument("--cutoff", type=int, default=60)
    sp.set_defaults(func=cmd_zeta)

    sp = sub.add_parser("reproduce", parents=[common], help="run the acceptance suite")
    sp.add_argument("--only", help="comma list of criterion numbers")
    sp.set_defaults(func=cmd_reproduce)
    return ap


_GRID_FLAGS = ("--r-grid", "--beta-grid", "--s-grid")


def _glue_grid_values(argv: list[str]) -> list[str]:
    # grids such as -3:1:0.5 or -1,1 would otherwise be read as options
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _GRID_FLAGS and i + 1 < len(argv):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(_glue_grid_values(list(sys.argv[1:] if argv is None else argv)))
    try:
        return args.func(args)
    except (UsageError, UnsupportedModeError) as exc:
        print(f"tentfarey: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, NodeFindingError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"tentfarey: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"tentfarey: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
