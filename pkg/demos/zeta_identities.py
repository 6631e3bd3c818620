"""Dynamical zeta functions from orbits and from Fredholm determinants.

The same two-variable zeta function is computed twice: once from periodic
orbits of the induced map G (s-series) and of F (z-series), once from traces of
the Borel-side operator Q_z. The z-series picks up a factor (1 - z/rho) because
the fixed point 0 of F never appears among the orbits of G.
"""
from tentfarey.maps import Params
from tentfarey.zeta import (
    grand_partition_Xi,
    log_zeta2_s_coeffs,
    log_zeta2_z_coeffs,
    orbit_log_coeffs_F,
    orbit_log_coeffs_G,
    trace_formula,
    zeta_two_variable,
)

p = Params(0.5)

print("log zeta_2(s, 1): coefficients of s^n")
ops = log_zeta2_s_coeffs(p, 1.0, 3)
orb, tails = orbit_log_coeffs_G(p, 3)
for n, (a, b, t) in enumerate(zip(ops, orb, tails), start=1):
    print(f"  n={n}  operator {a:+.12f}  orbits {b:+.12f}  tail {t:.1e}")

print("\nlog zeta_2(1, z): coefficients of z^m versus log[(1 - z/rho) zeta_F]")
ops = log_zeta2_z_coeffs(p, 5)
orb = orbit_log_coeffs_F(p, 5)
for m in range(1, 6):
    print(f"  m={m}  operator {ops[m - 1]:+.12f}  orbits {orb[m - 1] - p.rho ** -m / m:+.12f}")

print("\ntrace formula Xi_n(z) = orbit sum vs operator traces")
for n in (1, 2, 3):
    xi = grand_partition_Xi(p, n, 0.8)
    print(f"  n={n}  orbits {xi.value:.12f}  traces {trace_formula(p, n, 0.8):.12f}  tail {xi.tail_bound:.1e}")

print("\ntent map: zeta_2(1, z) = (2 - z) / (2 - 2z)")
for z in (-0.5, 0.25, 0.5):
    print(f"  z={z:+.2f}  {zeta_two_variable(Params(0.0), 1.0, z):.12f}  {(2 - z) / (2 - 2 * z):.12f}")
