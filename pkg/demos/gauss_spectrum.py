"""Spectrum of the transfer operator along the family, ending at the Gauss map.

At r = 1 the operator Q = N (1 - M)^-1 is the Gauss-map transfer operator on the
Borel side; its leading eigenvalues are 1 and -0.30366... (Wirsing's constant).
For r < 1 the M and N blocks have closed-form spectra which we compare against.
"""
import numpy as np

from tentfarey.maps import Params
from tentfarey.spectral import BasisSpec, eigenvalue_N, spectrum_P
from tentfarey.zeta import q_matrix

N = 50

print("r      leading M eigenvalues (numeric vs rho^-k)")
for r in (0.0, 0.5, 0.9):
    p = Params(r)
    rep = spectrum_P(p, BasisSpec.adapted(p, 0, N), "M")
    ev = np.sort(np.abs(rep.eigenvalues))[::-1][:3]
    print(f"{r:<6} {ev}  {[p.rho ** -k for k in (1, 2, 3)]}")

print("\nr      leading N eigenvalues (numeric vs closed form)")
for r in (0.0, 0.5, 1.0):
    p = Params(r)
    rep = spectrum_P(p, BasisSpec(0, N), "N")
    print(f"{r:<6} {np.real(rep.eigenvalues[:3])}  {[eigenvalue_N(p, k) for k in (1, 2, 3)]}")

ev = q_matrix(Params(1.0), 0, 1.0, BasisSpec(0, N)).eigvals()
print("\nGauss transfer operator, first six eigenvalues:")
for v in ev[:6]:
    print(f"  {v.real:+.15f}")
print(f"ratio lambda_2 / lambda_3 = {ev[1].real / ev[2].real:.6f}")
