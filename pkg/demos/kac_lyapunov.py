"""Return times and Lyapunov exponents as r sweeps from tent to Farey.

The mean first return time to [1/2, 1] is nu_r([0, 1]) by Kac's lemma. It stays
finite for r < 1 and blows up like log(1/delta) as r -> 1, where the indifferent
fixed point at 0 turns the finite invariant measure into an infinite one.
"""
import math

from tentfarey.maps import Params
from tentfarey.measures import kac_expected_return, lyapunov_birkhoff, lyapunov_closed, mean_return_time_mc
from tentfarey.thermo import gamma_r, lyapunov_lambda

print("r        Kac      Monte Carlo (sigma)   chi_G      lambda_F   gamma")
for r in (0.0, 0.25, 0.5, 0.75, 0.9, 0.99):
    p = Params(r)
    kac = kac_expected_return(p)
    st = mean_return_time_mc(p, 100000, seed=1)
    z = (st.mean - kac) / st.stderr if st.stderr > 0 else 0.0
    print(f"{r:<8} {kac:8.4f} {st.mean:8.4f} ({z:+.2f})      {lyapunov_closed(p):.6f}   "
          f"{lyapunov_lambda(p):.6f}   {gamma_r(p):.6f}")

print("\nlog(1/delta) growth of the return time:")
for j in (5, 10, 20, 40):
    p = Params(1 - 2.0 ** -j)
    print(f"  delta = 2^-{j:<3} tau = {kac_expected_return(p):8.3f}   j = {j}")

st = lyapunov_birkhoff(Params(1.0), "G", n_iter=200000, seed=3)
levy = math.pi ** 2 / (6 * math.log(2))
print(f"\nGauss map Birkhoff average {st.mean:.5f} +- {st.stderr:.5f}; pi^2/(6 log 2) = {levy:.5f}")
