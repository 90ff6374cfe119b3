"""Walk through the linear analysis: steady states, temporal stability, dispersion and verdicts.

Run with ``python3 demos/linear_analysis.py``; takes a few seconds.
"""

from __future__ import annotations

import numpy as np

from ecoepi import (base_params, dispersion, select_equilibrium, table3_params, temporal_stability,
                    turing_check, turing_params)


def describe(name, params):
    eq = select_equilibrium(params)
    rep = temporal_stability(eq, params)
    print(f"{name}: steady state ({eq.u_star:.5f}, {eq.v_star:.5f}, {eq.w_star:.5f})")
    print(f"  k=0 coefficients A1={rep.A1:.5f} A2={rep.A2:.5f} A3={rep.A3:.5f} "
          f"A1*A2-A3={rep.hurwitz_product:.5f} stable={rep.stable}")
    return eq


print("Homogeneous kinetics")
describe("sigma=0.005", base_params())
eq = describe("sigma=0.026", turing_params())

print("\nDispersion for d=(1e-5, 1e-3, 1e-10), sigma=0.026")
p = turing_params(d1=1e-5, d2=1e-3, d3=1e-10)
for k in np.linspace(0.0, 30.0, 7):
    s = dispersion(eq, p, k)
    mark = "  <- rho3 < 0" if s.rho3 < 0 else ""
    print(f"  k={k:5.1f} rho1={s.rho1:8.4f} rho2={s.rho2:8.4f} rho3={s.rho3:8.4f} phi={s.phi:8.4f}{mark}")

print("\nLinear verdicts for the five simulation rows")
for row in "ABCDE":
    q = table3_params(row)
    diag = turing_check(select_equilibrium(q), q)
    print(f"  row {row}: d={q.diffusion} sigma={q.sigma} -> {diag.verdict}")
