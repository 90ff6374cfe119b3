"""Lyapunov spectra of the two kinetic regimes and a short bifurcation sweep in lambda.

Run with ``python3 demos/lyapunov_and_bifurcation.py``; takes about two minutes.
"""

from __future__ import annotations

import numpy as np

from ecoepi import LyapunovSettings, base_params, bifurcation_sweep, lyapunov_spectrum, turing_params

init = (15.1342, 20.5234, 6.314)
for name, params in (("sigma=0.005", base_params()), ("sigma=0.026", turing_params())):
    spec = lyapunov_spectrum(params, init, LyapunovSettings())
    print(f"{name}: exponents ({spec.L1:.5f}, {spec.L2:.5f}, {spec.L3:.5f}), "
          f"sum {sum(spec.exponents):.5f} vs mean trace {spec.mean_trace:.5f}")

grid = np.linspace(0.001, 0.01, 10)
sweep = bifurcation_sweep(base_params(), "lam", grid, init, transient=5000.0, window=2000.0)
for value, extrema, width in zip(sweep.grid, sweep.extrema, sweep.band_widths()):
    if extrema.size == 0:
        print(f"  lambda={value:.4f}: diverged")
    else:
        print(f"  lambda={value:.4f}: u extrema in [{extrema.min():.3f}, {extrema.max():.3f}], band {width:.3g}")
