#!/usr/bin/env python3
"""Exponential weights and the pure-decay problem.

With ``S = 0`` and ``L = 0`` the system reduces to ``K z_t = -a(t) K z``,
whose solution is the envelope ``z(t) = exp(theta(t0) - theta(t)) z(t0)``.
The exponential schemes reproduce it to rounding error for any step size;
the plain baselines (unit weights, explicit ``a(t_{i+1/2})``) do not.

Run::

    python3 demos/01_exact_decay.py
"""

import numpy as np

from conformal_ms import (DampingCoefficient, Grid1D, NewtonConfig, SchemeKind, StateField,
                          exp_weights, make_decay_system, step)
from conformal_ms.diagnostics import envelope_error

a = DampingCoefficient.sinusoid(0.05, 0.5, np.pi)
w = exp_weights(a, 0.0, 0.1)
print(f"weights over [0, 0.1]: w+ = {w.w_plus:.15f}, w- = {w.w_minus:.15f}")

sys = make_decay_system(a)
grid = Grid1D(5, 0.0, 1.0)
z0 = StateField(grid, np.column_stack([np.sin(2 * np.pi * grid.x) + 2, np.ones(5)]))
cfg = NewtonConfig(tol=1e-14)

for dt in (0.5, 0.05):
    n = int(round(10 / dt))
    print(f"\ndt = {dt}, {n} steps to t = 10")
    for kind in SchemeKind:
        z = z0
        for _ in range(n):
            z = step(kind, sys, z, dt, cfg)
        print(f"  {kind.value:24s} envelope error {envelope_error(z0, z, a):.2e}")
