"""
One kernel, three routes
========================

The oscillator propagator K(x2, x1; tau) is computed in closed form, as a
damped sum over energy eigenstates, and as a time-sliced path integral.
All three should agree. Run with ``python3 demos/three_routes.py``.
"""

import math

import numpy as np

from proplab.core import Grid1D, OscParams
from proplab.kernel import KernelQuery, propagator
from proplab.pathint import TimeSlicing, chain_exact, chain_numeric, f_eval
from proplab.spectral import SpectralConfig, spectral_kernel

# Units where m = omega = hbar = 1. A small damping epsilon makes the
# eigenstate sum converge; the closed form accepts the same damping.
p = OscParams()
eps = 1e-3

# %% Closed form against the eigenstate sum and the F function
print("x2    x1    tau   |K|        spectral rel.err  F rel.err")
for x2, x1, tau in [(0.0, 0.0, 0.5), (1.0, -1.0, 1.0), (0.3, 0.7, 2.5)]:
    q = KernelQuery(x2, x1, tau, eps)
    closed = propagator(p, q)
    spec = spectral_kernel(p, q, SpectralConfig(120, eps))
    f = f_eval(p, x2, x1, p.omega * tau, eps)
    print(
        f"{x2:5.1f} {x1:5.1f} {tau:5.2f} {abs(closed):.6f}   "
        f"{abs(spec - closed) / abs(closed):.2e}          {abs(f - closed) / abs(closed):.2e}"
    )

# %% Time slicing
# The N-slice chain converges to the full kernel like 1/N^2.
# The brute-force grid integral uses the short-time kernel instead and
# carries a small bias that shrinks with the slice length.
ref = propagator(p, KernelQuery(0.2, -0.1, 1.0))
for n in (10, 100, 1000):
    got = chain_exact(p, 0.2, -0.1, TimeSlicing.uniform(1.0, n))
    print(f"chain_exact, N = {n:4d}: rel.err {abs(got - ref) / abs(ref):.2e}")

slices = TimeSlicing.uniform(0.3, 3)
oracle = chain_exact(p, 0.2, -0.1, slices)
for n in (601, 801, 1201):
    got = chain_numeric(p, 0.2, -0.1, slices, Grid1D(-8.0, 8.0, n), 1e-2)
    print(f"chain_numeric, {n:4d} nodes: rel.err {abs(got - oracle) / abs(oracle):.2e}")

# %% Past the caustics
# At omega tau = k pi the kernel is singular. Each caustic crossed adds a
# phase of -pi/2 (the Maslov phase), so the phase at x2 = x1 = 0 steps
# from -pi/4 to -3pi/4 to -5pi/4 (printed wrapped, as +3pi/4).
for wt in (0.5 * math.pi, 1.5 * math.pi, 2.5 * math.pi):
    k = propagator(p, KernelQuery(0.0, 0.0, wt))
    spec = spectral_kernel(p, KernelQuery(0.0, 0.0, wt, 1e-2), SpectralConfig(400, 1e-2))
    damped = propagator(p, KernelQuery(0.0, 0.0, wt, 1e-2))
    phase = np.angle(k) / math.pi
    print(f"omega tau = {wt / math.pi:.1f} pi: phase {phase:+.3f} pi, damped spectral check {abs(spec - damped):.1e}")
