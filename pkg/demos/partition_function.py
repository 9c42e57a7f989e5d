"""
The partition function three ways
=================================

Z(beta) = 1 / (2 sinh(beta hbar omega / 2)) as a closed form, as the sum
of Boltzmann weights, and as the trace of the imaginary-time kernel.
Run with ``python3 demos/partition_function.py``.
"""

from proplab.core import GAUSS_HERMITE, OscParams, quadrature_rule
from proplab.spectral import partition_closed, partition_spectral, partition_trace

p = OscParams()
rule = quadrature_rule(GAUSS_HERMITE, 80)

print("beta   Z closed     |sum - closed|  |trace - closed|")
for beta in (0.25, 0.5, 1.0, 2.0, 4.0):
    z = partition_closed(p, beta)
    s = partition_spectral(p, beta, 200)
    t = partition_trace(p, beta, rule)
    print(f"{beta:4.2f}  {z:.9f}  {abs(s - z):.1e}         {abs(t - z):.1e}")

# %% Truncation of the Boltzmann sum
# The tail after n terms is geometric with ratio exp(-beta hbar omega),
# which is why small beta needs many terms.
beta = 0.25
z = partition_closed(p, beta)
for n in (20, 60, 120, 200):
    print(f"beta = {beta}, {n:3d} terms: error {abs(partition_spectral(p, beta, n) - z):.1e}")
