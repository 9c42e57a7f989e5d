"""
Operators in a truncated number basis
=====================================

Position, momentum and the Hamiltonian as D x D matrices. Identities are
checked on an interior block where truncation does not reach. The
five-factor Gaussian (BCH) form of the evolution operator is shown
failing in this basis and holding exactly in two settings where it is
well defined. Run with ``python3 demos/operator_algebra.py``.
"""

import math

from proplab.core import OscParams
from proplab.fock import (
    InteriorProjection,
    bch_factorization_residual,
    bch_gaussian_residual,
    bch_group_residual,
    canonical_commutator_residual,
    hamiltonian_eigenvalues,
    heisenberg_residual,
    lie_algebra_residual,
)
from proplab.spectral import energy

p = OscParams()
block = InteriorProjection(20)

# %% Canonical commutator and Heisenberg evolution on the interior block
print(f"[X, P] - i hbar:          {canonical_commutator_residual(p, 80, block):.1e}")
for wt in (0.3, math.pi / 2):
    rx, rp = heisenberg_residual(p, wt, 80, block)
    print(f"Heisenberg at omega tau = {wt:.3f}: X {rx:.1e}, P {rp:.1e}")
print(f"sl(2) brackets:           {max(lie_algebra_residual(p, 60, block)):.1e}")

eig = hamiltonian_eigenvalues(p, 80)
print(f"lowest energies:          {eig[:4].round(12)}  (exact {[energy(n, p) for n in range(4)]})")

# %% The five-factor form
# The outer factors exp(+-alpha X^2) are unbounded operators. Their
# truncations do not converge as D grows, and the residual explodes.
for D in (40, 60, 80):
    print(f"number basis, D = {D}: residual {bch_factorization_residual(p, 0.1, D, block):.1e}")

# In finite spin representations of sl(2) the same identity is exact, and
# so is the action of the five factors on Gaussian wave packets.
print(f"spin-2 representation:    {bch_group_residual(p, 0.1):.1e}")
print(f"middle sign flipped:      {bch_group_residual(p, 0.1, middle_sign=-1):.1e}")
print(f"Gaussian packets:         {bch_gaussian_residual(p, 0.1):.1e}")
