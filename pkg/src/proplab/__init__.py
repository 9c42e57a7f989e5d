"""Harmonic-oscillator propagator by several independent routes.

``kernel`` holds the closed form and its residual checks, ``fock`` the
number-basis operator identities, ``pathint`` the time-sliced path
integral, ``spectral`` the eigenfunction expansion and partition function,
and ``verify`` the cross-method suite driven by the ``proplab`` command.
"""

__version__ = "0.1.0"

from .core import Grid1D, OscParams, QuadratureRule, integrate, quadrature_rule
from .errors import ProplabError
from .kernel import KernelQuery, free_propagator, propagator, propagator_euclidean

__all__ = [
    "Grid1D",
    "KernelQuery",
    "OscParams",
    "ProplabError",
    "QuadratureRule",
    "free_propagator",
    "integrate",
    "propagator",
    "propagator_euclidean",
    "quadrature_rule",
]
