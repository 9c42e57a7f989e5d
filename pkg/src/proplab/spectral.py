"""Eigenfunctions, the spectral sum for the kernel, Mehler's formula and Z(beta)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .core import OscParams, QuadratureRule, fresnel_integrate, quadrature_rule
from .errors import ArgumentError, ConfigurationError, DomainError, RangeError, ResolutionError
from .kernel import KernelQuery

# partial sums handed to the epsilon algorithm
_ACCEL_WINDOW = 30
_ACCEL_MIN_TERMS = 8


@dataclass(frozen=True)
class EigenState:
    n: int
    params: OscParams

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ArgumentError(f"quantum number must be a non-negative integer, got {self.n}")
        if self.params.omega == 0:
            raise ArgumentError("eigenstates need omega > 0")


@dataclass(frozen=True)
class SpectralConfig:
    """Truncation order and damping of the spectral sum.

    ``accelerate`` passes the partial sums through Wynn's epsilon
    algorithm. Without it a real-time sum at small ``epsilon`` converges
    only like ``exp(-epsilon tau n)``.
    """

    n_terms: int
    epsilon: float = 0.0
    accelerate: bool = True

    def __post_init__(self):
        if int(self.n_terms) != self.n_terms or self.n_terms < 1:
            raise ConfigurationError(f"n_terms must be a positive integer, got {self.n_terms}")
        if not self.epsilon >= 0:
            raise ConfigurationError(f"epsilon must be non-negative, got {self.epsilon}")


def hermite(n: int, x):
    """Physicists' Hermite polynomial by ``H_{k+1} = 2x H_k - 2k H_{k-1}``."""
    if int(n) != n or n < 0:
        raise ArgumentError(f"degree must be a non-negative integer, got {n}")
    x = np.asarray(x, dtype=float)
    h_prev, h = np.ones_like(x), 2.0 * x
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, n):
            h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    if not np.all(np.isfinite(h)):
        raise RangeError(f"H_{n} overflows at the requested points; use eigenfunction() instead")
    return h if h.ndim else float(h)


def hermite_functions(n_max: int, xi):
    """Rows ``k < n_max`` of ``(2^k k! sqrt(pi))^{-1/2} exp(-xi^2/2) H_k(xi)``.

    The normalised recurrence never forms ``H_k`` itself, so it does not
    overflow. ``xi`` may be complex.
    """
    xi = np.asarray(xi)
    dtype = complex if np.iscomplexobj(xi) else float
    out = np.zeros((n_max,) + xi.shape, dtype=dtype)
    out[0] = math.pi**-0.25 * np.exp(-0.5 * xi * xi)
    if n_max > 1:
        out[1] = math.sqrt(2.0) * xi * out[0]
    for k in range(1, n_max - 1):
        out[k + 1] = math.sqrt(2.0 / (k + 1)) * xi * out[k] - math.sqrt(k / (k + 1)) * out[k - 1]
    return out


def _eigen_table(n_max, x, kappa):
    # phi_k(x) for k < n_max with kappa = m w / hbar, possibly complex
    root = np.sqrt(kappa)
    return root**0.5 * hermite_functions(n_max, root * np.asarray(x))


def eigenfunction(state: EigenState, x):
    """Normalised eigenfunction ``phi_n(x)`` with Gaussian factor ``exp(-m w x^2 / 2 hbar)``."""
    p = state.params
    values = _eigen_table(state.n + 1, x, p.m * p.omega / p.hbar)[state.n]
    return values if np.ndim(values) else float(values)


def energy(n: int, p: OscParams) -> float:
    return (n + 0.5) * p.hbar * p.omega


def _wynn(partial_sums):
    table = mpmath.shanks([mpmath.mpc(complex(s)) for s in partial_sums])
    return complex(table[-1][-1])


def _sum_series(terms, accelerate):
    total = np.sum(terms)
    if not accelerate or len(terms) < _ACCEL_MIN_TERMS:
        return complex(total)
    sums = np.cumsum(terms)
    # every other partial sum, ending at the full sum: parity-symmetric
    # endpoints make every second term vanish
    sums = sums[(len(terms) - 1) % 2 :: 2][-_ACCEL_WINDOW:]
    try:
        value = _wynn(sums)
    except ZeroDivisionError:
        return complex(total)
    return value if np.isfinite(value) else complex(total)


def spectral_terms(p: OscParams, x2, x1, tau, epsilon, n_terms):
    """Terms ``phi_n(x2) phi_n(x1) exp(-i (n + 1/2) w tau)`` with ``w = omega - i epsilon``.

    The damping continues the frequency everywhere, eigenfunctions included,
    exactly as in the closed-form kernel.
    """
    w = complex(p.omega, -epsilon)
    kappa = p.m * w / p.hbar
    n = np.arange(n_terms)
    phase = np.exp(-1j * (n + 0.5) * w * tau)
    return _eigen_table(n_terms, x2, kappa) * _eigen_table(n_terms, x1, kappa) * phase


def spectral_kernel(p: OscParams, q: KernelQuery, cfg: SpectralConfig) -> complex:
    """Kernel as a truncated sum over eigenstates.

    Damping comes from ``cfg.epsilon``. ``q.epsilon`` must be zero or equal
    to it.
    """
    if p.omega == 0:
        raise ArgumentError("spectral sums need omega > 0")
    if cfg.epsilon == 0:
        raise ConfigurationError("a real-time spectral sum does not converge at epsilon = 0")
    if q.epsilon not in (0.0, cfg.epsilon):
        raise ConfigurationError(f"query epsilon {q.epsilon} disagrees with config epsilon {cfg.epsilon}")
    terms = spectral_terms(p, q.x2, q.x1, q.tau, cfg.epsilon, cfg.n_terms)
    return _sum_series(terms, cfg.accelerate)


def spectral_kernel_euclidean(p: OscParams, x2: float, x1: float, beta: float, n_terms: int) -> float:
    """``sum_n phi_n(x2) phi_n(x1) exp(-beta E_n)``; converges without damping."""
    if not beta > 0:
        raise ArgumentError("beta must be positive")
    if p.omega == 0:
        raise ArgumentError("spectral sums need omega > 0")
    kappa = p.m * p.omega / p.hbar
    n = np.arange(n_terms)
    weights = np.exp(-beta * p.hbar * p.omega * (n + 0.5))
    table = _eigen_table(n_terms, np.array([x2, x1]), kappa)
    return float(np.sum(table[:, 0] * table[:, 1] * weights))


def mehler_closed(x, y, z):
    z = complex(z)
    one = 1.0 - z * z
    return np.exp((2.0 * x * y * z - (x * x + y * y) * z * z) / one) / np.sqrt(one)


def mehler_series(x, y, z, n_terms):
    """``sum_{n < n_terms} H_n(x) H_n(y) z^n / (2^n n!)``, summed without forming ``H_n``."""
    z = complex(z)
    table = hermite_functions(n_terms, np.array([x, y], dtype=float))
    scale = math.sqrt(math.pi) * math.exp(0.5 * (x * x + y * y))
    powers = z ** np.arange(n_terms)
    return scale * complex(np.sum(table[:, 0] * table[:, 1] * powers))


def mehler_residual(x: float, y: float, z: complex, n_terms: int) -> float:
    """Relative gap between Mehler's closed form, with ``(1 - z^2)^{-1/2}``, and its series."""
    if abs(z) >= 1:
        raise DomainError(f"Mehler's formula needs |z| < 1, got |z| = {abs(z)}")
    if int(n_terms) != n_terms or n_terms < 1:
        raise ArgumentError("n_terms must be a positive integer")
    closed = complex(mehler_closed(x, y, z))
    return abs(closed - mehler_series(x, y, z, n_terms)) / abs(closed)


def partition_closed(p: OscParams, beta: float) -> float:
    if not beta > 0:
        raise ArgumentError("beta must be positive")
    return 1.0 / (2.0 * math.sinh(0.5 * p.omega * beta * p.hbar))


def partition_spectral(p: OscParams, beta: float, n_terms: int) -> float:
    if not beta > 0:
        raise ArgumentError("beta must be positive")
    if int(n_terms) != n_terms or n_terms < 1:
        raise ArgumentError("n_terms must be a positive integer")
    n = np.arange(n_terms)
    # smallest terms first
    return float(np.sum(np.exp(-beta * p.hbar * p.omega * (n + 0.5))[::-1]))


def _diagonal_euclidean(p, x, beta):
    a = p.omega * beta * p.hbar
    k = p.m * p.omega / p.hbar
    return math.sqrt(k / (2 * math.pi * math.sinh(a))) * np.exp(-k * math.tanh(0.5 * a) * x * x)


def _trace(p, beta, rule):
    curvature = p.m * p.omega / p.hbar * math.tanh(0.5 * p.omega * beta * p.hbar)
    return fresnel_integrate(rule, lambda x: _diagonal_euclidean(p, x, beta), curvature).real


def partition_trace(p: OscParams, beta: float, rule: QuadratureRule, tol: float | None = 1e-8) -> float:
    """``Z = int dx K(x, x; -i hbar beta)`` by quadrature.

    A Gauss-Hermite rule is scaled to the width of the diagonal kernel; a
    Gauss-Legendre rule integrates over its own interval. When ``tol`` is
    set, a rule of twice the order is also evaluated, and a relative change
    larger than ``tol`` raises :class:`ResolutionError`.
    """
    if not beta > 0:
        raise ArgumentError("beta must be positive")
    if p.omega == 0:
        raise ArgumentError("the free particle has no normalisable trace")
    z = _trace(p, beta, rule)
    if tol is not None:
        finer = quadrature_rule(rule.kind, 2 * rule.n, rule.interval)
        z2 = _trace(p, beta, finer)
        if abs(z - z2) > tol * abs(z2):
            raise ResolutionError(
                f"trace changed by {abs(z - z2) / abs(z2):.3g} (relative) when the rule was doubled"
            )
    return z
