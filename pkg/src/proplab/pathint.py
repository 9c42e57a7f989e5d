"""Time-sliced path integral: short-time kernels, the phi substitution and F.

The short-time kernel uses the trapezoidal potential rule
``exp(-(i/hbar) tau_j (V(x_j) + V(x_{j-1})) / 2)``. With
``sin(phi_j) = omega tau_j`` it agrees with ``F(x_j, x_{j-1}; phi_j)`` up to
``cos(phi_j) = 1 - omega^2 tau_j^2 / 2 + O(tau_j^4)``. The F functions
compose by adding their angles, so a chain of F factors is
``F(x_N, x_0; sum phi_j)`` in closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernel as _k
from .core import Grid1D, OscParams, QuadratureRule, fresnel_integrate
from .errors import ArgumentError, BoundaryLeakageError, CausticError, DomainError, QuadratureWarning

#: chain_numeric refuses longer slicings; the dense convolutions cost O(N n^2)
MAX_NUMERIC_SLICES = 6
#: peak-relative size allowed for the integrand at the outermost grid nodes
BOUNDARY_TOL = 1e-10


@dataclass(frozen=True)
class TimeSlicing:
    """Sub-intervals ``tau_j``, first to last."""

    taus: tuple

    def __post_init__(self):
        taus = tuple(float(t) for t in self.taus)
        if not taus:
            raise ArgumentError("a slicing needs at least one interval")
        if not all(t > 0 and math.isfinite(t) for t in taus):
            raise ArgumentError("every interval must be positive and finite")
        object.__setattr__(self, "taus", taus)

    @classmethod
    def uniform(cls, total: float, n: int) -> "TimeSlicing":
        if int(n) != n or n < 1:
            raise ArgumentError(f"slice count must be a positive integer, got {n}")
        if not total > 0:
            raise ArgumentError("total time must be positive")
        return cls((total / n,) * int(n))

    @property
    def total(self) -> float:
        return math.fsum(self.taus)

    @property
    def n(self) -> int:
        return len(self.taus)


@dataclass(frozen=True)
class PhiSlicing:
    """Angles ``phi_j = arcsin(omega tau_j)``."""

    phis: tuple

    def __post_init__(self):
        phis = tuple(float(f) for f in self.phis)
        if not all(0 < f < 0.5 * math.pi for f in phis):
            raise DomainError("every phi_j must lie in (0, pi/2)")
        object.__setattr__(self, "phis", phis)

    @classmethod
    def from_slicing(cls, omega: float, slicing: TimeSlicing) -> "PhiSlicing":
        return cls(tuple(phi_of_tau(omega, t) for t in slicing.taus))

    @property
    def total(self) -> float:
        return math.fsum(self.phis)


def phi_of_tau(omega: float, tau_j: float) -> float:
    """``arcsin(omega tau_j)``, defined for ``0 < omega tau_j < 1``."""
    u = omega * tau_j
    if not 0 < u < 1:
        raise DomainError(f"phi needs 0 < omega*tau_j < 1, got {u!r}")
    return math.asin(u)


def _check_slice(p, tau_j):
    if not tau_j > 0:
        raise ArgumentError(f"tau_j must be positive, got {tau_j}")
    if p.omega * tau_j >= 1:
        raise DomainError(f"omega*tau_j = {p.omega * tau_j!r} must be below 1")


def _short_time(p, x_j, x_jm1, tau_j, epsilon=0.0):
    # free kernel times exp(-(i/hbar) tau_j (V(x_j) + V(x_jm1)) / 2), omega -> omega - i epsilon
    w = _k._frequency(p, epsilon) if p.omega > 0 else 0.0
    potential = 0.25 * p.m * w * w * (x_j * x_j + x_jm1 * x_jm1)
    return _k._free(p, x_j, x_jm1, tau_j) * np.exp(-1j * tau_j * potential / p.hbar)


def infinitesimal_kernel(p: OscParams, x_j, x_jm1, tau_j: float, epsilon: float = 0.0):
    """Short-time kernel with the trapezoidal potential rule.

    Equals ``sqrt(m omega / 2 pi i hbar) sqrt(1 / omega tau_j)
    exp{(i m omega / 2 hbar)(1 / omega tau_j)[(1 - omega^2 tau_j^2 / 2)(x_j^2 + x_{j-1}^2)
    - 2 x_j x_{j-1}]}``; the ``- 2 x_j x_{j-1}`` term sits inside the bracket.
    Endpoints may be arrays.
    """
    _check_slice(p, tau_j)
    if epsilon < 0:
        raise ArgumentError("epsilon must be non-negative")
    out = _short_time(p, np.asarray(x_j), np.asarray(x_jm1), tau_j, epsilon)
    return complex(out) if np.ndim(out) == 0 else out


def _f_tau(p, phi, epsilon):
    if p.omega == 0:
        raise ArgumentError("F is defined for omega > 0")
    if not 0 < phi < math.pi:
        raise DomainError(f"phi must lie in (0, pi), got {phi!r}")
    if epsilon < 0:
        raise ArgumentError("epsilon must be non-negative")
    if epsilon == 0 and abs(math.sin(phi)) < _k.CAUSTIC_MARGIN:
        raise CausticError(f"sin(phi) vanishes at phi = {phi!r}", phase_mod_pi=math.fmod(phi, math.pi))
    return phi / p.omega


def f_eval(p: OscParams, eta2, eta1, phi: float, epsilon: float = 0.0):
    """``F(eta2, eta1; phi) = sqrt(m omega / 2 pi i hbar sin phi)
    exp[(i m omega / 2 hbar sin phi)(cos phi (eta2^2 + eta1^2) - 2 eta2 eta1)]``.

    With ``epsilon > 0`` the frequency becomes ``omega - i epsilon`` and the
    angle ``phi (omega - i epsilon) / omega``, so that ``F(.; omega tau)`` is
    the damped kernel at time ``tau``. Shares its arithmetic with
    :func:`proplab.kernel.propagator` and agrees with it bit for bit.
    """
    tau = _f_tau(p, phi, epsilon)
    out = _k._harmonic(p, np.asarray(eta2), np.asarray(eta1), tau, epsilon)
    return complex(out) if np.ndim(out) == 0 else out


def f_compose_residual(
    p: OscParams,
    eta2: float,
    eta1: float,
    phi_b: float,
    phi_a: float,
    epsilon: float,
    rule: QuadratureRule,
) -> float:
    """Relative defect of ``int F(eta2, eta; phi_b) F(eta, eta1; phi_a) d eta = F(eta2, eta1; phi_a + phi_b)``.

    The integral is taken as in :func:`proplab.kernel.composition_residual`.
    """
    if not epsilon > 0:
        raise ArgumentError("f_compose_residual needs epsilon > 0")
    t_b = _f_tau(p, phi_b, 0.0)
    t_a = _f_tau(p, phi_a, 0.0)
    _f_tau(p, phi_a + phi_b, 0.0)
    qa, la = _k._gaussian_coefficients(p, t_a, epsilon, eta1)
    qb, lb = _k._gaussian_coefficients(p, t_b, epsilon, eta2)
    curvature, linear = qa + qb, la + lb

    def integrand(y):
        return f_eval(p, eta2, y, phi_b, epsilon) * f_eval(p, y, eta1, phi_a, epsilon)

    composed = fresnel_integrate(rule, integrand, curvature, (linear / (2 * curvature)).real)
    direct = f_eval(p, eta2, eta1, phi_a + phi_b, epsilon)
    residual = abs(composed - direct) / abs(direct)
    if residual > 1:
        warnings.warn(
            f"F composition quadrature did not converge (residual {residual:.3g})",
            QuadratureWarning,
            stacklevel=2,
        )
    return residual


def _phi_sum(p, slicing, epsilon):
    for t in slicing.taus:
        _check_slice(p, t)
    if epsilon == 0:
        return PhiSlicing.from_slicing(p.omega, slicing).total
    w = _k._frequency(p, epsilon)
    # complex angles, continued from arcsin(omega tau_j)
    return sum(complex(np.arcsin(w * t)) for t in slicing.taus)


def chain_exact(p: OscParams, x_N: float, x_0: float, slicing: TimeSlicing, epsilon: float = 0.0) -> complex:
    """The N-slice chain of F factors in closed form, ``F(x_N, x_0; sum_j arcsin(omega tau_j))``.

    With ``epsilon > 0`` every slice uses ``omega - i epsilon``; the angles
    are then ``arcsin((omega - i epsilon) tau_j)``, the same damping that
    :func:`chain_numeric` applies.
    """
    if p.omega == 0:
        raise ArgumentError("chain_exact needs omega > 0; the free chain is the free kernel")
    if epsilon < 0:
        raise ArgumentError("epsilon must be non-negative")
    total = _phi_sum(p, slicing, epsilon)
    if not 0 < total.real < math.pi:
        raise DomainError(f"sum of phi_j = {total!r} must stay below pi")
    if epsilon == 0:
        return f_eval(p, x_N, x_0, total)
    # F at complex angle: the damped kernel at "time" total / w
    w = _k._frequency(p, epsilon)
    return complex(_k._harmonic(p, x_N, x_0, total / w, epsilon))


def _taper(g, lo, hi, width):
    # C-infinity step: 1 deep inside [lo, hi], 0 at the ends
    a = np.clip(np.minimum(g - lo, hi - g) / width, 0.0, 1.0)
    out = np.zeros_like(a)
    out[a >= 1] = 1.0
    mid = (a > 0) & (a < 1)
    am = a[mid]
    with np.errstate(over="ignore"):
        out[mid] = 1.0 / (1.0 + np.exp(1.0 / am - 1.0 / (1.0 - am)))
    return out


def chain_numeric(
    p: OscParams,
    x_N: float,
    x_0: float,
    slicing: TimeSlicing,
    grid: Grid1D,
    epsilon: float,
    taper: float = 0.375,
) -> complex:
    """Brute-force N-slice path integral on a uniform grid.

    Each of the ``N - 1`` intermediate positions is integrated with the
    trapezoid rule over ``grid``. Damping ``omega -> omega - i epsilon``
    alone does not make the Fresnel integrand small at the grid ends,
    so the trapezoid weights are also multiplied by a smooth cut-off that
    falls from 1 to 0 over the outer ``taper`` fraction of each half of
    the grid. Because the cut-off is infinitely smooth, truncation costs
    only a tiny error.

    Raises :class:`BoundaryLeakageError` when an endpoint lies in the
    cut-off zone, or when the weighted integrand at the outermost nodes
    exceeds ``BOUNDARY_TOL`` of its peak.
    """
    if not epsilon > 0:
        raise ArgumentError("chain_numeric needs epsilon > 0")
    if slicing.n > MAX_NUMERIC_SLICES:
        raise ArgumentError(f"chain_numeric handles at most {MAX_NUMERIC_SLICES} slices, got {slicing.n}")
    if not 0 <= taper < 1:
        raise ArgumentError("taper must be in [0, 1)")
    for t in slicing.taus:
        _check_slice(p, t)
    taus = slicing.taus
    if slicing.n == 1:
        return complex(_short_time(p, x_N, x_0, taus[0], epsilon))

    g = grid.points()
    lo, hi = grid.x_min, grid.x_max
    width = taper * 0.5 * (hi - lo)
    flat_lo, flat_hi = lo + width, hi - width
    for name, x in (("x_N", x_N), ("x_0", x_0)):
        if not flat_lo <= x <= flat_hi:
            raise BoundaryLeakageError(
                f"{name} = {x} lies outside the untapered region [{flat_lo}, {flat_hi}]; widen the grid"
            )
    weights = np.full(grid.n, grid.spacing)
    weights[[0, -1]] *= 0.5
    if width > 0:
        weights *= _taper(g, lo, hi, width)

    v = _short_time(p, g, x_0, taus[0], epsilon)
    for t in taus[1:-1]:
        wv = weights * v
        _check_boundary(wv)
        v = _short_time(p, g[:, None], g[None, :], t, epsilon) @ wv
    wv = weights * v * _short_time(p, x_N, g, taus[-1], epsilon)
    _check_boundary(wv)
    return complex(np.sum(wv))


def _check_boundary(wv):
    mags = np.abs(wv)
    peak = mags.max()
    edge = max(mags[:2].max(), mags[-2:].max())
    if peak == 0 or edge > BOUNDARY_TOL * peak:
        raise BoundaryLeakageError(
            f"integrand at the grid boundary is {edge / peak if peak else float('inf'):.3g} of its peak; "
            "widen the grid, raise epsilon or enable the taper"
        )
