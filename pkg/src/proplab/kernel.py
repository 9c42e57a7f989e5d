"""Closed-form harmonic oscillator kernel and the checks that certify it.

Real-time kernels are regularised by continuing the frequency,
``omega -> omega - 1j * epsilon``; nothing else damps them.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import GAUSS_LEGENDRE, OscParams, QuadratureRule, fresnel_integrate, quadrature_rule
from .errors import (
    ArgumentError,
    CancellationError,
    CausticError,
    QuadratureWarning,
    QueryError,
    RedirectError,
    ResolutionError,
)

#: Queries with |sin(omega tau)| below this value are refused at epsilon = 0.
CAUSTIC_MARGIN = 1e-6

_QUARTER_TURN = cmath.exp(-0.25j * math.pi)  # 1/sqrt(i)

# Probe offsets, in units of the test width, for the smeared-delta check.
_PROBES = np.array([-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0])


@dataclass(frozen=True)
class KernelQuery:
    """Endpoints ``x2`` (final) and ``x1`` (initial), elapsed time, damping."""

    x2: float
    x1: float
    tau: float
    epsilon: float = 0.0

    def __post_init__(self):
        for name in ("x2", "x1", "tau", "epsilon"):
            if not math.isfinite(getattr(self, name)):
                raise QueryError(f"{name} must be finite")
        if self.tau <= 0:
            raise QueryError(f"the propagator is defined for tau > 0, got tau={self.tau}")
        if self.epsilon < 0:
            raise QueryError(f"epsilon must be non-negative, got {self.epsilon}")


def _frequency(p, epsilon):
    return p.omega if epsilon == 0 else complex(p.omega, -epsilon)


def _check_caustic(p, tau, margin=CAUSTIC_MARGIN):
    wt = p.omega * tau
    if abs(math.sin(wt)) < margin:
        raise CausticError(
            f"omega*tau = {wt!r} is a caustic (omega*tau mod pi = {math.fmod(wt, math.pi):.3e})",
            phase_mod_pi=math.fmod(wt, math.pi),
        )


def _require_oscillator(p):
    if p.omega == 0:
        raise RedirectError("omega = 0 is the free particle; use free_propagator")


def _kernel_form(m, w, hbar, s, c, x2, x1, turns=0):
    # sqrt(m w / (2 pi i hbar s)) exp{(i m w / 2 hbar s)[(x2^2 + x1^2) c - 2 x2 x1]}
    # ``s`` is sin(w tau - turns pi); the (-1)^turns it drops returns as e^{-i pi turns / 2}
    amp = _QUARTER_TURN * np.sqrt(np.asarray(m * w / (2.0 * math.pi * hbar * s), dtype=complex))
    if turns:
        amp = amp * (-1j) ** turns
    sign = -1.0 if turns % 2 else 1.0
    return amp * np.exp(1j * m * w / (2.0 * hbar * s) * sign * ((x2 * x2 + x1 * x1) * c - 2.0 * x2 * x1))


def _caustics_passed(wt):
    # caustics crossed on the way from 0 to omega tau (the Maslov index)
    return max(int(math.floor(complex(wt).real / math.pi)), 0)


def _harmonic(p, x2, x1, tau, epsilon=0.0):
    """Vectorised kernel; endpoints may be arrays and ``tau`` may be complex.

    The square root is continued along the time axis: past ``n`` caustics the
    prefactor carries the Maslov phase ``e^{-i pi n / 2}``.
    """
    w = _frequency(p, epsilon)
    wt = w * tau
    n = _caustics_passed(wt)
    return _kernel_form(p.m, w, p.hbar, np.sin(wt - n * math.pi), np.cos(wt), x2, x1, n)


def _free(p, x2, x1, tau):
    d = x2 - x1
    amp = _QUARTER_TURN * math.sqrt(p.m / (2.0 * math.pi * p.hbar * tau))
    return amp * np.exp(1j * p.m * d * d / (2.0 * p.hbar * tau))


def _gaussian_coefficients(p, tau, epsilon, x_fixed):
    """(curvature, linear) of the kernel's dependence on its other endpoint.

    The kernel is ``C exp(-curvature * y**2 + linear * y)`` as a function of
    the endpoint ``y`` that is not ``x_fixed``.
    """
    if p.omega == 0:
        k = p.m / (p.hbar * tau)
        return -0.5j * k, -1j * k * x_fixed
    w = _frequency(p, epsilon)
    wt = w * tau
    s, c = np.sin(wt), np.cos(wt)
    k = p.m * w / (p.hbar * s)
    return -0.5j * k * c, -1j * k * x_fixed


def propagator(p: OscParams, q: KernelQuery) -> complex:
    """Feynman propagator of the oscillator at ``omega - 1j * epsilon``.

    The prefactor is ``exp(-i pi/4) * sqrt(m w / (2 pi hbar sin(w tau)))``
    with the principal square root. No Maslov phase is tracked, so results
    past the first caustic carry the principal-branch sign.
    """
    _require_oscillator(p)
    if q.epsilon == 0:
        _check_caustic(p, q.tau)
    return complex(_harmonic(p, q.x2, q.x1, q.tau, q.epsilon))


def free_propagator(p: OscParams, q: KernelQuery) -> complex:
    """Free-particle kernel; ``p.omega`` and ``q.epsilon`` are ignored."""
    return complex(_free(p, q.x2, q.x1, q.tau))


def propagator_euclidean(p: OscParams, x2: float, x1: float, beta: float) -> float:
    """Imaginary-time kernel ``<x2| exp(-beta H) |x1>``.

    Evaluated as ``sqrt(m w / 2 pi hbar sinh a) exp{-(m w / 2 hbar)
    [(x2^2 + x1^2) coth a - 2 x2 x1 / sinh a]}`` with ``a = omega beta hbar``,
    which stays finite for large ``a``.
    """
    if not beta > 0:
        raise ArgumentError(f"beta must be positive, got {beta}")
    if p.omega == 0:
        t = p.hbar * beta
        d = x2 - x1
        return math.sqrt(p.m / (2 * math.pi * p.hbar * t)) * math.exp(-p.m * d * d / (2 * p.hbar * t))
    a = p.omega * beta * p.hbar
    sh = math.sinh(a)
    k = p.m * p.omega / p.hbar
    pref = math.sqrt(k / (2 * math.pi * sh)) if math.isfinite(sh) else 0.0
    expo = -0.5 * k * ((x2 * x2 + x1 * x1) / math.tanh(a) - 2 * x2 * x1 / sh)
    return pref * math.exp(expo)


def _ordered_hamiltonian(p, x2, x1, tau, epsilon=0.0):
    w = _frequency(p, epsilon)
    wt = w * tau
    s, c = np.sin(wt), np.cos(wt)
    csc2 = 1.0 / (s * s)
    quad = 0.5 * p.m * w * w * ((x2 * x2 + x1 * x1) * csc2 - 2.0 * x2 * x1 * c * csc2)
    return quad - 0.5j * p.hbar * w * c / s


def ordered_hamiltonian(p: OscParams, q: KernelQuery) -> complex:
    """Ratio ``<x2,tau| H |x1,0> / <x2,tau|x1,0>`` from the time-ordered Hamiltonian."""
    _require_oscillator(p)
    if q.epsilon == 0:
        _check_caustic(p, q.tau)
    return complex(_ordered_hamiltonian(p, q.x2, q.x1, q.tau, q.epsilon))


def phase_reconstruct(p: OscParams, x2: float, x1: float, tau0: float, tau1: float, n_steps: int = 64) -> complex:
    """``K(tau1) / K(tau0)`` rebuilt as ``exp(-(i/hbar) * integral of H dtau)``.

    The integral runs over ``[tau0, tau1]`` with an ``n_steps``-point
    Gauss-Legendre rule. The integration constant never enters because the
    result is a ratio anchored at ``tau0``.
    """
    _require_oscillator(p)
    if not 0 < tau0 <= tau1:
        raise ArgumentError(f"need 0 < tau0 <= tau1, got [{tau0}, {tau1}]")
    if int(n_steps) != n_steps or n_steps < 8:
        raise ArgumentError(f"n_steps must be an integer >= 8, got {n_steps}")
    _check_caustic(p, tau0)
    _check_caustic(p, tau1)
    k = math.ceil(p.omega * tau0 / math.pi)
    if k * math.pi <= p.omega * tau1:
        raise CausticError(
            f"caustic at omega*tau = {k}*pi inside [{p.omega * tau0}, {p.omega * tau1}]",
            phase_mod_pi=0.0,
        )
    if tau1 == tau0:
        return 1.0 + 0.0j
    rule = quadrature_rule(GAUSS_LEGENDRE, int(n_steps), (tau0, tau1))
    action = np.sum(rule.weights * _ordered_hamiltonian(p, x2, x1, rule.nodes))
    return complex(np.exp(-1j * action / p.hbar))


def composition_residual(
    p: OscParams,
    x2: float,
    x1: float,
    t_a: float,
    t_b: float,
    epsilon: float,
    rule: QuadratureRule,
) -> float:
    """Relative defect of ``int K(x2, y; t_b) K(y, x1; t_a) dy = K(x2, x1; t_a + t_b)``.

    All three kernels use the same ``epsilon``. A Gauss-Hermite rule is laid
    on the steepest-descent line of the integrand (see
    :func:`proplab.core.fresnel_integrate`); a Gauss-Legendre rule integrates
    along the real interval it was built for.
    """
    _require_oscillator(p)
    if not epsilon > 0:
        raise ArgumentError("composition_residual needs epsilon > 0")
    if not (t_a > 0 and t_b > 0):
        raise ArgumentError("t_a and t_b must be positive")
    for t in (t_a, t_b, t_a + t_b):
        _check_caustic(p, t)
    qa, la = _gaussian_coefficients(p, t_a, epsilon, x1)
    qb, lb = _gaussian_coefficients(p, t_b, epsilon, x2)
    curvature, linear = qa + qb, la + lb
    center = (linear / (2 * curvature)).real

    def integrand(y):
        return _harmonic(p, x2, y, t_b, epsilon) * _harmonic(p, y, x1, t_a, epsilon)

    composed = fresnel_integrate(rule, integrand, curvature, center)
    direct = complex(_harmonic(p, x2, x1, t_a + t_b, epsilon))
    residual = abs(composed - direct) / abs(direct)
    if residual > 1:
        warnings.warn(
            f"composition quadrature did not converge (residual {residual:.3g}); "
            f"enlarge the rule or widen its interval",
            QuadratureWarning,
            stacklevel=2,
        )
    return residual


def initial_condition_residual(
    p: OscParams,
    test_center: float,
    test_width: float,
    tau: float,
    epsilon: float,
    rule: QuadratureRule,
    check_resolution: bool = True,
) -> float:
    """Weak test of ``K -> delta`` as ``tau -> 0+``.

    The kernel smears ``g(x) = exp(-(x - test_center)**2 / (2 test_width**2))``
    and the result is compared with ``g`` at seven probe points spread over
    ``test_center +- 2 test_width``. Returns the largest deviation relative
    to ``max |g| = 1``. ``omega = 0`` uses the free kernel.

    With ``check_resolution`` the residual at ``tau / 2`` is computed with
    the same rule; if it is larger the rule is judged too coarse for the
    Fresnel scale ``sqrt(hbar tau / m)`` and :class:`ResolutionError` is raised.
    """
    if not tau > 0:
        raise ArgumentError("tau must be positive")
    if not test_width > 0:
        raise ArgumentError("test_width must be positive")
    if epsilon < 0:
        raise ArgumentError("epsilon must be non-negative")
    if p.omega > 0 and epsilon == 0:
        _check_caustic(p, tau)

    def g(x):
        return np.exp(-((x - test_center) ** 2) / (2.0 * test_width**2))

    def kernel(x2, y):
        if p.omega == 0:
            return _free(p, x2, y, tau)
        return _harmonic(p, x2, y, tau, epsilon)

    worst = 0.0
    for x2 in test_center + test_width * _PROBES:
        q, lin = _gaussian_coefficients(p, tau, epsilon, x2)
        curvature = q + 0.5 / test_width**2
        linear = lin + test_center / test_width**2
        center = (linear / (2 * curvature)).real
        smeared = fresnel_integrate(rule, lambda y: kernel(x2, y) * g(y), curvature, center)
        worst = max(worst, abs(smeared - g(x2)))

    if check_resolution:
        half = initial_condition_residual(p, test_center, test_width, 0.5 * tau, epsilon, rule, False)
        if half > worst:
            raise ResolutionError(
                f"residual grew from {worst:.3g} to {half:.3g} when tau was halved; "
                f"the {rule.n}-point rule does not resolve sqrt(hbar tau / m)"
            )
    return worst


def _schrodinger_defect(p, q, h_t, h_x):
    if p.omega == 0:
        def k(x, t):
            return _free(p, x, q.x1, t)
        w = 0.0
    else:
        def k(x, t):
            return _harmonic(p, x, q.x1, t, q.epsilon)
        w = _frequency(p, q.epsilon)
    x, t = q.x2, q.tau
    k0 = k(x, t)
    dk_dt = (k(x, t + h_t) - k(x, t - h_t)) / (2 * h_t)
    d2k_dx2 = (k(x + h_x, t) - 2 * k0 + k(x - h_x, t)) / (h_x * h_x)
    hk = -(p.hbar**2) / (2 * p.m) * d2k_dx2 + 0.5 * p.m * w * w * x * x * k0
    return float(abs(1j * p.hbar * dk_dt - hk) / abs(hk))


def schrodinger_residual(
    p: OscParams,
    q: KernelQuery,
    h_t: float,
    h_x: float,
    noise_floor: float = 1e-6,
) -> float:
    """Relative residual ``|i hbar dK/dtau - H K| / |H K|`` by central differences.

    The derivatives act on the final endpoint ``q.x2``. The residual is also
    evaluated at halved steps; if halving makes it larger while it exceeds
    ``noise_floor``, round-off has overtaken truncation error and
    :class:`CancellationError` is raised.
    """
    if not (h_t > 0 and h_x > 0):
        raise ArgumentError("step sizes must be positive")
    if h_t >= q.tau:
        raise ArgumentError("h_t must be smaller than tau")
    if p.omega > 0 and q.epsilon == 0:
        for t in (q.tau - h_t, q.tau, q.tau + h_t):
            _check_caustic(p, t)
    r = _schrodinger_defect(p, q, h_t, h_x)
    r_half = _schrodinger_defect(p, q, 0.5 * h_t, 0.5 * h_x)
    if r_half > r and r > noise_floor:
        raise CancellationError(
            f"residual rose from {r:.3g} to {r_half:.3g} on halving the steps; "
            f"steps h_t={h_t}, h_x={h_x} are in the round-off regime"
        )
    return r
