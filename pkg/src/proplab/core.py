"""Shared parameter records, grids and fixed-order quadrature."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import ArgumentError, EvaluationError

GAUSS_HERMITE = "gauss_hermite"
GAUSS_LEGENDRE = "gauss_legendre"
_KINDS = (GAUSS_HERMITE, GAUSS_LEGENDRE)


@dataclass(frozen=True)
class OscParams:
    """Mass, angular frequency and Planck constant of the oscillator.

    ``omega = 0`` selects the free particle where an operation supports it.
    """

    m: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("m", "omega", "hbar"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ArgumentError(f"{name} must be finite, got {value!r}")
        if self.m <= 0:
            raise ArgumentError(f"mass must be positive, got {self.m}")
        if self.hbar <= 0:
            raise ArgumentError(f"hbar must be positive, got {self.hbar}")
        if self.omega < 0:
            raise ArgumentError(f"omega must be non-negative, got {self.omega}")

    @property
    def length(self) -> float:
        """Oscillator length sqrt(hbar / m omega)."""
        return math.sqrt(self.hbar / (self.m * self.omega))


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ArgumentError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if int(self.n) != self.n or self.n < 2:
            raise ArgumentError(f"grid needs n >= 2 points, got {self.n}")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    def points(self) -> np.ndarray:
        return self.x_min + self.spacing * np.arange(self.n)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights of a Gauss rule.

    For ``gauss_hermite`` the weight function exp(-x**2) is folded into
    ``weights``; ``integrate`` never multiplies it in again.
    """

    kind: str
    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple | None = None
    # w_i * exp(x_i**2), computed in log space so large rules do not overflow
    scaled_weights: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen(self.nodes))
        object.__setattr__(self, "weights", _frozen(self.weights))
        if self.scaled_weights is not None:
            object.__setattr__(self, "scaled_weights", _frozen(self.scaled_weights))
        if len(self.nodes) != len(self.weights):
            raise ArgumentError("nodes and weights differ in length")
        if len(self.nodes) > 1 and not np.all(np.diff(self.nodes) > 0):
            raise ArgumentError("quadrature nodes must be strictly increasing")

    @property
    def n(self) -> int:
        return len(self.nodes)


def quadrature_rule(kind: str, n: int, interval=None) -> QuadratureRule:
    """Build an ``n``-point Gauss-Hermite or Gauss-Legendre rule.

    Parameters
    ----------
    kind : {"gauss_hermite", "gauss_legendre"}
    n : int
        Number of nodes. The rule is exact for polynomials of degree
        ``2n - 1`` against its weight function.
    interval : pair of float, optional
        Integration interval, required for (and only for) Gauss-Legendre.
    """
    if kind not in _KINDS:
        raise ArgumentError(f"unknown quadrature kind {kind!r}; expected one of {_KINDS}")
    if int(n) != n or n < 1:
        raise ArgumentError(f"quadrature order must be a positive integer, got {n!r}")
    n = int(n)
    if kind == GAUSS_HERMITE:
        if interval is not None:
            raise ArgumentError("gauss_hermite integrates over the real line; no interval")
        if n == 1:
            x, w = np.array([0.0]), np.array([math.sqrt(math.pi)])
        else:
            x, w = special.roots_hermite(n)
        with np.errstate(divide="ignore"):
            scaled = np.exp(np.log(w) + x * x)
        return QuadratureRule(kind, x, w, None, scaled)

    if interval is None:
        raise ArgumentError("gauss_legendre needs an interval")
    a, b = (float(v) for v in interval)
    if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
        raise ArgumentError(f"invalid interval {interval!r}")
    if n == 1:
        t, w = np.array([0.0]), np.array([2.0])
    else:
        t, w = special.roots_legendre(n)
    half = 0.5 * (b - a)
    return QuadratureRule(kind, a + half * (t + 1.0), half * w, (a, b))


def _evaluate(f, x):
    values = np.asarray(f(x))
    if values.shape != np.shape(x):
        values = np.broadcast_to(values, np.shape(x))
    bad = ~np.isfinite(values)
    if np.any(bad):
        node = np.asarray(x).ravel()[np.flatnonzero(bad.ravel())[0]]
        raise EvaluationError(f"integrand is not finite at node {node!r}", node=node)
    return values


def integrate(rule: QuadratureRule, f) -> complex:
    """Return ``sum(w_i * f(x_i))``.

    ``f`` is called once with the whole node array and must broadcast.
    """
    return complex(np.sum(rule.weights * _evaluate(f, rule.nodes)))


def fresnel_integrate(rule: QuadratureRule, f, curvature: complex, center: complex = 0.0) -> complex:
    """Integrate an entire function ``f`` over the real line.

    ``f`` is assumed to behave like ``exp(-curvature * (y - center)**2)``
    with ``Re(curvature) >= 0``, which covers damped Fresnel integrands.

    With a Gauss-Hermite rule the real line is rotated onto the steepest
    descent line ``y = center + exp(i theta) u / sqrt(|curvature|)``, where
    ``curvature * exp(2 i theta)`` is real and positive. ``f`` is then
    called with complex arguments. With a Gauss-Legendre rule ``f`` is
    integrated on the rule's real interval as is, so the interval must
    cover the region where the damped integrand is non-negligible.

    ``center`` may be complex. For ``f = exp(-curvature y^2 + b y)`` the
    saddle ``b / (2 curvature)`` makes even the one-node rule exact; a real
    centre keeps the nodes closer to the real axis and needs a few nodes
    more.
    """
    if rule.kind == GAUSS_LEGENDRE:
        return integrate(rule, f)
    curvature = complex(curvature)
    if curvature == 0 or curvature.real < 0:
        raise ArgumentError(f"curvature must have a non-negative real part and be non-zero, got {curvature}")
    theta = -0.5 * np.angle(curvature)
    step = np.exp(1j * theta) / math.sqrt(abs(curvature))
    live = rule.scaled_weights > 0
    u = rule.nodes[live]
    values = _evaluate(f, center + step * u)
    return complex(step * np.sum(rule.scaled_weights[live] * values))
