"""Truncated number-basis operators and the operator identities behind the kernel.

Matrices live on the span of the first ``D`` oscillator eigenstates. Products
of ladder matrices are wrong near the truncation edge, so residuals are read
off the top-left ``d x d`` block (:class:`InteriorProjection`).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import GAUSS_HERMITE, OscParams, quadrature_rule
from .errors import ArgumentError, RangeError, ResolutionError
from .spectral import _eigen_table

# Pade(13) numerator coefficients and the matching scaling threshold
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_THETA13 = 5.371920351148152
_MAX_SQUARINGS = 1024


@dataclass(frozen=True, eq=False)
class FockOperator:
    """Dense ``D x D`` complex matrix in the number basis of ``params``."""

    matrix: np.ndarray
    params: OscParams

    def __post_init__(self):
        a = np.array(self.matrix, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 2:
            raise ArgumentError(f"need a square matrix with D >= 2, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise RangeError("operator entries must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def _wrap(self, a):
        return FockOperator(a, self.params)

    def _other(self, other):
        if isinstance(other, FockOperator):
            if other.dim != self.dim:
                raise ArgumentError(f"dimension mismatch: {self.dim} vs {other.dim}")
            return other.matrix
        return NotImplemented

    def __matmul__(self, other):
        b = self._other(other)
        return NotImplemented if b is NotImplemented else self._wrap(self.matrix @ b)

    def __add__(self, other):
        b = self._other(other)
        return NotImplemented if b is NotImplemented else self._wrap(self.matrix + b)

    def __sub__(self, other):
        b = self._other(other)
        return NotImplemented if b is NotImplemented else self._wrap(self.matrix - b)

    def __mul__(self, scalar):
        if isinstance(scalar, FockOperator) or np.ndim(scalar) != 0:
            return NotImplemented
        return self._wrap(complex(scalar) * self.matrix)

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self.matrix)

    def dag(self) -> "FockOperator":
        return self._wrap(self.matrix.conj().T)

    def identity(self) -> "FockOperator":
        return self._wrap(np.eye(self.dim))


@dataclass(frozen=True)
class InteriorProjection:
    """Read residuals on the top-left ``d x d`` block."""

    d: int

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ArgumentError(f"d must be a positive integer, got {self.d}")

    def check(self, D: int) -> None:
        if 2 * self.d > D:
            raise ArgumentError(f"interior block d={self.d} exceeds D/2 for D={D}")

    def norm(self, op) -> float:
        """Max-norm of the interior block."""
        a = op.matrix if isinstance(op, FockOperator) else np.asarray(op)
        return float(np.max(np.abs(a[: self.d, : self.d])))


def _check_dim(D):
    if int(D) != D or D < 2:
        raise ArgumentError(f"basis dimension must be an integer >= 2, got {D}")
    return int(D)


def _require_oscillator(p):
    if p.omega == 0:
        raise ArgumentError("the number basis needs omega > 0")


def _lowering(D):
    return np.diag(np.sqrt(np.arange(1.0, D)), 1)


def position_op(p: OscParams, D: int) -> FockOperator:
    """``X = sqrt(hbar / 2 m omega) (a + a^dagger)``."""
    _require_oscillator(p)
    a = _lowering(_check_dim(D))
    return FockOperator(math.sqrt(p.hbar / (2 * p.m * p.omega)) * (a + a.T), p)


def momentum_op(p: OscParams, D: int) -> FockOperator:
    """``P = i sqrt(m hbar omega / 2) (a^dagger - a)``."""
    _require_oscillator(p)
    a = _lowering(_check_dim(D))
    return FockOperator(1j * math.sqrt(p.m * p.hbar * p.omega / 2) * (a.T - a), p)


def hamiltonian_op(p: OscParams, D: int) -> FockOperator:
    """``P^2 / 2m + m omega^2 X^2 / 2`` assembled from the truncated X and P."""
    x, pm = position_op(p, D), momentum_op(p, D)
    return (0.5 / p.m) * (pm @ pm) + (0.5 * p.m * p.omega**2) * (x @ x)


def commutator(a: FockOperator, b: FockOperator) -> FockOperator:
    return a @ b - b @ a


def _expm(a):
    norm = np.linalg.norm(a, 1)
    if not math.isfinite(norm):
        raise RangeError("matrix exponential of a non-finite matrix")
    if norm == 0:
        return np.eye(a.shape[0], dtype=complex)
    s = max(0, math.ceil(math.log2(norm / _THETA13))) if norm > _THETA13 else 0
    if s > _MAX_SQUARINGS:
        raise RangeError(f"norm {norm:.3g} is too large to exponentiate")
    a = a / 2.0**s
    b = _PADE13
    ident = np.eye(a.shape[0], dtype=a.dtype)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident
    with np.errstate(over="ignore", invalid="ignore"):
        r = np.linalg.solve(v - u, v + u)
        for _ in range(s):
            r = r @ r
    if not np.all(np.isfinite(r)):
        raise RangeError("matrix exponential overflowed")
    return r


def mat_exp(a):
    """Matrix exponential by Pade(13) scaling and squaring.

    Accepts a :class:`FockOperator` or a square array and returns the same
    kind. Raises :class:`RangeError` when the result cannot be represented.
    """
    if isinstance(a, FockOperator):
        return FockOperator(_expm(a.matrix), a.params)
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ArgumentError(f"need a square matrix, got shape {a.shape}")
    return _expm(a)


def evolution_op(p: OscParams, tau: float, D: int) -> FockOperator:
    """``U = exp(-i H tau / hbar)`` with ``H`` from :func:`hamiltonian_op`."""
    return mat_exp((-1j * tau / p.hbar) * hamiltonian_op(p, D))


def _setup(p, tau, D, proj, allow_zero=False):
    _require_oscillator(p)
    D = _check_dim(D)
    if not (tau > 0 or (allow_zero and tau == 0)):
        raise ArgumentError(f"tau must be positive, got {tau}")
    proj.check(D)
    return D


def heisenberg_residual(p: OscParams, tau: float, D: int, proj: InteriorProjection) -> tuple[float, float]:
    """Interior defects of the Heisenberg-picture solutions for ``X(tau)`` and ``P(tau)``."""
    D = _setup(p, tau, D, proj)
    x, pm = position_op(p, D), momentum_op(p, D)
    u = evolution_op(p, tau, D)
    c, s = math.cos(p.omega * tau), math.sin(p.omega * tau)
    mw = p.m * p.omega
    r_x = u.dag() @ x @ u - (c * x + (s / mw) * pm)
    r_p = u.dag() @ pm @ u - ((-mw * s) * x + c * pm)
    return proj.norm(r_x), proj.norm(r_p)


def unequal_time_commutator(p: OscParams, tau: float, D: int, proj: InteriorProjection) -> float:
    """Interior defect of ``[X(0), X(tau)] = (i hbar / m omega) sin(omega tau)``."""
    D = _setup(p, tau, D, proj)
    x = position_op(p, D)
    u = evolution_op(p, tau, D)
    lhs = commutator(x, u.dag() @ x @ u)
    rhs = (1j * p.hbar / (p.m * p.omega) * math.sin(p.omega * tau)) * x.identity()
    return proj.norm(lhs - rhs)


def canonical_commutator_residual(p: OscParams, D: int, proj: InteriorProjection) -> float:
    """Interior defect of ``[X, P] = i hbar``."""
    D = _setup(p, 1.0, D, proj)
    x, pm = position_op(p, D), momentum_op(p, D)
    return proj.norm(commutator(x, pm) - (1j * p.hbar) * x.identity())


def bch_coefficients(p: OscParams) -> tuple[float, float]:
    """``(alpha, beta) = (m omega / 2 hbar, -1 / (4 m omega hbar))``."""
    _require_oscillator(p)
    return p.m * p.omega / (2 * p.hbar), -1.0 / (4 * p.m * p.omega * p.hbar)


def bch_factors(p: OscParams, tau: float, D: int):
    """The five matrix exponentials of the factorised evolution operator and its scalar.

    Returns ``(scalar, [F1, ..., F5])`` with ``U = scalar * F1 F2 F3 F4 F5``
    and

    ``F1 = exp(-alpha X^2)``, ``F2 = exp(-beta P^2)``,
    ``F3 = exp(-(i/hbar)(i omega tau) P X) = exp((omega tau / hbar) P X)``,
    ``F4 = exp(beta P^2)``, ``F5 = exp(alpha X^2)``, scalar ``exp(i omega tau / 2)``.

    ``P X`` is the product of the truncated matrices, in that order.
    """
    alpha, beta = bch_coefficients(p)
    x, pm = position_op(p, D), momentum_op(p, D)
    x2, p2, px = x @ x, pm @ pm, pm @ x
    factors = [
        mat_exp(-alpha * x2),
        mat_exp(-beta * p2),
        mat_exp((p.omega * tau / p.hbar) * px),
        mat_exp(beta * p2),
        mat_exp(alpha * x2),
    ]
    return cmath.exp(0.5j * p.omega * tau), factors


def bch_factorization_residual(p: OscParams, tau: float, D: int, proj: InteriorProjection) -> float:
    """Interior max-norm of ``exp(-i tau H / hbar)`` minus its five-factor product.

    Every factor is exponentiated in the truncated basis. The exponents
    ``alpha X^2`` and ``beta P^2`` are unbounded, so the truncated product
    is not guaranteed to approach the exact operator as ``D`` grows.
    """
    D = _setup(p, tau, D, proj, allow_zero=True)
    scalar, factors = bch_factors(p, tau, D)
    rhs = factors[0]
    for f in factors[1:]:
        rhs = rhs @ f
    return proj.norm(evolution_op(p, tau, D) - scalar * rhs) if tau > 0 else proj.norm(rhs - rhs.identity())


def evolve_via_factorization(p: OscParams, tau: float, D: int, state) -> np.ndarray:
    """Apply the factorised evolution operator to a number-basis vector, right to left."""
    _require_oscillator(p)
    D = _check_dim(D)
    if tau < 0:
        raise ArgumentError(f"tau must be non-negative, got {tau}")
    v = np.asarray(state, dtype=complex)
    if v.shape != (D,):
        raise ArgumentError(f"state must have shape ({D},), got {v.shape}")
    if tau == 0:
        return v.copy()
    scalar, factors = bch_factors(p, tau, D)
    for f in reversed(factors):
        v = f.matrix @ v
    return scalar * v


def _spin_matrices(j2):
    # spin-j generators with 2j = j2, basis m = j, j-1, ..., -j
    m = 0.5 * j2 - np.arange(j2 + 1)
    lz = np.diag(m).astype(complex)
    raise_ = np.diag(np.sqrt((0.5 * j2 - m[1:]) * (0.5 * j2 + m[1:] + 1)), 1).astype(complex)
    return lz, raise_, raise_.T.copy()


def bch_group_residual(p: OscParams, tau: float, spin: float = 2.0, middle_sign: int = 1) -> float:
    """The factorisation checked in a faithful finite-dimensional representation.

    With ``L+ = X^2 / 2``, ``L- = P^2 / 2 hbar^2`` and
    ``L3 = (i / 2 hbar) X P + 1/4`` the brackets close as
    ``[L+, L-] = 2 L3``, ``[L3, L+-] = +-L+-``. In those generators
    ``H = (hbar^2 / m) L- + m omega^2 L+`` and ``P X = -2 i hbar (L3 + 1/4)``,
    so the factorisation becomes an identity between group elements. It is
    tested here in the spin-``spin`` representation, where every exponential
    is an honest finite matrix. ``middle_sign=-1`` flips the sign of the
    middle exponent, for comparison. Returns the max-norm of the difference.
    """
    _require_oscillator(p)
    j2 = round(2 * spin)
    if j2 < 1 or abs(j2 - 2 * spin) > 1e-12:
        raise ArgumentError(f"spin must be a positive multiple of 1/2, got {spin}")
    if middle_sign not in (1, -1):
        raise ArgumentError("middle_sign must be +1 or -1")
    l3, lp, lm = _spin_matrices(j2)
    alpha, beta = bch_coefficients(p)
    hb = p.hbar
    lhs = _expm(-1j * tau * ((hb / p.m) * lm + (p.m * p.omega**2 / hb) * lp))
    # exp(-alpha X^2) = exp(-2 alpha L+), exp(-beta P^2) = exp(-2 beta hbar^2 L-);
    # the 1/4 in P X cancels the scalar exp(i omega tau / 2)
    px_coeff = middle_sign * p.omega * tau / hb * (-2j * hb)
    rhs = (
        _expm(-2 * alpha * lp)
        @ _expm(-2 * beta * hb**2 * lm)
        @ _expm(px_coeff * l3)
        @ _expm(2 * beta * hb**2 * lm)
        @ _expm(2 * alpha * lp)
    )
    if middle_sign == -1:
        rhs = rhs * cmath.exp(1j * p.omega * tau)
    return float(np.max(np.abs(lhs - rhs)))


def _gaussian_after_factors(p, tau, a, n):
    # psi = n exp(-a x^2 / 2); apply F5 ... F1 and the scalar
    alpha, beta = bch_coefficients(p)
    hb = p.hbar

    def gauss_x2(a, n, c):  # exp(c X^2)
        return a - 2 * c, n

    def gauss_p2(a, n, c):  # exp(c P^2) = exp(-c hbar^2 d^2/dx^2)
        f = 1 - 2 * c * hb**2 * a
        return a / f, n / cmath.sqrt(f)

    def gauss_px(a, n, c):  # exp(c P X) = exp(-i hbar c (x d/dx + 1))
        lam = -1j * hb * c
        return a * cmath.exp(2 * lam), n * cmath.exp(lam)

    a, n = gauss_x2(a, n, alpha)
    a, n = gauss_p2(a, n, beta)
    a, n = gauss_px(a, n, p.omega * tau / hb)
    a, n = gauss_p2(a, n, -beta)
    a, n = gauss_x2(a, n, -alpha)
    return a, n * cmath.exp(0.5j * p.omega * tau)


def _gaussian_exact(p, tau, a, n):
    k = p.m * p.omega / p.hbar
    c, s = math.cos(p.omega * tau), math.sin(p.omega * tau)
    return k * (a * c + 1j * k * s) / (k * c + 1j * a * s), n / cmath.sqrt(c + 1j * (a / k) * s)


def bch_gaussian_residual(p: OscParams, tau: float, widths=(0.5, 0.8, 1.25, 2.0)) -> float:
    """The factorisation applied to Gaussians ``exp(-x^2 / 2 w^2)`` by exact rules.

    Each factor maps a Gaussian to a Gaussian, so the product can be
    tracked through its width and amplitude without any basis. The result
    is compared with the exact evolution of the same Gaussian. Returns the
    largest relative defect over ``widths``.
    """
    _require_oscillator(p)
    worst = 0.0
    for w in widths:
        a0 = 1.0 / w**2
        a1, n1 = _gaussian_after_factors(p, tau, a0, 1.0)
        a2, n2 = _gaussian_exact(p, tau, a0, 1.0)
        worst = max(worst, abs(a1 - a2) / abs(a2), abs(n1 - n2) / abs(n2))
    return worst


def _expand_gaussian(p, D, width, scale=1.0, amplitude=1.0):
    # c_n = <phi_n | amplitude * g(x / scale)>, g the normalised Gaussian of the given width
    kappa = p.m * p.omega / p.hbar
    w = width * scale
    curvature = 0.5 * (kappa + 1.0 / w**2)
    rule = quadrature_rule(GAUSS_HERMITE, max(2 * D + 40, 120))
    norm = (math.pi * width**2) ** -0.25

    def integrand(x):
        return _eigen_table(D, x, kappa) * (amplitude * norm * np.exp(-0.5 * (x / w) ** 2))

    coeffs = np.empty(D)
    step = 1.0 / math.sqrt(curvature)
    u = rule.nodes[rule.scaled_weights > 0]
    wts = rule.scaled_weights[rule.scaled_weights > 0]
    coeffs[:] = step * (integrand(step * u) @ wts)
    target_norm2 = amplitude**2 * scale
    deficit = target_norm2 - float(np.sum(coeffs**2))
    if deficit > 1e-6 * target_norm2:
        raise ResolutionError(
            f"Gaussian of width {w:.3g} leaks out of the D={D} basis (norm deficit {deficit:.3g})"
        )
    return coeffs.astype(complex)


def dilation_op(p: OscParams, gamma: float, D: int) -> FockOperator:
    """``exp(-i gamma P X / hbar)`` in the truncated basis."""
    x, pm = position_op(p, D), momentum_op(p, D)
    return mat_exp((-1j * gamma / p.hbar) * (pm @ x))


def dilation_check(p: OscParams, gamma: float, D: int, packet_width: float) -> float:
    """Distance between the dilated packet and ``exp(-gamma) psi(exp(-gamma) x)``.

    A centred normalised Gaussian of width ``packet_width`` is expanded in
    the ``D`` lowest eigenstates, ``exp(-i gamma P X / hbar)`` is applied, and
    the result is compared (Euclidean vector norm) with the expansion of the
    analytically dilated Gaussian. Raises :class:`ResolutionError` if either
    Gaussian is not captured by the basis to within ``1e-6`` in squared norm.
    """
    _require_oscillator(p)
    D = _check_dim(D)
    if abs(gamma) > 0.5:
        raise ArgumentError(f"|gamma| must be <= 0.5, got {gamma}")
    if not packet_width > 0:
        raise ArgumentError("packet_width must be positive")
    psi = _expand_gaussian(p, D, packet_width)
    target = _expand_gaussian(p, D, packet_width, scale=math.exp(gamma), amplitude=math.exp(-gamma))
    image = dilation_op(p, gamma, D).matrix @ psi
    return float(np.linalg.norm(image - target))


def dilation_group_residual(p: OscParams, gamma1: float, gamma2: float, D: int, packet_width: float) -> float:
    """``|| E(g1) E(g2) psi - E(g1 + g2) psi ||`` for the dilation ``E`` and a Gaussian ``psi``."""
    _require_oscillator(p)
    D = _check_dim(D)
    psi = _expand_gaussian(p, D, packet_width)
    e1, e2 = dilation_op(p, gamma1, D).matrix, dilation_op(p, gamma2, D).matrix
    e12 = dilation_op(p, gamma1 + gamma2, D).matrix
    return float(np.linalg.norm(e1 @ (e2 @ psi) - e12 @ psi))


def lie_generators(p: OscParams, D: int):
    """``(L+, L-, L3)`` built from the truncated X and P, with ``d/dx = i P / hbar``."""
    x, pm = position_op(p, D), momentum_op(p, D)
    lp = 0.5 * (x @ x)
    lm = (0.5 / p.hbar**2) * (pm @ pm)
    l3 = (0.5j / p.hbar) * (x @ pm) + 0.25 * x.identity()
    return lp, lm, l3


def lie_algebra_residual(p: OscParams, D: int, proj: InteriorProjection) -> tuple[float, float, float]:
    """Interior defects of ``[L+, L-] = 2 L3``, ``[L3, L+] = L+`` and ``[L3, L-] = -L-``."""
    D = _setup(p, 1.0, D, proj)
    lp, lm, l3 = lie_generators(p, D)
    return (
        proj.norm(commutator(lp, lm) - 2 * l3),
        proj.norm(commutator(l3, lp) - lp),
        proj.norm(commutator(l3, lm) + lm),
    )


def hamiltonian_decomposition_residual(p: OscParams, D: int, proj: InteriorProjection) -> float:
    """Interior defect of ``H = (hbar^2 / m) L- + m omega^2 L+``."""
    D = _setup(p, 1.0, D, proj)
    lp, lm, _ = lie_generators(p, D)
    return proj.norm((p.hbar**2 / p.m) * lm + (p.m * p.omega**2) * lp - hamiltonian_op(p, D))


def hamiltonian_eigenvalues(p: OscParams, D: int) -> np.ndarray:
    """Ascending eigenvalues of the truncated Hamiltonian."""
    return np.linalg.eigvalsh(hamiltonian_op(p, D).matrix)
