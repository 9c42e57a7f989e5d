"""Cross-method verification suite.

Every item computes one non-negative residual from a :class:`RunConfig` and
compares it with a frozen threshold from ``thresholds.json``. The
``PROPLAB_THRESHOLDS`` environment variable, or an explicit path, selects an
alternative thresholds file.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np

from . import fock, kernel, pathint, spectral
from .core import GAUSS_HERMITE, Grid1D, OscParams, quadrature_rule
from .errors import ArgumentError, ConfigurationError, ProplabError
from .kernel import KernelQuery

THRESHOLDS_ENV = "PROPLAB_THRESHOLDS"


@dataclass(frozen=True)
class RunConfig:
    """Parameters and optional overrides shared by all suite items.

    ``None`` leaves an item at its own default resolution.
    """

    params: OscParams = field(default_factory=OscParams)
    epsilon: float | None = None
    terms: int | None = None
    D: int | None = None
    d: int | None = None
    quad_order: int | None = None
    slices: int | None = None
    grid_min: float | None = None
    grid_max: float | None = None
    grid_n: int | None = None

    def __post_init__(self):
        positive_ints = ("terms", "D", "d", "quad_order", "slices", "grid_n")
        for name in positive_ints:
            v = getattr(self, name)
            if v is not None and (int(v) != v or v < 1):
                raise ConfigurationError(f"{name} must be a positive integer, got {v}")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ConfigurationError(f"epsilon must be positive, got {self.epsilon}")
        if self.D is not None and self.D < 2:
            raise ConfigurationError("D must be at least 2")
        if self.d is not None and self.D is not None and 2 * self.d > self.D:
            raise ConfigurationError(f"d={self.d} exceeds D/2 for D={self.D}")
        if self.slices is not None and self.slices > pathint.MAX_NUMERIC_SLICES and self.grid_n is not None:
            raise ConfigurationError(f"chain_numeric handles at most {pathint.MAX_NUMERIC_SLICES} slices")
        lo, hi = self.grid_min, self.grid_max
        if lo is not None and hi is not None and not lo < hi:
            raise ConfigurationError("grid_min must be below grid_max")
        if self.grid_n is not None and self.grid_n < 2:
            raise ConfigurationError("grid_n must be at least 2")

    def get(self, name, default):
        v = getattr(self, name)
        return default if v is None else v

    def echo(self) -> dict:
        out = asdict(self)
        out["params"] = asdict(self.params)
        return out


def _nat(cfg):
    # the acceptance configurations are stated in natural units
    return cfg.params


def _proj(cfg, D):
    # default interior block: 20, or half the basis when that is smaller
    return fock.InteriorProjection(cfg.get("d", min(20, D // 2)))


# ---- kernel -----------------------------------------------------------------

_ENDPOINTS = (-1.0, 0.0, 1.0)


def _spectral_agreement(cfg):
    p, eps, n = _nat(cfg), cfg.get("epsilon", 1e-3), cfg.get("terms", 120)
    worst = 0.0
    for tau in (0.5, 1.0):
        for x2 in _ENDPOINTS:
            for x1 in _ENDPOINTS:
                q = KernelQuery(x2, x1, tau, eps)
                k = kernel.propagator(p, q)
                s = spectral.spectral_kernel(p, q, spectral.SpectralConfig(n, eps))
                worst = max(worst, abs(k - s) / abs(k))
    return worst


def _f_identity(cfg):
    p, eps = _nat(cfg), cfg.get("epsilon", 1e-3)
    worst = 0.0
    for tau in (0.5, 1.0):
        for x2 in _ENDPOINTS:
            for x1 in _ENDPOINTS:
                k = kernel.propagator(p, KernelQuery(x2, x1, tau, eps))
                f = pathint.f_eval(p, x2, x1, p.omega * tau, eps)
                worst = max(worst, abs(k - f) / abs(k))
    return worst


def _gh(cfg, default):
    return quadrature_rule(GAUSS_HERMITE, cfg.get("quad_order", default))


def _composition(cfg):
    return kernel.composition_residual(_nat(cfg), 0.3, -0.2, 0.4, 0.4, cfg.get("epsilon", 1e-3), _gh(cfg, 200))


def _f_compose(cfg):
    return pathint.f_compose_residual(_nat(cfg), 0.3, -0.2, 0.4, 0.3, cfg.get("epsilon", 1e-3), _gh(cfg, 200))


def _phase_reconstruct(cfg):
    p = _nat(cfg)
    worst = 0.0
    for x2, x1 in ((0.0, 0.0), (0.7, -0.4)):
        ratio = kernel.phase_reconstruct(p, x2, x1, 0.5, 1.0, 64)
        k0 = kernel.propagator(p, KernelQuery(x2, x1, 0.5))
        k1 = kernel.propagator(p, KernelQuery(x2, x1, 1.0))
        worst = max(worst, abs(ratio * k0 - k1) / abs(k1))
    return worst


def _hamiltonian_symmetry(cfg):
    p = _nat(cfg)
    pts = np.linspace(-1.0, 1.0, 5)
    worst = 0.0
    for x2 in pts:
        for x1 in pts:
            h = kernel.ordered_hamiltonian(p, KernelQuery(x2, x1, 0.8))
            g = kernel.ordered_hamiltonian(p, KernelQuery(x1, x2, 0.8))
            worst = max(worst, abs(h - g))
    return worst


def _schrodinger(cfg):
    return kernel.schrodinger_residual(_nat(cfg), KernelQuery(0.7, -0.4, 0.9), 1e-4, 1e-4)


def _schrodinger_order(cfg):
    p, q = _nat(cfg), KernelQuery(0.7, -0.4, 0.9)
    r1 = kernel.schrodinger_residual(p, q, 1e-2, 1e-2)
    r2 = kernel.schrodinger_residual(p, q, 5e-3, 5e-3)
    return abs(r1 / r2 - 4.0)


# ---- fock -------------------------------------------------------------------

_WT = (0.3, 0.7, 0.5 * math.pi)


def _heisenberg(cfg):
    p, D = _nat(cfg), cfg.get("D", 80)
    return max(max(fock.heisenberg_residual(p, wt / p.omega, D, _proj(cfg, D))) for wt in _WT)


def _unequal_time(cfg):
    p, D = _nat(cfg), cfg.get("D", 80)
    return max(fock.unequal_time_commutator(p, wt / p.omega, D, _proj(cfg, D)) for wt in _WT)


def _canonical(cfg):
    p, D = _nat(cfg), cfg.get("D", 80)
    return fock.canonical_commutator_residual(p, D, _proj(cfg, D))


def _bch(cfg):
    p, D = _nat(cfg), cfg.get("D", 60)
    return fock.bch_factorization_residual(p, 0.1 / p.omega, D, _proj(cfg, D))


def _bch_trend(cfg):
    # largest ratio r(2D) / r(D) over D = 40, 80, 160; below 1 means strictly decreasing
    p = _nat(cfg)
    r = [fock.bch_factorization_residual(p, 0.1 / p.omega, D, _proj(cfg, D)) for D in (40, 80, 160)]
    return max(r[1] / r[0], r[2] / r[1])


def _bch_group(cfg):
    p = _nat(cfg)
    return max(fock.bch_group_residual(p, wt / p.omega, spin) for wt in (0.1, 0.7, 2.0) for spin in (0.5, 2.0, 7.5))


def _bch_gaussian(cfg):
    p = _nat(cfg)
    return max(fock.bch_gaussian_residual(p, wt / p.omega) for wt in (0.1, 0.7, 1.3))


def _dilation(cfg):
    return fock.dilation_check(_nat(cfg), 0.2, cfg.get("D", 100), 1.0)


def _dilation_group(cfg):
    return fock.dilation_group_residual(_nat(cfg), 0.2, 0.15, cfg.get("D", 100), 1.0)


def _lie(cfg):
    p, D = _nat(cfg), cfg.get("D", 60)
    return max(fock.lie_algebra_residual(p, D, _proj(cfg, D)))


def _hamiltonian_decomposition(cfg):
    p, D = _nat(cfg), cfg.get("D", 60)
    return fock.hamiltonian_decomposition_residual(p, D, _proj(cfg, D))


def _energy(cfg):
    p, D = _nat(cfg), cfg.get("D", 80)
    n = np.arange(21)
    levels = fock.hamiltonian_eigenvalues(p, D)[:21]
    return float(np.max(np.abs(levels - np.array([spectral.energy(k, p) for k in n]))))


# ---- pathint ----------------------------------------------------------------


def _chain_exact(cfg):
    p = _nat(cfg)
    slicing = pathint.TimeSlicing.uniform(1.0 / p.omega, cfg.get("slices", 1000))
    worst = 0.0
    for x2, x1 in ((0.3, -0.2), (1.0, -1.0)):
        k = kernel.propagator(p, KernelQuery(x2, x1, 1.0 / p.omega))
        worst = max(worst, abs(pathint.chain_exact(p, x2, x1, slicing) - k) / abs(k))
    return worst


def _chain_numeric(cfg):
    p = _nat(cfg)
    n = cfg.get("slices", 3)
    if n > pathint.MAX_NUMERIC_SLICES:
        n = 3
    slicing = pathint.TimeSlicing.uniform(0.3 / p.omega, n)
    grid = Grid1D(cfg.get("grid_min", -8.0), cfg.get("grid_max", 8.0), cfg.get("grid_n", 801))
    exact = pathint.chain_exact(p, 0.2, -0.1, slicing)
    numeric = pathint.chain_numeric(p, 0.2, -0.1, slicing, grid, cfg.get("epsilon", 1e-2))
    return abs(numeric - exact) / abs(exact)


# ---- spectral ---------------------------------------------------------------

_BETAS = (0.25, 0.5, 1.0, 2.0, 4.0)


def _mehler(cfg):
    n = cfg.get("terms", 80)
    return max(
        spectral.mehler_residual(x, y, z, n)
        for x in (-0.8, 0.1, 0.9)
        for y in (-0.5, 0.3, 1.0)
        for z in (-0.5, 0.2, 0.5)
    )


def _partition_spectral(cfg):
    p, n = _nat(cfg), cfg.get("terms", 200)
    return max(
        abs(spectral.partition_closed(p, b / p.omega / p.hbar) - spectral.partition_spectral(p, b / p.omega / p.hbar, n))
        for b in _BETAS
    )


def _partition_trace(cfg):
    p = _nat(cfg)
    rule = _gh(cfg, 80)
    return max(
        abs(spectral.partition_closed(p, b / p.omega / p.hbar) - spectral.partition_trace(p, b / p.omega / p.hbar, rule))
        for b in _BETAS
    )


def _euclidean_spectral(cfg):
    p, n = _nat(cfg), cfg.get("terms", 100)
    pts = np.linspace(-1.0, 1.0, 5)
    worst = 0.0
    for x2 in pts:
        for x1 in pts:
            k = kernel.propagator_euclidean(p, x2, x1, 1.0)
            s = spectral.spectral_kernel_euclidean(p, x2, x1, 1.0, n)
            worst = max(worst, abs(k - s) / k)
    return worst


SUITE = {
    "fock.bch": (_bch, "factorised evolution operator vs exp(-i H tau / hbar), D=60, d=20"),
    "fock.bch_gaussian": (_bch_gaussian, "factorisation applied to Gaussians by exact width rules"),
    "fock.bch_group": (_bch_group, "factorisation as a group identity in spin representations"),
    "fock.bch_trend": (_bch_trend, "ratio r(2D)/r(D) of the factorisation residual, D=40..160"),
    "fock.canonical": (_canonical, "interior [X, P] - i hbar"),
    "fock.dilation": (_dilation, "dilation of a unit Gaussian, gamma=0.2, D=100"),
    "fock.dilation_group": (_dilation_group, "one-parameter group property of the dilation"),
    "fock.energy": (_energy, "lowest 21 eigenvalues of H at D=80 vs (n + 1/2) hbar omega"),
    "fock.hamiltonian_decomposition": (_hamiltonian_decomposition, "H = (hbar^2/m) L- + m omega^2 L+"),
    "fock.heisenberg": (_heisenberg, "Heisenberg solutions for X(tau), P(tau), D=80, d=20"),
    "fock.lie": (_lie, "sl(2) brackets of L+, L-, L3, D=60, d=20"),
    "fock.unequal_time": (_unequal_time, "[X(0), X(tau)] = (i hbar / m omega) sin(omega tau)"),
    "kernel.composition": (_composition, "semigroup property, GH(200), epsilon=1e-3"),
    "kernel.f_identity": (_f_identity, "F(x2, x1; omega tau) vs the closed-form kernel"),
    "kernel.hamiltonian_symmetry": (_hamiltonian_symmetry, "ordered Hamiltonian symmetric in its endpoints"),
    "kernel.phase_reconstruct": (_phase_reconstruct, "kernel ratio rebuilt from the ordered Hamiltonian"),
    "kernel.schrodinger": (_schrodinger, "Schroedinger residual at h=1e-4"),
    "kernel.schrodinger_order": (_schrodinger_order, "|r(h)/r(h/2) - 4| at h=1e-2"),
    "kernel.spectral_agreement": (_spectral_agreement, "spectral sum (120 terms) vs closed form"),
    "pathint.chain_exact": (_chain_exact, "F chain with N=1000 slices vs the kernel"),
    "pathint.chain_numeric": (_chain_numeric, "grid convolution (N=3) vs F chain"),
    "pathint.f_compose": (_f_compose, "angle addition of F, GH(200), epsilon=1e-3"),
    "spectral.euclidean": (_euclidean_spectral, "Euclidean kernel vs its spectral sum on a 5x5 grid"),
    "spectral.mehler": (_mehler, "Mehler's formula on a 3x3x3 probe set, 80 terms"),
    "spectral.partition_spectral": (_partition_spectral, "Z closed form vs sum over levels"),
    "spectral.partition_trace": (_partition_trace, "Z closed form vs trace quadrature, GH(80)"),
}


def load_thresholds(path: str | None = None) -> dict:
    """Thresholds keyed by item name.

    Order of precedence: ``path``, then ``$PROPLAB_THRESHOLDS``, then the
    packaged defaults.
    """
    path = path or os.environ.get(THRESHOLDS_ENV)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigurationError(f"cannot read thresholds file {path!r}: {exc}") from exc
    else:
        data = json.loads(resources.files(__package__).joinpath("thresholds.json").read_text(encoding="utf-8"))
    table = data.get("thresholds", data) if isinstance(data, dict) else data
    if not isinstance(table, dict) or not all(isinstance(v, (int, float)) for v in table.values()):
        raise ConfigurationError("thresholds file must map item names to numbers")
    return {k: float(v) for k, v in table.items()}


def run_item(name: str, cfg: RunConfig, thresholds: dict) -> dict:
    """Evaluate one item; module errors are reported, not raised."""
    if name not in SUITE:
        raise ArgumentError(f"unknown suite item {name!r}")
    if name not in thresholds:
        raise ConfigurationError(f"no threshold for {name!r}")
    func, description = SUITE[name]
    entry = {"name": name, "description": description, "threshold": thresholds[name]}
    try:
        value = float(func(cfg))
    except ProplabError as exc:
        entry.update(value=None, passed=False, error={"class": exc.error_class, "message": str(exc)})
        return entry
    entry.update(value=value, passed=bool(math.isfinite(value) and value <= thresholds[name]))
    return entry


def run_suite(cfg: RunConfig, only=None, thresholds: dict | None = None) -> list[dict]:
    """Run the selected items (all by default) in name order."""
    thresholds = load_thresholds() if thresholds is None else thresholds
    names = sorted(SUITE) if not only else sorted(set(only))
    unknown = [n for n in names if n not in SUITE]
    if unknown:
        raise ArgumentError(f"unknown suite item(s): {', '.join(unknown)}")
    return [run_item(n, cfg, thresholds) for n in names]

