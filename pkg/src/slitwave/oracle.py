"""Brute-force validators that share no code path with the closed forms.

``convolve_kernel`` integrates the free-particle kernel across a Gaussian
slit numerically (source at infinity, so only the slit-to-screen kernel
carries a phase):

    psi(x1) ~ integral exp(i pi (x1 - x0 - xi)^2 / (lambda z)) G(xi) dxi,
    G(xi)   = exp(-xi^2 / (2 b^2)),   b = sigma * sqrt(2)

and ``fd_gradient`` differentiates the superposition by central differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .params import NODE_EPS, ConfigError, NodeSingularity, QuadratureUnconverged, ScenarioParams
from .wavefield import _scalar_or_array, superpose

TRAPEZOID = "trapezoid"
GAUSS_LEGENDRE = "gauss-legendre"
#: nodes per Gauss-Legendre panel
PANEL_ORDER = 16
CONVERGENCE_RTOL = 1e-6


@dataclass(frozen=True)
class QuadratureSpec:
    half_range: float
    n_points: int = 4096
    scheme: str = GAUSS_LEGENDRE

    def __post_init__(self):
        if not self.half_range > 0:
            raise ConfigError("half_range must be positive")
        if self.n_points < 2:
            raise ConfigError("n_points must be at least 2")
        if self.scheme not in (TRAPEZOID, GAUSS_LEGENDRE):
            raise ConfigError(f"unknown quadrature scheme {self.scheme!r}")

    @classmethod
    def for_slit(cls, params: ScenarioParams, n_points: int = 4096, scheme: str = GAUSS_LEGENDRE, tails: float = 8.0):
        """Span of ``tails`` form-factor widths b (at least the 6 b minimum)."""
        return cls(max(tails, 6.0) * form_factor_width(params), n_points, scheme)

    def doubled(self) -> "QuadratureSpec":
        return QuadratureSpec(self.half_range, 2 * self.n_points, self.scheme)


def form_factor_width(params: ScenarioParams) -> float:
    return params.sigma * math.sqrt(2.0)


def form_factor(xi, b: float):
    xi = np.asarray(xi, dtype=float)
    return _scalar_or_array(np.exp(-xi * xi / (2.0 * b * b)))


@lru_cache(maxsize=8)
def _legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


def nodes_weights(spec: QuadratureSpec) -> tuple[np.ndarray, np.ndarray]:
    """Abscissae and weights on [-half_range, half_range]."""
    a, b = -spec.half_range, spec.half_range
    if spec.scheme == TRAPEZOID:
        xs = np.linspace(a, b, spec.n_points)
        w = np.full(spec.n_points, (b - a) / (spec.n_points - 1))
        w[0] = w[-1] = w[0] / 2.0
        return xs, w
    panels = max(1, spec.n_points // PANEL_ORDER)
    t, wt = _legendre(PANEL_ORDER)
    edges = np.linspace(a, b, panels + 1)
    half = np.diff(edges)[:, None] / 2.0
    mid = (edges[:-1] + edges[1:])[:, None] / 2.0
    return (mid + half * t).ravel(), (half * wt).ravel()


def integrate(f, spec: QuadratureSpec):
    xs, w = nodes_weights(spec)
    return np.sum(w * f(xs))


def gaussian_moment(b: float, power: int, spec: QuadratureSpec) -> float:
    """Numerical integral of xi**power * G(xi) over the spec's range."""
    return float(integrate(lambda xi: xi**power * np.exp(-xi * xi / (2.0 * b * b)), spec))


def _kernel_integral(params, spec, x1, z, x0):
    b = form_factor_width(params)
    phase = math.pi / (params.wavelength * z)

    def integrand(xi):
        r = x1 - x0 - xi
        return np.exp(1j * phase * r * r) * np.exp(-xi * xi / (2.0 * b * b))

    return complex(integrate(integrand, spec))


def convolve_kernel(params: ScenarioParams, spec: QuadratureSpec, x1: float, z: float, slit_index: int = 0) -> complex:
    """Path-integral amplitude at (x1, z) behind one slit, up to a global constant.

    Raises QuadratureUnconverged when doubling ``n_points`` moves the result
    by more than 1e-6 relative.
    """
    if z <= 0:
        raise ValueError("z must be positive")
    x0 = params.slit_center(slit_index)
    coarse = _kernel_integral(params, spec, x1, z, x0)
    fine = _kernel_integral(params, spec.doubled(), x1, z, x0)
    if abs(fine - coarse) > CONVERGENCE_RTOL * abs(fine):
        raise QuadratureUnconverged(f"relative change {abs(fine - coarse) / abs(fine):.3g} on doubling n_points")
    return fine


def fd_gradient(params: ScenarioParams, x, z, h: float, node_eps: float = NODE_EPS):
    """(Psi(x+h) - Psi(x-h)) / (2 h Psi(x))."""
    if h <= 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=float)
    centre = np.asarray(superpose(params, x, z))
    if np.any(np.abs(centre) ** 2 < node_eps):
        raise NodeSingularity("finite-difference log-derivative at a node")
    plus = np.asarray(superpose(params, x + h, z))
    minus = np.asarray(superpose(params, x - h, z))
    return _scalar_or_array((plus - minus) / (2.0 * h * centre))
