"""Closed-form Gaussian-slit packets and their N-slit superposition.

A slit centred at ``x0`` and illuminated by a plane wave produces, at
distance ``z`` behind the grating, the packet

    psi(x, z) = D(z)**-0.5 * exp(-(x - x0)**2 / (4 sigma**2 D(z)))
    D(z)      = 1 + i z lambda / (4 pi sigma**2)

Global factors common to every slit (normalisation, constant phase, the
carrier plane wave) are dropped; they cancel in densities and in the
log-derivative that drives the trajectories.

Every function broadcasts over array-valued ``x`` and ``z``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .params import NODE_EPS, ConfigError, NodeSingularity, ScenarioParams
from .summation import ordered_sum


def _scalar_or_array(value):
    value = np.asarray(value)
    return value.item() if value.ndim == 0 else value


def spreading_factor(params: ScenarioParams, z):
    """D(z) = 1 + i z lambda / (4 pi sigma^2)."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("z must be non-negative")
    return 1.0 + 1j * params.spreading_rate * z


def spreading(params: ScenarioParams, z):
    """Complex spreading sigma * D(z); its modulus is the instantaneous width."""
    return _scalar_or_array(params.sigma * spreading_factor(params, z))


def width(params: ScenarioParams, z):
    """Instantaneous Gaussian width sigma * sqrt(1 + (z lambda / 4 pi sigma^2)^2)."""
    u = params.spreading_rate * np.asarray(z, dtype=float)
    return _scalar_or_array(params.sigma * np.sqrt(1.0 + u * u))


def _packet_terms(params: ScenarioParams, x, z, centers=None):
    """Per-slit packet values, stacked along a leading slit axis.

    The packet of the slit nearest to ``x`` has the largest modulus, so it is
    factored out: ``terms`` hold each packet divided by that reference packet
    and ``lead`` is the reference packet itself. Only phase differences
    between slits are then exponentiated, which keeps far-field phases
    (tens of millions of radians at metre distances) from swamping the
    interference term with round-off, and keeps the scaled terms from
    underflowing where the packets individually do.
    """
    x = np.asarray(x, dtype=float)
    D = spreading_factor(params, z)
    centers = params.slit_centers() if centers is None else np.asarray(centers, dtype=float)
    nearest = np.clip(np.rint((x - centers[0]) / params.slit_pitch), 0, len(centers) - 1).astype(int)
    ref = centers[nearest]
    shape = (len(centers),) + (1,) * np.broadcast(x, D).ndim
    column = np.reshape(centers, shape)
    offsets = x - column
    shift = x - ref
    rate = -1.0 / (4.0 * params.sigma**2 * D)
    # (x - x0)^2 - (x - ref)^2 = (ref - x0) (2x - x0 - ref)
    terms = np.exp(((ref - column) * (offsets + shift)) * rate)
    lead = _Lead(shift * shift, rate, D)
    return terms, offsets, D, lead


class _Lead:
    """Reference packet exp(s^2 rate) / sqrt(D), with its modulus kept separate."""

    def __init__(self, shift_sq, rate, D):
        self.exponent = shift_sq * rate
        self.D = D

    def value(self):
        return np.exp(self.exponent) / np.sqrt(self.D)

    def modulus_sq(self):
        return np.exp(2.0 * self.exponent.real) / np.abs(self.D)


def packet(params: ScenarioParams, slit_index: int, x, z):
    if not 0 <= slit_index < params.slit_count:
        raise IndexError(f"slit_index {slit_index} outside 0..{params.slit_count - 1}")
    _, _, _, lead = _packet_terms(params, x, z, centers=[params.slit_center(slit_index)])
    return _scalar_or_array(lead.value())


def superpose(params: ScenarioParams, x, z):
    """Mean of the N slit packets at (x, z)."""
    terms, _, _, lead = _packet_terms(params, x, z)
    return _scalar_or_array(lead.value() * ordered_sum(terms) / params.slit_count)


def density(params: ScenarioParams, x, z):
    terms, _, _, lead = _packet_terms(params, x, z)
    total = ordered_sum(terms)
    return _scalar_or_array(lead.modulus_sq() * (total.real**2 + total.imag**2) / params.slit_count**2)


def log_derivative(params: ScenarioParams, x, z, second: bool = False):
    """Return ``(dPsi/dx / Psi, |Psi|^2)`` without node checks.

    The derivative is analytic: each packet contributes
    ``-(x - x0) / (2 sigma^2 D)`` times itself. Where ``|Psi|^2`` is below
    the node threshold the first element is meaningless; callers decide.
    With ``second`` the tuple gains ``d2Psi/dx2 / Psi`` as a third element.
    """
    terms, offsets, D, lead = _packet_terms(params, x, z)
    total = ordered_sum(terms)
    weighted = ordered_sum(terms * offsets)
    dens = lead.modulus_sq() * (total.real**2 + total.imag**2) / params.slit_count**2
    c = 1.0 / (2.0 * params.sigma**2 * D)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = -c * weighted / total
        if not second:
            return g, dens
        curv = c * (c * ordered_sum(terms * (offsets * offsets)) - total) / total
    return g, dens, curv


def gradient_log(params: ScenarioParams, x, z, node_eps: float = NODE_EPS):
    g, dens = log_derivative(params, x, z)
    if np.any(dens < node_eps):
        raise NodeSingularity(f"|Psi|^2 below {node_eps:g}: phase gradient undefined")
    return _scalar_or_array(g)


def quantum_potential(params: ScenarioParams, x, z, h: float, node_eps: float = NODE_EPS):
    """Quantum potential in units of hbar^2/(2m), per nm^2.

    Evaluates -[rho''/(2 rho) - (rho'/(2 rho))^2] with x-derivatives taken
    by a three-point central stencil of spacing ``h`` on the analytic density.
    """
    if h <= 0:
        raise ValueError("stencil step h must be positive")
    x = np.asarray(x, dtype=float)
    lo, mid, hi = (np.asarray(density(params, x + s, z)) for s in (-h, 0.0, h))
    if np.any(np.minimum(np.minimum(lo, mid), hi) < node_eps):
        raise NodeSingularity("density at a stencil point is below the node threshold")
    d1 = (hi - lo) / (2.0 * h)
    d2 = (hi - 2.0 * mid + lo) / (h * h)
    return _scalar_or_array(-(d2 / (2.0 * mid) - (d1 / (2.0 * mid)) ** 2))


@dataclass(frozen=True)
class FieldGrid:
    """Samples over a uniform (x, z) lattice; ``samples[k, j]`` is at (xs[j], zs[k])."""

    x_min: float
    x_max: float
    z_min: float
    z_max: float
    samples: np.ndarray

    def __post_init__(self):
        if self.samples.ndim != 2 or self.samples.size == 0:
            raise ConfigError("grid samples must be a non-empty 2-D array")

    @property
    def nx(self) -> int:
        return self.samples.shape[1]

    @property
    def nz(self) -> int:
        return self.samples.shape[0]

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def zs(self) -> np.ndarray:
        return np.linspace(self.z_min, self.z_max, self.nz)

    def normalized(self) -> "FieldGrid":
        peak = float(np.max(self.samples))
        samples = self.samples / peak if peak > 0 else self.samples.copy()
        return FieldGrid(self.x_min, self.x_max, self.z_min, self.z_max, samples)


#: grid rows evaluated per vectorised block
ROW_BLOCK = 8


def _density_rows(args):
    params, xs, zs = args
    blocks = [
        np.asarray(density(params, xs[None, :], zs[k : k + ROW_BLOCK, None]))
        for k in range(0, len(zs), ROW_BLOCK)
    ]
    return np.concatenate(blocks)


def density_grid(
    params: ScenarioParams,
    x_range: tuple[float, float],
    z_range: tuple[float, float],
    nx: int,
    nz: int,
    workers: int = 1,
) -> FieldGrid:
    """Fill an ``nz x nx`` density grid, optionally across a process pool.

    Rows are computed independently, so the result is bit-identical for any
    worker count.
    """
    if nx < 1 or nz < 1:
        raise ConfigError("grid sizes must be positive")
    (x_min, x_max), (z_min, z_max) = x_range, z_range
    if z_min < 0 or z_max < z_min or x_max < x_min:
        raise ConfigError("grid extents must be ordered and z non-negative")
    xs = np.linspace(x_min, x_max, nx)
    zs = np.linspace(z_min, z_max, nz)
    if workers <= 1 or nz == 1:
        samples = _density_rows((params, xs, zs))
    else:
        chunks = np.array_split(zs, min(workers * 4, nz))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            samples = np.concatenate(list(pool.map(_density_rows, [(params, xs, c) for c in chunks if len(c)])))
    return FieldGrid(x_min, x_max, z_min, z_max, samples)


def normalized_cross_correlation(a, b) -> float:
    """Zero-lag Pearson correlation of two equally sampled profiles."""
    a = np.asarray(a, dtype=float) - np.mean(a)
    b = np.asarray(b, dtype=float) - np.mean(b)
    return float(np.dot(a, b) / math.sqrt(np.dot(a, a) * np.dot(b, b)))
