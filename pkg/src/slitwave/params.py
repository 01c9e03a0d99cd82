"""Scenario parameters and the error types shared across the package.

All lengths are in nanometres. Time never appears: propagation distance ``z``
plays the role of the evolution parameter and every formula is written in
terms of the wavelength, the slit geometry and ``z`` only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

#: squared-modulus threshold below which the wave function counts as a node
NODE_EPS = 1e-30


class SlitwaveError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(SlitwaveError, ValueError):
    """Invalid scenario, integrator or grid configuration."""


class NodeSingularity(SlitwaveError, ArithmeticError):
    """The wave function vanishes (to within the node threshold) at a point
    where a phase gradient or a log-derivative was requested."""


class EmptyProfile(SlitwaveError, ValueError):
    pass


class PlaneOutOfRange(SlitwaveError, ValueError):
    pass


class QuadratureUnconverged(SlitwaveError, ArithmeticError):
    pass


def default_sigma(slit_width: float) -> float:
    """Effective Gaussian half-width of a slit of metric width ``a``: a/(2*sqrt(2))."""
    return slit_width / (2.0 * math.sqrt(2.0))


@dataclass(frozen=True)
class ScenarioParams:
    """Immutable description of the beam and the grating.

    ``sigma`` defaults to ``slit_width / (2*sqrt(2))`` when left as ``None``.
    Slit ``n`` sits at ``(n - (N-1)/2) * slit_pitch`` so the grating is
    symmetric about ``x = 0``.
    """

    wavelength: float
    slit_count: int
    slit_pitch: float
    slit_width: float
    sigma: float | None = field(default=None)

    def __post_init__(self):
        if self.sigma is None:
            object.__setattr__(self, "sigma", default_sigma(self.slit_width))
        for name in ("wavelength", "slit_pitch", "slit_width", "sigma"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be a positive finite length, got {value!r}")
        if isinstance(self.slit_count, bool) or int(self.slit_count) != self.slit_count or self.slit_count < 1:
            raise ConfigError(f"slit_count must be a positive integer, got {self.slit_count!r}")
        object.__setattr__(self, "slit_count", int(self.slit_count))
        if self.slit_width > self.slit_pitch:
            raise ConfigError("slit_width must not exceed slit_pitch")

    @property
    def spreading_rate(self) -> float:
        """lambda / (4 pi sigma^2): imaginary part of D(z) per unit z, in 1/nm."""
        return self.wavelength / (4.0 * math.pi * self.sigma**2)

    def slit_center(self, n: int) -> float:
        return (n - (self.slit_count - 1) / 2.0) * self.slit_pitch

    def slit_centers(self) -> np.ndarray:
        n = np.arange(self.slit_count, dtype=float)
        return (n - (self.slit_count - 1) / 2.0) * self.slit_pitch

    def with_updates(self, **changes) -> "ScenarioParams":
        # a changed slit width re-derives sigma unless sigma is given too
        if "slit_width" in changes and "sigma" not in changes:
            changes["sigma"] = None
        return replace(self, **changes)


def talbot_length(params: ScenarioParams) -> float:
    """Self-imaging distance 2 d^2 / lambda."""
    return 2.0 * params.slit_pitch**2 / params.wavelength
