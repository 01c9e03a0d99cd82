"""Far-field intensity of an N-slit grating and fringe maximum detection.

Far from the grating the superposition reduces to a Gaussian envelope times
the grating function sin^2(N zeta/2) / sin^2(zeta/2), with

    zeta(x, z) = x d u / (2 sigma_z^2),   u = z lambda / (4 pi sigma^2)

The envelope is reported without the A^2/N^2 prefactor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .params import EmptyProfile, ScenarioParams
from .wavefield import _scalar_or_array, width

#: |zeta - 2 pi k| below which the grating function takes its limit N^2
SINGULARITY_WINDOW = 1e-6
#: maxima at or above this fraction of the profile peak count as principal
PRINCIPAL_FRACTION = 0.5


@dataclass(frozen=True)
class FarFieldPoint:
    x: float
    z: float
    zeta: float
    envelope: float
    intensity: float


class Maximum(NamedTuple):
    x: float
    intensity: float
    kind: str  # "principal" | "subsidiary"


@dataclass(frozen=True)
class FringeProfile:
    """Density cross-section at fixed ``z``, max-normalised to 1."""

    z: float
    xs: np.ndarray
    values: np.ndarray
    maxima: tuple[Maximum, ...] = ()


def _check_z(z):
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError("far-field quantities need z > 0")
    return z


def zeta(params: ScenarioParams, x, z):
    z = _check_z(z)
    u = params.spreading_rate * z
    sz = np.asarray(width(params, z))
    return _scalar_or_array(np.asarray(x, dtype=float) * params.slit_pitch * u / (2.0 * sz * sz))


def grating_factor(zeta_value, n: int):
    """sin^2(N zeta/2) / sin^2(zeta/2) with the removable singularities set to N^2."""
    zeta_value = np.asarray(zeta_value, dtype=float)
    offset = zeta_value - 2.0 * math.pi * np.round(zeta_value / (2.0 * math.pi))
    near = np.abs(offset) < SINGULARITY_WINDOW
    safe = np.where(near, 1.0, zeta_value)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.sin(n * safe / 2.0) ** 2 / np.sin(safe / 2.0) ** 2
    return _scalar_or_array(np.where(near, float(n * n), ratio))


def envelope(params: ScenarioParams, x, z):
    z = _check_z(z)
    sz = np.asarray(width(params, z))
    x = np.asarray(x, dtype=float)
    return _scalar_or_array(np.exp(-x * x / (2.0 * sz * sz)) / sz)


def intensity(params: ScenarioParams, x, z):
    return _scalar_or_array(
        np.asarray(envelope(params, x, z)) * np.asarray(grating_factor(zeta(params, x, z), params.slit_count))
    )


def far_field_point(params: ScenarioParams, x: float, z: float) -> FarFieldPoint:
    return FarFieldPoint(
        x=float(x),
        z=float(z),
        zeta=float(zeta(params, x, z)),
        envelope=float(envelope(params, x, z)),
        intensity=float(intensity(params, x, z)),
    )


def scale_fit(reference, model) -> float:
    """Least-squares scalar ``s`` minimising ``|reference - s * model|``."""
    reference = np.asarray(reference, dtype=float)
    model = np.asarray(model, dtype=float)
    return float(np.dot(reference, model) / np.dot(model, model))


def relative_l2(reference, model) -> float:
    """Relative L2 misfit after the best global scale on ``model``."""
    reference = np.asarray(reference, dtype=float)
    scaled = scale_fit(reference, model) * np.asarray(model, dtype=float)
    return float(np.linalg.norm(reference - scaled) / np.linalg.norm(reference))


def locate_maxima(profile: FringeProfile, principal_fraction: float = PRINCIPAL_FRACTION) -> list[Maximum]:
    """Interior local maxima of a sampled profile, classified by height.

    A sample is a maximum when it rises strictly from its left neighbour and
    does not fall below its right one, so flat plateaus report their left
    edge once and a constant profile reports nothing.
    """
    values = np.asarray(profile.values, dtype=float)
    if values.size < 3:
        raise EmptyProfile("need at least 3 samples to locate maxima")
    xs = np.asarray(profile.xs, dtype=float)
    mid = values[1:-1]
    idx = np.nonzero((mid > values[:-2]) & (mid >= values[2:]))[0] + 1
    # walk plateaus to make sure they actually come down again on the right
    keep = []
    for i in idx:
        j = i
        while j + 1 < values.size and values[j + 1] == values[i]:
            j += 1
        if j + 1 < values.size and values[j + 1] < values[i]:
            keep.append(i)
    peak = float(values.max())
    return [
        Maximum(float(xs[i]), float(values[i]), "principal" if values[i] >= principal_fraction * peak else "subsidiary")
        for i in keep
    ]


def subsidiary_counts(maxima: list[Maximum]) -> list[int]:
    """Number of subsidiary maxima between each pair of adjacent principal maxima."""
    counts, current, seen_principal = [], 0, False
    for m in sorted(maxima, key=lambda m: m.x):
        if m.kind == "principal":
            if seen_principal:
                counts.append(current)
            seen_principal, current = True, 0
        elif seen_principal:
            current += 1
    return counts
