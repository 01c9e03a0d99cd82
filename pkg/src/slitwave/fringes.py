"""Fringe cross-sections at fixed propagation distance."""

from __future__ import annotations

import numpy as np

from .farfield import FringeProfile, Maximum, locate_maxima
from .params import PlaneOutOfRange, ScenarioParams
from .wavefield import FieldGrid, density


def _normalize(values: np.ndarray) -> np.ndarray:
    peak = float(np.max(values))
    return values / peak if peak > 0 else np.zeros_like(values)


def _profile(z, xs, values) -> FringeProfile:
    values = np.clip(_normalize(np.asarray(values, dtype=float)), 0.0, 1.0)
    bare = FringeProfile(float(z), np.asarray(xs, dtype=float), values)
    maxima = tuple(locate_maxima(bare)) if values.size >= 3 else ()
    return FringeProfile(bare.z, bare.xs, bare.values, maxima)


def extract_fringe(source, z: float, xs=None, z_range: tuple[float, float] | None = None) -> FringeProfile:
    """Max-normalised density along x at plane ``z`` with its maxima located.

    ``source`` is either a FieldGrid (rows are linearly interpolated in z) or
    ScenarioParams, in which case the analytic density is sampled at ``xs``.
    """
    if isinstance(source, FieldGrid):
        zs = source.zs
        if not zs[0] <= z <= zs[-1]:
            raise PlaneOutOfRange(f"z={z:g} outside grid range [{zs[0]:g}, {zs[-1]:g}]")
        if source.nz == 1:
            row = source.samples[0]
        else:
            k = min(int(np.searchsorted(zs, z, side="right")) - 1, source.nz - 2)
            t = (z - zs[k]) / (zs[k + 1] - zs[k])
            row = (1.0 - t) * source.samples[k] + t * source.samples[k + 1]
        return _profile(z, source.xs, row)

    if not isinstance(source, ScenarioParams):
        raise TypeError("source must be a FieldGrid or ScenarioParams")
    if xs is None:
        raise ValueError("xs is required when sampling from ScenarioParams")
    lo, hi = z_range if z_range is not None else (0.0, np.inf)
    if z < 0 or not lo <= z <= hi:
        raise PlaneOutOfRange(f"z={z:g} outside simulated range [{lo:g}, {hi:g}]")
    return _profile(z, xs, density(source, np.asarray(xs, dtype=float), z))


def principal_positions(profile: FringeProfile, interior: bool = True) -> np.ndarray:
    """x positions of principal maxima, optionally dropping the outermost two."""
    xs = np.array(sorted(m.x for m in profile.maxima if m.kind == "principal"))
    return xs[1:-1] if interior and xs.size > 2 else xs


def half_period_offsets(reference: np.ndarray, shifted: np.ndarray) -> np.ndarray:
    """Distance from each ``shifted`` maximum to its nearest ``reference`` maximum.

    Only shifted maxima lying between the outermost reference maxima are
    measured; outside that span the nearest-neighbour distance is not an offset.
    """
    reference = np.sort(np.asarray(reference, dtype=float))
    shifted = np.asarray(shifted, dtype=float)
    inside = shifted[(shifted >= reference[0]) & (shifted <= reference[-1])] if reference.size else shifted[:0]
    return np.array([np.min(np.abs(reference - x)) for x in inside])


__all__ = ["FringeProfile", "Maximum", "extract_fringe", "principal_positions", "half_period_offsets"]
