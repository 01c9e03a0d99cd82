"""Bohmian trajectories x(z) behind the grating.

The guidance equation is integrated in the propagation distance ``z``:

    dx/dz = (lambda / 2 pi) * Im( dPsi/dx / Psi )

using an embedded Dormand-Prince 5(4) pair. A whole batch of launches is
advanced together with one step size per trajectory, which keeps large
ensembles cheap while every trajectory stays a pure function of its own
launch point.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .params import NODE_EPS, ConfigError, NodeSingularity, ScenarioParams
from .wavefield import _scalar_or_array, log_derivative

COMPLETED = "completed"
ABORTED_NODE = "aborted_node"
ABORTED_BOUNDS = "aborted_bounds"

# Dormand-Prince tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))

#: inflation of the propagated error estimate; the endpoint-averaged
#: linearisation can undershoot growth inside a step by tens of percent
ERROR_SAFETY = 2.0


@dataclass(frozen=True)
class IntegratorConfig:
    dz_init: float
    dz_min: float
    dz_max: float
    rel_tol: float = 1e-8
    node_eps: float = NODE_EPS

    def __post_init__(self):
        if not (0 < self.dz_min <= self.dz_init <= self.dz_max):
            raise ConfigError("need 0 < dz_min <= dz_init <= dz_max")
        if not self.rel_tol > 0:
            raise ConfigError("rel_tol must be positive")
        if not self.node_eps >= 0:
            raise ConfigError("node_eps must be non-negative")

    @classmethod
    def for_span(cls, span: float, rel_tol: float = 1e-8, node_eps: float = NODE_EPS) -> "IntegratorConfig":
        """Reasonable step bounds for integrating over a z-interval of length ``span``."""
        return cls(dz_init=span * 1e-4, dz_min=span * 1e-12, dz_max=span / 16, rel_tol=rel_tol, node_eps=node_eps)


class StepStats(NamedTuple):
    steps: int
    min_step: float
    max_step: float


@dataclass(frozen=True)
class Trajectory:
    """One Bohmian path; ``points[:, 0]`` is x and ``points[:, 1]`` is z (nm).

    ``error_estimate`` bounds the final-x error: embedded local error
    estimates carried forward through the linearised flow.
    """

    launch_x: float
    points: np.ndarray
    status: str
    step_stats: StepStats
    error_estimate: float

    @property
    def xs(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def zs(self) -> np.ndarray:
        return self.points[:, 1]

    def x_at(self, z: float) -> float:
        """x at a recorded plane ``z`` (exact match required)."""
        hits = np.nonzero(self.zs == z)[0]
        if hits.size == 0:
            raise KeyError(f"z={z!r} was not recorded")
        return float(self.xs[hits[0]])


def velocity_slope(params: ScenarioParams, x, z, node_eps: float = NODE_EPS):
    """dx/dz = v_x / v_z at (x, z)."""
    g, dens = log_derivative(params, x, z)
    if np.any(dens < node_eps):
        raise NodeSingularity("velocity field undefined at a wave-function node")
    return _scalar_or_array(params.wavelength / (2.0 * math.pi) * np.imag(g))


def _slope(params, x, z):
    g, dens = log_derivative(params, x, z)
    return params.wavelength / (2.0 * math.pi) * np.imag(g), dens


def _slope_and_jacobian(params, x, z):
    """Slope, density and d(slope)/dx, the last from Psi''/Psi - (Psi'/Psi)^2."""
    g, dens, curv = log_derivative(params, x, z, second=True)
    scale = params.wavelength / (2.0 * math.pi)
    return scale * np.imag(g), dens, scale * np.imag(curv - g * g)


def launch_grid(params: ScenarioParams, per_slit: int, half_span_sigmas: float, slits: Sequence[int] | None = None) -> np.ndarray:
    """Equally spaced launch points across each slit, sorted and de-duplicated.

    ``slits`` restricts the fan to a subset of slit indices.
    """
    if per_slit < 1:
        raise ConfigError("per_slit must be at least 1")
    half = half_span_sigmas * params.sigma
    indices = range(params.slit_count) if slits is None else slits
    points = []
    for n in indices:
        x0 = params.slit_center(n)
        points.append(np.array([x0]) if per_slit == 1 else np.linspace(x0 - half, x0 + half, per_slit))
    return np.unique(np.concatenate(points))


def central_slits(params: ScenarioParams, count: int) -> list[int]:
    count = min(max(count, 1), params.slit_count)
    first = (params.slit_count - count) // 2
    return list(range(first, first + count))


def _integrate_batch(params, cfg, launches, z_start, z_end, planes, x_bounds):
    x = np.array(launches, dtype=float)
    m = x.size
    z = np.full(m, float(z_start))
    dz = np.full(m, cfg.dz_init)
    status = np.full(m, "", dtype=object)
    active = np.ones(m, dtype=bool)
    steps = np.zeros(m, dtype=int)
    min_step = np.full(m, np.inf)
    max_step = np.zeros(m)
    err_sum = np.zeros(m)
    plane_idx = np.zeros(m, dtype=int)

    k1, dens, jac = _slope_and_jacobian(params, x, z)
    bad = dens < cfg.node_eps
    status[bad] = ABORTED_NODE
    active &= ~bad

    hist_i, hist_x, hist_z = [np.arange(m)], [x.copy()], [z.copy()]
    lo, hi = x_bounds if x_bounds is not None else (-np.inf, np.inf)

    while np.any(active):
        ia = np.nonzero(active)[0]
        xa, za = x[ia], z[ia]
        target = planes[plane_idx[ia]]
        h = np.minimum(dz[ia], target - za)
        hits_plane = h >= target - za

        stages = [k1[ia]]
        node = np.zeros(ia.size, dtype=bool)
        for s in range(1, 7):
            xs = xa + h * sum(a * k for a, k in zip(_A[s], stages))
            if s < 6:
                ks, ds = _slope(params, xs, za + _C[s] * h)
            else:
                ks, ds, jac_new = _slope_and_jacobian(params, xs, za + h)
            node |= (ds < cfg.node_eps) | ~np.isfinite(ks)
            stages.append(np.where(np.isfinite(ks), ks, 0.0))
        x5 = xa + h * sum(b * k for b, k in zip(_B5, stages))
        err = np.abs(h * sum(e * k for e, k in zip(_E, stages)))
        tol = cfg.rel_tol * np.maximum(params.sigma, np.abs(xa))

        at_floor = h <= cfg.dz_min
        accept = ~node & ((err <= tol) | at_floor)
        abort_node = node & at_floor
        reject = ~accept & ~abort_node

        # rejected steps halve; accepted ones grow by the usual 5th-order rule
        grow = np.where(err > 0, 0.9 * (tol / np.where(err > 0, err, 1.0)) ** 0.2, 5.0)
        new_dz = np.where(accept, np.clip(h * np.clip(grow, 0.2, 5.0), cfg.dz_min, cfg.dz_max), dz[ia])
        new_dz = np.where(reject, np.maximum(h / 2.0, cfg.dz_min), new_dz)
        # keep the controller's step when only a plane clipped it
        new_dz = np.where(accept & hits_plane, np.maximum(new_dz, dz[ia]), new_dz)
        dz[ia] = new_dz

        acc = ia[accept]
        z_new = np.where(hits_plane, target, za + h)[accept]
        x[acc] = x5[accept]
        z[acc] = z_new
        k1[acc] = stages[6][accept]
        steps[acc] += 1
        min_step[acc] = np.minimum(min_step[acc], h[accept])
        max_step[acc] = np.maximum(max_step[acc], h[accept])
        # carry earlier local errors along the linearised flow before adding this one
        growth = np.exp(0.5 * h[accept] * (jac[acc] + jac_new[accept]))
        err_sum[acc] = err_sum[acc] * np.where(np.isfinite(growth), growth, 1.0) + ERROR_SAFETY * err[accept]
        jac[acc] = jac_new[accept]
        plane_idx[acc] += hits_plane[accept]

        status[ia[abort_node]] = ABORTED_NODE
        out = (x[acc] < lo) | (x[acc] > hi)
        status[acc[out]] = ABORTED_BOUNDS
        done = z[acc] >= z_end
        status[acc[done & ~out]] = COMPLETED
        active[ia[abort_node]] = False
        active[acc[out | done]] = False

        hist_i.append(acc)
        hist_x.append(x[acc])
        hist_z.append(z[acc])

    owner = np.concatenate(hist_i)
    order = np.argsort(owner, kind="stable")
    bounds = np.searchsorted(owner[order], np.arange(m + 1))
    pts_all = np.column_stack([np.concatenate(hist_x), np.concatenate(hist_z)])[order]
    trajectories = []
    for i in range(m):
        pts = pts_all[bounds[i]:bounds[i + 1]]
        stats = StepStats(int(steps[i]), float(min_step[i]) if steps[i] else 0.0, float(max_step[i]))
        trajectories.append(Trajectory(float(launches[i]), pts, str(status[i]), stats, float(err_sum[i])))
    return trajectories


def _prepare_planes(z_start, z_end, sample_planes):
    if not z_start < z_end:
        raise ConfigError("need z_start < z_end")
    extra = [float(p) for p in (() if sample_planes is None else sample_planes) if z_start < p < z_end]
    return np.array(sorted(set(extra)) + [float(z_end)])


def _batch_job(args):
    return _integrate_batch(*args)


def integrate_many(
    params: ScenarioParams,
    cfg: IntegratorConfig,
    launches,
    z_start: float,
    z_end: float,
    sample_planes: Sequence[float] | None = None,
    x_bounds: tuple[float, float] | None = None,
    workers: int = 1,
) -> list[Trajectory]:
    """Integrate every launch point from ``z_start`` to ``z_end``.

    Each trajectory records every accepted step plus the exact ``sample_planes``
    inside the interval. Results do not depend on batching or ``workers``.
    """
    planes = _prepare_planes(z_start, z_end, sample_planes)
    launches = np.atleast_1d(np.asarray(launches, dtype=float))
    if launches.size == 0:
        return []
    if workers <= 1:
        return _integrate_batch(params, cfg, launches, z_start, z_end, planes, x_bounds)
    chunks = [c for c in np.array_split(launches, min(workers * 4, launches.size)) if c.size]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_batch_job, [(params, cfg, c, z_start, z_end, planes, x_bounds) for c in chunks])
        return [t for part in parts for t in part]


def integrate(
    params: ScenarioParams,
    cfg: IntegratorConfig,
    launch_x: float,
    z_start: float,
    z_end: float,
    sample_planes: Sequence[float] | None = None,
    x_bounds: tuple[float, float] | None = None,
) -> Trajectory:
    return integrate_many(params, cfg, [launch_x], z_start, z_end, sample_planes, x_bounds)[0]


def crossing_violations(trajectories: Sequence[Trajectory], planes: Sequence[float]) -> int:
    """Count adjacent pairs (by launch order) whose x-order flips at any plane."""
    done = sorted((t for t in trajectories if t.status == COMPLETED), key=lambda t: t.launch_x)
    violations = 0
    for z in planes:
        xs = np.array([t.x_at(z) for t in done])
        violations += int(np.sum(np.diff(xs) <= 0))
    return violations
