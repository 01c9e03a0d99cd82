"""File formats: CSV grids and profiles, JSON trajectories, binary PGM images."""

from __future__ import annotations

import io
import json
import math
from typing import Iterable, Sequence

import numpy as np

from .bohm import Trajectory
from .farfield import FringeProfile
from .wavefield import FieldGrid

LINEAR = "linear"
LOG = "log"


def fmt(value: float) -> str:
    return f"{value:.17g}"


def _row(values: Iterable[float]) -> str:
    return ",".join(fmt(v) for v in values)


def grid_to_csv(grid: FieldGrid) -> str:
    """Wide layout: header ``z`` then the x coordinates; one line per z row."""
    lines = ["z," + _row(grid.xs)]
    for z, row in zip(grid.zs, grid.samples):
        lines.append(fmt(z) + "," + _row(row))
    return "\n".join(lines) + "\n"


def grid_from_csv(text: str) -> FieldGrid:
    rows = [line.split(",") for line in text.strip("\n").split("\n")]
    if rows[0][0] != "z":
        raise ValueError("not a density grid CSV")
    xs = np.array([float(v) for v in rows[0][1:]])
    zs = np.array([float(r[0]) for r in rows[1:]])
    samples = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    return FieldGrid(float(xs[0]), float(xs[-1]), float(zs[0]), float(zs[-1]), samples)


def profiles_to_csv(profiles: Sequence[FringeProfile], extra: dict[str, Sequence[np.ndarray]] | None = None) -> str:
    """Long layout ``z,x,density[,extra...]`` for a set of fringe planes."""
    names = list(extra or {})
    lines = [",".join(["z", "x", "density", *names])]
    for k, prof in enumerate(profiles):
        cols = [extra[name][k] for name in names]
        for j, (x, v) in enumerate(zip(prof.xs, prof.values)):
            lines.append(_row([prof.z, x, v, *(c[j] for c in cols)]))
    return "\n".join(lines) + "\n"


def trajectories_to_json(trajectories: Sequence[Trajectory]) -> str:
    payload = [
        {
            "launch_x": float(t.launch_x),
            "status": t.status,
            "points": [[float(x), float(z)] for x, z in t.points],
        }
        for t in trajectories
    ]
    return json.dumps(payload, allow_nan=False, separators=(",", ":"))


def trajectories_from_json(text: str) -> list[dict]:
    return json.loads(text)


def render_pgm(grid: FieldGrid, mapping: str = LINEAR, gamma: float = 1.0) -> bytes:
    """Binary P5 greyscale, row 0 = z_min, zero density white and the peak black.

    ``linear`` maps v/v_max through a power ``gamma``; ``log`` maps
    log(1 + v/v_max * 10**gamma) / log(1 + 10**gamma).
    """
    values = np.asarray(grid.samples, dtype=float)
    peak = float(values.max()) if values.size else 0.0
    frac = np.clip(values / peak, 0.0, 1.0) if peak > 0 else np.zeros_like(values)
    if mapping == LINEAR:
        level = frac**gamma
    elif mapping == LOG:
        level = np.log1p(frac * 10.0**gamma) / math.log1p(10.0**gamma)
    else:
        raise ValueError(f"unknown mapping {mapping!r}")
    pixels = (255 - np.rint(255.0 * level)).astype(np.uint8)
    buf = io.BytesIO()
    buf.write(f"P5\n{grid.nx} {grid.nz}\n255\n".encode("ascii"))
    buf.write(pixels.tobytes())
    return buf.getvalue()


def read_pgm(data: bytes) -> np.ndarray:
    magic, dims, maxval, rest = data.split(b"\n", 3)
    if magic != b"P5" or maxval != b"255":
        raise ValueError("expected an 8-bit binary PGM")
    nx, nz = (int(v) for v in dims.split())
    return np.frombuffer(rest, dtype=np.uint8).reshape(nz, nx)
