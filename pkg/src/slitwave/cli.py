"""Command-line front end: ``slitwave run <preset|config> --out DIR``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import bohm, farfield, oracle, output
from .fringes import extract_fringe
from .params import ConfigError, SlitwaveError, talbot_length
from .scenarios import FAR, PRESETS, Scenario, load_scenario
from .wavefield import density_grid, packet

log = logging.getLogger("slitwave")

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3
#: evenly spaced planes every trajectory is forced to record
TRAJECTORY_PLANES = 64

_FLAG_KEYS = {
    "lambda_nm": "wavelength",
    "slits": "slit_count",
    "pitch_nm": "slit_pitch",
    "width_nm": "slit_width",
    "sigma_nm": "sigma",
    "grid_nx": "grid_nx",
    "grid_nz": "grid_nz",
    "zmax_talbots": "zmax_talbots",
    "per_slit": "per_slit",
    "traj_slits": "traj_slits",
}


def trajectory_planes(scenario: Scenario) -> list[float]:
    z_end = scenario.traj_z_end
    if scenario.mode == FAR:
        planes = np.geomspace(scenario.talbot, z_end, TRAJECTORY_PLANES)
    else:
        planes = np.linspace(0.0, z_end, TRAJECTORY_PLANES + 1)[1:]
    return sorted(set(float(z) for z in planes) | {z for z in scenario.fringe_planes if z < z_end})


class _Outputs:
    """Tracks written files so a failed run leaves nothing half-done behind."""

    def __init__(self, root: Path):
        self.root = root
        self.created_root = not root.exists()
        self.written: list[Path] = []

    def write(self, name: str, data: str | bytes) -> Path:
        path = self.root / name
        self.written.append(path)
        if isinstance(data, bytes):
            path.write_bytes(data)
        else:
            with open(path, "w", newline="\n") as fh:
                fh.write(data)
        return path

    def discard(self):
        for path in self.written:
            path.unlink(missing_ok=True)
        if self.created_root:
            try:
                self.root.rmdir()
            except OSError:
                pass


def run_scenario(scenario: Scenario, out_dir: Path, workers: int = 1, mapping: str = output.LINEAR, gamma: float = 1.0) -> dict:
    """Compute and write every output of ``scenario``; returns the summary record."""
    p = scenario.params
    z_t = talbot_length(p)
    log.debug("%s: z_T=%g nm, grid %dx%d, workers=%d", scenario.name, z_t, scenario.grid_nx, scenario.grid_nz, workers)
    grid = density_grid(p, scenario.x_range, scenario.z_range, scenario.grid_nx, scenario.grid_nz, workers=workers)
    grid = grid.normalized()

    if scenario.traj_slits is None:
        launches = bohm.launch_grid(p, scenario.per_slit, scenario.half_span_sigmas)
    else:
        slits = bohm.central_slits(p, scenario.traj_slits)
        launches = bohm.launch_grid(p, scenario.per_slit, scenario.half_span_sigmas, slits)
    cfg = bohm.IntegratorConfig.for_span(scenario.traj_z_end, rel_tol=scenario.rel_tol)
    trajectories = bohm.integrate_many(
        p, cfg, launches, 0.0, scenario.traj_z_end, trajectory_planes(scenario), workers=workers
    )

    nx = scenario.fringe_nx or scenario.grid_nx
    xs = np.linspace(*scenario.x_range, nx)
    profiles = [extract_fringe(p, z, xs, z_range=(0.0, scenario.z_max)) for z in scenario.fringe_planes]
    extra = None
    if scenario.mode == FAR:
        closed = []
        for prof in profiles:
            model = np.asarray(farfield.intensity(p, prof.xs, prof.z))
            closed.append(model / model.max())
        extra = {"closed_form": closed}

    statuses = Counter(t.status for t in trajectories)
    summary = {
        "scenario": scenario.name,
        "params": {
            "wavelength": p.wavelength,
            "slit_count": p.slit_count,
            "slit_pitch": p.slit_pitch,
            "slit_width": p.slit_width,
            "sigma": p.sigma,
        },
        "talbot_length": z_t,
        "grid": {
            "nx": grid.nx,
            "nz": grid.nz,
            "x_range": [grid.x_min, grid.x_max],
            "z_range": [grid.z_min, grid.z_max],
        },
        "trajectories": {
            "launched": len(trajectories),
            bohm.COMPLETED: statuses.get(bohm.COMPLETED, 0),
            bohm.ABORTED_NODE: statuses.get(bohm.ABORTED_NODE, 0),
            bohm.ABORTED_BOUNDS: statuses.get(bohm.ABORTED_BOUNDS, 0),
        },
        "fringes": [
            {"z": prof.z, "maxima": [{"x": m.x, "value": m.intensity, "kind": m.kind} for m in prof.maxima]}
            for prof in profiles
        ],
    }

    out = _Outputs(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        out.write("density.csv", output.grid_to_csv(grid))
        out.write("density.pgm", output.render_pgm(grid, mapping, gamma))
        out.write("trajectories.json", output.trajectories_to_json(trajectories))
        out.write("fringes.csv", output.profiles_to_csv(profiles, extra))
        out.write("summary.json", json.dumps(summary, indent=2, allow_nan=False) + "\n")
    except BaseException:
        out.discard()
        raise
    return summary


def summary_line(summary: dict) -> str:
    tr = summary["trajectories"]
    return (
        f"{summary['scenario']}: z_T = {summary['talbot_length']:.6g} nm, "
        f"grid {summary['grid']['nx']}x{summary['grid']['nz']}, "
        f"trajectories {tr[bohm.COMPLETED]}/{tr['launched']} completed "
        f"({tr[bohm.ABORTED_NODE]} node, {tr[bohm.ABORTED_BOUNDS]} bounds)"
    )


def _cmd_run(args) -> int:
    overrides = {key: getattr(args, flag) for flag, key in _FLAG_KEYS.items() if getattr(args, flag) is not None}
    try:
        scenario = load_scenario(args.scenario, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(args.out) if args.out else Path(scenario.name)
    try:
        summary = run_scenario(scenario, out_dir, workers=args.workers, mapping=args.mapping, gamma=args.gamma)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(summary_line(summary))
    return EXIT_OK


def _cmd_oracle(args) -> int:
    """Compare the quadrature amplitude with the closed-form packet of slit 0."""
    try:
        scenario = load_scenario(args.scenario)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    p = scenario.params
    z = args.z_talbots * talbot_length(p)
    spec = oracle.QuadratureSpec.for_slit(p, args.n_points, args.scheme)
    x0 = p.slit_center(0)
    try:
        q0 = oracle.convolve_kernel(p, spec, x0, z)
        c0 = packet(p, 0, x0, z)
        print("x_nm,quadrature_ratio_re,quadrature_ratio_im,closed_ratio_re,closed_ratio_im,rel_diff")
        for dx in np.linspace(-3 * p.sigma, 3 * p.sigma, args.points):
            q = oracle.convolve_kernel(p, spec, x0 + dx, z) / q0
            c = packet(p, 0, x0 + dx, z) / c0
            print(",".join(output.fmt(v) for v in (x0 + dx, q.real, q.imag, c.real, c.imag, abs(q - c) / abs(c))))
    except SlitwaveError as exc:
        print(f"oracle error: {exc}", file=sys.stderr)
        return 1
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slitwave", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{run}")

    run = sub.add_parser("run", help="simulate a preset or config file and write its outputs")
    run.add_argument("scenario", help=f"preset ({', '.join(PRESETS)}) or path to a key=value config file")
    run.add_argument("--out", help="output directory (default: ./<scenario name>)")
    run.add_argument("--lambda-nm", type=float)
    run.add_argument("--slits", type=int)
    run.add_argument("--pitch-nm", type=float)
    run.add_argument("--width-nm", type=float)
    run.add_argument("--sigma-nm", type=float)
    run.add_argument("--grid-nx", type=int)
    run.add_argument("--grid-nz", type=int)
    run.add_argument("--zmax-talbots", type=float)
    run.add_argument("--per-slit", type=int)
    run.add_argument("--traj-slits", type=int, help="launch trajectories from this many central slits only")
    run.add_argument("--workers", type=int, default=1, help="process pool size for grid rows and trajectories")
    run.add_argument("--mapping", choices=[output.LINEAR, output.LOG], default=output.LINEAR)
    run.add_argument("--gamma", type=float, default=1.0)
    run.set_defaults(func=_cmd_run)

    orc = sub.add_parser("oracle")
    orc.add_argument("scenario", nargs="?", default="neutron7")
    orc.add_argument("--z-talbots", type=float, default=0.5)
    orc.add_argument("--points", type=int, default=11)
    orc.add_argument("--n-points", type=int, default=4096)
    orc.add_argument("--scheme", choices=[oracle.GAUSS_LEGENDRE, oracle.TRAPEZOID], default=oracle.GAUSS_LEGENDRE)
    orc.set_defaults(func=_cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, which is also our config-error code
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
