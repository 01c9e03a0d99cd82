"""Named scenarios and the flat ``key = value`` configuration format.

Lengths are nanometres. Distances along z are given in Talbot lengths so a
changed pitch or wavelength rescales the whole run consistently.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from .params import ConfigError, ScenarioParams, talbot_length

NEAR = "near"
FAR = "far"
#: distance of the far-field plane, in Talbot lengths
FAR_FIELD_TALBOTS = 1e7


@dataclass(frozen=True)
class Scenario:
    name: str
    params: ScenarioParams
    grid_nx: int = 1000
    grid_nz: int = 800
    zmax_talbots: float = 4.0
    #: full x extent of the grid; None means N * d (near) or five far-field orders (far)
    x_span: float | None = None
    per_slit: int = 14
    half_span_sigmas: float = 2.0
    #: trajectories launched from this many central slits; None means all
    traj_slits: int | None = None
    traj_zmax_talbots: float | None = None
    fringe_planes_talbots: tuple[float, ...] = (0.5, 1.0)
    fringe_nx: int | None = None
    rel_tol: float = 1e-8
    mode: str = NEAR

    def __post_init__(self):
        if self.grid_nx < 2 or self.grid_nz < 1:
            raise ConfigError("grid_nx must be >= 2 and grid_nz >= 1")
        if not self.zmax_talbots > 0:
            raise ConfigError("zmax_talbots must be positive")
        if self.x_span is not None and not self.x_span > 0:
            raise ConfigError("x_span must be positive")
        if self.per_slit < 1:
            raise ConfigError("per_slit must be >= 1")
        if self.traj_slits is not None and self.traj_slits < 1:
            raise ConfigError("traj_slits must be >= 1")
        if self.mode not in (NEAR, FAR):
            raise ConfigError(f"mode must be {NEAR!r} or {FAR!r}")
        if not self.rel_tol > 0:
            raise ConfigError("rel_tol must be positive")
        for plane in self.fringe_planes_talbots:
            if not 0 < plane <= self.zmax_talbots:
                raise ConfigError(f"fringe plane {plane} z_T lies outside the grid range (0, {self.zmax_talbots}] z_T")

    @property
    def talbot(self) -> float:
        return talbot_length(self.params)

    @property
    def z_max(self) -> float:
        return self.zmax_talbots * self.talbot

    @property
    def z_range(self) -> tuple[float, float]:
        # first row one spacing above the grating: the grid covers (0, z_max]
        return (self.z_max / self.grid_nz, self.z_max)

    @property
    def x_range(self) -> tuple[float, float]:
        span = self.x_span
        if span is None:
            p = self.params
            if self.mode == FAR:
                span = 5.0 * self.z_max * p.wavelength / p.slit_pitch
            else:
                span = p.slit_count * p.slit_pitch
        return (-span / 2.0, span / 2.0)

    @property
    def fringe_planes(self) -> list[float]:
        return [t * self.talbot for t in self.fringe_planes_talbots]

    @property
    def traj_z_end(self) -> float:
        t = self.traj_zmax_talbots if self.traj_zmax_talbots is not None else self.zmax_talbots
        return t * self.talbot


PRESETS: dict[str, Scenario] = {
    # thermal neutrons on seven slits, d = 10 lambda, a = 2 lambda
    "neutron7": Scenario(
        "neutron7",
        ScenarioParams(wavelength=0.5, slit_count=7, slit_pitch=5.0, slit_width=1.0),
        fringe_planes_talbots=(0.5, 1.0, 2.0),
    ),
    # Talbot carpet, d = 50 lambda
    "talbot512": Scenario(
        "talbot512",
        ScenarioParams(wavelength=0.5, slit_count=512, slit_pitch=25.0, slit_width=5.0),
        zmax_talbots=1.0,
        per_slit=3,
        traj_slits=8,
        fringe_planes_talbots=(0.25, 0.5, 1.0),
    ),
    # lambda / d = 1e-3
    "grating64": Scenario(
        "grating64",
        ScenarioParams(wavelength=0.5, slit_count=64, slit_pitch=500.0, slit_width=100.0),
        per_slit=3,
        traj_slits=8,
        fringe_planes_talbots=(0.5, 1.0, 4.0),
    ),
    # C60 on the nine-slit grating, lambda = 5 pm
    "fullerene9": Scenario(
        "fullerene9",
        ScenarioParams(wavelength=0.005, slit_count=9, slit_pitch=250.0, slit_width=150.0),
        per_slit=8,
        fringe_planes_talbots=(0.5, 1.0),
    ),
    # neutron7 seen from 1e7 Talbot lengths (about 1 m)
    "farfield7": Scenario(
        "farfield7",
        ScenarioParams(wavelength=0.5, slit_count=7, slit_pitch=5.0, slit_width=1.0),
        grid_nx=1000,
        grid_nz=400,
        zmax_talbots=FAR_FIELD_TALBOTS,
        per_slit=2,
        fringe_planes_talbots=(FAR_FIELD_TALBOTS,),
        fringe_nx=4001,
        mode=FAR,
    ),
}

_PARAM_KEYS = {"wavelength": float, "slit_count": int, "slit_pitch": float, "slit_width": float, "sigma": float}
_SCENARIO_KEYS = {
    "name": str,
    "grid_nx": int,
    "grid_nz": int,
    "zmax_talbots": float,
    "x_span": float,
    "per_slit": int,
    "half_span_sigmas": float,
    "traj_slits": int,
    "traj_zmax_talbots": float,
    "fringe_planes_talbots": lambda s: tuple(float(v) for v in s.split(",") if v.strip()),
    "fringe_nx": int,
    "rel_tol": float,
    "mode": str,
}


def parse_config(text: str) -> dict[str, object]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "preset":
            values[key] = value
            continue
        conv = _PARAM_KEYS.get(key) or _SCENARIO_KEYS.get(key)
        if conv is None:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = conv(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return values


def apply_overrides(scenario: Scenario, overrides: dict[str, object]) -> Scenario:
    param_changes = {k: v for k, v in overrides.items() if k in _PARAM_KEYS and v is not None}
    scenario_changes = {k: v for k, v in overrides.items() if k in _SCENARIO_KEYS and v is not None}
    unknown = set(overrides) - set(_PARAM_KEYS) - set(_SCENARIO_KEYS) - {"preset"}
    if unknown:
        raise ConfigError(f"unknown settings: {', '.join(sorted(unknown))}")
    try:
        params = scenario.params.with_updates(**param_changes) if param_changes else scenario.params
        return replace(scenario, params=params, **scenario_changes)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_scenario(name_or_path: str, overrides: dict[str, object] | None = None) -> Scenario:
    """Resolve a preset name or a config file, then apply command-line overrides."""
    overrides = dict(overrides or {})
    if name_or_path in PRESETS:
        base = PRESETS[name_or_path]
        settings: dict[str, object] = {}
    else:
        path = Path(name_or_path)
        if not path.is_file():
            raise ConfigError(f"{name_or_path!r} is neither a preset ({', '.join(PRESETS)}) nor a config file")
        try:
            settings = parse_config(path.read_text())
        except UnicodeDecodeError as exc:
            raise ConfigError(f"{path} is not a text file") from exc
        preset = settings.pop("preset", None)
        if preset is not None:
            if preset not in PRESETS:
                raise ConfigError(f"unknown preset {preset!r}")
            base = PRESETS[preset]
        else:
            missing = [k for k in ("wavelength", "slit_count", "slit_pitch", "slit_width") if k not in settings]
            if missing:
                raise ConfigError(f"config without a preset must set {', '.join(missing)}")
            params = ScenarioParams(**{k: settings.pop(k) for k in list(settings) if k in _PARAM_KEYS})
            base = Scenario(str(settings.pop("name", path.stem)), params)
    settings.update(overrides)
    return apply_overrides(base, settings)

