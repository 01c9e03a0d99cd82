"""N-slit Gaussian-wavepacket interference: near-field carpets, far-field
fringes and Bohmian trajectories."""

from .params import (
    NODE_EPS,
    ConfigError,
    EmptyProfile,
    NodeSingularity,
    PlaneOutOfRange,
    QuadratureUnconverged,
    ScenarioParams,
    SlitwaveError,
    talbot_length,
)
from .wavefield import FieldGrid, density, gradient_log, packet, quantum_potential, spreading, superpose

__all__ = [
    "NODE_EPS",
    "ConfigError",
    "EmptyProfile",
    "FieldGrid",
    "NodeSingularity",
    "PlaneOutOfRange",
    "QuadratureUnconverged",
    "ScenarioParams",
    "SlitwaveError",
    "density",
    "gradient_log",
    "packet",
    "quantum_potential",
    "spreading",
    "superpose",
    "talbot_length",
]
