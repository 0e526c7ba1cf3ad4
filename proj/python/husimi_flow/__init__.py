"""Husimi-function flow of a wavepacket scattering off a Gaussian barrier."""

from ._core import (
    AveragedHamiltonian,
    PhaseSpaceConfig,
    PhysicsError,
    Potential,
    RunConfig,
    Window,
    classical_transmission,
    continuity,
    husimi,
    parse_config,
    preset,
    snapshots,
    sweep,
    transmission,
    xp_from_z,
    z_from_xp,
)

__all__ = [
    "AveragedHamiltonian",
    "PhaseSpaceConfig",
    "PhysicsError",
    "Potential",
    "RunConfig",
    "Window",
    "classical_transmission",
    "continuity",
    "husimi",
    "parse_config",
    "preset",
    "snapshots",
    "sweep",
    "transmission",
    "xp_from_z",
    "z_from_xp",
]
