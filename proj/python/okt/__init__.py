"""Octree AMR hydrodynamics with FMM gravity on simulated localities."""

from ._okt import (
    ConfigError,
    NoReference,
    RunResult,
    UnknownScenario,
    config,
    gravity,
    offload_fraction,
    option_keys,
    run,
    scenarios,
    sod_convergence,
    stencil,
    synthetic_halo,
)

__all__ = [
    "ConfigError",
    "NoReference",
    "RunResult",
    "UnknownScenario",
    "config",
    "gravity",
    "offload_fraction",
    "option_keys",
    "run",
    "scenarios",
    "sod_convergence",
    "stencil",
    "synthetic_halo",
]
