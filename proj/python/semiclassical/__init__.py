"""Semiclassical limit laboratory (Python bindings of the C++ core)."""

from ._core import (
    CausticError,
    CoherentState,
    ConfigError,
    Error,
    Potential,
    ResolutionError,
    Scenario,
    __version__,
    decompose,
    evolve,
    hopf_lax,
    parse_scenario,
    plan_rungs,
    run,
)

__all__ = [
    "CausticError",
    "CoherentState",
    "ConfigError",
    "Error",
    "Potential",
    "ResolutionError",
    "Scenario",
    "__version__",
    "decompose",
    "evolve",
    "hopf_lax",
    "parse_scenario",
    "plan_rungs",
    "run",
]
