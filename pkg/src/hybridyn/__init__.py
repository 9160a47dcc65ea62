"""Oscillator coupled to two spin-1/2 particles: fully quantum, semiclassical
(backreacting) and fixed-background dynamics."""

from .model import ModelParams, build_h_qq, build_h_spin_sc, build_h_cb
from .dynamics import (
    IntegratorConfig,
    OscillatorBackground,
    SCState,
    Trajectory,
    evolve_qq,
    evolve_sc,
    evolve_cb,
)
from .scenarios import ScenarioConfig, preset, run_scenario, match_initial_state, build_ghz

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "build_h_qq",
    "build_h_spin_sc",
    "build_h_cb",
    "IntegratorConfig",
    "OscillatorBackground",
    "SCState",
    "Trajectory",
    "evolve_qq",
    "evolve_sc",
    "evolve_cb",
    "ScenarioConfig",
    "preset",
    "run_scenario",
    "match_initial_state",
    "build_ghz",
]
