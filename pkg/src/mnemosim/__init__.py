"""Simulation of temporal memory dynamics: traces, decay, context hierarchies,
influence networks, Bayesian reinforcement and chain entropy."""

from mnemosim.core import Phase, Proposition, ScenarioConfig, load_scenario, loads_scenario, validate_scenario
from mnemosim.engine import run
from mnemosim.errors import MnemosimError
from mnemosim.world import World

__all__ = [
    "MnemosimError",
    "Phase",
    "Proposition",
    "ScenarioConfig",
    "World",
    "load_scenario",
    "loads_scenario",
    "run",
    "validate_scenario",
]
__version__ = "0.1.0"
