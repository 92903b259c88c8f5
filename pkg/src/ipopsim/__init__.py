"""Averaged simulation of input-parallel output-parallel AC-DC-DC supplies
under PI, LADRC and adaptive LADRC current/voltage control."""
from .engine import SimResult, SimulationAbort, Trace, run_simulation
from .scenario import Scenario, ScenarioError, parse_scenario, with_override

__version__ = "0.1.0"
__all__ = ["SimResult", "SimulationAbort", "Trace", "run_simulation", "Scenario",
           "ScenarioError", "parse_scenario", "with_override", "__version__"]
