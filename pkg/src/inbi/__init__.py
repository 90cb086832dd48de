"""Improved normal-boundary-intersection frontier toolkit and smart-building benchmark."""

from .config import Config, load_config
from .harness import CASES, CaseConfig, Consideration, synthesize_scenario
from .model import BuildingProblem, BuildingScenario, DispatchDecision, evaluate_objectives
from .pipeline import Algorithm, RunResult, run, run_all

__all__ = [
    "Algorithm", "BuildingProblem", "BuildingScenario", "CASES", "CaseConfig", "Config", "Consideration",
    "DispatchDecision", "RunResult", "evaluate_objectives", "load_config", "run", "run_all",
    "synthesize_scenario",
]
