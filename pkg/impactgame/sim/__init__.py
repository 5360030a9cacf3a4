"""Scénarios de front-running et balayages parallèles."""

from .parallel import MemberOutcome, ParallelSweepRunner, SweepOutcome
from .scenarios import (
    FrontRunningScenario,
    ScenarioReport,
    analyze_scenario,
    build_scenario,
    sweep,
)

__all__ = [
    "FrontRunningScenario",
    "MemberOutcome",
    "ParallelSweepRunner",
    "ScenarioReport",
    "SweepOutcome",
    "analyze_scenario",
    "build_scenario",
    "sweep",
]
