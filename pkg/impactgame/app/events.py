"""Évènements publiés pendant un balayage de scénarios (`impactgame.sim.parallel`)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any


@dataclass(frozen=True)
class SweepStartedEvent:
    """Émis avant la soumission des membres du balayage."""

    parameter: str
    count: int
    executor_kind: str
    jobs: int


@dataclass(frozen=True)
class SweepMemberSolvedEvent:
    """Émis, dans l'ordre des valeurs, quand un membre est résolu."""

    index: int
    value: Any
    duration_seconds: float


@dataclass(frozen=True)
class SweepFailedEvent:
    """Émis quand un membre échoue; les membres restants sont annulés."""

    index: int
    value: Any
    message: str


@dataclass(frozen=True)
class SweepCompletedEvent:
    """Émis après le dernier membre."""

    count: int
    duration_seconds: float


__all__ = [
    "SweepCompletedEvent",
    "SweepFailedEvent",
    "SweepMemberSolvedEvent",
    "SweepStartedEvent",
]
