"""Notifications de la couche application (progression des balayages)."""

from .event_bus import EventBus
from .events import (
    SweepCompletedEvent,
    SweepFailedEvent,
    SweepMemberSolvedEvent,
    SweepStartedEvent,
)

__all__ = [
    "EventBus",
    "SweepCompletedEvent",
    "SweepFailedEvent",
    "SweepMemberSolvedEvent",
    "SweepStartedEvent",
]
