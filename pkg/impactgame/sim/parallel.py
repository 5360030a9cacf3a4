"""Exécution parallèle des membres d'un balayage de paramètres.

Chaque membre est une résolution indépendante et pure: un worker (thread ou
process) reçoit une valeur et renvoie un résultat. Les résultats sont
restitués dans l'ordre des valeurs, quel que soit l'ordre de complétion.
Le premier échec annule les membres restants et lève `SweepError` avec la
valeur fautive.
"""

from __future__ import annotations

import logging
import pickle
import time
from concurrent.futures import Executor, Future, ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Generic, Literal, Optional, Sequence, Tuple, TypeVar

from impactgame.app.event_bus import EventBus
from impactgame.app.events import (
    SweepCompletedEvent,
    SweepFailedEvent,
    SweepMemberSolvedEvent,
    SweepStartedEvent,
)
from impactgame.engine.errors import SweepError

logger = logging.getLogger(__name__)

ExecutorKind = Literal["thread", "process"]
ResultT = TypeVar("ResultT")


@dataclass(frozen=True)
class MemberOutcome(Generic[ResultT]):
    """Résultat d'un membre du balayage."""

    index: int
    value: Any
    result: ResultT
    duration_seconds: float = field(default=0.0, compare=False)


@dataclass(frozen=True)
class SweepOutcome(Generic[ResultT]):
    """Résumé renvoyé par `ParallelSweepRunner.run()`."""

    parameter: str
    members: Tuple[MemberOutcome[ResultT], ...]
    duration_seconds: float = field(default=0.0, compare=False)

    @property
    def values(self) -> Tuple[Any, ...]:
        return tuple(member.value for member in self.members)

    @property
    def results(self) -> Tuple[ResultT, ...]:
        return tuple(member.result for member in self.members)


def _validate_positive(name: str, value: int) -> None:
    if value <= 0:
        raise ValueError(f"{name} doit être strictement positif (reçu: {value})")


def _run_member(task: Callable[[Any], ResultT], value: Any) -> tuple[ResultT, float]:
    """Exécute un membre et mesure sa durée (fonction de module: picklable)."""

    start = time.perf_counter()
    result = task(value)
    return result, time.perf_counter() - start


class ParallelSweepRunner(Generic[ResultT]):
    """Orchestre les résolutions d'un balayage sur un pool de workers."""

    def __init__(
        self,
        *,
        task: Callable[[Any], ResultT],
        parameter: str,
        values: Sequence[Any],
        jobs: int = 1,
        executor_kind: ExecutorKind = "thread",
        event_bus: Optional[EventBus] = None,
    ) -> None:
        _validate_positive("jobs", jobs)
        if not values:
            raise ValueError("le balayage requiert au moins une valeur")
        if executor_kind not in ("thread", "process"):
            raise ValueError("executor_kind doit valoir 'thread' ou 'process'")

        if executor_kind == "process":
            try:
                pickle.dumps(task)
            except Exception as exc:  # pragma: no cover - erreur anticipée
                raise TypeError("task doit être picklable pour executor_kind='process'") from exc

        self._task = task
        self._parameter = parameter
        self._values = tuple(values)
        self._jobs = jobs
        self._executor_kind = executor_kind
        self._event_bus = event_bus or EventBus()

    @property
    def event_bus(self) -> EventBus:
        return self._event_bus

    def _make_executor(self) -> Executor:
        workers = min(self._jobs, len(self._values))
        if self._executor_kind == "thread":
            return ThreadPoolExecutor(max_workers=workers)
        return ProcessPoolExecutor(max_workers=workers)

    def _fail(self, index: int, exc: BaseException) -> SweepError:
        value = self._values[index]
        logger.debug("sweep_member_failed index=%d value=%r error=%s", index, value, exc)
        self._event_bus.publish(SweepFailedEvent(index=index, value=value, message=str(exc)))
        return SweepError(
            f"échec du membre {index} ({self._parameter}): {exc}",
            value=value,
            condition=getattr(exc, "condition", None),
        )

    def _record(self, index: int, result: ResultT, duration: float) -> MemberOutcome[ResultT]:
        value = self._values[index]
        self._event_bus.publish(
            SweepMemberSolvedEvent(index=index, value=value, duration_seconds=duration)
        )
        return MemberOutcome(index=index, value=value, result=result, duration_seconds=duration)

    def run(self) -> SweepOutcome[ResultT]:
        """Résout tous les membres et renvoie les résultats dans l'ordre des valeurs."""

        start = time.perf_counter()
        self._event_bus.publish(
            SweepStartedEvent(
                parameter=self._parameter,
                count=len(self._values),
                executor_kind=self._executor_kind,
                jobs=self._jobs,
            )
        )

        members: list[MemberOutcome[ResultT]] = []
        # Cas trivial: un seul job → exécution synchrone.
        if self._jobs == 1:
            for index, value in enumerate(self._values):
                try:
                    result, duration = _run_member(self._task, value)
                except Exception as exc:
                    raise self._fail(index, exc) from exc
                members.append(self._record(index, result, duration))
        else:
            with self._make_executor() as executor:
                futures: list[Future[tuple[ResultT, float]]] = [
                    executor.submit(_run_member, self._task, value) for value in self._values
                ]
                for index, future in enumerate(futures):
                    try:
                        result, duration = future.result()
                    except Exception as exc:
                        for pending in futures[index + 1 :]:
                            pending.cancel()
                        raise self._fail(index, exc) from exc
                    members.append(self._record(index, result, duration))

        duration = time.perf_counter() - start
        self._event_bus.publish(SweepCompletedEvent(count=len(members), duration_seconds=duration))
        return SweepOutcome(
            parameter=self._parameter, members=tuple(members), duration_seconds=duration
        )


__all__ = [
    "ExecutorKind",
    "MemberOutcome",
    "ParallelSweepRunner",
    "SweepOutcome",
]
