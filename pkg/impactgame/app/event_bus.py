"""Bus d'évènements minimaliste pour la progression des balayages."""

from __future__ import annotations

from typing import Callable, List, Optional, Tuple, Type

Subscriber = Callable[[object], None]


class EventBus:
    """Publie des évènements aux observateurs enregistrés.

    La diffusion est synchrone: chaque publication appelle immédiatement les
    abonnés dans l'ordre d'enregistrement. Un abonné peut restreindre la
    diffusion à un type d'évènement; une exception levée par un abonné
    interrompt la diffusion.
    """

    __slots__ = ("_subscribers",)

    def __init__(self) -> None:
        self._subscribers: List[Tuple[Optional[Type[object]], Subscriber]] = []

    def subscribe(
        self,
        callback: Subscriber,
        event_type: Optional[Type[object]] = None,
    ) -> Callable[[], None]:
        """Enregistre un abonné et retourne une fonction d'unsubscribe."""

        entry = (event_type, callback)
        self._subscribers.append(entry)

        def unsubscribe() -> None:
            try:
                self._subscribers.remove(entry)
            except ValueError:
                # Déjà retiré.
                pass

        return unsubscribe

    def publish(self, event: object) -> None:
        """Diffuse l'évènement aux abonnés dont le filtre de type correspond."""

        # Copie: un abonné peut se désinscrire pendant l'itération.
        for event_type, callback in list(self._subscribers):
            if event_type is None or isinstance(event, event_type):
                callback(event)


__all__ = ["EventBus", "Subscriber"]
