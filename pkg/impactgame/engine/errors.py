"""Exceptions du moteur et des solveurs.

- `ModelError` : paramètres hors du domaine du modèle (temps négatif, γ ≤ 0, ...).
- `ConfigError` : configuration JSON illisible ou incomplète.
- `SolverError` : échec numérique (système singulier, mal conditionné).
"""

from __future__ import annotations

from typing import Any


class ModelError(ValueError):
    """Entrée hors du domaine de validité du modèle."""


class KernelExtrapolationError(ModelError):
    """Évaluation d'un noyau tabulé au-delà du dernier échantillon."""


class ConfigError(ValueError):
    """Configuration invalide (fichier, schéma ou valeurs)."""


class SolverError(RuntimeError):
    """Échec d'un solveur, avec estimation du conditionnement si disponible."""

    def __init__(self, message: str, *, condition: float | None = None) -> None:
        if condition is not None:
            message = f"{message} (conditionnement estimé: {condition:.3e})"
        super().__init__(message)
        self.condition = condition


class SweepError(SolverError):
    """Échec d'un membre de balayage; `value` identifie la valeur fautive."""

    def __init__(self, message: str, *, value: Any, condition: float | None = None) -> None:
        super().__init__(f"{message} [valeur balayée: {value!r}]", condition=condition)
        self.value = value


__all__ = [
    "ConfigError",
    "KernelExtrapolationError",
    "ModelError",
    "SolverError",
    "SweepError",
]
