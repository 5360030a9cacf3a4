"""Constantes numériques et tolérances par défaut.

Ce module expose le contrat attendu par les solveurs, les scénarios et la CLI:
- taille de grille par défaut (`DEFAULT_GRID_SIZE`)
- tolérances regroupées dans `Tolerances`
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Any, Mapping

# Discrétisation
DEFAULT_GRID_SIZE: int = 1001
DEFAULT_KERNEL_CHECK_SIZE: int = 200

# Test de type positif: plancher relatif à la plus grande valeur propre, puis absolu.
POSITIVE_TYPE_RELATIVE_FLOOR: float = 1e-10
POSITIVE_TYPE_ABSOLUTE_FLOOR: float = 1e-12

# Propagation de e^{M t_k}: recalcul complet toutes les N étapes.
EXPONENTIAL_REFRESH_PERIOD: int = 64

# En dessous, le système augmenté est considéré singulier.
MIN_RECIPROCAL_CONDITION: float = 1e-14

SCHEMA_VERSION: str = "1.0"


@dataclass(frozen=True)
class Tolerances:
    """Tolérances surchargeables depuis la configuration ou la CLI."""

    liquidation: float = 1e-8
    verify: float = 1e-3
    identity: float = 1e-10
    dead_band: float = 1e-9
    monotone_slack: float = 1e-6
    homogeneity: float = 1e-9
    positive_type: float | None = None

    def __post_init__(self) -> None:
        for item in fields(self):
            value = getattr(self, item.name)
            if value is not None and not value >= 0.0:
                raise ValueError(f"tolérance {item.name} doit être positive (reçu: {value})")

    def with_overrides(self, overrides: Mapping[str, Any]) -> "Tolerances":
        """Retourne une copie où seules les clés fournies (non nulles) changent."""

        known = {item.name for item in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"tolérances inconnues: {sorted(unknown)}")
        changes = {key: float(value) for key, value in overrides.items() if value is not None}
        return replace(self, **changes)


__all__ = [
    "DEFAULT_GRID_SIZE",
    "DEFAULT_KERNEL_CHECK_SIZE",
    "EXPONENTIAL_REFRESH_PERIOD",
    "MIN_RECIPROCAL_CONDITION",
    "POSITIVE_TYPE_ABSOLUTE_FLOOR",
    "POSITIVE_TYPE_RELATIVE_FLOOR",
    "SCHEMA_VERSION",
    "Tolerances",
]
