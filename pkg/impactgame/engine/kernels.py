"""Noyaux de décroissance G de l'impact transitoire et test de type positif.

Un noyau G: [0, ∞) → [0, ∞) donne l'impact résiduel d'un échange unitaire
après un temps t. Quatre variantes sont disponibles:

- `ExponentialKernel` : G(t) = e^{−ρt} (ρ = 0 donne l'impact permanent)
- `ConstantKernel` : G(t) = 1
- `PowerLawKernel` : G(t) = (1 + t)^{−δ}
- `TabulatedKernel` : interpolation linéaire d'une courbe mesurée

Le test de type positif est un substitut numérique: il certifie la positivité
de la forme quadratique pour les stratégies représentables sur la grille.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import ClassVar, Iterable, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, eigvalsh

from impactgame.engine.defaults import (
    DEFAULT_KERNEL_CHECK_SIZE,
    POSITIVE_TYPE_ABSOLUTE_FLOOR,
    POSITIVE_TYPE_RELATIVE_FLOOR,
)
from impactgame.engine.errors import KernelExtrapolationError, ModelError, SolverError
from impactgame.engine.grid import Grid

logger = logging.getLogger(__name__)


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not np.isfinite(value):
        raise ModelError(f"{name} doit être fini (reçu: {value})")
    return value


@dataclass(frozen=True)
class DecayKernel:
    """Noyau de base; les sous-classes implémentent `evaluate`."""

    kind: ClassVar[str] = "abstract"

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        """Évalue G sur un tableau de temps déjà validés (t ≥ 0)."""

        raise NotImplementedError

    def __call__(self, t: float | np.ndarray) -> float | np.ndarray:
        return eval_kernel(self, t)


@dataclass(frozen=True)
class ExponentialKernel(DecayKernel):
    """G(t) = e^{−ρt}, ρ ≥ 0 (taux de décroissance, en 1/temps)."""

    kind: ClassVar[str] = "exponential"
    rho: float = 1.0

    def __post_init__(self) -> None:
        rho = _require_finite("rho", self.rho)
        if rho < 0.0:
            raise ModelError(f"rho doit être positif ou nul (reçu: {rho})")
        object.__setattr__(self, "rho", rho)

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        return np.exp(-self.rho * t)


@dataclass(frozen=True)
class ConstantKernel(DecayKernel):
    """G(t) = 1: impact permanent."""

    kind: ClassVar[str] = "constant"

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        return np.ones_like(t, dtype=np.float64)


@dataclass(frozen=True)
class PowerLawKernel(DecayKernel):
    """G(t) = (1 + t)^{−δ}, décalage fixé à 1."""

    kind: ClassVar[str] = "power_law"
    delta: float = 0.5

    def __post_init__(self) -> None:
        delta = _require_finite("delta", self.delta)
        if delta < 0.0:
            raise ModelError(f"delta doit être positif ou nul (reçu: {delta})")
        object.__setattr__(self, "delta", delta)

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        return np.power(1.0 + t, -self.delta)


@dataclass(frozen=True)
class TabulatedKernel(DecayKernel):
    """Courbe d'impact mesurée, interpolée linéairement entre échantillons.

    Args:
        samples: couples (temps, valeur), temps strictement croissants depuis 0
    """

    kind: ClassVar[str] = "tabulated"
    samples: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        samples = tuple((float(t), float(v)) for t, v in self.samples)
        if len(samples) < 2:
            raise ModelError("un noyau tabulé nécessite au moins 2 échantillons")
        times = np.array([t for t, _ in samples])
        values = np.array([v for _, v in samples])
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise ModelError("les échantillons du noyau tabulé doivent être finis")
        if times[0] != 0.0:
            raise ModelError(f"le premier échantillon doit être en t = 0 (reçu: {times[0]})")
        if np.any(np.diff(times) <= 0.0):
            raise ModelError("les temps du noyau tabulé doivent être strictement croissants")
        if np.any(values < 0.0):
            raise ModelError("les valeurs du noyau tabulé doivent être positives")
        object.__setattr__(self, "samples", samples)

    @property
    def last_time(self) -> float:
        return self.samples[-1][0]

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        if np.any(t > self.last_time):
            raise KernelExtrapolationError(
                f"t = {float(np.max(t))!r} au-delà du dernier échantillon ({self.last_time!r})"
            )
        times = np.array([s for s, _ in self.samples])
        values = np.array([v for _, v in self.samples])
        return np.interp(t, times, values)


def eval_kernel(kernel: DecayKernel, t: float | np.ndarray) -> float | np.ndarray:
    """Évalue G(t) pour un scalaire ou un tableau de temps t ≥ 0."""

    values = np.asarray(t, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise ModelError("le temps doit être fini")
    if np.any(values < 0.0):
        raise ModelError(f"le temps doit être positif ou nul (reçu: {float(np.min(values))!r})")
    result = kernel.evaluate(values)
    if values.ndim == 0:
        return float(result)
    return result


def kernel_matrix(kernel: DecayKernel, nodes: np.ndarray) -> np.ndarray:
    """Matrice symétrique G(|t_j − t_k|) sur les noeuds donnés."""

    lags = np.abs(nodes[:, None] - nodes[None, :])
    return np.asarray(eval_kernel(kernel, lags))


@dataclass(frozen=True)
class PositiveTypeReport:
    """Verdict du test de type positif sur une grille."""

    grid_size: int
    horizon: float
    min_eigenvalue: float
    max_eigenvalue: float
    tolerance: float
    is_positive_type: bool

    def as_dict(self) -> dict[str, object]:
        """Représentation JSON-friendly du rapport."""

        return {
            "grid_size": self.grid_size,
            "horizon": self.horizon,
            "min_eigenvalue": self.min_eigenvalue,
            "max_eigenvalue": self.max_eigenvalue,
            "tolerance": self.tolerance,
            "is_positive_type": self.is_positive_type,
        }


def gram_matrix(kernel: DecayKernel, grid: Grid) -> np.ndarray:
    """K_{jk} = √(w_j w_k) · G(|t_j − t_k|), symétrique par construction."""

    scale = np.sqrt(np.outer(grid.weights, grid.weights))
    return scale * kernel_matrix(kernel, grid.nodes)


def default_positive_type_tolerance(max_eigenvalue: float) -> float:
    relative = POSITIVE_TYPE_RELATIVE_FLOOR * abs(max_eigenvalue)
    return max(relative, POSITIVE_TYPE_ABSOLUTE_FLOOR)


def check_positive_type(
    kernel: DecayKernel,
    horizon: float,
    grid_size: int = DEFAULT_KERNEL_CHECK_SIZE,
    tolerance: float | None = None,
) -> PositiveTypeReport:
    """Teste numériquement la positivité de ½∬G(|t−s|)α(t)α(s) ds dt.

    Le spectre de la matrice de Gram pondérée est calculé sur une grille
    trapézoïdale uniforme; le verdict est vrai si la plus petite valeur propre
    est ≥ −tolérance. Sans tolérance explicite, le plancher vaut 1e−10 fois la
    plus grande valeur propre (1e−12 au minimum).
    """

    if grid_size < 2:
        raise ModelError(f"grid_size doit être ≥ 2 (reçu: {grid_size})")
    grid = Grid.uniform(horizon, grid_size)
    gram = gram_matrix(kernel, grid)
    try:
        eigenvalues = eigvalsh(gram)
    except (LinAlgError, ValueError) as exc:
        raise SolverError(f"échec du calcul spectral de la matrice de Gram: {exc}") from exc

    min_eigenvalue = float(eigenvalues[0])
    max_eigenvalue = float(eigenvalues[-1])
    effective = (
        default_positive_type_tolerance(max_eigenvalue) if tolerance is None else float(tolerance)
    )
    report = PositiveTypeReport(
        grid_size=grid.size,
        horizon=grid.horizon,
        min_eigenvalue=min_eigenvalue,
        max_eigenvalue=max_eigenvalue,
        tolerance=effective,
        is_positive_type=min_eigenvalue >= -effective,
    )
    logger.debug(
        "positive_type kind=%s horizon=%g size=%d min_eig=%.3e verdict=%s",
        kernel.kind,
        report.horizon,
        report.grid_size,
        report.min_eigenvalue,
        report.is_positive_type,
    )
    return report


def check_positive_type_over_horizons(
    kernel: DecayKernel,
    horizons: Iterable[float],
    grid_size: int = DEFAULT_KERNEL_CHECK_SIZE,
    tolerance: float | None = None,
) -> Tuple[PositiveTypeReport, ...]:
    """Répète le test pour plusieurs horizons (la définition porte sur tout T > 0)."""

    reports = tuple(
        check_positive_type(kernel, horizon, grid_size, tolerance) for horizon in horizons
    )
    if not reports:
        raise ModelError("au moins un horizon est requis")
    return reports


def tabulated(samples: Sequence[Sequence[float]]) -> TabulatedKernel:
    """Raccourci: construit un `TabulatedKernel` depuis une liste de couples."""

    return TabulatedKernel(samples=tuple((float(t), float(v)) for t, v in samples))


__all__ = [
    "ConstantKernel",
    "DecayKernel",
    "ExponentialKernel",
    "PositiveTypeReport",
    "PowerLawKernel",
    "TabulatedKernel",
    "check_positive_type",
    "check_positive_type_over_horizons",
    "default_positive_type_tolerance",
    "eval_kernel",
    "gram_matrix",
    "kernel_matrix",
    "tabulated",
]
