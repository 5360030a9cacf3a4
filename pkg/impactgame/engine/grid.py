"""Discrétisation de [0, T] et matrices de quadrature trapézoïdale.

Les deux matrices `causal_weights` et `anticipation_weights` sont partagées par
`model.price_path` et par l'opérateur discret du solveur de Fredholm: les deux
modules évaluent ainsi F avec exactement les mêmes poids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from impactgame.engine.defaults import DEFAULT_GRID_SIZE
from impactgame.engine.errors import ModelError

_WEIGHT_SUM_RTOL = 1e-12


def trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    """Poids de la règle des trapèzes composite sur des noeuds croissants."""

    steps = np.diff(nodes)
    weights = np.zeros_like(nodes, dtype=np.float64)
    weights[:-1] += 0.5 * steps
    weights[1:] += 0.5 * steps
    return weights


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class Grid:
    """Grille t₀ = 0 < … < t_{m−1} = T avec poids de quadrature (Σw = T).

    Args:
        nodes: noeuds strictement croissants, de 0 à T
        weights: poids de quadrature (par défaut: trapèzes composites)
    """

    nodes: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self) -> None:
        nodes = np.array(self.nodes, dtype=np.float64)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ModelError("une grille doit contenir au moins 2 noeuds")
        if not np.all(np.isfinite(nodes)):
            raise ModelError("les noeuds de la grille doivent être finis")
        if nodes[0] != 0.0:
            raise ModelError(f"le premier noeud doit valoir 0 (reçu: {nodes[0]})")
        if np.any(np.diff(nodes) <= 0.0):
            raise ModelError("les noeuds de la grille doivent être strictement croissants")

        if self.weights is None:
            weights = trapezoid_weights(nodes)
        else:
            weights = np.array(self.weights, dtype=np.float64)
            if weights.shape != nodes.shape:
                raise ModelError("poids et noeuds doivent avoir la même taille")
            if np.any(weights <= 0.0):
                raise ModelError("les poids de quadrature doivent être strictement positifs")
        horizon = nodes[-1]
        if abs(weights.sum() - horizon) > _WEIGHT_SUM_RTOL * horizon:
            raise ModelError(
                f"la somme des poids ({weights.sum()!r}) doit valoir T = {horizon!r}"
            )

        object.__setattr__(self, "nodes", _frozen(nodes))
        object.__setattr__(self, "weights", _frozen(weights))

    @classmethod
    def uniform(cls, horizon: float, size: int = DEFAULT_GRID_SIZE) -> "Grid":
        """Grille uniforme de `size` noeuds sur [0, horizon]."""

        if not horizon > 0.0 or not np.isfinite(horizon):
            raise ModelError(f"horizon doit être strictement positif (reçu: {horizon})")
        if size < 2:
            raise ModelError(f"la grille doit contenir au moins 2 noeuds (reçu: {size})")
        nodes = np.linspace(0.0, float(horizon), int(size))
        nodes[-1] = float(horizon)
        return cls(nodes=nodes)

    @property
    def horizon(self) -> float:
        return float(self.nodes[-1])

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    def __len__(self) -> int:
        return self.size

    @property
    def is_uniform(self) -> bool:
        steps = np.diff(self.nodes)
        return bool(np.allclose(steps, steps[0], rtol=1e-12, atol=0.0))

    def matches(self, other: "Grid") -> bool:
        """Vrai si les deux grilles ont exactement les mêmes noeuds et poids."""

        return bool(
            np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )

    def __repr__(self) -> str:  # pragma: no cover - debug helper
        return f"Grid(size={self.size}, horizon={self.horizon!r})"


def causal_weights(grid: Grid) -> np.ndarray:
    """Matrice triangulaire inférieure des poids de ∫₀^{t_k} · ds.

    La ligne k est la règle des trapèzes sur les noeuds 0..k; le terme
    diagonal vaut la demi-maille gauche (0 pour k = 0, donc S(t₀) = 0).
    """

    size = grid.size
    steps = np.diff(grid.nodes)
    weights = np.tril(np.broadcast_to(grid.weights, (size, size)), k=-1)
    diagonal = np.zeros(size)
    diagonal[1:] = 0.5 * steps
    weights[np.diag_indices(size)] = diagonal
    return weights


def anticipation_weights(grid: Grid) -> np.ndarray:
    """Matrice triangulaire supérieure des poids de ∫_{t_k}^T · ds.

    Avec `causal_weights`, la somme redonne w_j sur chaque ligne: G(0) est
    partagé moitié-moitié entre les deux termes au noeud s = t.
    """

    size = grid.size
    steps = np.diff(grid.nodes)
    weights = np.triu(np.broadcast_to(grid.weights, (size, size)), k=1)
    diagonal = np.zeros(size)
    diagonal[:-1] = 0.5 * steps
    weights[np.diag_indices(size)] = diagonal
    return weights


__all__ = ["Grid", "anticipation_weights", "causal_weights", "trapezoid_weights"]
