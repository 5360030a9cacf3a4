"""Solveur général: discrétisation de l'opérateur F et système de Fredholm augmenté.

(Fα)_i(t) = γ_i α_i(t) + ∫₀ᵗ G(t−s) Σ_l α_l(s) ds + ∫_t^T G(s−t) α_i(s) ds

L'équilibre vérifie (Fα*)_i ≡ η_i et ∫α*_i = x_i. Sur la grille, les inconnues
(α_0(t_·), …, α_n(t_·), η_0, …, η_n) forment un système carré de taille
(n+1)(m+1), résolu par LU dense avec pivot partiel.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_solve

from impactgame.engine.errors import ModelError
from impactgame.engine.grid import Grid
from impactgame.engine.model import (
    EquilibriumSolution,
    GameSpec,
    SolverKind,
    StrategyProfile,
    anticipation_impact_matrix,
    causal_impact_matrix,
    inventory_paths,
)
from impactgame.solvers.linear import factorize

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Réalisation de F sur une grille.

    `causal` et `anticipation` sont les blocs m × m communs à tous les
    investisseurs; `matrix` assemble la matrice dense ((n+1)m) × ((n+1)m).
    """

    grid: Grid
    gammas: np.ndarray
    causal: np.ndarray
    anticipation: np.ndarray

    @property
    def n_investors(self) -> int:
        return int(self.gammas.size)

    @property
    def matrix(self) -> np.ndarray:
        m = self.grid.size
        n = self.n_investors
        matrix = np.tile(self.causal, (n, n))
        for i, gamma in enumerate(self.gammas):
            block = slice(i * m, (i + 1) * m)
            matrix[block, block] += gamma * np.eye(m) + self.anticipation
        return matrix

    def _rates(self, profile: StrategyProfile | np.ndarray) -> np.ndarray:
        rates = profile.rates if isinstance(profile, StrategyProfile) else np.asarray(profile)
        rates = np.atleast_2d(rates)
        if rates.shape != (self.n_investors, self.grid.size):
            raise ModelError(
                f"profil de forme {rates.shape}, attendu {(self.n_investors, self.grid.size)}"
            )
        return rates

    def gamma_term(self, profile: StrategyProfile | np.ndarray) -> np.ndarray:
        """Γα(t_k)."""

        return self.gammas[:, None] * self._rates(profile)

    def causal_term(self, profile: StrategyProfile | np.ndarray) -> np.ndarray:
        """∫₀^{t_k} G(t_k−s) Σα(s) ds, identique pour chaque investisseur (= S(t_k))."""

        aggregate = self._rates(profile).sum(axis=0)
        return np.tile(self.causal @ aggregate, (self.n_investors, 1))

    def anticipation_term(self, profile: StrategyProfile | np.ndarray) -> np.ndarray:
        """∫_{t_k}^T G(s−t_k) α_i(s) ds."""

        return self._rates(profile) @ self.anticipation.T

    def apply(self, profile: StrategyProfile | np.ndarray) -> np.ndarray:
        """(Fα)_i(t_k), une ligne par investisseur."""

        return (
            self.gamma_term(profile)
            + self.causal_term(profile)
            + self.anticipation_term(profile)
        )


def discretize_operator(game: GameSpec, grid: Grid) -> DiscreteOperator:
    """Construit F sur `grid`; la grille doit couvrir exactement [0, T]."""

    if not np.isclose(grid.horizon, game.horizon, rtol=1e-12, atol=0.0):
        raise ModelError(
            f"la grille couvre [0, {grid.horizon!r}] mais l'horizon vaut {game.horizon!r}"
        )
    causal = causal_impact_matrix(game.kernel, grid)
    anticipation = anticipation_impact_matrix(game.kernel, grid)
    for values in (causal, anticipation):
        values.setflags(write=False)
    return DiscreteOperator(
        grid=grid, gammas=game.gammas, causal=causal, anticipation=anticipation
    )


def _augmented_system(
    operator: DiscreteOperator, targets: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    m = operator.grid.size
    n = operator.n_investors
    size = n * (m + 1)
    system = np.zeros((size, size))
    system[: n * m, : n * m] = operator.matrix
    for i in range(n):
        rows = slice(i * m, (i + 1) * m)
        system[rows, n * m + i] = -1.0
        system[n * m + i, rows] = operator.grid.weights
    rhs = np.zeros(size)
    rhs[n * m :] = targets
    return system, rhs


def solve_equilibrium_numeric(game: GameSpec, grid: Grid) -> EquilibriumSolution:
    """Résout le système de Fredholm augmenté par LU dense."""

    operator = discretize_operator(game, grid)
    targets = game.targets
    system, rhs = _augmented_system(operator, targets)
    factors, condition = factorize(system, "système augmenté")
    unknowns = lu_solve(factors, rhs)

    m = grid.size
    n = game.n_investors
    rates = unknowns[: n * m].reshape(n, m)
    eta = unknowns[n * m :]
    profile = StrategyProfile(grid=grid, rates=rates)
    residual = float(np.max(np.abs(operator.apply(profile) - eta[:, None])))
    logger.debug(
        "fredholm_solve investors=%d nodes=%d unknowns=%d condition=%.3e residual=%.3e",
        n,
        m,
        rhs.size,
        condition,
        residual,
    )
    return EquilibriumSolution(
        profile=profile,
        eta=eta,
        price=operator.causal @ profile.aggregate,
        inventories=inventory_paths(profile, targets),
        solver=SolverKind.FREDHOLM,
        residual=residual,
        condition_estimate=condition,
    )


def fredholm_residual(
    game: GameSpec,
    solution: EquilibriumSolution,
    grid: Grid | None = None,
) -> float:
    """max_{i,k} |(Fα*)_i(t_k) − η_i| sur la grille de la solution.

    Si `grid` est fourni, il doit coïncider avec la grille de la solution.
    """

    if grid is not None and not grid.matches(solution.grid):
        raise ModelError("la grille fournie ne correspond pas à celle de la solution")
    if solution.n_investors != game.n_investors:
        raise ModelError("la solution et le jeu n'ont pas le même nombre d'investisseurs")
    operator = discretize_operator(game, solution.grid)
    return float(np.max(np.abs(operator.apply(solution.profile) - solution.eta[:, None])))


__all__ = [
    "DiscreteOperator",
    "discretize_operator",
    "fredholm_residual",
    "solve_equilibrium_numeric",
]
