"""Types du jeu d'exécution et fonctionnelles du modèle.

- `InvestorSpec` / `GameSpec` : horizon, contraintes x_i, coûts γ_i et noyau
- `StrategyProfile` : vitesses α_i(t_k) échantillonnées sur une grille
- `EquilibriumSolution` : stratégies, multiplicateurs η, prix et inventaires
- `price_path`, `execution_cost`, `inventory_path`, `max_deviation`

La composante martingale S⁰ est identiquement nulle: le prix est l'impact seul.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from impactgame.engine.errors import ModelError
from impactgame.engine.grid import Grid, anticipation_weights, causal_weights
from impactgame.engine.kernels import DecayKernel, kernel_matrix


class SolverKind(str, Enum):
    """Provenance d'une solution d'équilibre."""

    CLOSED_FORM = "closed_form"
    FREDHOLM = "fredholm"

    @classmethod
    def parse(cls, value: "str | SolverKind") -> "SolverKind":
        """Accepte aussi la graphie CLI (`closed-form`)."""

        if isinstance(value, SolverKind):
            return value
        normalized = str(value).strip().lower().replace("-", "_")
        try:
            return cls(normalized)
        except ValueError as exc:
            raise ModelError(
                f"solveur inconnu: {value!r} (attendu: closed_form ou fredholm)"
            ) from exc


@dataclass(frozen=True)
class InvestorSpec:
    """Un investisseur: quantité nette x (négative = vente) et coût quadratique γ > 0."""

    x: float
    gamma: float

    def __post_init__(self) -> None:
        x = float(self.x)
        gamma = float(self.gamma)
        if not np.isfinite(x):
            raise ModelError(f"x doit être fini (reçu: {x})")
        if not np.isfinite(gamma) or gamma <= 0.0:
            raise ModelError(f"gamma doit être strictement positif (γ_i > 0, reçu: {gamma})")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "gamma", gamma)


@dataclass(frozen=True)
class GameSpec:
    """Jeu à n+1 investisseurs sur [0, T] sous un noyau d'impact commun."""

    horizon: float
    investors: Tuple[InvestorSpec, ...]
    kernel: DecayKernel

    def __post_init__(self) -> None:
        horizon = float(self.horizon)
        if not np.isfinite(horizon) or horizon <= 0.0:
            raise ModelError(f"horizon doit être strictement positif (reçu: {horizon})")
        investors = tuple(self.investors)
        if not investors:
            raise ModelError("au moins un investisseur est requis")
        for investor in investors:
            if not isinstance(investor, InvestorSpec):
                raise ModelError(f"investisseur invalide: {investor!r}")
        if not isinstance(self.kernel, DecayKernel):
            raise ModelError(f"noyau invalide: {self.kernel!r}")
        object.__setattr__(self, "horizon", horizon)
        object.__setattr__(self, "investors", investors)

    @classmethod
    def from_arrays(
        cls,
        horizon: float,
        targets: Iterable[float],
        gammas: Iterable[float],
        kernel: DecayKernel,
    ) -> "GameSpec":
        targets = tuple(targets)
        gammas = tuple(gammas)
        if len(targets) != len(gammas):
            raise ModelError("x et gamma doivent avoir la même longueur")
        investors = tuple(InvestorSpec(x=x, gamma=g) for x, g in zip(targets, gammas))
        return cls(horizon=horizon, investors=investors, kernel=kernel)

    @property
    def n_investors(self) -> int:
        return len(self.investors)

    @property
    def targets(self) -> np.ndarray:
        return np.array([investor.x for investor in self.investors])

    @property
    def gammas(self) -> np.ndarray:
        return np.array([investor.gamma for investor in self.investors])

    def scaled(self, factor: float) -> "GameSpec":
        """Même jeu avec toutes les contraintes multipliées par `factor`."""

        investors = tuple(InvestorSpec(x=factor * i.x, gamma=i.gamma) for i in self.investors)
        return GameSpec(horizon=self.horizon, investors=investors, kernel=self.kernel)


@dataclass(frozen=True, eq=False)
class StrategyProfile:
    """Vitesses de trading α_i(t_k), une ligne par investisseur."""

    grid: Grid
    rates: np.ndarray

    def __post_init__(self) -> None:
        rates = np.array(self.rates, dtype=np.float64, ndmin=2)
        if rates.ndim != 2 or rates.shape[1] != self.grid.size:
            raise ModelError(
                f"dimensions incohérentes: {rates.shape} "
                f"pour une grille de {self.grid.size} noeuds"
            )
        if rates.shape[0] < 1:
            raise ModelError("un profil contient au moins un investisseur")
        rates.setflags(write=False)
        object.__setattr__(self, "rates", rates)

    @property
    def n_investors(self) -> int:
        return int(self.rates.shape[0])

    @property
    def aggregate(self) -> np.ndarray:
        """Σ_i α_i(t_k)."""

        return self.rates.sum(axis=0)

    def scaled(self, factor: float) -> "StrategyProfile":
        return StrategyProfile(grid=self.grid, rates=factor * self.rates)

    def _check_index(self, investor: int) -> None:
        if not 0 <= investor < self.n_investors:
            raise ModelError(
                f"investisseur {investor} hors limites (0..{self.n_investors - 1})"
            )


@dataclass(frozen=True, eq=False)
class EquilibriumSolution:
    """Équilibre échantillonné et sa provenance."""

    profile: StrategyProfile
    eta: np.ndarray
    price: np.ndarray
    inventories: np.ndarray
    solver: SolverKind
    residual: float
    condition_estimate: float | None = None

    def __post_init__(self) -> None:
        eta = np.array(self.eta, dtype=np.float64).reshape(-1)
        price = np.array(self.price, dtype=np.float64).reshape(-1)
        inventories = np.array(self.inventories, dtype=np.float64, ndmin=2)
        n, m = self.profile.rates.shape
        if eta.shape != (n,) or price.shape != (m,) or inventories.shape != (n, m):
            raise ModelError("dimensions de la solution incohérentes avec le profil")
        for name, values in (("eta", eta), ("price", price), ("inventories", inventories)):
            values.setflags(write=False)
            object.__setattr__(self, name, values)
        object.__setattr__(self, "solver", SolverKind.parse(self.solver))
        object.__setattr__(self, "residual", float(self.residual))

    @property
    def grid(self) -> Grid:
        return self.profile.grid

    @property
    def rates(self) -> np.ndarray:
        return self.profile.rates

    @property
    def n_investors(self) -> int:
        return self.profile.n_investors

    def liquidation_gaps(self, targets: np.ndarray) -> np.ndarray:
        """|Σ_k w_k α_i(t_k) − x_i| par investisseur."""

        return liquidation_gaps(self.profile, targets)


@dataclass(frozen=True)
class CostBound:
    """Coût d'équilibre J_i et sa borne η_i x_i."""

    cost: float
    bound: float

    @property
    def gap(self) -> float:
        """η_i x_i − J_i, positif à l'équilibre."""

        return self.bound - self.cost


# ---------------------------------------------------------------------------
# Matrices de convolution partagées avec le solveur de Fredholm
# ---------------------------------------------------------------------------


def causal_impact_matrix(kernel: DecayKernel, grid: Grid) -> np.ndarray:
    """C_{kj} = w̃_{kj} G(t_k − t_j): quadrature de ∫₀^{t_k} G(t_k − s) · ds."""

    return kernel_matrix(kernel, grid.nodes) * causal_weights(grid)


def anticipation_impact_matrix(kernel: DecayKernel, grid: Grid) -> np.ndarray:
    """A_{kj}: quadrature de ∫_{t_k}^T G(s − t_k) · ds."""

    return kernel_matrix(kernel, grid.nodes) * anticipation_weights(grid)


# ---------------------------------------------------------------------------
# Fonctionnelles du modèle
# ---------------------------------------------------------------------------


def price_path(kernel: DecayKernel, profile: StrategyProfile) -> np.ndarray:
    """S(t_k) = ∫₀^{t_k} G(t_k − s) Σ_i α_i(s) ds, avec S(t₀) = 0."""

    return causal_impact_matrix(kernel, profile.grid) @ profile.aggregate


def execution_cost(
    investor: int,
    profile: StrategyProfile,
    kernel: DecayKernel,
    gamma: float,
    price: np.ndarray | None = None,
) -> float:
    """J_i = ∫₀ᵀ (γ_i/2 α_i² + α_i S) dt par la règle des trapèzes.

    `price` évite de recalculer S quand plusieurs coûts sont évalués.
    """

    profile._check_index(investor)
    if price is None:
        price = price_path(kernel, profile)
    rates = profile.rates[investor]
    integrand = 0.5 * gamma * rates**2 + rates * price
    return float(profile.grid.weights @ integrand)


def execution_costs(profile: StrategyProfile, game: GameSpec) -> np.ndarray:
    """Coûts J_i de tous les investisseurs du jeu."""

    if profile.n_investors != game.n_investors:
        raise ModelError("le profil et le jeu n'ont pas le même nombre d'investisseurs")
    price = price_path(game.kernel, profile)
    return np.array(
        [
            execution_cost(i, profile, game.kernel, investor.gamma, price=price)
            for i, investor in enumerate(game.investors)
        ]
    )


def inventory_path(investor: int, profile: StrategyProfile, x: float) -> np.ndarray:
    """X_i(t_k) = x_i − ∫₀^{t_k} α_i(s) ds (trapèzes cumulés)."""

    profile._check_index(investor)
    traded = cumulative_trapezoid(profile.rates[investor], profile.grid.nodes, initial=0.0)
    return float(x) - traded


def inventory_paths(profile: StrategyProfile, targets: np.ndarray) -> np.ndarray:
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != (profile.n_investors,):
        raise ModelError("une contrainte x_i par investisseur est requise")
    traded = cumulative_trapezoid(profile.rates, profile.grid.nodes, axis=1, initial=0.0)
    return targets[:, None] - traded


def liquidation_gaps(profile: StrategyProfile, targets: np.ndarray) -> np.ndarray:
    """|∫α_i − x_i| par investisseur, en quadrature sur la grille du profil."""

    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != (profile.n_investors,):
        raise ModelError("une contrainte x_i par investisseur est requise")
    return np.abs(profile.rates @ profile.grid.weights - targets)


def max_deviation(price: np.ndarray) -> float:
    """Σ = max_k |S(t_k) − S(t₀)|."""

    price = np.asarray(price, dtype=np.float64).reshape(-1)
    if price.size == 0:
        raise ModelError("la trajectoire de prix est vide")
    return float(np.max(np.abs(price - price[0])))


def cost_bound_gaps(solution: EquilibriumSolution, game: GameSpec) -> Tuple[CostBound, ...]:
    """Couples (J_i, η_i x_i): à l'équilibre J_i ≤ η_i x_i."""

    if solution.n_investors != game.n_investors:
        raise ModelError("la solution et le jeu n'ont pas le même nombre d'investisseurs")
    costs = execution_costs(solution.profile, game)
    bounds = solution.eta * game.targets
    return tuple(CostBound(cost=float(c), bound=float(b)) for c, b in zip(costs, bounds))


__all__ = [
    "CostBound",
    "EquilibriumSolution",
    "GameSpec",
    "InvestorSpec",
    "SolverKind",
    "StrategyProfile",
    "anticipation_impact_matrix",
    "causal_impact_matrix",
    "cost_bound_gaps",
    "execution_cost",
    "execution_costs",
    "inventory_path",
    "inventory_paths",
    "liquidation_gaps",
    "max_deviation",
    "price_path",
]
