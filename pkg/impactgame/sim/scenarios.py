"""Scénarios d'anticipation d'ordre (front-running).

L'investisseur 0 liquide une position x₀ (vente si x₀ < 0); les n autres
investisseurs, opportunistes, ont une contrainte nette nulle et partagent le
même coût γ₁. Le rapport de scénario expose:

- les coûts J_i, le coût total du liquidateur et celui des opportunistes
- l'inventaire agrégé des opportunistes X̄(t) = Σ_{i≥1} X_i(t)
- l'écart maximal de prix Σ = max |S(t) − S(0)|
- le nombre de changements de signe de ᾱ = Σ_{i≥1} α_i
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, replace
from typing import Any, Iterable, Optional, Sequence, Tuple

import numpy as np

from impactgame.app.event_bus import EventBus
from impactgame.engine.defaults import DEFAULT_GRID_SIZE, Tolerances
from impactgame.engine.errors import ModelError, SolverError
from impactgame.engine.grid import Grid
from impactgame.engine.kernels import ConstantKernel, DecayKernel, ExponentialKernel
from impactgame.engine.model import (
    EquilibriumSolution,
    GameSpec,
    InvestorSpec,
    SolverKind,
    StrategyProfile,
    execution_costs,
    max_deviation,
    price_path,
)
from impactgame.sim.parallel import ExecutorKind, ParallelSweepRunner
from impactgame.solvers.closed_form import solve_equilibrium_exponential
from impactgame.solvers.fredholm import solve_equilibrium_numeric

logger = logging.getLogger(__name__)

SWEEP_PARAMETERS: Tuple[str, ...] = ("n", "gamma_opp", "rho")


@dataclass(frozen=True)
class FrontRunningScenario:
    """Un liquidateur (x_liq, γ₀) face à n opportunistes (0, γ₁), noyau e^{−ρt}."""

    n_opportunists: int
    gamma_liq: float
    gamma_opp: float
    rho: float
    horizon: float = 1.0
    x_liq: float = -1.0

    def __post_init__(self) -> None:
        count = self.n_opportunists
        if isinstance(count, bool) or int(count) != count or count < 0:
            raise ModelError(f"n_opportunists doit être un entier positif ou nul (reçu: {count})")
        object.__setattr__(self, "n_opportunists", int(count))
        for name in ("gamma_liq", "gamma_opp", "rho", "horizon"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value <= 0.0:
                raise ModelError(f"{name} doit être strictement positif (reçu: {value})")
            object.__setattr__(self, name, value)
        x_liq = float(self.x_liq)
        if not np.isfinite(x_liq):
            raise ModelError(f"x_liq doit être fini (reçu: {x_liq})")
        object.__setattr__(self, "x_liq", x_liq)

    def with_value(self, parameter: str, value: Any) -> "FrontRunningScenario":
        """Copie du scénario où `parameter` ∈ {n, gamma_opp, rho} vaut `value`."""

        if parameter == "n":
            return replace(self, n_opportunists=value)
        if parameter == "gamma_opp":
            return replace(self, gamma_opp=value)
        if parameter == "rho":
            return replace(self, rho=value)
        raise ModelError(
            f"paramètre de balayage inconnu: {parameter!r} "
            f"(attendu: {', '.join(SWEEP_PARAMETERS)})"
        )

    def as_dict(self) -> dict[str, Any]:
        return {
            "n_opportunists": self.n_opportunists,
            "gamma_liq": self.gamma_liq,
            "gamma_opp": self.gamma_opp,
            "rho": self.rho,
            "horizon": self.horizon,
            "x_liq": self.x_liq,
        }


@dataclass(frozen=True, eq=False)
class ScenarioReport:
    """Métriques d'un scénario résolu."""

    scenario: FrontRunningScenario
    costs: Tuple[float, ...]
    aggregate_inventory: np.ndarray
    aggregate_rate: np.ndarray
    sigma: float
    sign_changes: int
    solution: EquilibriumSolution
    terminal_inventory_gap: float
    liquidated: bool
    swept_value: Any = None

    @property
    def liquidator_cost(self) -> float:
        return self.costs[0]

    @property
    def opportunist_total_cost(self) -> float:
        return float(sum(self.costs[1:]))

    @property
    def opportunist_cost_each(self) -> float:
        """Coût d'un opportuniste (tous identiques); 0 sans opportuniste."""

        return self.costs[1] if len(self.costs) > 1 else 0.0

    @property
    def price(self) -> np.ndarray:
        return self.solution.price

    def as_row(self) -> Tuple[float, ...]:
        """Ligne `swept_value,J_liq,J_opp_total,J_opp_each,sigma,sign_changes`."""

        return (
            float(self.swept_value) if self.swept_value is not None else float("nan"),
            self.liquidator_cost,
            self.opportunist_total_cost,
            self.opportunist_cost_each,
            self.sigma,
            float(self.sign_changes),
        )

    def as_dict(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario.as_dict(),
            "swept_value": self.swept_value,
            "costs": list(self.costs),
            "J_liq": self.liquidator_cost,
            "J_opp_total": self.opportunist_total_cost,
            "J_opp_each": self.opportunist_cost_each,
            "sigma": self.sigma,
            "sign_changes": self.sign_changes,
            "min_aggregate_inventory": float(np.min(self.aggregate_inventory)),
            "max_aggregate_inventory": float(np.max(self.aggregate_inventory)),
            "terminal_inventory_gap": self.terminal_inventory_gap,
            "liquidated": self.liquidated,
        }


def build_scenario(scenario: FrontRunningScenario) -> GameSpec:
    """Jeu à n+1 investisseurs, liquidateur en premier."""

    investors = [InvestorSpec(x=scenario.x_liq, gamma=scenario.gamma_liq)]
    investors.extend(
        InvestorSpec(x=0.0, gamma=scenario.gamma_opp) for _ in range(scenario.n_opportunists)
    )
    return GameSpec(
        horizon=scenario.horizon,
        investors=tuple(investors),
        kernel=ExponentialKernel(rho=scenario.rho),
    )


def count_sign_changes(values: np.ndarray, dead_band: float) -> int:
    """Nombre d'alternances de signe en ignorant les valeurs |v| ≤ dead_band."""

    values = np.asarray(values, dtype=np.float64)
    signs = np.sign(values[np.abs(values) > dead_band])
    if signs.size < 2:
        return 0
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def solve_game(game: GameSpec, grid: Grid, solver: SolverKind | str) -> EquilibriumSolution:
    """Délègue au solveur demandé."""

    kind = SolverKind.parse(solver)
    if kind is SolverKind.CLOSED_FORM:
        return solve_equilibrium_exponential(game, grid)
    return solve_equilibrium_numeric(game, grid)


def _check_homogeneous(rates: np.ndarray, tolerance: float) -> None:
    """Les opportunistes (lignes 1..n) doivent être identiques noeud par noeud."""

    if rates.shape[0] < 3:
        return
    opportunists = rates[1:]
    deviation = float(np.max(np.abs(opportunists - opportunists[0])))
    scale = max(1.0, float(np.max(np.abs(rates))))
    if deviation > tolerance * scale:
        raise SolverError(
            f"stratégies d'opportunistes non identiques (écart {deviation:.3e})"
        )


def analyze_scenario(
    scenario: FrontRunningScenario,
    grid: Optional[Grid] = None,
    solver: SolverKind | str = SolverKind.CLOSED_FORM,
    tolerances: Tolerances = Tolerances(),
    swept_value: Any = None,
) -> ScenarioReport:
    """Résout le scénario et assemble ses métriques."""

    if grid is None:
        grid = Grid.uniform(scenario.horizon, DEFAULT_GRID_SIZE)
    game = build_scenario(scenario)
    solution = solve_game(game, grid, solver)
    _check_homogeneous(solution.rates, tolerances.homogeneity)

    costs = tuple(float(c) for c in execution_costs(solution.profile, game))
    aggregate_rate = solution.rates[1:].sum(axis=0)
    aggregate_inventory = solution.inventories[1:].sum(axis=0)
    terminal_gap = float(np.max(np.abs(solution.inventories[:, -1])))
    report = ScenarioReport(
        scenario=scenario,
        costs=costs,
        aggregate_inventory=aggregate_inventory,
        aggregate_rate=aggregate_rate,
        sigma=max_deviation(solution.price),
        sign_changes=count_sign_changes(aggregate_rate, tolerances.dead_band),
        solution=solution,
        terminal_inventory_gap=terminal_gap,
        liquidated=terminal_gap <= tolerances.liquidation,
        swept_value=swept_value,
    )
    logger.debug(
        "scenario n=%d gamma_opp=%g rho=%g J_liq=%.6g sigma=%.6g",
        scenario.n_opportunists,
        scenario.gamma_opp,
        scenario.rho,
        report.liquidator_cost,
        report.sigma,
    )
    return report


def _analyze_member(
    template: FrontRunningScenario,
    parameter: str,
    grid: Grid,
    solver: SolverKind,
    tolerances: Tolerances,
    value: Any,
) -> ScenarioReport:
    scenario = template.with_value(parameter, value)
    return analyze_scenario(scenario, grid, solver, tolerances, swept_value=value)


def sweep(
    template: FrontRunningScenario,
    parameter: str,
    values: Sequence[Any],
    grid: Optional[Grid] = None,
    solver: SolverKind | str = SolverKind.CLOSED_FORM,
    tolerances: Tolerances = Tolerances(),
    *,
    jobs: int = 1,
    executor_kind: ExecutorKind = "thread",
    event_bus: Optional[EventBus] = None,
) -> Tuple[ScenarioReport, ...]:
    """Un rapport par valeur, dans l'ordre des valeurs.

    Les valeurs sont validées avant toute résolution (`ModelError`); un échec
    de résolution lève `SweepError` avec la valeur fautive.
    """

    if parameter not in SWEEP_PARAMETERS:
        raise ModelError(
            f"paramètre de balayage inconnu: {parameter!r} "
            f"(attendu: {', '.join(SWEEP_PARAMETERS)})"
        )
    values = tuple(values)
    if not values:
        raise ModelError("le balayage requiert au moins une valeur")
    for value in values:
        template.with_value(parameter, value)
    if parameter == "n":
        values = tuple(int(value) for value in values)

    if grid is None:
        grid = Grid.uniform(template.horizon, DEFAULT_GRID_SIZE)
    task = functools.partial(
        _analyze_member, template, parameter, grid, SolverKind.parse(solver), tolerances
    )
    runner: ParallelSweepRunner[ScenarioReport] = ParallelSweepRunner(
        task=task,
        parameter=parameter,
        values=values,
        jobs=jobs,
        executor_kind=executor_kind,
        event_bus=event_bus,
    )
    return runner.run().results


@dataclass(frozen=True, eq=False)
class IllustrationCurve:
    """Prix de l'illustration à vitesse constante pour un taux ρ."""

    rho: float
    kernel: DecayKernel
    price: np.ndarray


def illustration_profile(grid: Grid) -> StrategyProfile:
    """α₀ = −2 sur [0, T/2], 0 ensuite (vente de 1 sur un horizon unitaire)."""

    rates = np.where(grid.nodes <= 0.5 * grid.horizon, -2.0, 0.0)
    return StrategyProfile(grid=grid, rates=rates[None, :])


def transient_impact_illustration(
    rhos: Iterable[float],
    grid: Optional[Grid] = None,
) -> Tuple[IllustrationCurve, ...]:
    """Courbes de prix d'un investisseur seul pour plusieurs ρ (ρ = 0: noyau constant)."""

    if grid is None:
        grid = Grid.uniform(1.0, DEFAULT_GRID_SIZE)
    profile = illustration_profile(grid)
    curves = []
    for rho in rhos:
        rho = float(rho)
        kernel: DecayKernel = ConstantKernel() if rho == 0.0 else ExponentialKernel(rho=rho)
        curves.append(IllustrationCurve(rho=rho, kernel=kernel, price=price_path(kernel, profile)))
    if not curves:
        raise ModelError("au moins un taux ρ est requis")
    return tuple(curves)


__all__ = [
    "FrontRunningScenario",
    "IllustrationCurve",
    "SWEEP_PARAMETERS",
    "ScenarioReport",
    "analyze_scenario",
    "build_scenario",
    "count_sign_changes",
    "illustration_profile",
    "solve_game",
    "sweep",
    "transient_impact_illustration",
]
