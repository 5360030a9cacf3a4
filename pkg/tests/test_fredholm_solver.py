"""Tests du solveur de Fredholm (système augmenté, LU dense).

Objectifs:
- solution analytique du noyau constant pour un investisseur seul
- résidu, contraintes de liquidation et borne J_i ≤ η_i x_i
- symétrie temporelle, investisseurs homogènes, linéarité en x
- permutation des investisseurs, contraintes nulles
- convergence d'ordre deux en raffinant la grille
- erreurs: horizon incohérent, système singulier ou mal conditionné
"""

from __future__ import annotations

import numpy as np
import pytest

from impactgame.engine.errors import ModelError, SolverError
from impactgame.engine.grid import Grid
from impactgame.engine.kernels import ExponentialKernel, PowerLawKernel, kernel_matrix
from impactgame.engine.model import (
    GameSpec,
    SolverKind,
    cost_bound_gaps,
    execution_costs,
)
from impactgame.solvers.fredholm import (
    discretize_operator,
    fredholm_residual,
    solve_equilibrium_numeric,
)
from impactgame.solvers.linear import factorize

from .solver_test_utils import FRONT_RUNNING, exponential_game, grid, single_investor, sup_diff


@pytest.fixture(scope="module")
def constant_solution():
    return solve_equilibrium_numeric(single_investor(-1.0, 1.0), grid(1001))


class TestConstantKernelSolution:
    """α ≡ x/T et η = γx/T + x sont exacts sur la grille."""

    def test_rate_is_constant(self, constant_solution) -> None:
        assert constant_solution.solver is SolverKind.FREDHOLM
        assert np.max(np.abs(constant_solution.rates[0] + 1.0)) <= 1e-8

    def test_multiplier(self, constant_solution) -> None:
        assert constant_solution.eta[0] == pytest.approx(-2.0, abs=1e-8)

    def test_cost(self, constant_solution) -> None:
        cost = execution_costs(constant_solution.profile, single_investor(-1.0, 1.0))[0]
        assert cost == pytest.approx(1.0, abs=1e-8)

    def test_inventory_and_price(self, constant_solution) -> None:
        nodes = constant_solution.grid.nodes
        assert np.max(np.abs(constant_solution.inventories[0] - (-1.0 + nodes))) <= 1e-8
        assert np.max(np.abs(constant_solution.price + nodes)) <= 1e-8

    def test_non_uniform_grid(self) -> None:
        nodes = np.concatenate(
            [np.linspace(0.0, 0.2, 50, endpoint=False), np.linspace(0.2, 1.0, 81)]
        )
        game = single_investor(-1.0, 0.5)
        solution = solve_equilibrium_numeric(game, Grid(nodes=nodes))
        assert np.max(np.abs(solution.rates[0] + 1.0)) <= 1e-8
        assert solution.eta[0] == pytest.approx(-1.5, abs=1e-8)


class TestDiscreteOperator:
    def test_single_investor_symmetric_form(self) -> None:
        g = grid(201)
        game = single_investor(-1.0, 0.7, ExponentialKernel(rho=1.3))
        operator = discretize_operator(game, g)
        rates = np.sin(3.0 * g.nodes)[None, :]
        expected = 0.7 * rates[0] + (kernel_matrix(game.kernel, g.nodes) * g.weights) @ rates[0]
        assert np.max(np.abs(operator.apply(rates)[0] - expected)) <= 1e-12

    def test_terms_add_up(self) -> None:
        g = grid(101)
        game = exponential_game([-1.0, 0.0], [0.1, 0.2], rho=0.95)
        operator = discretize_operator(game, g)
        rates = np.vstack([np.cos(g.nodes), g.nodes**2])
        total = (
            operator.gamma_term(rates)
            + operator.causal_term(rates)
            + operator.anticipation_term(rates)
        )
        assert np.allclose(operator.apply(rates), total, rtol=0.0, atol=1e-14)
        blocks = operator.matrix @ rates.reshape(-1)
        assert np.allclose(blocks, total.reshape(-1), rtol=0.0, atol=1e-12)

    def test_horizon_mismatch(self) -> None:
        with pytest.raises(ModelError):
            discretize_operator(single_investor(), Grid.uniform(2.0, 11))


@pytest.fixture(scope="module")
def game() -> GameSpec:
    return exponential_game([-1.0, 0.0], [FRONT_RUNNING["gamma_liq"]] * 2, rho=0.95)


@pytest.fixture(scope="module")
def solution(game: GameSpec):
    return solve_equilibrium_numeric(game, grid(1001))


class TestEquilibriumProperties:
    def test_residual(self, game, solution) -> None:
        assert solution.residual <= 1e-9
        assert fredholm_residual(game, solution) == pytest.approx(solution.residual)

    def test_liquidation_constraints(self, game, solution) -> None:
        assert np.all(solution.liquidation_gaps(game.targets) <= 1e-8)
        assert np.max(np.abs(solution.inventories[:, -1])) <= 1e-8

    def test_cost_bounds(self, game, solution) -> None:
        for bound in cost_bound_gaps(solution, game):
            assert bound.cost <= bound.bound + 1e-6
        # L'opportuniste gagne de l'argent.
        assert cost_bound_gaps(solution, game)[1].cost < 0.0

    def test_condition_estimate_is_reported(self, solution) -> None:
        assert solution.condition_estimate is not None
        assert 1.0 <= solution.condition_estimate < 1e14

    def test_linearity_in_targets(self, game, solution) -> None:
        scaled = solve_equilibrium_numeric(game.scaled(-2.5), solution.grid)
        scale = max(1.0, float(np.max(np.abs(solution.rates))))
        assert sup_diff(scaled.rates, -2.5 * solution.rates) <= 1e-10 * 2.5 * scale
        assert sup_diff(scaled.eta, -2.5 * solution.eta) <= 1e-10 * 2.5 * scale

    def test_residual_rejects_foreign_grid(self, game, solution) -> None:
        with pytest.raises(ModelError):
            fredholm_residual(game, solution, grid=grid(11))

    def test_investor_order_is_irrelevant(self) -> None:
        targets = np.array([-1.0, 0.5, 0.0])
        gammas = np.array([0.1, 0.3, 0.2])
        order = [2, 0, 1]
        g = grid(201)
        base = solve_equilibrium_numeric(exponential_game(targets, gammas, rho=0.95), g)
        permuted = solve_equilibrium_numeric(
            exponential_game(targets[order], gammas[order], rho=0.95), g
        )
        scale = max(1.0, float(np.max(np.abs(base.rates))))
        assert sup_diff(permuted.rates, base.rates[order]) <= 1e-9 * scale
        assert sup_diff(permuted.eta, base.eta[order]) <= 1e-9 * scale
        assert sup_diff(permuted.price, base.price) <= 1e-9 * scale

    def test_zero_targets_give_zero_solution(self) -> None:
        game = exponential_game([0.0, 0.0, 0.0], [1.0, 0.1, 0.1], rho=0.95)
        zero = solve_equilibrium_numeric(game, grid(101))
        assert np.max(np.abs(zero.rates)) <= 1e-10
        assert np.max(np.abs(zero.eta)) <= 1e-10
        assert np.max(np.abs(zero.price)) <= 1e-10


def test_single_investor_time_symmetry() -> None:
    game = single_investor(-1.0, 0.3, ExponentialKernel(rho=2.0))
    rates = solve_equilibrium_numeric(game, grid(1001)).rates[0]
    assert np.max(np.abs(rates - rates[::-1])) <= 1e-8


def test_power_law_single_investor_time_symmetry() -> None:
    game = single_investor(-1.0, 1.0, PowerLawKernel(delta=0.5))
    rates = solve_equilibrium_numeric(game, grid(401)).rates[0]
    assert np.max(np.abs(rates - rates[::-1])) <= 1e-8


def test_homogeneous_investors_trade_identically() -> None:
    game = exponential_game([-1.0, 0.0, 0.0, 0.0], [1.0, 0.5, 0.5, 0.5], rho=0.1)
    solution = solve_equilibrium_numeric(game, grid(301))
    opportunists = solution.rates[1:]
    scale = max(1.0, float(np.max(np.abs(solution.rates))))
    assert np.max(np.abs(opportunists - opportunists[0])) <= 1e-9 * scale


def test_second_order_grid_convergence() -> None:
    game = exponential_game([-1.0, 0.0], [0.1, 0.1], rho=0.95)
    coarse = solve_equilibrium_numeric(game, grid(251)).rates
    medium = solve_equilibrium_numeric(game, grid(501)).rates
    fine = solve_equilibrium_numeric(game, grid(1001)).rates
    first = sup_diff(medium[:, ::2], coarse)
    second = sup_diff(fine[:, ::4], medium[:, ::2])
    assert second <= first / 3.0


class TestFactorization:
    def test_singular_system(self) -> None:
        with pytest.raises(SolverError):
            factorize(np.zeros((3, 3)), "système test")

    def test_ill_conditioned_system_reports_condition(self) -> None:
        system = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-15]])
        with pytest.raises(SolverError, match="conditionnement") as excinfo:
            factorize(system, "système test")
        assert excinfo.value.condition is not None
        assert excinfo.value.condition > 1e14

    def test_well_conditioned_system(self) -> None:
        _, condition = factorize(np.array([[2.0, 0.0], [0.0, 1.0]]), "système test")
        assert condition == pytest.approx(2.0)
