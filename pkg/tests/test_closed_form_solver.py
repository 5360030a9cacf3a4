"""Tests de l'équilibre explicite (noyau exponentiel).

Objectifs:
- matrices M et N1 de référence, formule du déterminant
- identités algébriques sur des paramètres tirés au hasard
- accord avec le solveur de Fredholm sur la même grille
- inventaires exacts, conditions terminales et dynamique de ψ*
- rejet des noyaux non exponentiels et de ρ = 0
"""

from __future__ import annotations

import numpy as np
import pytest

from impactgame.engine.errors import ModelError
from impactgame.engine.grid import Grid
from impactgame.engine.kernels import ConstantKernel, ExponentialKernel
from impactgame.engine.model import GameSpec, SolverKind, cost_bound_gaps
from impactgame.solvers.closed_form import (
    build_system_matrices,
    closed_form_price_gap,
    matrix_exponential,
    solve_equilibrium_exponential,
    verify_matrix_identities,
)
from impactgame.solvers.fredholm import solve_equilibrium_numeric

from .solver_test_utils import (
    COSTS_HIGH_GAMMA,
    COSTS_MID_GAMMA,
    FRONT_RUNNING,
    PRICE_PATHS,
    exponential_game,
    grid,
    single_investor,
    sup_diff,
)


def _front_running_game(n: int, params: dict) -> GameSpec:
    targets = [-1.0] + [0.0] * n
    gammas = [params["gamma_liq"]] + [params["gamma_opp"]] * n
    return exponential_game(targets, gammas, rho=params["rho"])


class TestSystemMatrices:
    def test_single_investor_reference_matrices(self) -> None:
        mats = build_system_matrices(single_investor(-1.0, 1.0, ExponentialKernel(rho=1.0)))
        assert np.array_equal(mats.M, [[1.0, 2.0], [1.0, -1.0]])
        assert np.array_equal(mats.N1, [[1.0, 1.0], [1.0, 1.0]])
        assert mats.determinant_formula() == pytest.approx(-3.0)
        assert np.linalg.det(mats.M) == pytest.approx(-3.0)

    def test_two_investor_determinant(self) -> None:
        mats = build_system_matrices(exponential_game([-1.0, 0.0], [1.0, 1.0], rho=1.0))
        assert mats.determinant_formula() == pytest.approx(-8.0)
        assert np.linalg.det(mats.M) == pytest.approx(-8.0)

    def test_shapes(self) -> None:
        mats = build_system_matrices(_front_running_game(3, FRONT_RUNNING))
        assert mats.dimension == 5
        assert mats.M.shape == mats.N1.shape == mats.N2.shape == (5, 5)
        assert mats.U.shape == mats.V.shape == mats.W.shape == (4, 5)
        assert np.array_equal(mats.x_tilde, [-1.0, 0.0, 0.0, 0.0, 0.0])

    def test_matrices_are_read_only(self) -> None:
        mats = build_system_matrices(single_investor(-1.0, 1.0, ExponentialKernel(rho=1.0)))
        with pytest.raises(ValueError):
            mats.M[0, 0] = 0.0

    def test_random_parameters_satisfy_identities(self) -> None:
        rng = np.random.default_rng(20240601)
        for _ in range(100):
            n_investors = int(rng.integers(1, 11))
            rho = float(rng.uniform(0.05, 3.0))
            gammas = rng.uniform(0.05, 3.0, size=n_investors)
            targets = rng.uniform(-2.0, 2.0, size=n_investors)
            mats = build_system_matrices(exponential_game(targets, gammas, rho=rho))
            identity = np.eye(mats.dimension)
            VtU = mats.V.T @ mats.U
            product = (mats.M - VtU) @ (mats.N1 - np.outer(mats.v, mats.v)) / rho
            assert np.max(np.abs(product - identity)) <= 1e-10
            MN1 = mats.M @ mats.N1
            scale = max(1.0, float(np.max(np.abs(MN1))))
            assert np.max(np.abs(VtU @ (identity + mats.N1) - MN1)) <= 1e-10 * scale
            expected = mats.determinant_formula()
            assert abs(np.linalg.det(mats.M) - expected) <= 1e-10 * abs(expected)

    def test_non_exponential_kernel_is_rejected(self) -> None:
        with pytest.raises(ModelError):
            build_system_matrices(single_investor(-1.0, 1.0, ConstantKernel()))

    def test_zero_rate_is_rejected(self) -> None:
        with pytest.raises(ModelError, match="rho"):
            build_system_matrices(single_investor(-1.0, 1.0, ExponentialKernel(rho=0.0)))

    def test_matrix_exponential_validates_input(self) -> None:
        with pytest.raises(ModelError):
            matrix_exponential(np.ones((2, 3)))
        assert np.allclose(matrix_exponential(np.zeros((3, 3))), np.eye(3))

    def test_matrix_exponential_of_diagonal(self) -> None:
        diagonal = np.array([-1.5, 0.0, 0.3, 2.0])
        expected = np.diag(np.exp(diagonal))
        assert np.allclose(matrix_exponential(np.diag(diagonal)), expected, rtol=1e-13, atol=0.0)

    def test_matrix_exponential_semigroup(self) -> None:
        M = build_system_matrices(_front_running_game(2, COSTS_HIGH_GAMMA)).M
        half = matrix_exponential(0.5 * M)
        full = matrix_exponential(M)
        scale = float(np.max(np.abs(full)))
        assert np.max(np.abs(half @ half - full)) <= 1e-12 * scale


class TestIdentityReport:
    def test_moderate_parameters(self) -> None:
        mats = build_system_matrices(_front_running_game(2, COSTS_HIGH_GAMMA))
        report = verify_matrix_identities(mats, horizon=1.0, grid_size=1001)
        assert report.inverse_identity <= 1e-10
        assert report.product_identity <= 1e-10
        assert report.determinant_gap <= 1e-10
        assert report.dynamics_residual <= 1e-4
        assert len(report.investor_dynamics_residuals) == 3
        assert max(report.investor_dynamics_residuals) <= 1e-4
        assert set(report.as_dict()) >= {"inverse_identity", "dynamics_residual"}


@pytest.fixture(scope="module")
def game() -> GameSpec:
    return _front_running_game(1, FRONT_RUNNING)


@pytest.fixture(scope="module")
def solution(game: GameSpec):
    return solve_equilibrium_exponential(game, grid(1001))


class TestExponentialEquilibrium:
    def test_provenance(self, solution) -> None:
        assert solution.solver is SolverKind.CLOSED_FORM
        assert solution.condition_estimate is not None

    def test_exact_inventories(self, game, solution) -> None:
        assert np.array_equal(solution.inventories[:, 0], game.targets)
        assert np.max(np.abs(solution.inventories[:, -1])) <= 1e-8

    def test_quadrature_liquidation(self, game, solution) -> None:
        # Écart de quadrature trapèze, d'ordre h²: ≈ 5e-6 à m = 1001.
        assert np.all(solution.liquidation_gaps(game.targets) <= 1e-5)
        coarse = solve_equilibrium_exponential(game, grid(501))
        ratio = coarse.liquidation_gaps(game.targets).max() / solution.liquidation_gaps(
            game.targets
        ).max()
        assert 3.0 <= ratio <= 5.0

    def test_price_starts_at_zero(self, solution) -> None:
        assert abs(solution.price[0]) <= 1e-10

    def test_price_matches_quadrature(self, game, solution) -> None:
        assert closed_form_price_gap(solution, game.kernel) <= 1e-3

    def test_fredholm_residual(self, solution) -> None:
        assert solution.residual <= 1e-3

    def test_agrees_with_fredholm(self, game, solution) -> None:
        numeric = solve_equilibrium_numeric(game, solution.grid)
        assert sup_diff(solution.rates, numeric.rates) <= 1e-3
        assert sup_diff(solution.eta, numeric.eta) <= 1e-3

    def test_cost_bounds(self, game, solution) -> None:
        for bound in cost_bound_gaps(solution, game):
            assert bound.cost <= bound.bound + 1e-6

    def test_grid_must_cover_horizon(self, game) -> None:
        with pytest.raises(ModelError):
            solve_equilibrium_exponential(game, Grid.uniform(2.0, 11))


@pytest.mark.parametrize(
    ("n", "params", "size"),
    [
        (0, COSTS_HIGH_GAMMA, 1001),
        (1, COSTS_HIGH_GAMMA, 1001),
        (1, PRICE_PATHS, 1001),
        (0, FRONT_RUNNING, 1001),
        (5, COSTS_HIGH_GAMMA, 401),
        (5, COSTS_MID_GAMMA, 401),
        (5, FRONT_RUNNING, 1001),
        (25, COSTS_HIGH_GAMMA, 201),
    ],
)
def test_cross_solver_agreement(n: int, params: dict, size: int) -> None:
    game = _front_running_game(n, params)
    g = grid(size)
    closed = solve_equilibrium_exponential(game, g)
    numeric = solve_equilibrium_numeric(game, g)
    assert sup_diff(closed.rates, numeric.rates) <= 1e-3


def test_single_investor_time_symmetry() -> None:
    game = single_investor(-1.0, 0.5, ExponentialKernel(rho=1.5))
    rates = solve_equilibrium_exponential(game, grid(1001)).rates[0]
    assert np.max(np.abs(rates - rates[::-1])) <= 1e-8


def test_linearity_in_targets() -> None:
    game = _front_running_game(2, FRONT_RUNNING)
    g = grid(501)
    base = solve_equilibrium_exponential(game, g)
    scaled = solve_equilibrium_exponential(game.scaled(3.0), g)
    scale = max(1.0, float(np.max(np.abs(base.rates))))
    assert sup_diff(scaled.rates, 3.0 * base.rates) <= 1e-10 * 3.0 * scale


def test_homogeneous_opportunists() -> None:
    solution = solve_equilibrium_exponential(_front_running_game(5, FRONT_RUNNING), grid(1001))
    opportunists = solution.rates[1:]
    scale = max(1.0, float(np.max(np.abs(solution.rates))))
    assert np.max(np.abs(opportunists - opportunists[0])) <= 1e-9 * scale


def test_zero_targets_give_zero_solution() -> None:
    game = exponential_game([0.0, 0.0, 0.0], [1.0, 0.1, 0.1], rho=0.95)
    solution = solve_equilibrium_exponential(game, grid(101))
    assert np.all(solution.rates == 0.0)
    assert np.all(solution.price == 0.0)
    assert np.all(solution.eta == 0.0)
