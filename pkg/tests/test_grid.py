"""Tests de la grille de quadrature.

Objectifs:
- poids trapézoïdaux (Σw = T) et noeuds extrêmes exacts
- matrices causale et anticipative: somme égale à w_j sur chaque ligne
- validation des grilles invalides
"""

from __future__ import annotations

import numpy as np
import pytest

from impactgame.engine.errors import ModelError
from impactgame.engine.grid import Grid, anticipation_weights, causal_weights


def test_uniform_grid_endpoints_and_weights() -> None:
    grid = Grid.uniform(2.5, 11)
    assert grid.nodes[0] == 0.0
    assert grid.nodes[-1] == 2.5
    assert grid.horizon == 2.5
    assert len(grid) == 11
    assert grid.weights.sum() == pytest.approx(2.5, abs=1e-14)
    assert grid.weights[0] == pytest.approx(0.125)
    assert grid.weights[5] == pytest.approx(0.25)
    assert grid.is_uniform


def test_grid_arrays_are_read_only() -> None:
    grid = Grid.uniform(1.0, 5)
    with pytest.raises(ValueError):
        grid.nodes[1] = 0.3


def test_non_uniform_grid() -> None:
    grid = Grid(nodes=np.array([0.0, 0.1, 0.4, 1.0]))
    assert not grid.is_uniform
    assert np.allclose(grid.weights, [0.05, 0.2, 0.45, 0.3])


@pytest.mark.parametrize(
    "nodes",
    [[0.0], [0.1, 1.0], [0.0, 0.5, 0.5, 1.0], [0.0, np.inf]],
)
def test_invalid_nodes_are_rejected(nodes) -> None:
    with pytest.raises(ModelError):
        Grid(nodes=np.array(nodes))


def test_weights_must_sum_to_horizon() -> None:
    with pytest.raises(ModelError):
        Grid(nodes=np.array([0.0, 1.0]), weights=np.array([0.5, 0.6]))


def test_uniform_rejects_bad_arguments() -> None:
    with pytest.raises(ModelError):
        Grid.uniform(0.0, 10)
    with pytest.raises(ModelError):
        Grid.uniform(1.0, 1)


@pytest.fixture(scope="module")
def grid() -> Grid:
    return Grid(nodes=np.array([0.0, 0.2, 0.5, 0.6, 1.0]))


class TestConvolutionWeights:
    def test_causal_and_anticipation_rows_sum_to_weights(self, grid: Grid) -> None:
        total = causal_weights(grid) + anticipation_weights(grid)
        expected = np.broadcast_to(grid.weights, total.shape)
        assert np.allclose(total, expected, rtol=0.0, atol=1e-15)

    def test_causal_rows_integrate_up_to_node(self, grid: Grid) -> None:
        assert np.allclose(causal_weights(grid).sum(axis=1), grid.nodes, atol=1e-15)

    def test_anticipation_rows_integrate_from_node(self, grid: Grid) -> None:
        remaining = grid.horizon - grid.nodes
        assert np.allclose(anticipation_weights(grid).sum(axis=1), remaining, atol=1e-15)

    def test_first_price_row_is_empty(self, grid: Grid) -> None:
        assert np.all(causal_weights(grid)[0] == 0.0)
        assert np.all(anticipation_weights(grid)[-1] == 0.0)

    def test_triangular_structure(self, grid: Grid) -> None:
        assert np.all(np.triu(causal_weights(grid), k=1) == 0.0)
        assert np.all(np.tril(anticipation_weights(grid), k=-1) == 0.0)
