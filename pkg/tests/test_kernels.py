"""Tests des noyaux de décroissance et du test de type positif.

Objectifs:
- valeurs de référence des quatre familles de noyaux
- rejet des temps négatifs et de l'extrapolation d'un noyau tabulé
- verdict spectral: exponentiel et constant acceptés, noyau croissant refusé,
  verdict inchangé en doublant la grille
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from impactgame.engine.errors import KernelExtrapolationError, ModelError
from impactgame.engine.grid import Grid
from impactgame.engine.kernels import (
    ConstantKernel,
    ExponentialKernel,
    PowerLawKernel,
    TabulatedKernel,
    check_positive_type,
    check_positive_type_over_horizons,
    eval_kernel,
    gram_matrix,
    kernel_matrix,
    tabulated,
)


class TestEvaluation:
    def test_exponential_reference_value(self) -> None:
        assert eval_kernel(ExponentialKernel(rho=0.95), 1.0) == pytest.approx(
            math.exp(-0.95), abs=1e-15
        )

    def test_scalar_input_returns_float(self) -> None:
        value = eval_kernel(ExponentialKernel(rho=2.0), 0.0)
        assert isinstance(value, float)
        assert value == 1.0

    def test_zero_rate_matches_constant_kernel(self) -> None:
        times = np.linspace(0.0, 5.0, 11)
        exponential = eval_kernel(ExponentialKernel(rho=0.0), times)
        constant = eval_kernel(ConstantKernel(), times)
        assert np.max(np.abs(exponential - constant)) <= 1e-15

    def test_power_law_reference_value(self) -> None:
        assert eval_kernel(PowerLawKernel(delta=0.5), 3.0) == pytest.approx(0.5)

    def test_callable_shortcut(self) -> None:
        kernel = ExponentialKernel(rho=1.0)
        assert kernel(2.0) == pytest.approx(math.exp(-2.0))

    def test_negative_time_is_rejected(self) -> None:
        with pytest.raises(ModelError):
            eval_kernel(ExponentialKernel(rho=1.0), -0.5)

    def test_non_finite_time_is_rejected(self) -> None:
        with pytest.raises(ModelError):
            eval_kernel(ConstantKernel(), float("nan"))

    def test_negative_rate_is_rejected(self) -> None:
        with pytest.raises(ModelError):
            ExponentialKernel(rho=-1.0)

    def test_kernel_matrix_is_symmetric_with_unit_diagonal(self) -> None:
        nodes = np.linspace(0.0, 1.0, 7)
        matrix = kernel_matrix(ExponentialKernel(rho=0.5), nodes)
        assert np.array_equal(matrix, matrix.T)
        assert np.all(np.diag(matrix) == 1.0)


class TestTabulatedKernel:
    def test_linear_interpolation_between_samples(self) -> None:
        kernel = tabulated([[0.0, 1.0], [1.0, 0.5], [2.0, 0.25]])
        assert kernel(0.5) == pytest.approx(0.75)
        assert kernel(1.5) == pytest.approx(0.375)

    def test_extrapolation_is_an_error(self) -> None:
        kernel = tabulated([[0.0, 1.0], [1.0, 0.5]])
        with pytest.raises(KernelExtrapolationError):
            kernel(1.5)

    @pytest.mark.parametrize(
        "samples",
        [
            ((0.0, 1.0),),
            ((0.1, 1.0), (1.0, 0.5)),
            ((0.0, 1.0), (0.0, 0.5)),
            ((0.0, 1.0), (1.0, -0.1)),
        ],
    )
    def test_invalid_samples_are_rejected(self, samples) -> None:
        with pytest.raises(ModelError):
            TabulatedKernel(samples=samples)


class TestPositiveType:
    def test_exponential_kernel_is_positive_type(self) -> None:
        report = check_positive_type(ExponentialKernel(rho=0.95), horizon=1.0)
        assert report.is_positive_type
        assert report.grid_size == 200

    def test_verdict_survives_refinement(self) -> None:
        report = check_positive_type(ExponentialKernel(rho=0.95), horizon=1.0, grid_size=400)
        assert report.is_positive_type

    def test_constant_kernel_is_positive_type(self) -> None:
        report = check_positive_type(ConstantKernel(), horizon=1.0)
        assert report.is_positive_type
        assert report.max_eigenvalue == pytest.approx(1.0)

    @pytest.mark.parametrize(
        ("kernel", "expected"),
        [(ConstantKernel(), True), (tabulated([[0.0, 0.0], [2.0, 2.0]]), False)],
    )
    def test_verdict_is_stable_from_m_to_2m(self, kernel, expected: bool) -> None:
        coarse = check_positive_type(kernel, horizon=1.0, grid_size=200)
        fine = check_positive_type(kernel, horizon=1.0, grid_size=400)
        assert coarse.is_positive_type is expected
        assert fine.is_positive_type is expected

    def test_gram_matrix_is_exactly_symmetric(self) -> None:
        nodes = np.array([0.0, 0.13, 0.4, 0.41, 0.77, 1.0])
        for kernel in (ExponentialKernel(rho=0.95), PowerLawKernel(delta=0.5), ConstantKernel()):
            gram = gram_matrix(kernel, Grid(nodes=nodes))
            assert np.max(np.abs(gram - gram.T)) == 0.0

    def test_power_law_kernel_is_positive_type(self) -> None:
        assert check_positive_type(PowerLawKernel(delta=0.5), horizon=2.0).is_positive_type

    def test_increasing_kernel_is_rejected(self) -> None:
        kernel = tabulated([[0.0, 0.0], [2.0, 2.0]])
        report = check_positive_type(kernel, horizon=1.0)
        assert not report.is_positive_type
        assert report.min_eigenvalue < -report.tolerance

    def test_explicit_tolerance_is_reported(self) -> None:
        report = check_positive_type(ConstantKernel(), horizon=1.0, tolerance=1e-6)
        assert report.tolerance == 1e-6
        assert report.as_dict()["tolerance"] == 1e-6

    def test_multiple_horizons(self) -> None:
        reports = check_positive_type_over_horizons(
            ExponentialKernel(rho=1.0), [0.5, 1.0, 4.0], grid_size=100
        )
        assert [report.horizon for report in reports] == [0.5, 1.0, 4.0]
        assert all(report.is_positive_type for report in reports)

    def test_grid_size_must_allow_a_grid(self) -> None:
        with pytest.raises(ModelError):
            check_positive_type(ConstantKernel(), horizon=1.0, grid_size=1)
