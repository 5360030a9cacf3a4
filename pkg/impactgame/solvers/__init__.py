"""Solveurs d'équilibre: forme explicite (noyau exponentiel) et Fredholm (noyau général)."""

from .closed_form import (
    SystemMatrices,
    build_system_matrices,
    solve_equilibrium_exponential,
    verify_matrix_identities,
)
from .fredholm import (
    DiscreteOperator,
    discretize_operator,
    fredholm_residual,
    solve_equilibrium_numeric,
)

__all__ = [
    "DiscreteOperator",
    "SystemMatrices",
    "build_system_matrices",
    "discretize_operator",
    "fredholm_residual",
    "solve_equilibrium_exponential",
    "solve_equilibrium_numeric",
    "verify_matrix_identities",
]
