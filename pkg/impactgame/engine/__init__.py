"""Couche domaine: noyaux, grille, modèle du jeu et sérialisation."""

from . import defaults  # re-export for convenience
from .errors import ConfigError, ModelError, SolverError, SweepError
from .grid import Grid
from .kernels import (
    ConstantKernel,
    DecayKernel,
    ExponentialKernel,
    PowerLawKernel,
    TabulatedKernel,
)
from .model import EquilibriumSolution, GameSpec, InvestorSpec, SolverKind, StrategyProfile

__all__ = [
    "ConfigError",
    "ConstantKernel",
    "DecayKernel",
    "EquilibriumSolution",
    "ExponentialKernel",
    "GameSpec",
    "Grid",
    "InvestorSpec",
    "ModelError",
    "PowerLawKernel",
    "SolverError",
    "SolverKind",
    "StrategyProfile",
    "SweepError",
    "TabulatedKernel",
    "defaults",
]
