"""Utilitaires partagés par les tests des solveurs et des scénarios.

Jeux de paramètres de référence (front-running et coûts) et constructeurs de
jeux simples pour rendre les comparaisons numériques lisibles.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from impactgame.engine.grid import Grid
from impactgame.engine.kernels import ConstantKernel, DecayKernel, ExponentialKernel
from impactgame.engine.model import GameSpec
from impactgame.sim.scenarios import FrontRunningScenario

# (γ₀, γ₁, ρ)
FRONT_RUNNING = dict(gamma_liq=0.1, gamma_opp=0.1, rho=0.95)
COSTS_HIGH_GAMMA = dict(gamma_liq=1.0, gamma_opp=1.0, rho=0.1)
COSTS_MID_GAMMA = dict(gamma_liq=1.0, gamma_opp=0.5, rho=0.1)
COSTS_LOW_GAMMA = dict(gamma_liq=1.0, gamma_opp=0.1, rho=0.1)
PRICE_PATHS = dict(gamma_liq=1.0, gamma_opp=0.1, rho=0.95)


def scenario(n: int, params: dict, **overrides: float) -> FrontRunningScenario:
    return FrontRunningScenario(n_opportunists=n, **{**params, **overrides})


def exponential_game(
    targets: Sequence[float], gammas: Sequence[float], rho: float, horizon: float = 1.0
) -> GameSpec:
    return GameSpec.from_arrays(horizon, targets, gammas, ExponentialKernel(rho=rho))


def single_investor(
    x: float = -1.0, gamma: float = 1.0, kernel: DecayKernel | None = None
) -> GameSpec:
    return GameSpec.from_arrays(1.0, [x], [gamma], kernel or ConstantKernel())


def grid(size: int, horizon: float = 1.0) -> Grid:
    return Grid.uniform(horizon, size)


def sup_diff(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
