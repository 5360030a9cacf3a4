"""Équilibre explicite pour le noyau exponentiel G(t) = e^{−ρt}.

ψ*(t) = (α*_0(t), …, α*_n(t), S*(t)) = (e^{Mt} + N1 e^{MT}) z,  N2 z = x̃

Les multiplicateurs sont déduits de la condition terminale η = U ψ*(T).
`verify_matrix_identities` contrôle les identités algébriques sur lesquelles
repose la formule ainsi que la dynamique dψ/dt = Mψ − Vᵀη.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.linalg import LinAlgError, det, expm, inv, lu_solve

from impactgame.engine.defaults import DEFAULT_GRID_SIZE, EXPONENTIAL_REFRESH_PERIOD
from impactgame.engine.errors import ModelError, SolverError
from impactgame.engine.grid import Grid
from impactgame.engine.kernels import DecayKernel, ExponentialKernel
from impactgame.engine.model import (
    EquilibriumSolution,
    GameSpec,
    SolverKind,
    StrategyProfile,
    price_path,
)
from impactgame.solvers.fredholm import fredholm_residual
from impactgame.solvers.linear import factorize

logger = logging.getLogger(__name__)


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class SystemMatrices:
    """Matrices du système linéaire de l'équilibre exponentiel.

    Dimensions: M, N1, N2 sont (n+2)×(n+2); W, U, V sont (n+1)×(n+2);
    v et x_tilde sont de longueur n+2.
    """

    rho: float
    horizon: float
    gammas: np.ndarray
    M: np.ndarray
    M_inverse: np.ndarray
    N1: np.ndarray
    W: np.ndarray
    v: np.ndarray
    U: np.ndarray
    V: np.ndarray
    N2: np.ndarray
    x_tilde: np.ndarray

    @property
    def n_investors(self) -> int:
        return int(self.gammas.size)

    @property
    def dimension(self) -> int:
        return self.n_investors + 1

    def determinant_formula(self) -> float:
        """det M = −ρ (1 + Σ 1/(ργ_i + 1)) Π (ρ + 1/γ_i)."""

        rho, gammas = self.rho, self.gammas
        return float(
            -rho * (1.0 + np.sum(1.0 / (rho * gammas + 1.0))) * np.prod(rho + 1.0 / gammas)
        )


@dataclass(frozen=True)
class IdentityReport:
    """Écarts maximaux des identités vérifiées par `verify_matrix_identities`."""

    inverse_identity: float
    product_identity: float
    dynamics_residual: float
    determinant_gap: float
    investor_dynamics_residuals: Tuple[float, ...]

    def as_dict(self) -> dict[str, object]:
        return {
            "inverse_identity": self.inverse_identity,
            "product_identity": self.product_identity,
            "dynamics_residual": self.dynamics_residual,
            "determinant_gap": self.determinant_gap,
            "investor_dynamics_residuals": list(self.investor_dynamics_residuals),
        }


def matrix_exponential(matrix: np.ndarray) -> np.ndarray:
    """e^A par scaling-and-squaring avec approximant de Padé (`scipy.linalg.expm`)."""

    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ModelError(f"matrice carrée attendue (reçu: {matrix.shape})")
    if not np.all(np.isfinite(matrix)):
        raise ModelError("la matrice contient des valeurs non finies")
    return expm(matrix)


def _require_exponential(kernel: DecayKernel) -> float:
    if not isinstance(kernel, ExponentialKernel):
        raise ModelError(
            f"la forme explicite requiert un noyau exponentiel (reçu: {kernel.kind})"
        )
    if kernel.rho <= 0.0:
        raise ModelError(
            f"la forme explicite requiert rho > 0 (reçu: {kernel.rho}); "
            "utiliser le solveur fredholm avec le noyau constant"
        )
    return kernel.rho


def build_system_matrices(game: GameSpec) -> SystemMatrices:
    """Assemble M, N1, W, v, U, V, N2 et x̃ pour un jeu à noyau exponentiel."""

    rho = _require_exponential(game.kernel)
    gammas = game.gammas
    horizon = game.horizon
    n = gammas.size
    d = n + 1

    M = np.zeros((d, d))
    M[:n, :n] = -1.0 / gammas[:, None]
    M[np.arange(n), np.arange(n)] = rho
    M[:n, n] = 2.0 * rho / gammas
    M[n, :n] = 1.0
    M[n, n] = -rho

    N1 = np.zeros((d, d))
    N1[np.arange(n), np.arange(n)] = rho * gammas
    N1[:n, n] = rho
    N1[n, :n] = gammas
    N1[n, n] = float(n)

    W = np.hstack([np.eye(n), np.zeros((n, 1))])
    v = np.zeros(d)
    v[n] = 1.0

    U = np.zeros((n, d))
    U[np.arange(n), np.arange(n)] = gammas
    U[:, n] = 1.0
    V = np.zeros((n, d))
    V[np.arange(n), np.arange(n)] = rho / gammas

    try:
        M_inverse = inv(M)
    except LinAlgError as exc:
        raise SolverError(f"matrice M singulière: {exc}") from exc

    expMT = matrix_exponential(M * horizon)
    top = W @ ((M_inverse + N1 * horizon) @ expMT - M_inverse)
    # Identité de dimension n+2: v et N1 vivent en dimension n+2.
    bottom = v @ (np.eye(d) + N1 @ expMT)
    N2 = np.vstack([top, bottom[None, :]])

    x_tilde = np.append(game.targets, 0.0)

    return SystemMatrices(
        rho=rho,
        horizon=horizon,
        gammas=_frozen(gammas.copy()),
        M=_frozen(M),
        M_inverse=_frozen(M_inverse),
        N1=_frozen(N1),
        W=_frozen(W),
        v=_frozen(v),
        U=_frozen(U),
        V=_frozen(V),
        N2=_frozen(N2),
        x_tilde=_frozen(x_tilde),
    )


def _solve_coefficients(mats: SystemMatrices) -> tuple[np.ndarray, float]:
    """z = N2⁻¹ x̃ par LU, avec l'estimation du conditionnement de N2."""

    factors, condition = factorize(mats.N2, "matrice N2")
    return lu_solve(factors, mats.x_tilde), condition


def _propagate(M: np.ndarray, grid: Grid, z: np.ndarray) -> np.ndarray:
    """Lignes e^{M t_k} z pour chaque noeud.

    Sur grille uniforme, e^{MΔt} est appliqué de proche en proche et e^{M t_k}
    est recalculé tous les EXPONENTIAL_REFRESH_PERIOD pas.
    """

    nodes = grid.nodes
    states = np.empty((nodes.size, z.size))
    if not grid.is_uniform:
        for k, t in enumerate(nodes):
            states[k] = matrix_exponential(M * t) @ z
        return states

    step = matrix_exponential(M * (nodes[1] - nodes[0]))
    states[0] = z
    for k in range(1, nodes.size):
        if k % EXPONENTIAL_REFRESH_PERIOD == 0:
            states[k] = matrix_exponential(M * nodes[k]) @ z
        else:
            states[k] = step @ states[k - 1]
    return states


def _sample(
    mats: SystemMatrices, grid: Grid, z: np.ndarray, horizon: float
) -> tuple[np.ndarray, np.ndarray]:
    """ψ*(t_k) et sa primitive exacte M⁻¹(e^{Mt_k} − I)z + t_k N1 e^{MT} z."""

    offset = mats.N1 @ (matrix_exponential(mats.M * horizon) @ z)
    states = _propagate(mats.M, grid, z)
    psi = states + offset[None, :]
    integral = (states - z[None, :]) @ mats.M_inverse.T + grid.nodes[:, None] * offset[None, :]
    return psi, integral


def solve_equilibrium_exponential(game: GameSpec, grid: Grid) -> EquilibriumSolution:
    """Échantillonne l'équilibre explicite sur `grid`."""

    if not np.isclose(grid.horizon, game.horizon, rtol=1e-12, atol=0.0):
        raise ModelError(
            f"la grille couvre [0, {grid.horizon!r}] mais l'horizon vaut {game.horizon!r}"
        )
    mats = build_system_matrices(game)
    z, condition = _solve_coefficients(mats)
    psi, integral = _sample(mats, grid, z, game.horizon)

    n = game.n_investors
    rates = psi[:, :n].T
    price = psi[:, n]
    eta = mats.U @ psi[-1]
    inventories = game.targets[:, None] - integral[:, :n].T

    profile = StrategyProfile(grid=grid, rates=rates)
    provisional = EquilibriumSolution(
        profile=profile,
        eta=eta,
        price=price,
        inventories=inventories,
        solver=SolverKind.CLOSED_FORM,
        residual=0.0,
        condition_estimate=condition,
    )
    residual = fredholm_residual(game, provisional)
    logger.debug(
        "closed_form_solve investors=%d nodes=%d condition=%.3e residual=%.3e",
        n,
        grid.size,
        condition,
        residual,
    )
    return EquilibriumSolution(
        profile=profile,
        eta=eta,
        price=price,
        inventories=inventories,
        solver=SolverKind.CLOSED_FORM,
        residual=residual,
        condition_estimate=condition,
    )


def verify_matrix_identities(
    mats: SystemMatrices,
    horizon: float,
    grid_size: int = DEFAULT_GRID_SIZE,
) -> IdentityReport:
    """Contrôle les identités algébriques et la dynamique de ψ*.

    - inverse_identity: max |(M − VᵀU)(N1 − vvᵀ)/ρ − I|
    - product_identity: max |VᵀU(I + N1) − M N1|, relatif à max(1, max |M N1|)
    - determinant_gap: écart relatif entre det M et la formule fermée
    - dynamics_residual: max |dψ/dt − Mψ + Vᵀη| (différences finies d'ordre 2)
    - investor_dynamics_residuals: même contrôle écrit investisseur par
      investisseur avec γ_i, ρ et η_i
    """

    d = mats.dimension
    n = mats.n_investors
    rho = mats.rho
    identity = np.eye(d)
    VtU = mats.V.T @ mats.U

    inverse_product = (mats.M - VtU) @ (mats.N1 - np.outer(mats.v, mats.v)) / rho
    inverse_identity = float(np.max(np.abs(inverse_product - identity)))

    MN1 = mats.M @ mats.N1
    product_scale = max(1.0, float(np.max(np.abs(MN1))))
    product_identity = float(np.max(np.abs(VtU @ (identity + mats.N1) - MN1))) / product_scale

    expected_det = mats.determinant_formula()
    determinant_gap = abs(float(det(mats.M)) - expected_det) / abs(expected_det)

    grid = Grid.uniform(horizon, grid_size)
    z, _ = _solve_coefficients(mats)
    psi, _ = _sample(mats, grid, z, horizon)
    eta = mats.U @ psi[-1]
    derivative = np.gradient(psi, grid.nodes, axis=0, edge_order=2)
    dynamics = derivative - psi @ mats.M.T + (mats.V.T @ eta)[None, :]
    dynamics_residual = float(np.max(np.abs(dynamics)))

    gammas = mats.gammas
    rates = psi[:, :n]
    price = psi[:, n]
    total = rates.sum(axis=1)
    investor_residuals = []
    for i in range(n):
        others = total - rates[:, i]
        slope = (
            rho * rates[:, i]
            - others / gammas[i]
            + 2.0 * rho * price / gammas[i]
            - rho * eta[i] / gammas[i]
        )
        investor_residuals.append(float(np.max(np.abs(derivative[:, i] - slope))))

    report = IdentityReport(
        inverse_identity=inverse_identity,
        product_identity=product_identity,
        dynamics_residual=dynamics_residual,
        determinant_gap=determinant_gap,
        investor_dynamics_residuals=tuple(investor_residuals),
    )
    logger.debug("identities %s", report)
    return report


def closed_form_price_gap(solution: EquilibriumSolution, kernel: DecayKernel) -> float:
    """max_k |S*(t_k) − price_path(α*)(t_k)|.

    Compare la dynamique dS/dt = Σα − ρS portée par ψ* à la convolution causale.
    """

    return float(np.max(np.abs(solution.price - price_path(kernel, solution.profile))))


__all__ = [
    "IdentityReport",
    "SystemMatrices",
    "build_system_matrices",
    "closed_form_price_gap",
    "matrix_exponential",
    "solve_equilibrium_exponential",
    "verify_matrix_identities",
]
