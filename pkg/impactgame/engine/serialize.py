"""Configuration JSON et exports CSV/JSON.

Conformité avec docs/schemas.md:
- noyaux: {"kind": "exponential", "rho": ...} | {"kind": "constant"} |
  {"kind": "power_law", "delta": ...} | {"kind": "tabulated", "samples": [[t, v], ...]}
- jeu explicite (`horizon`, `kernel`, `investors`)
- CSV à 17 chiffres significatifs, JSON trié: deux exécutions identiques
  produisent des fichiers identiques octet pour octet
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Sequence

import numpy as np

from impactgame.engine.defaults import SCHEMA_VERSION, Tolerances
from impactgame.engine.errors import ConfigError, ModelError
from impactgame.engine.kernels import (
    ConstantKernel,
    DecayKernel,
    ExponentialKernel,
    PowerLawKernel,
    TabulatedKernel,
)
from impactgame.engine.model import (
    EquilibriumSolution,
    GameSpec,
    InvestorSpec,
    cost_bound_gaps,
    liquidation_gaps,
    max_deviation,
)

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


# ---------------------------------------------------------------------------
# Noyaux
# ---------------------------------------------------------------------------


def kernel_to_dict(kernel: DecayKernel) -> Dict[str, Any]:
    """Spécification JSON d'un noyau."""

    if isinstance(kernel, ExponentialKernel):
        return {"kind": kernel.kind, "rho": kernel.rho}
    if isinstance(kernel, PowerLawKernel):
        return {"kind": kernel.kind, "delta": kernel.delta}
    if isinstance(kernel, TabulatedKernel):
        return {"kind": kernel.kind, "samples": [list(sample) for sample in kernel.samples]}
    if isinstance(kernel, ConstantKernel):
        return {"kind": kernel.kind}
    raise ConfigError(f"noyau non sérialisable: {kernel!r}")


def kernel_from_dict(data: Mapping[str, Any]) -> DecayKernel:
    """Reconstruit un noyau depuis sa spécification JSON."""

    if not isinstance(data, Mapping):
        raise ConfigError(f"spécification de noyau invalide: {data!r}")
    kind = data.get("kind")
    try:
        if kind == ExponentialKernel.kind:
            return ExponentialKernel(rho=number_field(data, "rho"))
        if kind == ConstantKernel.kind:
            return ConstantKernel()
        if kind == PowerLawKernel.kind:
            return PowerLawKernel(delta=number_field(data, "delta"))
        if kind == TabulatedKernel.kind:
            samples = data.get("samples")
            if not isinstance(samples, Sequence) or isinstance(samples, str):
                raise ConfigError("`samples` doit être une liste de couples [t, valeur]")
            pairs = []
            for sample in samples:
                if not isinstance(sample, Sequence) or len(sample) != 2:
                    raise ConfigError(f"échantillon invalide: {sample!r}")
                pairs.append((float(sample[0]), float(sample[1])))
            return TabulatedKernel(samples=tuple(pairs))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, (ConfigError, ModelError)):
            raise
        raise ConfigError(f"noyau {kind!r} invalide: {exc}") from exc
    raise ConfigError(
        f"type de noyau inconnu: {kind!r} (attendu: exponential, constant, power_law, tabulated)"
    )


def number_field(data: Mapping[str, Any], key: str) -> float:
    if key not in data:
        raise ConfigError(f"champ requis manquant: {key!r}")
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key!r} doit être un nombre (reçu: {value!r})")
    return float(value)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def read_config(path: str | Path) -> Dict[str, Any]:
    """Lit un document JSON et vérifie `schema_version` s'il est présent."""

    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"impossible de lire {path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: JSON invalide ({exc.msg}, ligne {exc.lineno})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: un objet JSON est attendu à la racine")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"schema_version non supportée: {version!r} (attendu: {SCHEMA_VERSION!r})"
        )
    return data


def game_from_dict(data: Mapping[str, Any]) -> GameSpec:
    """Jeu explicite: {"horizon": T, "kernel": {...}, "investors": [{"x": ., "gamma": .}, ...]}."""

    if "kernel" not in data:
        raise ConfigError("champ requis manquant: 'kernel'")
    investors_data = data.get("investors")
    if not isinstance(investors_data, list) or not investors_data:
        raise ConfigError("`investors` doit être une liste non vide")
    investors = []
    for index, item in enumerate(investors_data):
        if not isinstance(item, Mapping):
            raise ConfigError(f"investisseur {index}: objet attendu")
        investors.append(
            InvestorSpec(x=number_field(item, "x"), gamma=number_field(item, "gamma"))
        )
    return GameSpec(
        horizon=number_field(data, "horizon"),
        investors=tuple(investors),
        kernel=kernel_from_dict(data["kernel"]),
    )


def tolerances_from_dict(
    data: Mapping[str, Any] | None, base: Tolerances = Tolerances()
) -> Tolerances:
    """Surcharge `base` avec le bloc `tolerances` d'une configuration."""

    if data is None:
        return base
    if not isinstance(data, Mapping):
        raise ConfigError("`tolerances` doit être un objet")
    try:
        return base.with_overrides(data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------


def write_solution_csv(path: str | Path, solution: EquilibriumSolution) -> Path:
    """`t,alpha_0..alpha_n,X_0..X_n,S`, une ligne par noeud."""

    path = Path(path)
    n = solution.n_investors
    header = ",".join(
        ["t"] + [f"alpha_{i}" for i in range(n)] + [f"X_{i}" for i in range(n)] + ["S"]
    )
    table = np.column_stack(
        [solution.grid.nodes, solution.rates.T, solution.inventories.T, solution.price]
    )
    np.savetxt(path, table, fmt=FLOAT_FORMAT, delimiter=",", header=header, comments="")
    logger.debug("csv path=%s rows=%d", path, table.shape[0])
    return path


def _finite_or_none(value: float | None) -> float | None:
    if value is None or not np.isfinite(value):
        return None
    return float(value)


def solution_summary(
    solution: EquilibriumSolution, game: GameSpec, tolerances: Tolerances = Tolerances()
) -> Dict[str, Any]:
    """Résumé JSON: η, coûts et bornes η_i x_i, Σ, résidu, solveur.

    `liquidated` compare l'inventaire terminal max_i |X_i(T)| à
    `tolerances.liquidation`; `liquidation_gaps` garde l'écart de quadrature
    |x_i − Σ_k w_k α_i(t_k)|, d'ordre h² pour la forme explicite.
    """

    bounds = cost_bound_gaps(solution, game)
    terminal_gap = float(np.max(np.abs(solution.inventories[:, -1])))
    return {
        "solver": solution.solver.value,
        "horizon": game.horizon,
        "grid_size": solution.grid.size,
        "n_investors": game.n_investors,
        "kernel": kernel_to_dict(game.kernel),
        "eta": [float(value) for value in solution.eta],
        "costs": [bound.cost for bound in bounds],
        "cost_bounds": [bound.bound for bound in bounds],
        "sigma": max_deviation(solution.price),
        "residual": solution.residual,
        "condition_estimate": _finite_or_none(solution.condition_estimate),
        "liquidation_gaps": [float(g) for g in liquidation_gaps(solution.profile, game.targets)],
        "terminal_inventory_gap": terminal_gap,
        "liquidated": terminal_gap <= tolerances.liquidation,
    }


def write_json(path: str | Path, payload: Mapping[str, Any]) -> Path:
    path = Path(path)
    path.write_text(dumps(payload) + "\n", encoding="utf-8")
    return path


def dumps(payload: Mapping[str, Any]) -> str:
    """JSON trié et indenté (sortie déterministe)."""

    return json.dumps(payload, sort_keys=True, indent=2, default=_jsonable)


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"valeur non sérialisable: {value!r}")


__all__ = [
    "FLOAT_FORMAT",
    "dumps",
    "game_from_dict",
    "kernel_from_dict",
    "kernel_to_dict",
    "number_field",
    "read_config",
    "solution_summary",
    "tolerances_from_dict",
    "write_json",
    "write_solution_csv",
]
