"""Lecture du bloc `scenario` et exports des balayages."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, Mapping, Sequence, Tuple

import numpy as np

from impactgame.engine.errors import ConfigError
from impactgame.engine.serialize import FLOAT_FORMAT, number_field, write_solution_csv
from impactgame.sim.scenarios import FrontRunningScenario, IllustrationCurve, ScenarioReport

SWEEP_HEADER = "swept_value,J_liq,J_opp_total,J_opp_each,sigma,sign_changes"
_SCENARIO_FIELDS = frozenset(
    {"n_opportunists", "gamma_liq", "gamma_opp", "rho", "horizon", "x_liq"}
)


def scenario_from_dict(data: Mapping[str, Any]) -> FrontRunningScenario:
    """Bloc `scenario`: n_opportunists, gamma_liq, gamma_opp, rho, [horizon, x_liq]."""

    if not isinstance(data, Mapping):
        raise ConfigError("`scenario` doit être un objet")
    unknown = set(data) - _SCENARIO_FIELDS
    if unknown:
        raise ConfigError(f"champs de scénario inconnus: {sorted(unknown)}")
    count = data.get("n_opportunists")
    if isinstance(count, bool) or not isinstance(count, int):
        raise ConfigError(f"'n_opportunists' doit être un entier (reçu: {count!r})")
    optional = {key: number_field(data, key) for key in ("horizon", "x_liq") if key in data}
    return FrontRunningScenario(
        n_opportunists=count,
        gamma_liq=number_field(data, "gamma_liq"),
        gamma_opp=number_field(data, "gamma_opp"),
        rho=number_field(data, "rho"),
        **optional,
    )


def write_sweep_csv(path: str | Path, reports: Sequence[ScenarioReport]) -> Path:
    """Une ligne par membre, dans l'ordre du balayage."""

    path = Path(path)
    table = np.array([report.as_row() for report in reports], dtype=np.float64)
    np.savetxt(path, table, fmt=FLOAT_FORMAT, delimiter=",", header=SWEEP_HEADER, comments="")
    return path


def member_curve_name(value: Any) -> str:
    """`solution_<valeur>.csv`; entier tel quel, réel par `repr` (aller-retour exact)."""

    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return f"solution_{int(value)}.csv"
    return f"solution_{float(value)!r}.csv"


def write_member_curves(
    directory: str | Path, reports: Sequence[ScenarioReport]
) -> Tuple[Path, ...]:
    """Courbes de chaque membre dans `directory`."""

    directory = Path(directory)
    return tuple(
        write_solution_csv(directory / member_curve_name(report.swept_value), report.solution)
        for report in reports
    )


def sweep_summary(parameter: str, reports: Sequence[ScenarioReport]) -> Dict[str, Any]:
    return {
        "parameter": parameter,
        "count": len(reports),
        "reports": [report.as_dict() for report in reports],
    }


def write_illustration_csv(
    path: str | Path, curves: Sequence[IllustrationCurve], nodes: np.ndarray
) -> Path:
    """`t,S_rho=<ρ>...`: une colonne de prix par taux de décroissance."""

    path = Path(path)
    header = ",".join(["t"] + [f"S_rho={curve.rho:g}" for curve in curves])
    table = np.column_stack([nodes] + [curve.price for curve in curves])
    np.savetxt(path, table, fmt=FLOAT_FORMAT, delimiter=",", header=header, comments="")
    return path


__all__ = [
    "SWEEP_HEADER",
    "member_curve_name",
    "scenario_from_dict",
    "sweep_summary",
    "write_illustration_csv",
    "write_member_curves",
    "write_sweep_csv",
]
