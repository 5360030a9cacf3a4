"""Factorisation LU dense avec estimation du conditionnement."""

from __future__ import annotations

import warnings
from typing import Tuple

import numpy as np
from scipy.linalg import LinAlgError, LinAlgWarning, lu_factor
from scipy.linalg.lapack import dgecon

from impactgame.engine.defaults import MIN_RECIPROCAL_CONDITION
from impactgame.engine.errors import SolverError

LUFactors = Tuple[np.ndarray, np.ndarray]


def factorize(system: np.ndarray, label: str) -> tuple[LUFactors, float]:
    """LU avec pivot partiel et conditionnement estimé en norme 1 (LAPACK `dgecon`).

    Lève `SolverError` si le pivot s'annule ou si le conditionnement réciproque
    passe sous MIN_RECIPROCAL_CONDITION.
    """

    anorm = float(np.linalg.norm(system, 1))
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", LinAlgWarning)
            factors = lu_factor(system)
    except (LinAlgWarning, LinAlgError, ValueError) as exc:
        raise SolverError(f"{label} singulier: {exc}", condition=float("inf")) from exc

    rcond, info = dgecon(factors[0], anorm, norm="1")
    if info != 0:
        raise SolverError(f"{label}: échec de l'estimation du conditionnement (info={info})")
    condition = float("inf") if rcond == 0.0 else 1.0 / float(rcond)
    if rcond < MIN_RECIPROCAL_CONDITION:
        raise SolverError(f"{label} mal conditionné", condition=condition)
    return factors, condition


__all__ = ["LUFactors", "factorize"]
