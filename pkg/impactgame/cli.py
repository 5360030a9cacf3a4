"""Interface en ligne de commande `impactgame`.

Sous-commandes:
- solve        : résout un jeu (ou un scénario) et exporte les courbes
- sweep        : balaie n, gamma_opp ou rho sur un scénario de front-running
- verify       : compare les deux solveurs (ou la solution analytique)
- check-kernel : teste la positivité du noyau
- illustrate   : prix d'une vente à vitesse constante pour plusieurs ρ

Codes de sortie: 0 succès, 1 configuration, 2 solveur, 3 tolérance de
vérification dépassée, 4 noyau pas de type positif. Le résumé JSON est écrit
sur stdout, les diagnostics sur stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, NoReturn, Optional, Sequence, Tuple

import numpy as np

from impactgame.app.event_bus import EventBus
from impactgame.app.events import SweepFailedEvent, SweepMemberSolvedEvent, SweepStartedEvent
from impactgame.engine.defaults import (
    DEFAULT_GRID_SIZE,
    DEFAULT_KERNEL_CHECK_SIZE,
    Tolerances,
)
from impactgame.engine.errors import ConfigError, ModelError, SolverError
from impactgame.engine.grid import Grid
from impactgame.engine.kernels import (
    ConstantKernel,
    DecayKernel,
    ExponentialKernel,
    check_positive_type_over_horizons,
)
from impactgame.engine.model import GameSpec, SolverKind
from impactgame.engine.serialize import (
    dumps,
    game_from_dict,
    kernel_from_dict,
    kernel_to_dict,
    read_config,
    solution_summary,
    tolerances_from_dict,
    write_json,
    write_solution_csv,
)
from impactgame.sim.export import (
    scenario_from_dict,
    sweep_summary,
    write_illustration_csv,
    write_member_curves,
    write_sweep_csv,
)
from impactgame.sim.scenarios import (
    SWEEP_PARAMETERS,
    FrontRunningScenario,
    build_scenario,
    solve_game,
    sweep,
    transient_impact_illustration,
)
from impactgame.solvers.closed_form import (
    build_system_matrices,
    solve_equilibrium_exponential,
    verify_matrix_identities,
)
from impactgame.solvers.fredholm import fredholm_residual, solve_equilibrium_numeric

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_VERIFY = 3
EXIT_NOT_POSITIVE_TYPE = 4

_CONFIG_KEYS = frozenset(
    {
        "schema_version",
        "horizon",
        "kernel",
        "investors",
        "scenario",
        "grid_size",
        "solver",
        "tolerances",
        "sweep",
    }
)


class _Parser(argparse.ArgumentParser):
    """Les erreurs d'usage deviennent des erreurs de configuration (code 1)."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise ConfigError(message)


@dataclass(frozen=True)
class RunConfig:
    """Commande résolue: configuration JSON fusionnée avec les options CLI.

    Priorité: option CLI > fichier de configuration > valeurs par défaut.
    """

    command: str
    game: Optional[GameSpec] = None
    scenario: Optional[FrontRunningScenario] = None
    grid_size: int = DEFAULT_GRID_SIZE
    solver: Optional[SolverKind] = None
    output: Optional[Path] = None
    tolerances: Tolerances = Tolerances()
    parameter: Optional[str] = None
    values: Tuple[float, ...] = ()
    curves: bool = False
    jobs: int = 1
    executor_kind: str = "thread"
    horizons: Tuple[float, ...] = ()
    kernel: Optional[DecayKernel] = None
    rhos: Tuple[float, ...] = ()

    @property
    def resolved_game(self) -> GameSpec:
        if self.game is not None:
            return self.game
        if self.scenario is not None:
            return build_scenario(self.scenario)
        raise ConfigError("la configuration ne définit ni jeu ni scénario")

    def resolved_solver(self, game: GameSpec) -> SolverKind:
        """Forme explicite par défaut pour un noyau exponentiel (ρ > 0), Fredholm sinon."""

        if self.solver is not None:
            return self.solver
        kernel = game.kernel
        if isinstance(kernel, ExponentialKernel) and kernel.rho > 0.0:
            return SolverKind.CLOSED_FORM
        return SolverKind.FREDHOLM


# ---------------------------------------------------------------------------
# Analyse des arguments
# ---------------------------------------------------------------------------


def _float_list(text: str) -> Tuple[float, ...]:
    try:
        values = tuple(float(item) for item in text.split(",") if item.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"liste de nombres invalide: {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("liste vide")
    return values


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"entier attendu: {text!r}") from exc
    if value <= 0:
        raise argparse.ArgumentTypeError(f"doit être strictement positif (reçu: {value})")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="impactgame",
        description="Équilibre de Nash d'exécution optimale sous impact transitoire",
    )
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="Journalisation détaillée (DEBUG)"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def add_common(sub: argparse.ArgumentParser, *, config_required: bool = True) -> None:
        sub.add_argument(
            "--config", type=Path, required=config_required, help="Fichier de configuration JSON"
        )
        sub.add_argument("--grid", type=_positive_int, default=None, help="Nombre de noeuds")
        sub.add_argument("--out", type=Path, default=None, help="Répertoire de sortie")

    solve = commands.add_parser("solve", help="Résoudre un jeu et exporter les courbes")
    add_common(solve)
    solve.add_argument("--solver", choices=("closed-form", "fredholm"), default=None)

    sweep_cmd = commands.add_parser("sweep", help="Balayer un paramètre du scénario")
    add_common(sweep_cmd)
    sweep_cmd.add_argument("--vary", choices=SWEEP_PARAMETERS, default=None)
    sweep_cmd.add_argument("--values", type=_float_list, default=None, help="ex: 0,1,5,25")
    sweep_cmd.add_argument("--solver", choices=("closed-form", "fredholm"), default=None)
    sweep_cmd.add_argument(
        "--curves", action="store_true", help="Exporter solution_<valeur>.csv par membre"
    )
    sweep_cmd.add_argument("--jobs", type=_positive_int, default=1, help="Workers parallèles")
    sweep_cmd.add_argument("--executor", choices=("thread", "process"), default="thread")

    verify = commands.add_parser("verify", help="Comparer les solveurs sur la même grille")
    add_common(verify)
    verify.add_argument("--tol", type=float, default=None, help="Tolérance sup-norme")

    check = commands.add_parser("check-kernel", help="Tester la positivité du noyau")
    add_common(check)
    check.add_argument("--horizons", type=_float_list, default=None, help="ex: 0.5,1,5")
    check.add_argument("--tol", type=float, default=None, help="Tolérance sur λ_min")

    illustrate = commands.add_parser(
        "illustrate", help="Prix d'une vente à vitesse constante pour plusieurs ρ"
    )
    add_common(illustrate, config_required=False)
    illustrate.add_argument("--rhos", type=_float_list, default=(0.0, 0.5, 1.0, 2.0, 5.0))

    return parser


def _load_document(path: Optional[Path]) -> Dict[str, Any]:
    if path is None:
        return {}
    data = read_config(path)
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"champs de configuration inconnus: {sorted(unknown)}")
    if "scenario" in data and ("investors" in data or "kernel" in data):
        raise ConfigError("`scenario` exclut `investors` et `kernel`")
    return data


def _override(tolerances: Tolerances, key: str, value: float) -> Tolerances:
    try:
        return tolerances.with_overrides({key: value})
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _grid_size(args: argparse.Namespace, data: Mapping[str, Any], default: int) -> int:
    if args.grid is not None:
        return int(args.grid)
    value = data.get("grid_size", default)
    if isinstance(value, bool) or not isinstance(value, int) or value < 2:
        raise ConfigError(f"'grid_size' doit être un entier ≥ 2 (reçu: {value!r})")
    return value


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Fusionne le fichier de configuration et les options de la commande."""

    data = _load_document(getattr(args, "config", None))
    tolerances = tolerances_from_dict(data.get("tolerances"))
    command = args.command

    game = None
    scenario = None
    if "scenario" in data:
        scenario = scenario_from_dict(data["scenario"])
    elif "investors" in data:
        game = game_from_dict(data)

    solver_flag = getattr(args, "solver", None) or data.get("solver")
    solver = SolverKind.parse(solver_flag) if solver_flag is not None else None

    options: Dict[str, Any] = {}
    if command == "sweep":
        block = data.get("sweep", {})
        if not isinstance(block, Mapping):
            raise ConfigError("`sweep` doit être un objet")
        parameter = args.vary or block.get("vary")
        values = args.values or tuple(block.get("values", ()))
        if scenario is None:
            raise ConfigError("sweep requiert un bloc `scenario`")
        if parameter is None or not values:
            raise ConfigError("sweep requiert --vary et --values")
        try:
            values = tuple(float(v) for v in values)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"valeurs de balayage invalides: {values!r}") from exc
        options.update(
            parameter=parameter,
            values=values,
            curves=bool(args.curves),
            jobs=int(args.jobs),
            executor_kind=args.executor,
        )
    elif command == "verify":
        if args.tol is not None:
            tolerances = _override(tolerances, "verify", args.tol)
    elif command == "check-kernel":
        if args.tol is not None:
            tolerances = _override(tolerances, "positive_type", args.tol)
        options.update(_kernel_options(args, data, scenario))
    elif command == "illustrate":
        options["rhos"] = tuple(args.rhos)

    if command in ("solve", "verify") and game is None and scenario is None:
        raise ConfigError(f"{command} requiert `investors` ou `scenario` dans la configuration")

    # grid_size du fichier vise la résolution, pas le test spectral.
    if command == "check-kernel":
        grid_size = _grid_size(args, {}, DEFAULT_KERNEL_CHECK_SIZE)
    else:
        grid_size = _grid_size(args, data, DEFAULT_GRID_SIZE)
    return RunConfig(
        command=command,
        game=game,
        scenario=scenario,
        grid_size=grid_size,
        solver=solver,
        output=args.out,
        tolerances=tolerances,
        **options,
    )


def _kernel_options(
    args: argparse.Namespace,
    data: Mapping[str, Any],
    scenario: Optional[FrontRunningScenario],
) -> Dict[str, Any]:
    if scenario is not None:
        kernel: DecayKernel = ExponentialKernel(rho=scenario.rho)
        horizon = scenario.horizon
    elif "kernel" in data:
        kernel = kernel_from_dict(data["kernel"])
        horizon = data.get("horizon", 1.0)
        if isinstance(horizon, bool) or not isinstance(horizon, (int, float)):
            raise ConfigError(f"'horizon' doit être un nombre (reçu: {horizon!r})")
    else:
        raise ConfigError("check-kernel requiert `kernel` ou `scenario` dans la configuration")
    horizons = tuple(args.horizons) if args.horizons else (float(horizon),)
    return {"kernel": kernel, "horizons": horizons}


# ---------------------------------------------------------------------------
# Commandes
# ---------------------------------------------------------------------------


def _prepare_output(directory: Optional[Path]) -> Optional[Path]:
    if directory is None:
        return None
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"impossible de créer {directory}: {exc.strerror or exc}") from exc
    return directory


def _emit(payload: Mapping[str, Any]) -> None:
    sys.stdout.write(dumps(payload) + "\n")


def run_solve(config: RunConfig) -> int:
    """Écrit solution.csv et summary.json; le résumé est aussi émis sur stdout."""

    game = config.resolved_game
    grid = Grid.uniform(game.horizon, config.grid_size)
    solver = config.resolved_solver(game)
    logger.info(
        "solve solver=%s investors=%d nodes=%d", solver.value, game.n_investors, grid.size
    )
    solution = solve_game(game, grid, solver)
    summary = solution_summary(solution, game, config.tolerances)

    output = _prepare_output(config.output)
    if output is not None:
        write_solution_csv(output / "solution.csv", solution)
        write_json(output / "summary.json", summary)
    _emit(summary)
    return EXIT_OK


def _sup(values: np.ndarray) -> float:
    return float(np.max(np.abs(values)))


def _verify_exponential(game: GameSpec, grid: Grid, tolerances: Tolerances) -> Dict[str, Any]:
    closed = solve_equilibrium_exponential(game, grid)
    numeric = solve_equilibrium_numeric(game, grid)
    identities = verify_matrix_identities(build_system_matrices(game), game.horizon, grid.size)
    checks = {
        "strategy_sup_diff": _sup(closed.rates - numeric.rates),
        "eta_sup_diff": _sup(closed.eta - numeric.eta),
        "residual_closed_form": fredholm_residual(game, closed),
        "residual_fredholm": fredholm_residual(game, numeric),
    }
    identity_ok = max(
        identities.inverse_identity, identities.product_identity, identities.determinant_gap
    ) <= tolerances.identity
    return {
        "mode": "cross_solver",
        **checks,
        "identities": identities.as_dict(),
        "passed": identity_ok and max(checks.values()) <= tolerances.verify,
    }


def _verify_constant_rate(game: GameSpec, grid: Grid, tolerances: Tolerances) -> Dict[str, Any]:
    """Investisseur seul, noyau constant: α* ≡ x₀/T et η = γ₀x₀/T + x₀."""

    investor = game.investors[0]
    rate = investor.x / game.horizon
    eta = investor.gamma * rate + investor.x
    numeric = solve_equilibrium_numeric(game, grid)
    checks = {
        "strategy_sup_diff": _sup(numeric.rates[0] - rate),
        "eta_sup_diff": abs(float(numeric.eta[0]) - eta),
        "residual_fredholm": fredholm_residual(game, numeric),
    }
    return {
        "mode": "analytic_constant_rate",
        **checks,
        "passed": max(checks.values()) <= tolerances.verify,
    }


def run_verify(config: RunConfig) -> int:
    """Sortie 0 si tous les écarts respectent la tolérance, 3 sinon (rapport écrit)."""

    game = config.resolved_game
    grid = Grid.uniform(game.horizon, config.grid_size)
    kernel = game.kernel
    if isinstance(kernel, ExponentialKernel):
        report = _verify_exponential(game, grid, config.tolerances)
    elif isinstance(kernel, ConstantKernel) and game.n_investors == 1:
        report = _verify_constant_rate(game, grid, config.tolerances)
    else:
        raise ConfigError(
            "verify requiert un noyau exponentiel, ou un investisseur seul avec noyau constant"
        )
    report.update(
        tolerance=config.tolerances.verify,
        identity_tolerance=config.tolerances.identity,
        grid_size=grid.size,
    )

    output = _prepare_output(config.output)
    if output is not None:
        write_json(output / "verify.json", report)
    _emit(report)
    if not report["passed"]:
        logger.error("verify tolérance dépassée (tol=%g)", config.tolerances.verify)
        return EXIT_VERIFY
    return EXIT_OK


def run_check_kernel(config: RunConfig) -> int:
    """Sortie 0 si le noyau passe pour chaque horizon, 4 sinon."""

    if config.kernel is None:
        raise ConfigError("aucun noyau à tester")
    reports = check_positive_type_over_horizons(
        config.kernel, config.horizons, config.grid_size, config.tolerances.positive_type
    )
    verdict = all(report.is_positive_type for report in reports)
    payload = {
        "kernel": kernel_to_dict(config.kernel),
        "is_positive_type": verdict,
        "reports": [report.as_dict() for report in reports],
    }
    output = _prepare_output(config.output)
    if output is not None:
        write_json(output / "kernel_check.json", payload)
    _emit(payload)
    return EXIT_OK if verdict else EXIT_NOT_POSITIVE_TYPE


def _log_sweep_events(bus: EventBus) -> None:
    bus.subscribe(
        lambda event: logger.info(
            "sweep_start parameter=%s count=%d executor=%s jobs=%d",
            event.parameter,
            event.count,
            event.executor_kind,
            event.jobs,
        ),
        SweepStartedEvent,
    )
    bus.subscribe(
        lambda event: logger.info(
            "sweep_member index=%d value=%g duration=%.3fs",
            event.index,
            event.value,
            event.duration_seconds,
        ),
        SweepMemberSolvedEvent,
    )
    bus.subscribe(
        lambda event: logger.error(
            "sweep_failure index=%d value=%g message=%s", event.index, event.value, event.message
        ),
        SweepFailedEvent,
    )


def run_sweep(config: RunConfig) -> int:
    """Écrit sweep.csv, summary.json et, avec --curves, une courbe par membre."""

    if config.scenario is None or config.parameter is None:
        raise ConfigError("sweep requiert un scénario et un paramètre")
    template = config.scenario
    grid = Grid.uniform(template.horizon, config.grid_size)
    bus = EventBus()
    _log_sweep_events(bus)
    reports = sweep(
        template,
        config.parameter,
        config.values,
        grid,
        config.solver or SolverKind.CLOSED_FORM,
        config.tolerances,
        jobs=config.jobs,
        executor_kind="process" if config.executor_kind == "process" else "thread",
        event_bus=bus,
    )
    summary = sweep_summary(config.parameter, reports)

    output = _prepare_output(config.output)
    if output is not None:
        write_sweep_csv(output / "sweep.csv", reports)
        write_json(output / "summary.json", summary)
        if config.curves:
            write_member_curves(output, reports)
    _emit(summary)
    return EXIT_OK


def run_illustrate(config: RunConfig) -> int:
    """Prix S(t) pour α₀ = −2 sur [0, ½] (T = 1), une courbe par ρ."""

    grid = Grid.uniform(1.0, config.grid_size)
    curves = transient_impact_illustration(config.rhos, grid)
    payload = {
        "rhos": [curve.rho for curve in curves],
        "final_price": [float(curve.price[-1]) for curve in curves],
        "min_price": [float(np.min(curve.price)) for curve in curves],
    }
    output = _prepare_output(config.output)
    if output is not None:
        write_illustration_csv(output / "illustration.csv", curves, grid.nodes)
    _emit(payload)
    return EXIT_OK


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "solve": run_solve,
    "sweep": run_sweep,
    "verify": run_verify,
    "check-kernel": run_check_kernel,
    "illustrate": run_illustrate,
}


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        stream=sys.stderr,
        format="%(levelname)s %(name)s %(message)s",
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        sys.stderr.write(f"impactgame: erreur: {exc}\n")
        return EXIT_CONFIG
    configure_logging(args.verbose)

    try:
        config = build_run_config(args)
        return COMMANDS[config.command](config)
    except (ConfigError, ModelError) as exc:
        logger.error("configuration invalide: %s", exc)
        return EXIT_CONFIG
    except SolverError as exc:
        logger.error("échec du solveur: %s", exc)
        return EXIT_SOLVER


__all__ = [
    "COMMANDS",
    "EXIT_CONFIG",
    "EXIT_NOT_POSITIVE_TYPE",
    "EXIT_OK",
    "EXIT_SOLVER",
    "EXIT_VERIFY",
    "RunConfig",
    "build_parser",
    "build_run_config",
    "main",
    "run_check_kernel",
    "run_illustrate",
    "run_solve",
    "run_sweep",
    "run_verify",
]
