"""Command-line entry point ``avi-games``.

Exit codes: 0 success, 1 unreadable or malformed input, 2 solver stopped on its iteration cap,
3 numerical failure, 4 constraint violations in a closed-loop run. Log verbosity is read from
the ``AVI_GAME_LOG`` environment variable.
"""

import argparse
import logging
import sys
import traceback
from collections.abc import Sequence
from pathlib import Path

from avi_games.auxil.constants import EXCEPTION_TRACEBACK_CLEANUP_PATTERN, LOGGING_LEVEL
from avi_games.auxil.exceptions import ApplicationException
from avi_games.auxil.log_and_notify import configure_logging, logs
from avi_games.cli.commands import Overrides, cmd_bench, cmd_compile, cmd_simulate, cmd_solve
from avi_games.data_structures.enums import ExitCode, LoggingLevel, OutputFormat, SolverName
from avi_games.games.exceptions import NoStabilizingSolution
from avi_games.simulation.exceptions import SolverFailure
from avi_games.vi_core.exceptions import InfeasibleSet, NumericalFailure

logger = logging.getLogger(__name__)

SOLVER_CHOICES = [solver.value for solver in SolverName]


def _solver_list(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, help="solver tolerance on the natural residual")
    common.add_argument("--max-iter", type=int, help="solver iteration cap")
    common.add_argument(
        "--budget",
        type=int,
        help="fixed iteration budget per solve; closed-loop runs become budget studies",
    )
    common.add_argument("--horizon", type=int, help="prediction horizon T")
    common.add_argument("--seed", type=int, help="seed of randomly initialized solvers")
    common.add_argument(
        "--out-dir", type=Path, default=Path("."), help="directory for output files"
    )

    parser = argparse.ArgumentParser(
        prog="avi-games",
        description=(
            "Solve affine variational inequalities and simulate constrained LQ games in "
            "receding horizon. Log verbosity is set by the AVI_GAME_LOG environment variable."
        ),
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    solve = subparsers.add_parser("solve", parents=[common], help="solve an AVI JSON file")
    solve.add_argument("problem", type=Path)
    solve.add_argument("--solver", choices=SOLVER_CHOICES, default=SolverName.NEWTON.value)
    solve.add_argument(
        "--format",
        choices=[item.value for item in OutputFormat],
        default=OutputFormat.JSON.value,
        help="json: report.json; csv: solution.csv and trace.csv",
    )

    compile_ = subparsers.add_parser(
        "compile",
        parents=[common],
        help="compile a scenario or game file into the AVI at its initial state",
    )
    compile_.add_argument("input", type=Path)

    simulate = subparsers.add_parser(
        "simulate", parents=[common], help="receding-horizon run of a scenario or game file"
    )
    simulate.add_argument("input", type=Path)
    simulate.add_argument("--solver", choices=SOLVER_CHOICES)
    simulate.add_argument("--steps", type=int, help="number of simulated steps")

    bench = subparsers.add_parser(
        "bench", parents=[common], help="compare solvers on one receding-horizon run"
    )
    bench.add_argument("input", type=Path)
    bench.add_argument(
        "--solvers",
        type=_solver_list,
        default=[SolverName.NEWTON.value, SolverName.FAST_NEWTON.value],
        help="comma-separated solver names",
    )
    bench.add_argument("--repetitions", type=int, default=1)
    bench.add_argument("--steps", type=int, help="number of simulated steps")
    return parser


def dispatch(args: argparse.Namespace) -> ExitCode:
    overrides = Overrides(
        tol=args.tol,
        max_iter=args.max_iter,
        budget=args.budget,
        seed=args.seed,
        horizon=args.horizon,
        steps=getattr(args, "steps", None),
    )
    if args.command == "solve":
        return cmd_solve(
            args.problem, args.solver, overrides, args.out_dir, OutputFormat(args.format)
        )
    if args.command == "compile":
        return cmd_compile(args.input, overrides, args.out_dir)
    if args.command == "simulate":
        return cmd_simulate(args.input, args.solver, overrides, args.out_dir)
    return cmd_bench(args.input, args.solvers, args.repetitions, overrides, args.out_dir)


def _log_traceback(err: Exception) -> None:
    tb_list = traceback.format_exception(None, err, err.__traceback__)
    tb_string = "".join(EXCEPTION_TRACEBACK_CLEANUP_PATTERN.sub("", item) for item in tb_list)
    logs(tb_string, level=LoggingLevel.DEBUG)


def main(argv: Sequence[str] | None = None) -> int:
    configure_logging(LOGGING_LEVEL)
    args = build_parser().parse_args(argv)

    try:
        return int(dispatch(args))
    except SolverFailure as err:
        logs(f"{err}; partial results are written", level=LoggingLevel.ERROR)
        _log_traceback(err)
        return ExitCode.NUMERICAL_FAILURE
    except (NumericalFailure, InfeasibleSet, NoStabilizingSolution) as err:
        logs(f"{err.__class__.__name__}: {err}", level=LoggingLevel.ERROR)
        _log_traceback(err)
        return ExitCode.NUMERICAL_FAILURE
    except ApplicationException as err:
        logs(f"{err.__class__.__name__}: {err}", level=LoggingLevel.ERROR)
        _log_traceback(err)
        return ExitCode.INPUT_ERROR
    except OSError as err:
        logs(f"Could not write output: {err}", level=LoggingLevel.ERROR)
        return ExitCode.INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
