"""
Command-line front end.

Results go to stdout, diagnostics and logs to stderr. Exit codes: 0 success,
2 invalid input, 3 refused or failed computation, 4 file errors.
"""

import argparse
import dataclasses
import logging
import sys
from typing import Callable, Dict, List, Optional, Sequence

from src.instances import describe_instance, load_instance, render_solution
from src.logging_utils import configure_logging
from src.oracle import exact_best
from src.reporting import bench_table, oracle_record, solve_record, to_csv, to_json, to_text
from src.search import multirun, solve, solve_both_policies
from src.settings import CFPSettings, get_settings
from src.types import ResultRecord, SolveParams
from src.validators import (
    ValidationError,
    parse_weight,
    validate_positive_integer,
    validate_seed,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_FAILED = 3
EXIT_IO = 4


def _positive(name: str) -> Callable[[str], int]:
    def convert(value: str) -> int:
        try:
            return validate_positive_integer(value, name)
        except ValidationError as e:
            raise argparse.ArgumentTypeError(str(e))

    return convert


def _seed(value: str) -> int:
    try:
        return validate_seed(value)
    except ValidationError as e:
        raise argparse.ArgumentTypeError(str(e))


def _add_common(parser: argparse.ArgumentParser, settings: CFPSettings) -> None:
    parser.add_argument("--q", default=settings.q, help="efficiency weight (default: %(default)s)")
    parser.add_argument(
        "--no-singletons",
        action="store_true",
        help="forbid cells with fewer than two machines or two parts",
    )
    parser.add_argument("--format", choices=["text", "csv", "json"], default="text")
    parser.add_argument(
        "--show-matrix", action="store_true", help="print the block-diagonalized matrix"
    )


def _add_solver_flags(parser: argparse.ArgumentParser, settings: CFPSettings) -> None:
    _add_common(parser, settings)
    parser.add_argument(
        "--configs", type=_positive("configs"), default=settings.configs_per_k,
        help="configurations per cell count (default: %(default)s)",
    )
    parser.add_argument(
        "--range-configs", type=_positive("range-configs"), default=settings.range_configs_per_k,
        help="range-search configurations per cell count (default: %(default)s)",
    )
    parser.add_argument("--runs", type=_positive("runs"), default=1)
    parser.add_argument("--seed", type=_seed, default=0)
    parser.add_argument("--min-cells", type=_positive("min-cells"))
    parser.add_argument("--max-cells", type=_positive("max-cells"))
    parser.add_argument(
        "--threads", type=_positive("threads"), default=settings.workers,
        help="worker processes; results do not depend on it (default: %(default)s)",
    )


def build_parser(settings: Optional[CFPSettings] = None) -> argparse.ArgumentParser:
    """Argument parser with defaults taken from settings."""
    settings = settings or get_settings()
    parser = argparse.ArgumentParser(
        prog="cfp", description="Multistart heuristic for the cell formation problem"
    )
    parser.add_argument("--log-level", default=settings.log_level)
    commands = parser.add_subparsers(dest="command", required=True)

    solve_parser = commands.add_parser("solve", help="run the multistart heuristic")
    solve_parser.add_argument("--instance", required=True, help="instance file or bundled name")
    _add_solver_flags(solve_parser, settings)
    solve_parser.add_argument(
        "--compare-singletons",
        action="store_true",
        help="also solve without singletons and report both when they differ",
    )

    oracle_parser = commands.add_parser("oracle", help="exact optimum by enumeration")
    oracle_parser.add_argument("--instance", required=True)
    _add_common(oracle_parser, settings)
    oracle_parser.add_argument("--k-min", type=_positive("k-min"), default=1)
    oracle_parser.add_argument("--k-max", type=_positive("k-max"))
    oracle_parser.add_argument("--budget", type=_positive("budget"), default=settings.oracle_budget)

    bench_parser = commands.add_parser("bench", help="multirun protocol over several instances")
    bench_parser.add_argument("--instances", nargs="+", required=True)
    _add_solver_flags(bench_parser, settings)

    show_parser = commands.add_parser("show", help="print an instance and its statistics")
    show_parser.add_argument("--instance", required=True)

    serve_parser = commands.add_parser("serve", help="start the MCP tool server")
    serve_parser.add_argument("--sse", action="store_true", help="use the SSE transport")
    return parser


def _solve_params(args: argparse.Namespace, allow_singletons: bool) -> SolveParams:
    if (args.min_cells is None) != (args.max_cells is None):
        raise ValidationError("--min-cells and --max-cells must be given together")
    cell_range = None
    if args.min_cells is not None:
        cell_range = (args.min_cells, args.max_cells)
    return get_settings().default_params(
        q=parse_weight(args.q),
        configs_per_k=args.configs,
        range_configs_per_k=args.range_configs,
        allow_singletons=allow_singletons,
        seed=args.seed,
        cell_range=cell_range,
        workers=args.threads,
    )


def _emit(records: List[ResultRecord], output_format: str, matrices: Sequence[str] = ()) -> None:
    if output_format == "json":
        sys.stdout.write(to_json(records) + "\n")
    elif output_format == "csv":
        sys.stdout.write(to_csv(records))
    else:
        sys.stdout.write(to_text(records))
        for drawing in matrices:
            sys.stdout.write("\n" + drawing + "\n")


def _run_solve(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    matrix = instance.matrix
    params = _solve_params(args, not args.no_singletons)

    if args.compare_singletons:
        with_singletons, without_singletons = solve_both_policies(matrix, params)
        reports = [(dataclasses.replace(params, allow_singletons=True), with_singletons)]
        if without_singletons is not None and with_singletons.efficiency > without_singletons.efficiency:
            reports.append((dataclasses.replace(params, allow_singletons=False), without_singletons))
        records = [solve_record(instance.name, matrix, p, r) for p, r in reports]
        drawings = [render_solution(matrix, r.solution) for _, r in reports]
    elif args.runs > 1:
        summary = multirun(matrix, params, args.runs)
        records = [solve_record(instance.name, matrix, params, summary.best, summary)]
        drawings = [render_solution(matrix, summary.best.solution)]
    else:
        report = solve(matrix, params)
        records = [solve_record(instance.name, matrix, params, report)]
        drawings = [render_solution(matrix, report.solution)]

    _emit(records, args.format, drawings if args.show_matrix else ())
    return EXIT_OK


def _run_oracle(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    q = parse_weight(args.q)
    allow_singletons = not args.no_singletons
    result = exact_best(
        instance.matrix, q, allow_singletons, args.k_min, args.k_max, budget=args.budget
    )
    record = oracle_record(instance.name, instance.matrix, q, allow_singletons, result)
    drawings = [render_solution(instance.matrix, result.solution)] if args.show_matrix else []
    _emit([record], args.format, drawings)
    return EXIT_OK


def _run_bench(args: argparse.Namespace) -> int:
    params = _solve_params(args, not args.no_singletons)
    records = []
    for reference in args.instances:
        instance = load_instance(reference)
        summary = multirun(instance.matrix, params, args.runs)
        records.append(solve_record(instance.name, instance.matrix, params, summary.best, summary))
    if args.format == "text":
        sys.stdout.write(bench_table(records))
    else:
        _emit(records, args.format)
    return EXIT_OK


def _run_show(args: argparse.Namespace) -> int:
    sys.stdout.write(describe_instance(load_instance(args.instance)))
    return EXIT_OK


def _run_serve(args: argparse.Namespace) -> int:
    from src.server import run_server

    run_server("sse" if args.sse else None)
    return EXIT_OK


_COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "solve": _run_solve,
    "oracle": _run_oracle,
    "bench": _run_bench,
    "show": _run_show,
    "serve": _run_serve,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the cfp command line.

    Args:
        argv: Arguments without the program name (default: sys.argv[1:])

    Returns:
        Process exit code
    """
    try:
        settings = get_settings()
    except ValueError as e:
        sys.stderr.write(f"cfp: invalid CFP_* configuration: {e}\n")
        return EXIT_INVALID

    parser = build_parser(settings)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INVALID

    try:
        configure_logging(args.log_level)
        return _COMMANDS[args.command](args)
    except ValueError as e:
        # ValidationError and its subclasses, plus parameter checks in SolveParams
        sys.stderr.write(f"cfp: {e}\n")
        return EXIT_INVALID
    except RuntimeError as e:
        sys.stderr.write(f"cfp: {e}\n")
        return EXIT_FAILED
    except OSError as e:
        sys.stderr.write(f"cfp: {e}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
