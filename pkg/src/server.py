# server.py
import logging
import sys
from typing import List, Optional

from mcp.server.fastmcp import FastMCP

from src.instances import BUNDLED_INSTANCES, bundled_instance, parse_instance
from src.logging_utils import configure_logging, summarize_assignment
from src.metrics import (
    compute_counters,
    exceptions_plus_voids,
    group_capability_index,
    grouping_efficacy,
    grouping_efficiency,
)
from src.oracle import exact_best
from src.reporting import fraction_text, oracle_record, percent, solve_record
from src.search import multirun, solve
from src.settings import get_settings
from src.types import (
    InstanceFile,
    InstanceSummaryList,
    MetricsResponse,
    ResultRecord,
    Solution,
)
from src.validators import (
    ValidationError,
    parse_weight,
    validate_assignment,
    validate_has_ones,
    validate_positive_integer,
    validate_seed,
    validate_solution,
)

logger = logging.getLogger(__name__)

mcp = FastMCP("Cell Formation Solver", dependencies=["numpy"])


def _resolve_instance(instance: str) -> InstanceFile:
    """A bundled instance name, or the text of an instance file."""
    if "\n" in instance:
        return parse_instance(instance, "inline")
    return bundled_instance(instance.strip())


def _zero_based(cells: List[int], field_name: str) -> List[int]:
    return [validate_positive_integer(cell, field_name) - 1 for cell in cells]


# --- MCP Tools ---


@mcp.tool("list_instances", description="Lists the bundled machine-part instances.")
def list_instances() -> InstanceSummaryList:
    """
    List the bundled instances.

    Returns:
        InstanceSummaryList: One entry per instance with name, m, p, n1 and source
    """
    logger.info("Executing list_instances")
    summaries = []
    for name in sorted(BUNDLED_INSTANCES):
        instance = bundled_instance(name)
        summaries.append(
            {
                "name": name,
                "m": instance.matrix.machines,
                "p": instance.matrix.parts,
                "n1": instance.matrix.n1,
                "source": instance.source,
            }
        )
    return summaries


@mcp.tool(
    "evaluate_assignment",
    description="Computes the four objectives and the feasibility of a given cell assignment.",
)
def evaluate_assignment(
    instance: str,
    machine_cells: List[int],
    part_cells: List[int],
    q: str = "1/2",
    allow_singletons: bool = True,
) -> MetricsResponse:
    """
    Evaluate a cell assignment.

    Args:
        instance: Bundled instance name or instance file text
        machine_cells: 1-based cell per machine
        part_cells: 1-based cell per part
        q: Efficiency weight as a fraction string
        allow_singletons: Whether singleton cells count as feasible

    Returns:
        MetricsResponse: Exact metrics, percentages and the first violated constraint

    Raises:
        ValidationError: If the instance or the assignment is malformed, or the
            matrix has no ones
    """
    resolved = _resolve_instance(instance)
    matrix = resolved.matrix
    weight = parse_weight(q)
    machine_cell = _zero_based(machine_cells, "machine cell")
    part_cell = _zero_based(part_cells, "part cell")
    validate_assignment(matrix, machine_cell, part_cell)
    validate_has_ones(matrix)
    logger.info(
        f"Executing evaluate_assignment on '{resolved.name}' "
        f"machines={summarize_assignment(machine_cell)} parts={summarize_assignment(part_cell)}"
    )

    counters = compute_counters(matrix, machine_cell, part_cell)
    num_cells = max(machine_cell + part_cell) + 1
    solution = Solution(tuple(machine_cell), tuple(part_cell), num_cells, counters)
    violation = validate_solution(matrix, solution, allow_singletons)
    efficiency = grouping_efficiency(counters, weight)
    efficacy = grouping_efficacy(counters)
    capability = group_capability_index(counters)
    return {
        "efficiency": fraction_text(efficiency),
        "efficiency_pct": percent(efficiency),
        "efficacy": fraction_text(efficacy),
        "efficacy_pct": percent(efficacy),
        "group_capability_index": fraction_text(capability),
        "group_capability_index_pct": percent(capability),
        "exceptions_plus_voids": exceptions_plus_voids(counters),
        "cells": solution.nonempty_cells,
        "feasible": violation is None,
        "violation": None if violation is None else f"{violation.constraint}: {violation.message}",
    }


@mcp.tool(
    "solve_instance",
    description="Runs the multistart heuristic on an instance and returns the best solution found.",
)
def solve_instance(
    instance: str,
    q: Optional[str] = None,
    configs_per_k: Optional[int] = None,
    range_configs_per_k: Optional[int] = None,
    runs: int = 1,
    seed: int = 0,
    allow_singletons: bool = True,
    min_cells: Optional[int] = None,
    max_cells: Optional[int] = None,
) -> ResultRecord:
    """
    Solve an instance with the multistart heuristic.

    Omitted parameters fall back to the CFP_* settings.

    Returns:
        ResultRecord: Best solution with metrics and min/avg/max over the runs

    Raises:
        ValidationError: If the instance or a parameter is invalid
    """
    resolved = _resolve_instance(instance)
    settings = get_settings()
    if (min_cells is None) != (max_cells is None):
        raise ValidationError("min_cells and max_cells must be given together")
    params = settings.default_params(
        q=None if q is None else parse_weight(q),
        configs_per_k=(
            None if configs_per_k is None
            else validate_positive_integer(configs_per_k, "configs_per_k")
        ),
        range_configs_per_k=(
            None if range_configs_per_k is None
            else validate_positive_integer(range_configs_per_k, "range_configs_per_k")
        ),
        allow_singletons=allow_singletons,
        seed=validate_seed(seed),
        cell_range=None if min_cells is None else (min_cells, max_cells),
    )
    runs = validate_positive_integer(runs, "runs")
    logger.info(f"Executing solve_instance on '{resolved.name}' (runs={runs}, seed={seed})")
    try:
        if runs > 1:
            summary = multirun(resolved.matrix, params, runs)
            return solve_record(resolved.name, resolved.matrix, params, summary.best, summary)
        report = solve(resolved.matrix, params)
        return solve_record(resolved.name, resolved.matrix, params, report)
    except ValidationError as e:
        logger.error(f"solve_instance rejected '{resolved.name}': {e}", exc_info=False)
        raise e
    except Exception as e:
        logger.error(f"Unexpected error solving '{resolved.name}': {e}", exc_info=True)
        raise RuntimeError(f"Server error solving instance: {e}")


@mcp.tool(
    "oracle_instance",
    description="Finds the exact optimum of a small instance by exhaustive enumeration.",
)
def oracle_instance(
    instance: str,
    q: Optional[str] = None,
    allow_singletons: bool = True,
    k_min: int = 1,
    k_max: Optional[int] = None,
) -> ResultRecord:
    """
    Exact optimum by enumeration, refused above the CFP_ORACLE_BUDGET work limit.

    Raises:
        ValidationError: If the instance or the cell range is invalid
        EnumerationBudgetExceeded: If the instance is too large to enumerate
    """
    resolved = _resolve_instance(instance)
    settings = get_settings()
    weight = parse_weight(q if q is not None else settings.q)
    logger.info(f"Executing oracle_instance on '{resolved.name}'")
    result = exact_best(
        resolved.matrix, weight, allow_singletons, k_min, k_max, budget=settings.oracle_budget
    )
    return oracle_record(resolved.name, resolved.matrix, weight, allow_singletons, result)


def run_server(transport: Optional[str] = None) -> None:
    """Start the server with the given transport or the CFP_TRANSPORT setting."""
    settings = get_settings()
    configure_logging(settings.log_level)
    transport = transport or settings.transport
    logger.info(f"Starting MCP server with transport: {transport}")
    mcp.run(transport=transport)


# --- Run the server ---
if __name__ == "__main__":
    # Support --sse command-line flag like the cfp serve subcommand
    run_server("sse" if "--sse" in sys.argv else None)
