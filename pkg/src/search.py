"""
Multistart search for the cell formation problem.

``solve`` first runs a short multistart over every cell count from 2 to
min(m, p) to locate a promising number of cells, then generates a larger
batch of configurations around it and keeps the best improved solution.

Every configuration draws its random start from its own stream
(seed, phase, configuration index), and the winner is reduced by exact
efficiency with the lowest configuration index breaking ties, so results do
not depend on the number of worker processes.
"""

import dataclasses
import logging
import time
from concurrent.futures import Executor, ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple

from src.configs import RandomSource, generate_configs, initial_assignment
from src.improve import improve_assignment
from src.logging_utils import describe_matrix, format_ratio
from src.metrics import (
    compute_counters,
    exceptions_plus_voids,
    group_capability_index,
    grouping_efficacy,
    grouping_efficiency,
)
from src.types import (
    CellConfiguration,
    ConfigTrace,
    IncidenceMatrix,
    MultirunSummary,
    Solution,
    SolveParams,
    SolveReport,
)
from src.validators import (
    InfeasibleParametersError,
    ValidationError,
    ensure_valid_solution,
    validate_cell_range,
    validate_has_ones,
)

logger = logging.getLogger(__name__)

# Stream identifiers below the root seed
RANGE_CONFIG_STREAM = 0
RANGE_START_STREAM = 1
MAIN_CONFIG_STREAM = 2
MAIN_START_STREAM = 3

# Minimum configurations per worker process
_MIN_CONFIGS_PER_WORKER = 16


@dataclass(frozen=True)
class MultistartResult:
    """Best solution of a multistart batch and the index of its configuration."""

    solution: Solution
    efficiency: Fraction
    index: int
    trace: Tuple[ConfigTrace, ...] = ()


def _improve_batch(
    matrix: IncidenceMatrix,
    indexed_configs: Sequence[Tuple[int, CellConfiguration]],
    params: SolveParams,
    stream: int,
) -> Tuple[Optional[MultistartResult], List[ConfigTrace]]:
    """Improve a contiguous batch of configurations; runs inside worker processes."""
    root = RandomSource(params.seed, stream)
    best: Optional[MultistartResult] = None
    trace: List[ConfigTrace] = []
    for index, config in indexed_configs:
        machine_cell, part_cell = initial_assignment(matrix, config, root.substream(index))
        improved, efficiency = improve_assignment(
            matrix, machine_cell, part_cell, config.num_cells, params.q, params.allow_singletons
        )
        if params.keep_trace:
            trace.append(ConfigTrace(index, config.num_cells, improved.nonempty_cells, efficiency))
        # batches are in index order, so a strict comparison keeps the lowest index
        if best is None or efficiency > best.efficiency:
            best = MultistartResult(improved, efficiency, index)
    return best, trace


@contextmanager
def _worker_pool(
    workers: int, shared: Optional[Executor] = None
) -> Iterator[Optional[Executor]]:
    """The shared executor if given, else a fresh process pool (None for one worker)."""
    if shared is not None:
        yield shared
    elif workers <= 1:
        yield None
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            yield executor


def _reduce(results: Sequence[Optional[MultistartResult]]) -> Optional[MultistartResult]:
    best: Optional[MultistartResult] = None
    for result in results:
        if result is None:
            continue
        if (
            best is None
            or result.efficiency > best.efficiency
            or (result.efficiency == best.efficiency and result.index < best.index)
        ):
            best = result
    return best


def run_multistart(
    matrix: IncidenceMatrix,
    configs: Sequence[CellConfiguration],
    params: SolveParams,
    stream: int = MAIN_START_STREAM,
    executor: Optional[Executor] = None,
) -> MultistartResult:
    """
    Improve a random start for every configuration and keep the best.

    With more than one worker the configurations are split into contiguous
    batches, run on ``executor`` when given or on a pool of their own.

    Raises:
        InfeasibleParametersError: If the configuration list is empty
    """
    if not configs:
        raise InfeasibleParametersError("no configurations to improve")
    indexed = list(enumerate(configs))
    workers = min(params.workers, max(1, len(indexed) // _MIN_CONFIGS_PER_WORKER))
    if workers <= 1:
        best, trace = _improve_batch(matrix, indexed, params, stream)
        outcomes = [(best, trace)]
    else:
        size = -(-len(indexed) // workers)
        batches = [indexed[start : start + size] for start in range(0, len(indexed), size)]
        logger.debug(f"Improving {len(indexed)} configurations in {len(batches)} batches")
        with _worker_pool(workers, executor) as pool:
            assert pool is not None
            futures = [
                pool.submit(_improve_batch, matrix, batch, params, stream) for batch in batches
            ]
            outcomes = [future.result() for future in futures]

    best = _reduce([outcome[0] for outcome in outcomes])
    assert best is not None
    trace = tuple(sorted((item for _, items in outcomes for item in items), key=lambda t: t.index))
    return dataclasses.replace(best, trace=trace)


def cm_heuristic(
    matrix: IncidenceMatrix,
    configs: Sequence[CellConfiguration],
    params: SolveParams,
    stream: int = MAIN_START_STREAM,
) -> Solution:
    """Best improved solution over all configurations."""
    return run_multistart(matrix, configs, params, stream).solution


def cell_range_around(best_cells: int, min_dimension: int) -> Tuple[int, int]:
    """best_cells +/- floor(min_dimension / 10), clamped to [2, min_dimension]."""
    spread = min_dimension // 10
    high = min(min_dimension, best_cells + spread)
    low = min(max(2, best_cells - spread), high)
    return low, high


def _check_dimensions(matrix: IncidenceMatrix, params: SolveParams) -> None:
    validate_has_ones(matrix)
    if matrix.min_dimension < 2:
        raise InfeasibleParametersError(
            f"a {matrix.machines}x{matrix.parts} matrix cannot be split into 2 or more cells"
        )
    if not params.allow_singletons and matrix.min_dimension < 4:
        raise InfeasibleParametersError(
            f"without singletons every cell needs 2 machines and 2 parts; "
            f"a {matrix.machines}x{matrix.parts} matrix cannot hold 2 such cells"
        )


def find_optimal_cell_range(
    matrix: IncidenceMatrix, params: SolveParams, executor: Optional[Executor] = None
) -> Tuple[int, int]:
    """
    Locate a promising range of cell counts.

    Runs the multistart with ``range_configs_per_k`` configurations for every
    cell count in [2, min(m, p)] and returns the nonempty cell count of the
    winner widened by ten percent of min(m, p).
    """
    _check_dimensions(matrix, params)
    min_dimension = matrix.min_dimension
    configs = generate_configs(
        2,
        min_dimension,
        params.range_configs_per_k,
        matrix.machines,
        matrix.parts,
        params.min_cell_size,
        RandomSource(params.seed, RANGE_CONFIG_STREAM),
    )
    if not configs:
        raise InfeasibleParametersError("no feasible cell count for the range search")
    result = run_multistart(matrix, configs, params, RANGE_START_STREAM, executor)
    best_cells = result.solution.nonempty_cells
    cell_range = cell_range_around(best_cells, min_dimension)
    logger.info(
        f"Range search: best {format_ratio(result.efficiency)} with {best_cells} cells, "
        f"searching cells {cell_range[0]}..{cell_range[1]}"
    )
    return cell_range


def build_report(
    matrix: IncidenceMatrix,
    solution: Solution,
    params: SolveParams,
    cell_range: Tuple[int, int],
    elapsed: float,
    trace: Tuple[ConfigTrace, ...] = (),
) -> SolveReport:
    """Recompute all metrics of a solution from its assignment and wrap them in a report."""
    counters = compute_counters(matrix, solution.machine_cell, solution.part_cell)
    solution = ensure_valid_solution(
        matrix,
        Solution(solution.machine_cell, solution.part_cell, solution.num_cells, counters),
        params.allow_singletons,
    )
    return SolveReport(
        solution=solution,
        efficiency=grouping_efficiency(counters, params.q),
        efficacy=grouping_efficacy(counters),
        group_capability=group_capability_index(counters),
        exceptions_plus_voids=exceptions_plus_voids(counters),
        cells=solution.nonempty_cells,
        cell_range=cell_range,
        elapsed=elapsed,
        seed=params.seed,
        trace=trace,
    )


def solve(
    matrix: IncidenceMatrix, params: SolveParams, executor: Optional[Executor] = None
) -> SolveReport:
    """
    Run the range search (unless an explicit range is given) and the main multistart.

    Both phases share one worker pool: ``executor`` when given, else a pool
    opened for this call when ``params.workers`` exceeds one.

    Raises:
        InfeasibleParametersError: If the matrix or singleton policy admits no configuration
        ValidationError: If an explicit cell range does not fit the matrix
    """
    started = time.perf_counter()
    logger.info(f"Solving {describe_matrix(matrix)} (q={params.q}, seed={params.seed})")
    _check_dimensions(matrix, params)
    cell_range: Optional[Tuple[int, int]] = None
    if params.cell_range is not None:
        cell_range = validate_cell_range(*params.cell_range, matrix.min_dimension)
    with _worker_pool(params.workers, executor) as pool:
        if cell_range is None:
            cell_range = find_optimal_cell_range(matrix, params, pool)

        configs = generate_configs(
            cell_range[0],
            cell_range[1],
            params.configs_per_k,
            matrix.machines,
            matrix.parts,
            params.min_cell_size,
            RandomSource(params.seed, MAIN_CONFIG_STREAM),
        )
        if not configs:
            raise InfeasibleParametersError(
                f"no feasible configuration with {cell_range[0]}..{cell_range[1]} cells"
            )
        result = run_multistart(matrix, configs, params, MAIN_START_STREAM, pool)
    elapsed = round(time.perf_counter() - started, 3)
    report = build_report(matrix, result.solution, params, cell_range, elapsed, result.trace)
    logger.info(
        f"Best {format_ratio(report.efficiency)} with {report.cells} cells "
        f"from {len(configs)} configurations in {elapsed:.3f}s"
    )
    return report


def multirun(matrix: IncidenceMatrix, params: SolveParams, runs: int) -> MultirunSummary:
    """
    Solve with seeds seed, seed + 1, ..., seed + runs - 1 and aggregate the efficiencies.

    Raises:
        ValidationError: If runs is not positive
    """
    if runs < 1:
        raise ValidationError(f"runs must be at least 1, got {runs}")
    reports = []
    with _worker_pool(params.workers) as pool:
        for offset in range(runs):
            run_params = dataclasses.replace(params, seed=params.seed + offset)
            reports.append(solve(matrix, run_params, pool))
    efficiencies = [report.efficiency for report in reports]
    summary = MultirunSummary(
        minimum=min(efficiencies),
        average=sum(efficiencies, Fraction(0)) / runs,
        maximum=max(efficiencies),
        reports=tuple(reports),
    )
    logger.info(
        f"{runs} runs: min {format_ratio(summary.minimum)}, "
        f"max {format_ratio(summary.maximum)}"
    )
    return summary


def solve_both_policies(
    matrix: IncidenceMatrix, params: SolveParams
) -> Tuple[SolveReport, Optional[SolveReport]]:
    """
    Solve with singletons allowed and with singletons forbidden.

    Returns:
        (report with singletons, report without singletons or None when the
        matrix is too small for singleton-free cells)
    """
    with _worker_pool(params.workers) as pool:
        with_singletons = solve(matrix, dataclasses.replace(params, allow_singletons=True), pool)
        try:
            without_singletons = solve(
                matrix, dataclasses.replace(params, allow_singletons=False), pool
            )
        except InfeasibleParametersError as e:
            logger.warning(f"Singleton-free solve skipped: {e}")
            without_singletons = None
    return with_singletons, without_singletons
