"""
Exact optimum of tiny cell formation instances by exhaustive enumeration.

Machines are split into k unlabeled groups (restricted growth strings, so a
group is identified by its smallest machine), and every surjective assignment
of parts onto those groups is scored. Work grows like S(m, k) * k^p, so the
enumeration refuses instances above a configurable budget instead of
truncating silently.
"""

import logging
import time
from functools import lru_cache
from fractions import Fraction
from typing import Iterator, List, Optional, Tuple

import numpy as np

from src.logging_utils import describe_matrix, format_ratio
from src.metrics import grouping_efficiency, make_solution
from src.types import Counters, IncidenceMatrix, OracleResult, Weight
from src.validators import ValidationError, validate_has_ones

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 2_000_000

# Part assignments scored per vectorized chunk
_CHUNK = 1 << 15

_SCREEN_TOLERANCE = 1e-9


class EnumerationBudgetExceeded(RuntimeError):
    """Raised when an instance is too large to enumerate within the budget."""

    def __init__(self, work: int, budget: int):
        self.work = work
        self.budget = budget
        super().__init__(
            f"exhaustive enumeration needs about {work} assignments, budget is {budget}"
        )


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    """Stirling number of the second kind: partitions of n items into k nonempty blocks."""
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


def enumeration_work(machines: int, parts: int, k_min: int, k_max: int) -> int:
    """Upper bound on the number of part assignments the enumeration scores."""
    return sum(stirling2(machines, k) * k**parts for k in range(k_min, k_max + 1))


def machine_groupings(machines: int, k: int, minimum: int = 1) -> Iterator[Tuple[int, ...]]:
    """
    Every split of the machines into exactly k groups of at least ``minimum``.

    Yields restricted growth strings: machine 0 is in group 0 and every
    machine opens at most the next unused group.
    """
    labels = [0] * machines

    def extend(position: int, used: int) -> Iterator[Tuple[int, ...]]:
        if machines - position < k - used:
            return
        if position == machines:
            if used == k:
                yield tuple(labels)
            return
        for group in range(min(used + 1, k)):
            labels[position] = group
            yield from extend(position + 1, max(used, group + 1))

    for grouping in extend(1, 1):
        if min(np.bincount(grouping, minlength=k)) >= minimum:
            yield grouping


def _part_assignments(parts: int, k: int, start: int, stop: int) -> np.ndarray:
    """Part assignments with codes start..stop-1 (base-k digits, part 0 least significant)."""
    codes = np.arange(start, stop, dtype=np.int64)
    powers = k ** np.arange(parts, dtype=np.int64)
    return (codes[:, None] // powers[None, :]) % k


def exact_best(
    matrix: IncidenceMatrix,
    q: Weight,
    allow_singletons: bool = True,
    k_min: int = 1,
    k_max: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
) -> OracleResult:
    """
    Maximize the grouping efficiency over every feasible solution with k_min..k_max cells.

    Ties keep the first solution in enumeration order (fewest cells first).

    Raises:
        ValidationError: If the matrix has no ones, or the cell range is
            invalid or admits no feasible solution
        EnumerationBudgetExceeded: If the enumeration would exceed ``budget``
    """
    started = time.perf_counter()
    m, p = matrix.machines, matrix.parts
    validate_has_ones(matrix)
    if k_max is None:
        k_max = matrix.min_dimension
    if not 1 <= k_min <= k_max <= matrix.min_dimension:
        raise ValidationError(
            f"cell range {k_min}..{k_max} must satisfy 1 <= k_min <= k_max <= {matrix.min_dimension}"
        )
    work = enumeration_work(m, p, k_min, k_max)
    if work > budget:
        raise EnumerationBudgetExceeded(work, budget)
    logger.info(f"Enumerating {describe_matrix(matrix)} for {k_min}..{k_max} cells (~{work})")

    minimum = 1 if allow_singletons else 2
    bits = matrix.cells_bits.astype(np.int64)
    q_float = float(q.value)
    part_index = np.arange(p)

    best_efficiency: Optional[Fraction] = None
    best_assignment: Optional[Tuple[List[int], List[int], int]] = None
    enumerated = 0

    for k in range(k_min, k_max + 1):
        for grouping in machine_groupings(m, k, minimum):
            onehot = np.eye(k, dtype=np.int64)[list(grouping)]
            ones = bits.T @ onehot
            machine_sizes = onehot.sum(axis=0)
            for start in range(0, k**p, _CHUNK):
                assignments = _part_assignments(p, k, start, min(start + _CHUNK, k**p))
                counts = np.stack([(assignments == cell).sum(axis=1) for cell in range(k)], axis=1)
                feasible = (counts >= minimum).all(axis=1)
                if not feasible.any():
                    continue
                assignments = assignments[feasible]
                enumerated += len(assignments)
                n1_in = ones[part_index[None, :], assignments].sum(axis=1)
                n_in = machine_sizes[assignments].sum(axis=1)
                n_out = matrix.size - n_in
                n0_out = matrix.n0 - (n_in - n1_in)
                with np.errstate(divide="ignore", invalid="ignore"):
                    outer = np.where(n_out > 0, n0_out / np.where(n_out > 0, n_out, 1), 1.0)
                values = q_float * n1_in / n_in + (1.0 - q_float) * outer
                top = values.max()
                for row in np.flatnonzero(values >= top - _SCREEN_TOLERANCE):
                    counters = Counters.from_inside(
                        matrix.n1, matrix.n0, int(n_in[row]), int(n1_in[row])
                    )
                    efficiency = grouping_efficiency(counters, q)
                    if best_efficiency is None or efficiency > best_efficiency:
                        best_efficiency = efficiency
                        best_assignment = (list(grouping), assignments[row].tolist(), k)

    if best_efficiency is None or best_assignment is None:
        raise ValidationError(
            f"no feasible solution with {k_min}..{k_max} cells "
            f"({'with' if allow_singletons else 'without'} singletons)"
        )
    machine_cell, part_cell, k = best_assignment
    solution = make_solution(matrix, machine_cell, part_cell, k)
    elapsed = round(time.perf_counter() - started, 3)
    logger.info(
        f"Exact optimum {format_ratio(best_efficiency)} with {k} cells "
        f"({enumerated} feasible solutions, {elapsed:.3f}s)"
    )
    return OracleResult(best_efficiency, solution, enumerated, elapsed)
