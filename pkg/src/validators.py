"""
Input Validation Module

Provides validation functions for user inputs (weights, counts, cell ranges,
assignments) and the feasibility check of solutions against the assignment
and cell constraints of the cell formation model.
"""

import re
from fractions import Fraction
from typing import Any, Optional, Sequence, Tuple

import numpy as np

from src.types import IncidenceMatrix, Solution, Violation, Weight

# "1/2", "0.5", "1" and "0" are all accepted weight spellings
WEIGHT_REGEX = re.compile(r"^\s*(\d+)\s*/\s*(\d+)\s*$|^\s*(\d+(?:\.\d+)?)\s*$")

# Upper bound on instance dimensions accepted from files and tools
MAX_DIMENSION = 10000


class ValidationError(ValueError):
    """Raised when input validation fails."""

    pass


class InstanceFormatError(ValidationError):
    """Raised when an instance file cannot be parsed."""

    def __init__(self, message: str, line: int, column: int = 0):
        self.line = line
        self.column = column
        location = f"line {line}" if not column else f"line {line}, column {column}"
        super().__init__(f"{location}: {message}")


class InfeasibleParametersError(ValidationError):
    """Raised when a parameter combination admits no feasible configuration."""

    pass


class InfeasibleMoveError(ValidationError):
    """Raised when a move would empty a cell or create a forbidden singleton."""

    pass


class SolutionInfeasibleError(ValidationError):
    """Raised when a solution violates a model constraint."""

    def __init__(self, violation: Violation):
        self.violation = violation
        super().__init__(f"constraint {violation.constraint}: {violation.message}")


def validate_positive_integer(value: Any, field_name: str) -> int:
    """
    Validate that a value is a positive integer.

    Args:
        value: The value to validate
        field_name: Name of the field for error messages

    Returns:
        The validated integer value

    Raises:
        ValidationError: If value is not a positive integer
    """
    # Reject floats and booleans explicitly
    if isinstance(value, (float, bool)):
        raise ValidationError(f"{field_name} must be an integer, got {type(value).__name__}")

    try:
        int_value = int(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{field_name} must be an integer, got {type(value).__name__}")

    if int_value <= 0:
        raise ValidationError(f"{field_name} must be a positive integer, got {int_value}")

    return int_value


def validate_seed(value: Any) -> int:
    """Validate a 64-bit unsigned seed."""
    if isinstance(value, (float, bool)):
        raise ValidationError(f"seed must be an integer, got {type(value).__name__}")
    try:
        seed = int(value)
    except (TypeError, ValueError):
        raise ValidationError(f"seed must be an integer, got {type(value).__name__}")
    if not 0 <= seed < 2**64:
        raise ValidationError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def parse_weight(value: Any) -> Weight:
    """
    Parse the efficiency weight q.

    Args:
        value: A Weight, a Fraction, or a string such as "1/2" or "0.5"

    Returns:
        The exact weight

    Raises:
        ValidationError: If the value is not a rational number in [0, 1]
    """
    if isinstance(value, Weight):
        return value
    if isinstance(value, Fraction):
        fraction = value
    elif isinstance(value, str):
        match = WEIGHT_REGEX.match(value)
        if not match:
            raise ValidationError(f"q must be a fraction like 1/2 or a decimal, got '{value}'")
        if match.group(1) is not None:
            if int(match.group(2)) == 0:
                raise ValidationError("q denominator cannot be zero")
            fraction = Fraction(int(match.group(1)), int(match.group(2)))
        else:
            fraction = Fraction(match.group(3))
    else:
        raise ValidationError(f"q must be a string or Fraction, got {type(value).__name__}")

    if not 0 <= fraction <= 1:
        raise ValidationError(f"q must lie in [0, 1], got {fraction}")
    return Weight.from_fraction(fraction)


def validate_cell_range(min_cells: int, max_cells: int, min_dimension: int) -> Tuple[int, int]:
    """
    Validate an explicit cell-count range against the matrix dimensions.

    Raises:
        ValidationError: Unless 2 <= min_cells <= max_cells <= min_dimension
    """
    low = validate_positive_integer(min_cells, "min_cells")
    high = validate_positive_integer(max_cells, "max_cells")
    if low < 2:
        raise ValidationError(f"min_cells must be at least 2, got {low}")
    if low > high:
        raise ValidationError(f"min_cells ({low}) cannot exceed max_cells ({high})")
    if high > min_dimension:
        raise ValidationError(
            f"max_cells ({high}) cannot exceed min(m, p) = {min_dimension}"
        )
    return low, high


def validate_has_ones(matrix: IncidenceMatrix) -> None:
    """
    Reject an all-zero matrix, whose group capability index is undefined.

    Raises:
        ValidationError: If the matrix holds no ones
    """
    if matrix.n1 == 0:
        raise ValidationError(
            f"the {matrix.machines}x{matrix.parts} matrix has no ones; "
            f"its group capability index is undefined"
        )


def validate_assignment(
    matrix: IncidenceMatrix, machine_cell: Sequence[int], part_cell: Sequence[int]
) -> None:
    """
    Check that assignment arrays match the matrix and hold nonnegative cell indices.

    Raises:
        ValidationError: On a dimension mismatch or a negative index
    """
    if len(machine_cell) != matrix.machines:
        raise ValidationError(
            f"machine assignment has {len(machine_cell)} entries, matrix has "
            f"{matrix.machines} machines"
        )
    if len(part_cell) != matrix.parts:
        raise ValidationError(
            f"part assignment has {len(part_cell)} entries, matrix has {matrix.parts} parts"
        )
    if min(machine_cell) < 0 or min(part_cell) < 0:
        raise ValidationError("cell indices must be nonnegative")


def validate_solution(
    matrix: IncidenceMatrix, solution: Solution, allow_singletons: bool = True
) -> Optional[Violation]:
    """
    Check a solution against the assignment and nonempty-cell constraints.

    Every machine and part must sit in one of the solution's cells
    (machine_assignment, part_assignment), and every used cell must hold at
    least one part and one machine, two of each when singletons are not
    allowed (cell_parts, cell_machines). Counters must match a recomputation
    from the assignment.

    Args:
        matrix: The incidence matrix
        solution: The solution to check
        allow_singletons: Whether one-machine or one-part cells are allowed

    Returns:
        None when feasible, otherwise the first violated constraint
        (cell and entity indices are 1-based in the message and indices)
    """
    # Imported here: metrics imports the validators
    from src.metrics import compute_counters

    k = solution.num_cells
    if len(solution.machine_cell) != matrix.machines or len(solution.part_cell) != matrix.parts:
        return Violation(
            "dimensions",
            f"assignment is {len(solution.machine_cell)}x{len(solution.part_cell)}, "
            f"matrix is {matrix.machines}x{matrix.parts}",
        )
    for i, cell in enumerate(solution.machine_cell):
        if not 0 <= cell < k:
            return Violation(
                "machine_assignment", f"machine {i + 1} is not assigned to any of {k} cells", (i + 1,)
            )
    for j, cell in enumerate(solution.part_cell):
        if not 0 <= cell < k:
            return Violation(
                "part_assignment", f"part {j + 1} is not assigned to any of {k} cells", (j + 1,)
            )

    minimum = 1 if allow_singletons else 2
    machine_sizes = np.bincount(solution.machine_cell, minlength=k)
    part_sizes = np.bincount(solution.part_cell, minlength=k)
    for cell in range(k):
        m_k, p_k = int(machine_sizes[cell]), int(part_sizes[cell])
        if m_k == 0 and p_k == 0:
            continue
        if m_k > 0 and p_k < minimum:
            return Violation(
                "cell_parts", f"cell {cell + 1} has {m_k} machines but {p_k} parts", (cell + 1,)
            )
        if p_k > 0 and m_k < minimum:
            return Violation(
                "cell_machines", f"cell {cell + 1} has {p_k} parts but {m_k} machines", (cell + 1,)
            )

    expected = compute_counters(matrix, solution.machine_cell, solution.part_cell)
    if expected != solution.counters:
        return Violation("counters", "cached counters differ from a recomputation")
    return None


def ensure_valid_solution(
    matrix: IncidenceMatrix, solution: Solution, allow_singletons: bool = True
) -> Solution:
    """Raise SolutionInfeasibleError unless the solution is feasible."""
    violation = validate_solution(matrix, solution, allow_singletons)
    if violation is not None:
        raise SolutionInfeasibleError(violation)
    return solution
