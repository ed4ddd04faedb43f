"""
Unit tests for the validators module.
Tests parameter validation and the feasibility check of solutions.
"""

from fractions import Fraction

import pytest

from src.metrics import make_solution
from src.types import Solution, Weight
from src.validators import (
    InstanceFormatError,
    SolutionInfeasibleError,
    ValidationError,
    ensure_valid_solution,
    parse_weight,
    validate_assignment,
    validate_cell_range,
    validate_positive_integer,
    validate_seed,
    validate_solution,
)

pytestmark = [pytest.mark.unit, pytest.mark.core]


class TestPositiveIntegerValidation:
    """Test cases for validate_positive_integer"""

    def test_valid_positive_integer(self):
        """Should accept positive integers"""
        assert validate_positive_integer(1, "configs") == 1
        assert validate_positive_integer(2000, "configs") == 2000

    def test_valid_string_integer(self):
        """Should convert string integers to int"""
        assert validate_positive_integer("42", "configs") == 42

    def test_zero_rejected(self):
        """Should reject zero"""
        with pytest.raises(ValidationError, match="must be a positive integer"):
            validate_positive_integer(0, "configs")

    def test_bool_and_float_rejected(self):
        """Should reject booleans and floats"""
        with pytest.raises(ValidationError, match="must be an integer"):
            validate_positive_integer(True, "configs")
        with pytest.raises(ValidationError, match="must be an integer"):
            validate_positive_integer(1.5, "configs")


class TestSeedValidation:
    """Test cases for validate_seed"""

    def test_accepts_64_bit_range(self):
        assert validate_seed(0) == 0
        assert validate_seed(2**64 - 1) == 2**64 - 1

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError, match="64-bit"):
            validate_seed(-1)
        with pytest.raises(ValidationError, match="64-bit"):
            validate_seed(2**64)


class TestParseWeight:
    """Test cases for parse_weight"""

    def test_fraction_string(self):
        assert parse_weight("1/2") == Weight(1, 2)
        assert parse_weight(" 3 / 4 ") == Weight(3, 4)

    def test_decimal_string(self):
        assert parse_weight("0.25") == Weight(1, 4)
        assert parse_weight("1") == Weight(1, 1)

    def test_reduces_fraction(self):
        """2/4 is stored as 1/2"""
        assert str(parse_weight("2/4")) == "1/2"

    def test_fraction_and_weight_pass_through(self):
        assert parse_weight(Fraction(1, 3)) == Weight(1, 3)
        assert parse_weight(Weight(2, 5)) == Weight(2, 5)

    @pytest.mark.parametrize("value", ["3/2", "1.5", "-1/2", "abc", "1/0", ""])
    def test_invalid_weights(self, value):
        """Weights outside [0, 1] or malformed strings are rejected"""
        with pytest.raises(ValidationError):
            parse_weight(value)

    def test_non_string_rejected(self):
        with pytest.raises(ValidationError, match="string or Fraction"):
            parse_weight(0.5)


class TestCellRangeValidation:
    """Test cases for validate_cell_range"""

    def test_valid_range(self):
        assert validate_cell_range(2, 4, 5) == (2, 4)

    def test_single_cell_rejected(self):
        with pytest.raises(ValidationError, match="at least 2"):
            validate_cell_range(1, 3, 5)

    def test_reversed_range_rejected(self):
        with pytest.raises(ValidationError, match="cannot exceed max_cells"):
            validate_cell_range(4, 3, 5)

    def test_above_min_dimension_rejected(self):
        with pytest.raises(ValidationError, match=r"min\(m, p\) = 5"):
            validate_cell_range(2, 6, 5)


class TestAssignmentValidation:
    """Test cases for validate_assignment"""

    def test_part_length_mismatch(self, matrix_5x7):
        with pytest.raises(ValidationError, match="part assignment has 6 entries"):
            validate_assignment(matrix_5x7, [0] * 5, [0] * 6)

    def test_negative_cell_rejected(self, matrix_5x7):
        with pytest.raises(ValidationError, match="nonnegative"):
            validate_assignment(matrix_5x7, [0, 0, 1, 1, -1], [0] * 7)


class TestValidateSolution:
    """Test cases for validate_solution"""

    def test_singleton_solution_feasible_with_singletons(self, matrix_5x7, singleton_solution_5x7):
        assert validate_solution(matrix_5x7, singleton_solution_5x7, allow_singletons=True) is None

    def test_singleton_solution_infeasible_without_singletons(
        self, matrix_5x7, singleton_solution_5x7
    ):
        """Cell 1 holds a single machine"""
        violation = validate_solution(matrix_5x7, singleton_solution_5x7, allow_singletons=False)
        assert violation is not None
        assert violation.constraint == "cell_machines"
        assert violation.indices == (1,)
        assert "cell 1 has 3 parts but 1 machines" in violation.message

    def test_balanced_solution_feasible_without_singletons(
        self, matrix_5x7, balanced_solution_5x7
    ):
        assert validate_solution(matrix_5x7, balanced_solution_5x7, allow_singletons=False) is None

    def test_machine_outside_every_cell(self, matrix_5x7, singleton_solution_5x7):
        """A machine pointing at a cell index >= k is reported 1-based"""
        bad = Solution(
            (0, 1, 1, 1, 2), singleton_solution_5x7.part_cell, 2, singleton_solution_5x7.counters
        )
        violation = validate_solution(matrix_5x7, bad)
        assert violation.constraint == "machine_assignment"
        assert violation.indices == (5,)

    def test_part_outside_every_cell(self, matrix_5x7, singleton_solution_5x7):
        bad = Solution(
            singleton_solution_5x7.machine_cell, (0, 1, 1, 1, 1, 0, 5), 2,
            singleton_solution_5x7.counters,
        )
        violation = validate_solution(matrix_5x7, bad)
        assert violation.constraint == "part_assignment"
        assert violation.indices == (7,)

    def test_cell_with_machines_but_no_parts(self, matrix_5x7):
        """Machines in cell 3 without any part violate the cell constraint"""
        solution = make_solution(matrix_5x7, [0, 1, 1, 2, 1], [0, 1, 1, 1, 1, 0, 0], 3)
        violation = validate_solution(matrix_5x7, solution)
        assert violation.constraint == "cell_parts"
        assert violation.indices == (3,)

    def test_fully_empty_cell_allowed(self, matrix_5x7):
        """A cell with neither machines nor parts is not a violation"""
        solution = make_solution(matrix_5x7, [0, 1, 1, 1, 1], [0, 1, 1, 1, 1, 0, 0], 3)
        assert validate_solution(matrix_5x7, solution) is None

    def test_stale_counters_reported(self, matrix_5x7, singleton_solution_5x7, balanced_solution_5x7):
        stale = Solution(
            singleton_solution_5x7.machine_cell,
            singleton_solution_5x7.part_cell,
            2,
            balanced_solution_5x7.counters,
        )
        assert validate_solution(matrix_5x7, stale).constraint == "counters"

    def test_ensure_valid_solution_raises(self, matrix_5x7, singleton_solution_5x7):
        with pytest.raises(SolutionInfeasibleError, match="constraint cell_machines") as info:
            ensure_valid_solution(matrix_5x7, singleton_solution_5x7, allow_singletons=False)
        assert info.value.violation.indices == (1,)


class TestExceptionHierarchy:
    """Every input error is a ValidationError and a ValueError"""

    def test_instance_format_error_location(self):
        error = InstanceFormatError("bad token", 3, 5)
        assert isinstance(error, ValidationError)
        assert isinstance(error, ValueError)
        assert str(error) == "line 3, column 5: bad token"
        assert (error.line, error.column) == (3, 5)

    def test_instance_format_error_without_column(self):
        assert str(InstanceFormatError("missing rows", 9)) == "line 9: missing rows"
