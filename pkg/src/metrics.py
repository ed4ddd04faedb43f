"""
Objective functions of the cell formation problem.

All objectives are returned as exact fractions so that comparisons never
depend on floating-point rounding.
"""

from enum import IntEnum
from fractions import Fraction
from typing import Sequence

import numpy as np

from src.types import Counters, IncidenceMatrix, Solution, Weight
from src.validators import ValidationError, validate_assignment


class Ordering(IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def compute_counters(
    matrix: IncidenceMatrix, machine_cell: Sequence[int], part_cell: Sequence[int]
) -> Counters:
    """
    Count the elements inside and outside the cells of an assignment.

    Element (i, j) is inside a cell when machine i and part j are assigned to
    the same cell.

    Raises:
        ValidationError: If the assignment does not match the matrix dimensions
    """
    validate_assignment(matrix, machine_cell, part_cell)
    machines = np.asarray(machine_cell)
    parts = np.asarray(part_cell)
    inside = machines[:, None] == parts[None, :]
    n_in = int(inside.sum())
    n1_in = int(matrix.cells_bits[inside].sum())
    return Counters.from_inside(matrix.n1, matrix.n0, n_in, n1_in)


def make_solution(
    matrix: IncidenceMatrix,
    machine_cell: Sequence[int],
    part_cell: Sequence[int],
    num_cells: int = 0,
) -> Solution:
    """
    Build a Solution with freshly computed counters.

    ``num_cells`` defaults to one more than the largest referenced cell index.
    """
    counters = compute_counters(matrix, machine_cell, part_cell)
    k = num_cells or max(max(machine_cell), max(part_cell)) + 1
    return Solution(tuple(machine_cell), tuple(part_cell), k, counters)


def _efficiency_terms(counters: Counters, q: Weight):
    """Numerators and denominators of q*n1_in/n_in and (1-q)*n0_out/n_out."""
    if counters.n_in <= 0:
        raise ValidationError("grouping efficiency needs at least one element inside cells")
    inner = (q.numerator * counters.n1_in, q.denominator * counters.n_in)
    if counters.n_out == 0:
        # no outside elements: the inter-cell term counts as 1
        outer = (q.denominator - q.numerator, q.denominator)
    else:
        outer = ((q.denominator - q.numerator) * counters.n0_out, q.denominator * counters.n_out)
    return inner, outer


def efficiency_ratio(counters: Counters, q: Weight):
    """Grouping efficiency as an integer (numerator, denominator) pair, not reduced."""
    (a, b), (c, d) = _efficiency_terms(counters, q)
    return a * d + c * b, b * d


def grouping_efficiency(counters: Counters, q: Weight) -> Fraction:
    """
    Grouping efficiency q*n1_in/n_in + (1-q)*n0_out/n_out.

    Raises:
        ValidationError: If no element lies inside a cell
    """
    numerator, denominator = efficiency_ratio(counters, q)
    return Fraction(numerator, denominator)


def grouping_efficacy(counters: Counters) -> Fraction:
    """Grouping efficacy n1_in / (n1 + n0_in)."""
    denominator = counters.n1 + counters.n0_in
    if denominator == 0:
        raise ValidationError("grouping efficacy is undefined without ones or voids")
    return Fraction(counters.n1_in, denominator)


def group_capability_index(counters: Counters) -> Fraction:
    """Group capability index (n1 - n1_out) / n1."""
    if counters.n1 == 0:
        raise ValidationError("group capability index is undefined for a matrix without ones")
    return Fraction(counters.n1 - counters.n1_out, counters.n1)


def exceptions_plus_voids(counters: Counters) -> int:
    """Number of exceptions (ones outside cells) plus voids (zeros inside cells)."""
    return counters.n1_out + counters.n0_in


def compare_efficiency(a: Counters, b: Counters, q: Weight) -> Ordering:
    """
    Compare the grouping efficiencies of two counter sets exactly.

    Uses integer cross-multiplication, so equal efficiencies compare EQUAL.
    """
    a_num, a_den = efficiency_ratio(a, q)
    b_num, b_den = efficiency_ratio(b, q)
    left, right = a_num * b_den, b_num * a_den
    if left < right:
        return Ordering.LESS
    if left > right:
        return Ordering.GREATER
    return Ordering.EQUAL
