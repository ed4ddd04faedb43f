"""
Unit tests for counters and the four cell formation objectives.
"""

from fractions import Fraction

import numpy as np
import pytest

from src.configs import random_initial_solution
from src.metrics import (
    Ordering,
    compare_efficiency,
    compute_counters,
    efficiency_ratio,
    exceptions_plus_voids,
    group_capability_index,
    grouping_efficacy,
    grouping_efficiency,
    make_solution,
)
from src.types import HALF, CellConfiguration, Counters, IncidenceMatrix, Weight
from src.validators import ValidationError

pytestmark = [pytest.mark.unit, pytest.mark.core]


class TestCounters:
    """Test compute_counters on the 5x7 sample"""

    def test_singleton_solution_counts(self, matrix_5x7, singleton_solution_5x7):
        """Ones and zeros inside and outside the two cells"""
        counters = singleton_solution_5x7.counters
        assert counters.n1_in == 16
        assert counters.n_in == 19
        assert counters.n0_in == 3
        assert counters.n1_out == 4
        assert counters.n0_out == 12
        assert counters.n_out == 16
        assert counters.is_consistent()

    def test_counter_identities(self, matrix_5x7, balanced_solution_5x7):
        """n_in + n_out = m*p and the ones/zeros split adds up"""
        c = balanced_solution_5x7.counters
        assert c.n_in + c.n_out == matrix_5x7.size
        assert c.n1_in + c.n1_out == matrix_5x7.n1
        assert c.n0_in + c.n0_out == matrix_5x7.n0
        assert c.n_in == balanced_solution_5x7.configuration().n_in

    def test_dimension_mismatch_rejected(self, matrix_5x7):
        """Assignments of the wrong length are rejected"""
        with pytest.raises(ValidationError, match="machine assignment has 4 entries"):
            compute_counters(matrix_5x7, [0, 0, 1, 1], [0] * 7)

    def test_shifted_matches_recomputation(self, matrix_8x12, start_solution_8x12):
        """Shifting by a move's changes equals counting the moved assignment"""
        part_cell = list(start_solution_8x12.part_cell)
        part_cell[3] = 0
        expected = compute_counters(matrix_8x12, start_solution_8x12.machine_cell, part_cell)
        assert start_solution_8x12.counters.shifted(3, 0) == expected


class TestGoldenValues:
    """Objective values of the reference solutions"""

    def test_efficiency_with_singletons(self, singleton_solution_5x7):
        """eta = 1/2 * 16/19 + 1/2 * 12/16 = 121/152"""
        efficiency = grouping_efficiency(singleton_solution_5x7.counters, HALF)
        assert efficiency == Fraction(121, 152)
        assert round(float(efficiency) * 100, 2) == 79.60

    def test_other_objectives_with_singletons(self, singleton_solution_5x7):
        """Efficacy 16/23, GCI 4/5, E+V 7"""
        counters = singleton_solution_5x7.counters
        assert grouping_efficacy(counters) == Fraction(16, 23)
        assert round(float(grouping_efficacy(counters)) * 100, 2) == 69.57
        assert group_capability_index(counters) == Fraction(4, 5)
        assert exceptions_plus_voids(counters) == 7

    def test_objectives_without_singletons(self, balanced_solution_5x7):
        """eta = 15/38 + 11/32 (73.85%), efficacy 15/24, GCI 3/4, E+V 9"""
        counters = balanced_solution_5x7.counters
        efficiency = grouping_efficiency(counters, HALF)
        assert efficiency == Fraction(15, 38) + Fraction(11, 32)
        assert round(float(efficiency) * 100, 2) == 73.85
        assert grouping_efficacy(counters) == Fraction(15, 24)
        assert group_capability_index(counters) == Fraction(3, 4)
        assert exceptions_plus_voids(counters) == 9

    def test_relocation_example_values(self, matrix_8x12, start_solution_8x12):
        """8x12 start is 20/66 + 48/126, the part-4 move gives 23/66 + 51/126"""
        before = start_solution_8x12.counters
        after = before.shifted(3, 0)
        assert grouping_efficiency(before, HALF) == Fraction(20, 66) + Fraction(48, 126)
        assert grouping_efficiency(after, HALF) == Fraction(23, 66) + Fraction(51, 126)
        assert round(float(grouping_efficiency(before, HALF)) * 100, 2) == 68.40
        assert round(float(grouping_efficiency(after, HALF)) * 100, 2) == 75.32

    def test_perfect_block_diagonal(self):
        """A block-diagonal matrix split along its blocks scores 1 everywhere"""
        matrix = IncidenceMatrix.from_rows([[1, 1, 0], [1, 1, 0], [0, 0, 1]])
        solution = make_solution(matrix, [0, 0, 1], [0, 0, 1])
        counters = solution.counters
        assert grouping_efficiency(counters, HALF) == 1
        assert grouping_efficacy(counters) == 1
        assert group_capability_index(counters) == 1
        assert exceptions_plus_voids(counters) == 0


class TestEfficiencyEdgeCases:
    """Weight handling and degenerate counters"""

    def test_single_cell_uses_unit_outer_term(self):
        """With nothing outside the cells the inter-cell term counts as 1"""
        matrix = IncidenceMatrix.from_rows([[1, 1], [1, 1]])
        counters = compute_counters(matrix, [0, 0], [0, 0])
        assert counters.n_out == 0
        assert grouping_efficiency(counters, HALF) == 1
        assert grouping_efficiency(counters, Weight(1, 4)) == 1

    def test_empty_inside_rejected(self):
        """Efficiency is undefined when no element lies inside a cell"""
        counters = Counters.from_inside(n1=2, n0=2, n_in=0, n1_in=0)
        with pytest.raises(ValidationError, match="at least one element inside"):
            grouping_efficiency(counters, HALF)

    def test_weight_extremes(self, singleton_solution_5x7):
        """q = 1 keeps only the loading term, q = 0 only the inter-cell term"""
        counters = singleton_solution_5x7.counters
        assert grouping_efficiency(counters, Weight(1, 1)) == Fraction(16, 19)
        assert grouping_efficiency(counters, Weight(0, 1)) == Fraction(12, 16)

    def test_ratio_matches_fraction(self, singleton_solution_5x7):
        """efficiency_ratio is the unreduced form of grouping_efficiency"""
        numerator, denominator = efficiency_ratio(singleton_solution_5x7.counters, HALF)
        assert Fraction(numerator, denominator) == Fraction(121, 152)

    def test_capability_index_without_ones(self):
        """GCI is undefined for an all-zero matrix"""
        counters = Counters.from_inside(n1=0, n0=4, n_in=2, n1_in=0)
        with pytest.raises(ValidationError):
            group_capability_index(counters)


class TestCompareEfficiency:
    """Exact comparison of efficiencies"""

    def test_improving_move_compares_less(self, start_solution_8x12):
        """68.40% before the part-4 move is less than 75.32% after"""
        before = start_solution_8x12.counters
        after = before.shifted(3, 0)
        assert compare_efficiency(before, after, HALF) is Ordering.LESS
        assert compare_efficiency(after, before, HALF) is Ordering.GREATER

    def test_identical_counters_equal(self, singleton_solution_5x7):
        counters = singleton_solution_5x7.counters
        assert compare_efficiency(counters, counters, HALF) is Ordering.EQUAL

    def test_more_ones_inside_is_greater(self, singleton_solution_5x7):
        """At fixed n_in one more one inside (one fewer void) is better"""
        counters = singleton_solution_5x7.counters
        better = counters.shifted(1, 0)
        assert compare_efficiency(better, counters, HALF) is Ordering.GREATER

    def test_agrees_with_fractions(self, rng):
        """Comparison equals comparing exact fractions for random counters"""
        for _ in range(500):
            n1 = int(rng.integers(1, 40))
            n0 = int(rng.integers(1, 40))
            q = Weight(int(rng.integers(0, 5)), 4)
            pair = []
            for _ in range(2):
                n_in = int(rng.integers(1, n1 + n0 + 1))
                n1_in = int(rng.integers(max(0, n_in - n0), min(n1, n_in) + 1))
                pair.append(Counters.from_inside(n1, n0, n_in, n1_in))
            a, b = pair
            fa, fb = grouping_efficiency(a, q), grouping_efficiency(b, q)
            expected = Ordering.LESS if fa < fb else Ordering.GREATER if fa > fb else Ordering.EQUAL
            assert compare_efficiency(a, b, q) is expected


class TestFixedConfigurationOrdering:
    """All four objectives order solutions alike when n_in is fixed"""

    @staticmethod
    def _sign(value) -> int:
        return (value > 0) - (value < 0)

    def test_objective_orderings_agree(self, rng):
        """1000 random solution pairs sharing a configuration"""
        checked = 0
        while checked < 1000:
            m = int(rng.integers(2, 11))
            p = int(rng.integers(2, 13))
            bits = rng.integers(0, 2, size=(m, p))
            bits[0, 0] = 1
            matrix = IncidenceMatrix(bits)
            k = int(rng.integers(2, min(m, p) + 1))
            machine_sizes = [1] * k
            part_sizes = [1] * k
            for _ in range(m - k):
                machine_sizes[int(rng.integers(0, k))] += 1
            for _ in range(p - k):
                part_sizes[int(rng.integers(0, k))] += 1
            config = CellConfiguration.from_partitions(machine_sizes, part_sizes)
            first = random_initial_solution(matrix, config, rng).counters
            second = random_initial_solution(matrix, config, rng).counters
            assert first.n_in == second.n_in

            eta = self._sign(grouping_efficiency(first, HALF) - grouping_efficiency(second, HALF))
            tau = self._sign(grouping_efficacy(first) - grouping_efficacy(second))
            gci = self._sign(group_capability_index(first) - group_capability_index(second))
            ev = self._sign(exceptions_plus_voids(second) - exceptions_plus_voids(first))
            assert eta == tau == gci == ev
            checked += 1

    def test_exceptions_plus_voids_identity(self, singleton_solution_5x7, matrix_5x7):
        """E+V = n1 + n_in - 2 * n1_in"""
        c = singleton_solution_5x7.counters
        assert exceptions_plus_voids(c) == matrix_5x7.n1 + c.n_in - 2 * c.n1_in
