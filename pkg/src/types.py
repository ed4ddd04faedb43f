"""
Type definitions for the cell formation solver.

Holds the immutable value types shared by every module (incidence matrix,
cell configurations, solutions, counters, moves, solver parameters and
reports) together with the TypedDict records returned by the CLI and the
MCP tools.
"""

import sys
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

# For Python 3.10 compatibility, use typing_extensions for TypedDict
if sys.version_info >= (3, 12):
    from typing import TypedDict
else:
    from typing_extensions import TypedDict


# --- Incidence Matrix ---


@dataclass(frozen=True, eq=False)
class IncidenceMatrix:
    """
    Machine-part incidence matrix A = [a_ij].

    Rows are machines, columns are parts. The underlying array is stored as a
    read-only ``uint8`` array so the matrix can be shared between workers.

    Attributes:
        cells_bits: m x p array of 0/1 entries
    """

    cells_bits: np.ndarray

    def __post_init__(self):
        bits = np.array(self.cells_bits, dtype=np.int64, copy=True)
        if bits.ndim != 2:
            raise ValueError(f"Incidence matrix must be 2-dimensional, got {bits.ndim} dimensions")
        if bits.shape[0] < 1 or bits.shape[1] < 1:
            raise ValueError(f"Incidence matrix must be at least 1x1, got {bits.shape}")
        if not np.isin(bits, (0, 1)).all():
            raise ValueError("Incidence matrix entries must be 0 or 1")
        bits = bits.astype(np.uint8)
        bits.setflags(write=False)
        object.__setattr__(self, "cells_bits", bits)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "IncidenceMatrix":
        """Build a matrix from nested row sequences."""
        return cls(np.array([list(row) for row in rows]))

    @property
    def machines(self) -> int:
        return int(self.cells_bits.shape[0])

    @property
    def parts(self) -> int:
        return int(self.cells_bits.shape[1])

    @property
    def size(self) -> int:
        return self.machines * self.parts

    @property
    def n1(self) -> int:
        return int(self.cells_bits.sum())

    @property
    def n0(self) -> int:
        return self.size - self.n1

    @property
    def min_dimension(self) -> int:
        return min(self.machines, self.parts)

    def rows(self) -> List[List[int]]:
        return self.cells_bits.tolist()

    def permuted(self, machine_order: Sequence[int], part_order: Sequence[int]) -> "IncidenceMatrix":
        """Return the matrix with rows and columns reordered."""
        return IncidenceMatrix(self.cells_bits[np.ix_(list(machine_order), list(part_order))])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IncidenceMatrix):
            return NotImplemented
        return bool(np.array_equal(self.cells_bits, other.cells_bits))

    def __hash__(self) -> int:
        return hash((self.cells_bits.shape, self.cells_bits.tobytes()))

    def __repr__(self) -> str:
        return f"IncidenceMatrix({self.machines}x{self.parts}, n1={self.n1})"


# --- Objective Weight ---


@dataclass(frozen=True)
class Weight:
    """
    Exact rational weight q of the grouping efficiency.

    Attributes:
        numerator: Nonnegative integer numerator
        denominator: Positive integer denominator, not smaller than the numerator
    """

    numerator: int = 1
    denominator: int = 2

    def __post_init__(self):
        if self.denominator < 1:
            raise ValueError(f"Weight denominator must be positive, got {self.denominator}")
        if not 0 <= self.numerator <= self.denominator:
            raise ValueError(
                f"Weight must lie in [0, 1], got {self.numerator}/{self.denominator}"
            )

    @classmethod
    def from_fraction(cls, value: Fraction) -> "Weight":
        return cls(value.numerator, value.denominator)

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def complement(self) -> Fraction:
        return 1 - self.value

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


HALF = Weight(1, 2)


# --- Counters ---


@dataclass(frozen=True)
class Counters:
    """
    Element counts of a solution.

    ``n1_in`` is the number of ones inside cells, ``n0_out`` the number of
    zeros outside cells and so on. ``n1`` and ``n0`` are matrix constants.
    """

    n_in: int
    n_out: int
    n1_in: int
    n1_out: int
    n0_in: int
    n0_out: int
    n1: int
    n0: int

    @classmethod
    def from_inside(cls, n1: int, n0: int, n_in: int, n1_in: int) -> "Counters":
        """Derive all eight counts from the matrix constants and the two inside counts."""
        n0_in = n_in - n1_in
        return cls(
            n_in=n_in,
            n_out=n1 + n0 - n_in,
            n1_in=n1_in,
            n1_out=n1 - n1_in,
            n0_in=n0_in,
            n0_out=n0 - n0_in,
            n1=n1,
            n0=n0,
        )

    def shifted(self, n1_in_change: int, n_in_change: int) -> "Counters":
        """Counters after a relocation changing the inside counts by the given amounts."""
        return Counters.from_inside(
            self.n1, self.n0, self.n_in + n_in_change, self.n1_in + n1_in_change
        )

    def is_consistent(self) -> bool:
        values = (self.n_in, self.n_out, self.n1_in, self.n1_out, self.n0_in, self.n0_out)
        return (
            min(values) >= 0
            and self.n_in + self.n_out == self.n1 + self.n0
            and self.n1_in + self.n1_out == self.n1
            and self.n0_in + self.n0_out == self.n0
            and self.n_in == self.n1_in + self.n0_in
            and self.n_out == self.n1_out + self.n0_out
        )


# --- Cell Configuration ---


@dataclass(frozen=True)
class CellConfiguration:
    """
    Per-cell machine and part counts (m_k, p_k).

    Attributes:
        cells: Ordered tuple of (machine_count, part_count) pairs
    """

    cells: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        cells = tuple((int(m_k), int(p_k)) for m_k, p_k in self.cells)
        if not cells:
            raise ValueError("A cell configuration needs at least one cell")
        for m_k, p_k in cells:
            if m_k < 1 or p_k < 1:
                raise ValueError(f"Every cell needs a machine and a part, got ({m_k}, {p_k})")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def from_partitions(
        cls, machine_sizes: Sequence[int], part_sizes: Sequence[int]
    ) -> "CellConfiguration":
        if len(machine_sizes) != len(part_sizes):
            raise ValueError("Machine and part partitions must have the same number of cells")
        return cls(tuple(zip(machine_sizes, part_sizes)))

    @property
    def num_cells(self) -> int:
        return len(self.cells)

    @property
    def machine_sizes(self) -> Tuple[int, ...]:
        return tuple(m_k for m_k, _ in self.cells)

    @property
    def part_sizes(self) -> Tuple[int, ...]:
        return tuple(p_k for _, p_k in self.cells)

    @property
    def machines(self) -> int:
        return sum(self.machine_sizes)

    @property
    def parts(self) -> int:
        return sum(self.part_sizes)

    @property
    def n_in(self) -> int:
        return sum(m_k * p_k for m_k, p_k in self.cells)

    def has_singletons(self) -> bool:
        return any(m_k < 2 or p_k < 2 for m_k, p_k in self.cells)


# --- Solution ---


@dataclass(frozen=True)
class Solution:
    """
    Assignment of every machine and part to a cell, with cached counters.

    Cell indices are 0-based; use ``to_one_based`` for external output.

    Attributes:
        machine_cell: Cell index of every machine
        part_cell: Cell index of every part
        num_cells: Number of cells k (indices 0..k-1)
        counters: Counters of the assignment
    """

    machine_cell: Tuple[int, ...]
    part_cell: Tuple[int, ...]
    num_cells: int
    counters: Counters

    def __post_init__(self):
        object.__setattr__(self, "machine_cell", tuple(int(c) for c in self.machine_cell))
        object.__setattr__(self, "part_cell", tuple(int(c) for c in self.part_cell))

    def machine_sizes(self) -> List[int]:
        return np.bincount(self.machine_cell, minlength=self.num_cells).tolist()

    def part_sizes(self) -> List[int]:
        return np.bincount(self.part_cell, minlength=self.num_cells).tolist()

    def configuration(self) -> CellConfiguration:
        """Configuration induced by the assignment (nonempty cells only)."""
        pairs = [
            (m_k, p_k)
            for m_k, p_k in zip(self.machine_sizes(), self.part_sizes())
            if m_k > 0 and p_k > 0
        ]
        return CellConfiguration(tuple(pairs))

    @property
    def nonempty_cells(self) -> int:
        machines = set(self.machine_cell)
        return len(machines & set(self.part_cell))

    def to_one_based(self) -> Tuple[List[int], List[int]]:
        return [c + 1 for c in self.machine_cell], [c + 1 for c in self.part_cell]


# --- Moves ---


class MoveKind(str, Enum):
    MACHINE = "machine"
    PART = "part"


@dataclass(frozen=True)
class Move:
    """
    Relocation of one machine or part to another cell.

    Attributes:
        kind: Whether a machine (row) or a part (column) moves
        index: Machine or part index (0-based)
        from_cell: Current cell of the entity
        to_cell: Target cell
        delta: Exact change of the grouping efficiency
        n1_in_change: Change of the ones-inside count
        n_in_change: Change of the elements-inside count
    """

    kind: MoveKind
    index: int
    from_cell: int
    to_cell: int
    delta: Fraction
    n1_in_change: int
    n_in_change: int

    def __post_init__(self):
        if self.from_cell == self.to_cell:
            raise ValueError("A move must change the cell of the entity")

    def reversed(self) -> "Move":
        return Move(
            kind=self.kind,
            index=self.index,
            from_cell=self.to_cell,
            to_cell=self.from_cell,
            delta=-self.delta,
            n1_in_change=-self.n1_in_change,
            n_in_change=-self.n_in_change,
        )


# --- Partitions ---


@dataclass(frozen=True)
class PartitionSpec:
    """
    Integer partition request: ``total`` split into exactly ``parts`` summands,
    each at least ``min_part``.
    """

    total: int
    parts: int
    min_part: int = 1

    def __post_init__(self):
        if self.total < 1 or self.parts < 1:
            raise ValueError(f"Partition total and parts must be positive, got {self}")
        if self.min_part < 1:
            raise ValueError(f"min_part must be at least 1, got {self.min_part}")

    @property
    def feasible(self) -> bool:
        return self.parts * self.min_part <= self.total


# --- Solver Parameters & Reports ---


@dataclass(frozen=True)
class SolveParams:
    """
    Parameters of the multistart search.

    Attributes:
        q: Weight of the intra-cell loading term
        configs_per_k: Configurations generated per cell count in the main phase
        range_configs_per_k: Configurations per cell count in the range pre-search
        allow_singletons: Whether cells with one machine or one part are allowed
        seed: Root seed of all random streams
        cell_range: Explicit (min_cells, max_cells), skips the pre-search
        workers: Number of worker processes for configuration scans
        keep_trace: Record the per-configuration trace in the report
    """

    q: Weight = HALF
    configs_per_k: int = 2000
    range_configs_per_k: int = 500
    allow_singletons: bool = True
    seed: int = 0
    cell_range: Optional[Tuple[int, int]] = None
    workers: int = 1
    keep_trace: bool = False

    def __post_init__(self):
        if self.configs_per_k < 1:
            raise ValueError(f"configs_per_k must be at least 1, got {self.configs_per_k}")
        if self.range_configs_per_k < 1:
            raise ValueError(
                f"range_configs_per_k must be at least 1, got {self.range_configs_per_k}"
            )
        if self.workers < 1:
            raise ValueError(f"workers must be at least 1, got {self.workers}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.cell_range is not None:
            low, high = self.cell_range
            if not 2 <= low <= high:
                raise ValueError(f"Cell range must satisfy 2 <= min <= max, got {self.cell_range}")

    @property
    def min_cell_size(self) -> int:
        return 1 if self.allow_singletons else 2


@dataclass(frozen=True)
class ConfigTrace:
    """Outcome of improving one configuration of the multistart loop."""

    index: int
    num_cells: int
    nonempty_cells: int
    efficiency: Fraction


@dataclass(frozen=True)
class SolveReport:
    """
    Result of one ``solve`` call.

    Metrics are exact fractions recomputed from ``solution``.
    """

    solution: Solution
    efficiency: Fraction
    efficacy: Fraction
    group_capability: Fraction
    exceptions_plus_voids: int
    cells: int
    cell_range: Tuple[int, int]
    elapsed: float
    seed: int
    trace: Tuple[ConfigTrace, ...] = ()


@dataclass(frozen=True)
class MultirunSummary:
    """Min/avg/max grouping efficiency over repeated seeded runs."""

    minimum: Fraction
    average: Fraction
    maximum: Fraction
    reports: Tuple[SolveReport, ...]

    @property
    def best(self) -> SolveReport:
        # first run wins ties
        best = self.reports[0]
        for report in self.reports[1:]:
            if report.efficiency > best.efficiency:
                best = report
        return best

    @property
    def total_elapsed(self) -> float:
        return sum(report.elapsed for report in self.reports)


@dataclass(frozen=True)
class OracleResult:
    """
    Exact optimum found by exhaustive enumeration.

    Attributes:
        efficiency: Optimal grouping efficiency
        solution: One optimal solution
        enumerated: Number of feasible solutions evaluated
    """

    efficiency: Fraction
    solution: Solution
    enumerated: int
    elapsed: float = 0.0


@dataclass(frozen=True)
class InstanceFile:
    """A named incidence matrix with a free-text source annotation."""

    name: str
    matrix: IncidenceMatrix
    source: str = ""


@dataclass(frozen=True)
class Violation:
    """First violated feasibility constraint of a solution."""

    constraint: str
    message: str
    indices: Tuple[int, ...] = field(default_factory=tuple)


# --- Response Records ---


class _ResultRecordRequired(TypedDict):
    """Required fields of a result record."""

    instance: str
    m: int
    p: int
    cells: int
    efficiency: str
    efficiency_pct: float
    efficacy: str
    efficacy_pct: float
    group_capability_index: str
    group_capability_index_pct: float
    exceptions_plus_voids: int
    machine_cells: List[int]
    part_cells: List[int]
    elapsed_seconds: float
    seed: int
    q: str
    allow_singletons: bool


class ResultRecord(_ResultRecordRequired, total=False):
    """One solver or oracle result, as emitted in JSON and CSV."""

    runs: int
    efficiency_min: str
    efficiency_min_pct: float
    efficiency_avg: str
    efficiency_avg_pct: float
    efficiency_max: str
    efficiency_max_pct: float
    min_cells: int
    max_cells: int
    method: str
    enumerated: int


class MetricsResponse(TypedDict):
    """Metrics and feasibility of a given assignment."""

    efficiency: str
    efficiency_pct: float
    efficacy: str
    efficacy_pct: float
    group_capability_index: str
    group_capability_index_pct: float
    exceptions_plus_voids: int
    cells: int
    feasible: bool
    violation: Optional[str]


class InstanceSummary(TypedDict):
    """Short description of an instance."""

    name: str
    m: int
    p: int
    n1: int
    source: str


InstanceSummaryList = List[InstanceSummary]
