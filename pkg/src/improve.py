"""
Greedy relocation improvement of a cell formation solution.

Every iteration looks at moving each part and each machine to every other
cell, takes the move with the largest exact efficiency gain, and stops once
no single relocation gains anything. Gains are evaluated incrementally from
per-cell ones counts: a part move changes n_in by m_B - m_A and n1_in by the
ones of its column among the machines of B minus those among A.
"""

import logging
from fractions import Fraction
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from src.metrics import efficiency_ratio, grouping_efficiency
from src.types import Counters, IncidenceMatrix, Move, MoveKind, Solution, Weight
from src.validators import InfeasibleMoveError

logger = logging.getLogger(__name__)

# Float screening slack; candidates within it of the float maximum are compared exactly
_SCREEN_TOLERANCE = 1e-9


def _build_move(
    kind: MoveKind,
    index: int,
    source: int,
    target: int,
    n1_in_change: int,
    n_in_change: int,
    counters: Counters,
    q: Weight,
    before: Optional[Fraction] = None,
) -> Move:
    if before is None:
        before = grouping_efficiency(counters, q)
    after = counters.shifted(n1_in_change, n_in_change)
    delta = grouping_efficiency(after, q) - before
    return Move(kind, index, source, target, delta, n1_in_change, n_in_change)


def _check_relocation(
    kind: MoveKind,
    index: int,
    source: int,
    target: int,
    num_cells: int,
    source_size: int,
    target_other_side: int,
    allow_singletons: bool,
) -> None:
    minimum = 1 if allow_singletons else 2
    if not 0 <= target < num_cells:
        raise InfeasibleMoveError(f"cell {target + 1} does not exist ({num_cells} cells)")
    if source == target:
        raise InfeasibleMoveError(f"{kind.value} {index + 1} is already in cell {target + 1}")
    if source_size - 1 < minimum:
        raise InfeasibleMoveError(
            f"moving {kind.value} {index + 1} would leave cell {source + 1} with "
            f"{source_size - 1} {kind.value}s"
        )
    if target_other_side == 0:
        raise InfeasibleMoveError(f"cell {target + 1} is empty")


def move_delta_part(
    matrix: IncidenceMatrix,
    solution: Solution,
    part: int,
    target: int,
    q: Weight,
    allow_singletons: bool = True,
) -> Move:
    """
    Efficiency change of moving one part to another cell; the solution is not modified.

    Raises:
        InfeasibleMoveError: If the move would empty the part side of its cell,
            break the singleton rule, or target a missing or empty cell
    """
    source = solution.part_cell[part]
    machine_cell = np.asarray(solution.machine_cell)
    _check_relocation(
        MoveKind.PART,
        part,
        source,
        target,
        solution.num_cells,
        solution.part_cell.count(source),
        int((machine_cell == target).sum()),
        allow_singletons,
    )
    column = matrix.cells_bits[:, part]
    n1_in_change = int(column[machine_cell == target].sum()) - int(
        column[machine_cell == source].sum()
    )
    n_in_change = int((machine_cell == target).sum()) - int((machine_cell == source).sum())
    return _build_move(
        MoveKind.PART, part, source, target, n1_in_change, n_in_change, solution.counters, q
    )


def move_delta_machine(
    matrix: IncidenceMatrix,
    solution: Solution,
    machine: int,
    target: int,
    q: Weight,
    allow_singletons: bool = True,
) -> Move:
    """
    Efficiency change of moving one machine to another cell; the solution is not modified.

    Raises:
        InfeasibleMoveError: If the move would empty the machine side of its
            cell, break the singleton rule, or target a missing or empty cell
    """
    source = solution.machine_cell[machine]
    part_cell = np.asarray(solution.part_cell)
    _check_relocation(
        MoveKind.MACHINE,
        machine,
        source,
        target,
        solution.num_cells,
        solution.machine_cell.count(source),
        int((part_cell == target).sum()),
        allow_singletons,
    )
    row = matrix.cells_bits[machine, :]
    n1_in_change = int(row[part_cell == target].sum()) - int(row[part_cell == source].sum())
    n_in_change = int((part_cell == target).sum()) - int((part_cell == source).sum())
    return _build_move(
        MoveKind.MACHINE, machine, source, target, n1_in_change, n_in_change, solution.counters, q
    )


def apply_move(solution: Solution, move: Move, allow_singletons: bool = True) -> Solution:
    """
    Return the solution with the move applied and its counters updated incrementally.

    Raises:
        InfeasibleMoveError: If the entity is not in the move's source cell or
            the move would break the cell size rules
    """
    if move.kind is MoveKind.PART:
        assignment, other = list(solution.part_cell), solution.machine_cell
    else:
        assignment, other = list(solution.machine_cell), solution.part_cell
    if assignment[move.index] != move.from_cell:
        raise InfeasibleMoveError(
            f"{move.kind.value} {move.index + 1} is in cell {assignment[move.index] + 1}, "
            f"not {move.from_cell + 1}"
        )
    _check_relocation(
        move.kind,
        move.index,
        move.from_cell,
        move.to_cell,
        solution.num_cells,
        assignment.count(move.from_cell),
        other.count(move.to_cell),
        allow_singletons,
    )
    assignment[move.index] = move.to_cell
    counters = solution.counters.shifted(move.n1_in_change, move.n_in_change)
    if move.kind is MoveKind.PART:
        return Solution(solution.machine_cell, tuple(assignment), solution.num_cells, counters)
    return Solution(tuple(assignment), solution.part_cell, solution.num_cells, counters)


class _Candidate(NamedTuple):
    kind: MoveKind
    index: int
    target: int
    n1_in_change: int
    n_in_change: int
    ratio: Tuple[int, int]


def _greater(a: Tuple[int, int], b: Tuple[int, int]) -> bool:
    """a > b for (numerator, positive denominator) pairs."""
    return a[0] * b[1] > b[0] * a[1]


class _SearchState:
    """
    Mutable working copy of a solution used by the improvement loop.

    Keeps, for every part, the ones of its column inside every machine group
    (``part_ones``, p x k) and, for every machine, the ones of its row inside
    every part group (``machine_ones``, m x k), updated per applied move.
    Candidates are screened in floats; only the near-maximal ones are
    compared exactly, as integer (numerator, denominator) pairs.
    """

    def __init__(
        self,
        matrix: IncidenceMatrix,
        machine_cell: Sequence[int],
        part_cell: Sequence[int],
        num_cells: int,
        q: Weight,
        minimum: int,
    ):
        self.bits = matrix.cells_bits.astype(np.int64)
        self.size = matrix.size
        self.q = q
        self.q_float = float(q.value)
        self.complement = 1.0 - self.q_float
        self.minimum = minimum
        self.k = num_cells
        self.diagonal = np.eye(num_cells, dtype=bool)
        self.machine_cell = np.array(machine_cell, dtype=np.int64)
        self.part_cell = np.array(part_cell, dtype=np.int64)
        self.machines = np.arange(len(self.machine_cell))
        self.parts = np.arange(len(self.part_cell))
        self.machine_sizes = np.bincount(self.machine_cell, minlength=self.k)
        self.part_sizes = np.bincount(self.part_cell, minlength=self.k)
        onehot = np.eye(self.k, dtype=np.int64)
        self.part_ones = self.bits.T @ onehot[self.machine_cell]
        self.machine_ones = self.bits @ onehot[self.part_cell]
        n1 = int(self.bits.sum())
        n1_in = int(self.part_ones[self.parts, self.part_cell].sum())
        n_in = int(self.machine_sizes @ self.part_sizes)
        self.counters = Counters.from_inside(n1, self.size - n1, n_in, n1_in)
        self.ratio = efficiency_ratio(self.counters, q)
        self.efficiency = Fraction(*self.ratio)

    def _tables(self, kind: MoveKind):
        if kind is MoveKind.PART:
            return self.part_ones, self.part_cell, self.parts, self.part_sizes, self.machine_sizes
        return self.machine_ones, self.machine_cell, self.machines, self.machine_sizes, self.part_sizes

    def _screen(self, kind: MoveKind) -> np.ndarray:
        """
        Float efficiency of every (entity, target cell) pair, infeasible pairs at -inf.

        The n_in after a move depends only on its (source, target) cells, so
        efficiency = n1_in * slope[s, t] + offset[s, t] with k x k tables.
        """
        ones, cells, entities, own_sizes, other_sizes = self._tables(kind)
        counters = self.counters
        n_in = counters.n_in + other_sizes[None, :] - other_sizes[:, None]
        n_out = self.size - n_in
        blocked = (
            ((own_sizes - 1) < self.minimum)[:, None] | (other_sizes == 0)[None, :] | self.diagonal
        )
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = np.where(blocked, 0.0, self.q_float / n_in + self.complement / n_out)
            offset = np.where(blocked, -np.inf, self.complement * (counters.n0 - n_in) / n_out)
        n1_in = ones - ones[entities, cells][:, None] + counters.n1_in
        return n1_in * slope[cells] + offset[cells]

    def _pick(self, kind: MoveKind, pairs: np.ndarray) -> _Candidate:
        """Exact best of the (entity, target) pairs; the first one wins ties."""
        ones, cells, _, _, other_sizes = self._tables(kind)
        best: Optional[_Candidate] = None
        seen = set()
        for index, target in pairs.tolist():
            source = cells[index]
            changes = (
                int(ones[index, target] - ones[index, source]),
                int(other_sizes[target] - other_sizes[source]),
            )
            if changes in seen:
                continue
            seen.add(changes)
            ratio = efficiency_ratio(self.counters.shifted(*changes), self.q)
            if best is None or _greater(ratio, best.ratio):
                best = _Candidate(kind, index, target, *changes, ratio)
        assert best is not None
        return best

    def candidate(self, kind: MoveKind) -> Optional[_Candidate]:
        """
        Move of the given kind with the largest exact efficiency.

        Ties go to the lowest entity index, then the lowest target cell.
        """
        values = self._screen(kind)
        if values.size == 0:
            return None
        top = values.max()
        if not np.isfinite(top):
            return None
        return self._pick(kind, np.argwhere(values >= top - _SCREEN_TOLERANCE))

    def best_per_entity(self, kind: MoveKind) -> List[Optional[Move]]:
        """Best move of every entity of the given kind (None when it cannot move)."""
        values = self._screen(kind)
        result: List[Optional[Move]] = []
        for index, row in enumerate(values):
            top = row.max() if row.size else -np.inf
            if not np.isfinite(top):
                result.append(None)
                continue
            targets = np.flatnonzero(row >= top - _SCREEN_TOLERANCE)
            pairs = np.column_stack([np.full(len(targets), index), targets])
            result.append(self.to_move(self._pick(kind, pairs)))
        return result

    def to_move(self, candidate: _Candidate) -> Move:
        cells = self.part_cell if candidate.kind is MoveKind.PART else self.machine_cell
        return Move(
            candidate.kind,
            candidate.index,
            int(cells[candidate.index]),
            candidate.target,
            Fraction(*candidate.ratio) - self.efficiency,
            candidate.n1_in_change,
            candidate.n_in_change,
        )

    def apply(self, candidate: _Candidate) -> Move:
        move = self.to_move(candidate)
        source, target = move.from_cell, move.to_cell
        if move.kind is MoveKind.PART:
            column = self.bits[:, move.index]
            self.machine_ones[:, source] -= column
            self.machine_ones[:, target] += column
            self.part_cell[move.index] = target
            self.part_sizes[source] -= 1
            self.part_sizes[target] += 1
        else:
            row = self.bits[move.index, :]
            self.part_ones[:, source] -= row
            self.part_ones[:, target] += row
            self.machine_cell[move.index] = target
            self.machine_sizes[source] -= 1
            self.machine_sizes[target] += 1
        self.counters = self.counters.shifted(move.n1_in_change, move.n_in_change)
        self.ratio = candidate.ratio
        self.efficiency += move.delta
        return move

    def descend(self) -> List[Fraction]:
        """Apply best relocations until none gains; returns the efficiency after every step."""
        history = [self.efficiency]
        while True:
            part = self.candidate(MoveKind.PART)
            machine = self.candidate(MoveKind.MACHINE)
            # machine moves win ties
            if part is not None and (machine is None or _greater(part.ratio, machine.ratio)):
                chosen = part
            else:
                chosen = machine
            if chosen is None or not _greater(chosen.ratio, self.ratio):
                return history
            self.apply(chosen)
            history.append(self.efficiency)

    def to_solution(self) -> Solution:
        return Solution(
            tuple(self.machine_cell.tolist()),
            tuple(self.part_cell.tolist()),
            self.k,
            self.counters,
        )


def _state(
    matrix: IncidenceMatrix, solution: Solution, q: Weight, allow_singletons: bool
) -> _SearchState:
    return _SearchState(
        matrix,
        solution.machine_cell,
        solution.part_cell,
        solution.num_cells,
        q,
        1 if allow_singletons else 2,
    )


def best_moves_per_machine(
    matrix: IncidenceMatrix, solution: Solution, q: Weight, allow_singletons: bool = True
) -> List[Optional[Move]]:
    """Maximal efficiency change of every machine over all feasible target cells."""
    return _state(matrix, solution, q, allow_singletons).best_per_entity(MoveKind.MACHINE)


def best_moves_per_part(
    matrix: IncidenceMatrix, solution: Solution, q: Weight, allow_singletons: bool = True
) -> List[Optional[Move]]:
    """Maximal efficiency change of every part over all feasible target cells."""
    return _state(matrix, solution, q, allow_singletons).best_per_entity(MoveKind.PART)


def improve_solution_traced(
    matrix: IncidenceMatrix, solution: Solution, q: Weight, allow_singletons: bool = True
) -> Tuple[Solution, List[Fraction]]:
    """
    Run the relocation improvement and return the final solution and the
    efficiency after every applied move (starting with the input efficiency).
    """
    state = _state(matrix, solution, q, allow_singletons)
    history = state.descend()
    logger.debug(f"Improvement applied {len(history) - 1} moves, efficiency {float(history[-1]):.4%}")
    return state.to_solution(), history


def improve_solution(
    matrix: IncidenceMatrix, solution: Solution, q: Weight, allow_singletons: bool = True
) -> Solution:
    """
    Apply best single relocations while they strictly increase the efficiency.

    The result is a local optimum: no feasible single machine or part
    relocation has a positive exact gain.
    """
    improved, _ = improve_solution_traced(matrix, solution, q, allow_singletons)
    return improved


def improve_assignment(
    matrix: IncidenceMatrix,
    machine_cell: np.ndarray,
    part_cell: np.ndarray,
    num_cells: int,
    q: Weight,
    allow_singletons: bool = True,
) -> Tuple[Solution, Fraction]:
    """
    Improve a start given as raw cell index arrays.

    Counters are derived from the ones tables, so no Solution is built for the
    start. Returns the local optimum and its exact efficiency.
    """
    state = _SearchState(
        matrix, machine_cell, part_cell, num_cells, q, 1 if allow_singletons else 2
    )
    state.descend()
    return state.to_solution(), state.efficiency
