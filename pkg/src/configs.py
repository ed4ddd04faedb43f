"""
Cell configuration generation.

A configuration with k cells is a pair of integer partitions of m and p into
k summands. Partitions are counted with a dynamic-programming table and drawn
exactly uniformly by unranking a uniform index against that table.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, List, Sequence, Tuple, Union

import numpy as np

from src.metrics import make_solution
from src.types import CellConfiguration, IncidenceMatrix, PartitionSpec, Solution
from src.validators import InfeasibleParametersError, ValidationError

logger = logging.getLogger(__name__)

# Largest bound numpy's integer sampler accepts directly
_NUMPY_INT_LIMIT = 2**63 - 1


@dataclass(frozen=True)
class RandomSource:
    """
    Reproducible random stream identified by (seed, stream_index).

    Streams are derived with numpy's SeedSequence spawn keys, so the value
    sequence depends only on the seed and the stream path, never on the
    platform or on which worker draws it.

    Attributes:
        seed: 64-bit unsigned root seed
        stream_index: Index of this stream below its namespace
        namespace: Stream path of the parent streams
    """

    seed: int
    stream_index: int = 0
    namespace: Tuple[int, ...] = ()

    def generator(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.namespace + (self.stream_index,))
        return np.random.Generator(np.random.PCG64(sequence))

    def substream(self, index: int) -> "RandomSource":
        """Independent child stream number ``index`` of this stream."""
        return RandomSource(self.seed, index, self.namespace + (self.stream_index,))


RandomLike = Union[RandomSource, np.random.Generator]


def as_generator(rng: RandomLike) -> np.random.Generator:
    if isinstance(rng, RandomSource):
        return rng.generator()
    return rng


def uniform_below(generator: np.random.Generator, bound: int) -> int:
    """Uniform integer in [0, bound), exact for arbitrarily large bounds."""
    if bound < 1:
        raise ValueError(f"bound must be positive, got {bound}")
    if bound <= _NUMPY_INT_LIMIT:
        return int(generator.integers(0, bound))
    bits = bound.bit_length()
    words = (bits + 31) // 32
    mask = (1 << bits) - 1
    while True:
        value = 0
        for word in generator.integers(0, 2**32, size=words, dtype=np.uint64):
            value = (value << 32) | int(word)
        value &= mask
        if value < bound:
            return value


# --- Counting ---


@lru_cache(maxsize=64)
def _count_table(total: int, parts: int) -> Tuple[Tuple[int, ...], ...]:
    """
    table[n][k] = number of partitions of n into exactly k positive parts.

    Uses P(n, k) = P(n - 1, k - 1) + P(n - k, k): either some part equals one,
    or every part is at least two and one can be taken from each.
    """
    table = [[0] * (parts + 1) for _ in range(total + 1)]
    table[0][0] = 1
    for n in range(1, total + 1):
        for k in range(1, min(n, parts) + 1):
            table[n][k] = table[n - 1][k - 1] + table[n - k][k]
    return tuple(tuple(row) for row in table)


def _reduced(spec: PartitionSpec) -> int:
    """Total left after taking min_part - 1 from every part."""
    return spec.total - spec.parts * (spec.min_part - 1)


def count_partitions(spec: PartitionSpec) -> int:
    """Number of partitions of spec.total into spec.parts summands, each >= spec.min_part."""
    reduced = _reduced(spec)
    if reduced < spec.parts:
        return 0
    return _count_table(reduced, spec.parts)[reduced][spec.parts]


# --- Ranking ---


def unrank_partition(spec: PartitionSpec, rank: int) -> Tuple[int, ...]:
    """
    Partition number ``rank`` of spec, in descending order.

    Raises:
        ValidationError: If rank is outside [0, count_partitions(spec))
    """
    count = count_partitions(spec)
    if not 0 <= rank < count:
        raise ValidationError(f"rank {rank} outside [0, {count}) for {spec}")
    n, k = _reduced(spec), spec.parts
    table = _count_table(n, k)
    values: List[int] = []
    lift = 0
    while k > 0:
        with_one = table[n - 1][k - 1]
        if rank < with_one:
            values.append(1 + lift)
            n, k = n - 1, k - 1
        else:
            rank -= with_one
            lift += 1
            n -= k
    offset = spec.min_part - 1
    return tuple(value + offset for value in reversed(values))


def rank_partition(parts: Sequence[int], min_part: int = 1) -> int:
    """
    Inverse of unrank_partition.

    Raises:
        ValidationError: If a part is below min_part
    """
    if not parts:
        raise ValidationError("cannot rank an empty partition")
    if min(parts) < min_part:
        raise ValidationError(f"partition {tuple(parts)} has a part below {min_part}")
    ascending = sorted(value - (min_part - 1) for value in parts)
    n, k = sum(ascending), len(ascending)
    table = _count_table(n, k)
    rank = 0
    lift = 0
    position = 0
    while k > 0:
        if ascending[position] - lift == 1:
            position += 1
            n, k = n - 1, k - 1
        else:
            rank += table[n - 1][k - 1]
            lift += 1
            n -= k
    return rank


def enumerate_partitions(spec: PartitionSpec) -> Iterator[Tuple[int, ...]]:
    """All partitions of spec in rank order."""
    for rank in range(count_partitions(spec)):
        yield unrank_partition(spec, rank)


# --- Sampling ---


def sample_partition_uniform(spec: PartitionSpec, rng: RandomLike) -> Tuple[int, ...]:
    """
    Draw a partition uniformly at random, in descending order.

    Raises:
        InfeasibleParametersError: If spec admits no partition
    """
    count = count_partitions(spec)
    if count == 0:
        raise InfeasibleParametersError(
            f"cannot split {spec.total} into {spec.parts} parts of at least {spec.min_part}"
        )
    return unrank_partition(spec, uniform_below(as_generator(rng), count))


def generate_configs(
    min_cells: int,
    max_cells: int,
    configs_per_k: int,
    machines: int,
    parts: int,
    min_part: int,
    rng: RandomLike,
) -> List[CellConfiguration]:
    """
    Sample configurations for every cell count in [min_cells, max_cells].

    The range is clamped to [2, min(machines, parts)]. For each feasible cell
    count, ``configs_per_k`` configurations are drawn with replacement: a
    machine partition and a part partition are sampled independently and
    paired largest with largest. Infeasible cell counts are skipped.

    Returns:
        The configurations, grouped by increasing cell count (may be empty)
    """
    generator = as_generator(rng)
    low = max(2, min_cells)
    high = min(max_cells, machines, parts)
    configs: List[CellConfiguration] = []
    for k in range(low, high + 1):
        machine_spec = PartitionSpec(machines, k, min_part)
        part_spec = PartitionSpec(parts, k, min_part)
        if count_partitions(machine_spec) == 0 or count_partitions(part_spec) == 0:
            logger.debug(f"Skipping {k} cells: infeasible with minimum cell side {min_part}")
            continue
        for _ in range(configs_per_k):
            machine_sizes = sample_partition_uniform(machine_spec, generator)
            part_sizes = sample_partition_uniform(part_spec, generator)
            configs.append(CellConfiguration.from_partitions(machine_sizes, part_sizes))
    logger.debug(f"Generated {len(configs)} configurations for cells {low}..{high}")
    return configs


# --- Initial Solutions ---


def _slice_groups(order: Sequence[int], sizes: Sequence[int]) -> np.ndarray:
    """Cell of every entity when ``order`` is cut into consecutive groups of ``sizes``."""
    assignment = np.empty(len(order), dtype=np.int64)
    assignment[np.asarray(order, dtype=np.int64)] = np.repeat(np.arange(len(sizes)), sizes)
    return assignment


def _check_configuration(matrix: IncidenceMatrix, config: CellConfiguration) -> None:
    if config.machines != matrix.machines or config.parts != matrix.parts:
        raise ValidationError(
            f"configuration covers {config.machines}x{config.parts}, "
            f"matrix is {matrix.machines}x{matrix.parts}"
        )


def solution_from_orders(
    matrix: IncidenceMatrix,
    config: CellConfiguration,
    machine_order: Sequence[int],
    part_order: Sequence[int],
) -> Solution:
    """
    Slice the given machine and part orders into consecutive cell groups.

    Raises:
        ValidationError: If the configuration does not match the matrix
    """
    _check_configuration(matrix, config)
    if sorted(machine_order) != list(range(matrix.machines)):
        raise ValidationError("machine order must be a permutation of all machines")
    if sorted(part_order) != list(range(matrix.parts)):
        raise ValidationError("part order must be a permutation of all parts")
    machine_cell = _slice_groups(machine_order, config.machine_sizes)
    part_cell = _slice_groups(part_order, config.part_sizes)
    return make_solution(matrix, machine_cell.tolist(), part_cell.tolist(), config.num_cells)


def initial_assignment(
    matrix: IncidenceMatrix, config: CellConfiguration, rng: RandomLike
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Machine and part cell arrays of a uniformly shuffled start.

    Machines are shuffled first, then parts, from the same generator.

    Raises:
        ValidationError: If the configuration does not match the matrix
    """
    _check_configuration(matrix, config)
    generator = as_generator(rng)
    machine_cell = _slice_groups(generator.permutation(matrix.machines), config.machine_sizes)
    part_cell = _slice_groups(generator.permutation(matrix.parts), config.part_sizes)
    return machine_cell, part_cell


def random_initial_solution(
    matrix: IncidenceMatrix, config: CellConfiguration, rng: RandomLike
) -> Solution:
    """Assign uniformly shuffled machines and parts to the cells of a configuration."""
    machine_cell, part_cell = initial_assignment(matrix, config, rng)
    return make_solution(matrix, machine_cell.tolist(), part_cell.tolist(), config.num_cells)
