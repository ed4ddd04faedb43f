"""
Instance files and matrix rendering.

Instance format::

    # name: sample_5x7
    # source: free text
    5 7
    1 0 0 0 1 1 1
    ...

Comment lines start with '#'; ``# name:`` and ``# source:`` comments are
read back into the InstanceFile. The first data line holds m and p, followed
by m lines of p whitespace-separated 0/1 tokens.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from src.logging_utils import describe_matrix
from src.types import IncidenceMatrix, InstanceFile, Solution
from src.validators import MAX_DIMENSION, InstanceFormatError, ValidationError

logger = logging.getLogger(__name__)

SAMPLE_5X7 = """\
# name: sample_5x7
# source: classic 5x7 machine-part instance used for the objective examples
5 7
1 0 0 0 1 1 1
0 1 1 1 1 0 0
0 0 1 1 1 1 0
1 1 1 1 0 0 0
0 1 0 1 1 1 0
"""

SAMPLE_8X12 = """\
# name: sample_8x12
# source: classic 8x12 machine-part instance used for the relocation example
8 12
1 1 1 1 0 0 0 0 0 0 0 0
1 0 1 1 1 1 1 0 0 1 0 0
0 0 1 1 1 1 1 1 1 0 0 0
0 0 0 0 0 1 1 1 1 1 0 0
0 0 0 0 0 0 1 1 1 1 0 0
0 0 0 0 0 0 1 1 1 0 1 0
0 0 0 0 0 0 0 0 0 0 1 1
0 0 0 0 0 0 0 0 0 0 1 1
"""

BUNDLED_INSTANCES: Dict[str, str] = {
    "sample_5x7": SAMPLE_5X7,
    "sample_8x12": SAMPLE_8X12,
}


def _tokens_with_columns(line: str) -> List[Tuple[str, int]]:
    """Whitespace-separated tokens with their 1-based start columns."""
    tokens = []
    column = 0
    for piece in line.split():
        column = line.index(piece, column)
        tokens.append((piece, column + 1))
        column += len(piece)
    return tokens


def parse_instance(text: str, name: str = "") -> InstanceFile:
    """
    Parse an instance file.

    Args:
        text: File contents
        name: Fallback instance name when the file has no ``# name:`` comment

    Returns:
        The parsed instance

    Raises:
        InstanceFormatError: With the offending line (and column) on any format error
    """
    source = ""
    header: Optional[Tuple[int, int]] = None
    rows: List[List[int]] = []
    lines = text.splitlines()
    last_data = max(
        (i for i, line in enumerate(lines) if line.strip() and not line.strip().startswith("#")),
        default=-1,
    )

    for number, raw in enumerate(lines, start=1):
        line = raw.rstrip()
        stripped = line.strip()
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if body.lower().startswith("name:"):
                name = body[5:].strip()
            elif body.lower().startswith("source:"):
                source = body[7:].strip()
            continue
        if not stripped:
            if header is not None and number - 1 < last_data:
                raise InstanceFormatError("blank line inside the matrix data", number)
            continue

        tokens = _tokens_with_columns(line)
        if header is None:
            if len(tokens) != 2:
                raise InstanceFormatError(
                    f"expected 'm p' dimensions, got {len(tokens)} tokens", number
                )
            dims = []
            for token, column in tokens:
                if not token.isdigit() or int(token) < 1:
                    raise InstanceFormatError(
                        f"dimension must be a positive integer, got '{token}'", number, column
                    )
                if int(token) > MAX_DIMENSION:
                    raise InstanceFormatError(
                        f"dimension {token} exceeds the maximum of {MAX_DIMENSION}", number, column
                    )
                dims.append(int(token))
            header = (dims[0], dims[1])
            continue

        machines, parts = header
        if len(rows) == machines:
            raise InstanceFormatError(f"unexpected data after {machines} matrix rows", number)
        if len(tokens) != parts:
            raise InstanceFormatError(f"expected {parts} entries, got {len(tokens)}", number)
        row = []
        for token, column in tokens:
            if token not in ("0", "1"):
                raise InstanceFormatError(f"entry must be 0 or 1, got '{token}'", number, column)
            row.append(int(token))
        rows.append(row)

    if header is None:
        raise InstanceFormatError("missing 'm p' dimension line", len(lines) + 1)
    if len(rows) != header[0]:
        raise InstanceFormatError(
            f"expected {header[0]} matrix rows, got {len(rows)}", len(lines) + 1
        )
    return InstanceFile(name=name, matrix=IncidenceMatrix.from_rows(rows), source=source)


def serialize_instance(instance: InstanceFile) -> str:
    """Render an instance in the file format accepted by parse_instance."""
    lines = []
    if instance.name:
        lines.append(f"# name: {instance.name}")
    if instance.source:
        lines.append(f"# source: {instance.source}")
    matrix = instance.matrix
    lines.append(f"{matrix.machines} {matrix.parts}")
    lines.extend(" ".join(str(value) for value in row) for row in matrix.rows())
    return "\n".join(lines) + "\n"


def bundled_instance(name: str) -> InstanceFile:
    """
    Load one of the bundled instances.

    Raises:
        ValidationError: If the name is unknown
    """
    if name not in BUNDLED_INSTANCES:
        raise ValidationError(
            f"Unknown bundled instance: {name}. Available: {sorted(BUNDLED_INSTANCES)}"
        )
    return parse_instance(BUNDLED_INSTANCES[name], name)


def load_instance(reference: Union[str, Path]) -> InstanceFile:
    """
    Load an instance from a file path or a bundled instance name.

    A bundled name matches with or without a ``.txt`` suffix when no such
    file exists.

    Raises:
        InstanceFormatError: If the file is malformed
        OSError: If the file cannot be read
    """
    path = Path(reference)
    if not path.exists():
        stem = path.name[:-4] if path.name.endswith(".txt") else path.name
        if stem in BUNDLED_INSTANCES:
            return bundled_instance(stem)
    text = path.read_text(encoding="utf-8")
    instance = parse_instance(text, path.stem)
    logger.debug(f"Loaded instance '{instance.name}' from {path}")
    return instance


def render_solution(matrix: IncidenceMatrix, solution: Solution) -> str:
    """
    Draw the matrix with rows and columns grouped by cell.

    Rows and columns keep their original 1-based labels (m3, p7, ...), groups
    are ordered by cell and entities by index within a group; cell borders are
    drawn with '|' and '-'.
    """
    bits = matrix.cells_bits
    row_groups = [
        [i for i, cell in enumerate(solution.machine_cell) if cell == k]
        for k in range(solution.num_cells)
    ]
    column_groups = [
        [j for j, cell in enumerate(solution.part_cell) if cell == k]
        for k in range(solution.num_cells)
    ]
    row_groups = [group for group in row_groups if group]
    column_groups = [group for group in column_groups if group]

    label_width = len(str(matrix.machines)) + 1
    cell_width = len(str(matrix.parts)) + 1

    def segment(values: List[str]) -> str:
        return " " + " ".join(value.rjust(cell_width) for value in values) + " |"

    header = " " * label_width + " |" + "".join(
        segment([f"p{j + 1}" for j in group]) for group in column_groups
    )
    separator = "-" * label_width + "-+" + "".join(
        "-" * (len(segment([""] * len(group))) - 1) + "+" for group in column_groups
    )
    lines = [header, separator]
    for group in row_groups:
        for i in group:
            lines.append(
                f"m{i + 1}".rjust(label_width)
                + " |"
                + "".join(
                    segment([str(int(bits[i, j])) for j in columns]) for columns in column_groups
                )
            )
        lines.append(separator)
    return "\n".join(lines)


def describe_instance(instance: InstanceFile) -> str:
    """Instance text followed by per-row and per-column one counts."""
    matrix = instance.matrix
    bits = matrix.cells_bits
    lines = [
        serialize_instance(instance).rstrip("\n"),
        "",
        f"{instance.name or '(unnamed)'}: {describe_matrix(matrix)}",
        "machine loads: " + " ".join(str(int(v)) for v in bits.sum(axis=1)),
        "part loads: " + " ".join(str(int(v)) for v in bits.sum(axis=0)),
    ]
    return "\n".join(lines) + "\n"
