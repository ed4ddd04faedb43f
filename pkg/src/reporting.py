"""
Result records and their JSON, CSV and text encodings.

Metrics are stored twice: as exact fraction strings ("121/152") and as
percentages rounded to two places. Cell assignments are 1-based.
"""

import csv
import io
import json
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional

from src.metrics import (
    compute_counters,
    exceptions_plus_voids,
    group_capability_index,
    grouping_efficacy,
    grouping_efficiency,
)
from src.types import (
    IncidenceMatrix,
    MultirunSummary,
    OracleResult,
    ResultRecord,
    Solution,
    SolveParams,
    SolveReport,
    Weight,
)
from src.validators import ValidationError, parse_weight

# Column order of CSV output
CSV_FIELDS = [
    "instance",
    "m",
    "p",
    "cells",
    "efficiency",
    "efficiency_pct",
    "efficacy",
    "efficacy_pct",
    "group_capability_index",
    "group_capability_index_pct",
    "exceptions_plus_voids",
    "runs",
    "efficiency_min",
    "efficiency_min_pct",
    "efficiency_avg",
    "efficiency_avg_pct",
    "efficiency_max",
    "efficiency_max_pct",
    "min_cells",
    "max_cells",
    "elapsed_seconds",
    "seed",
    "q",
    "allow_singletons",
    "method",
    "enumerated",
    "machine_cells",
    "part_cells",
]

_INT_FIELDS = {"m", "p", "cells", "exceptions_plus_voids", "runs", "min_cells", "max_cells",
               "seed", "enumerated"}
_FLOAT_FIELDS = {name for name in CSV_FIELDS if name.endswith("_pct")} | {"elapsed_seconds"}
_LIST_FIELDS = {"machine_cells", "part_cells"}
_BOOL_FIELDS = {"allow_singletons"}


def fraction_text(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def percent(value: Fraction) -> float:
    return round(float(value) * 100, 2)


def _solution_fields(
    name: str, matrix: IncidenceMatrix, solution: Solution, q: Weight
) -> Dict[str, Any]:
    counters = compute_counters(matrix, solution.machine_cell, solution.part_cell)
    efficiency = grouping_efficiency(counters, q)
    efficacy = grouping_efficacy(counters)
    capability = group_capability_index(counters)
    machine_cells, part_cells = solution.to_one_based()
    return {
        "instance": name,
        "m": matrix.machines,
        "p": matrix.parts,
        "cells": solution.nonempty_cells,
        "efficiency": fraction_text(efficiency),
        "efficiency_pct": percent(efficiency),
        "efficacy": fraction_text(efficacy),
        "efficacy_pct": percent(efficacy),
        "group_capability_index": fraction_text(capability),
        "group_capability_index_pct": percent(capability),
        "exceptions_plus_voids": exceptions_plus_voids(counters),
        "machine_cells": machine_cells,
        "part_cells": part_cells,
        "q": str(q),
    }


def _run_fields(
    minimum: Fraction, average: Fraction, maximum: Fraction, runs: int
) -> Dict[str, Any]:
    return {
        "runs": runs,
        "efficiency_min": fraction_text(minimum),
        "efficiency_min_pct": percent(minimum),
        "efficiency_avg": fraction_text(average),
        "efficiency_avg_pct": percent(average),
        "efficiency_max": fraction_text(maximum),
        "efficiency_max_pct": percent(maximum),
    }


def solve_record(
    name: str,
    matrix: IncidenceMatrix,
    params: SolveParams,
    report: SolveReport,
    summary: Optional[MultirunSummary] = None,
) -> ResultRecord:
    """
    Record of a solver result.

    With a multirun summary the record carries the best run's solution, the
    min/avg/max statistics and the mean elapsed time per run. A single run
    reports its own efficiency as min, avg and max.
    """
    record: Dict[str, Any] = _solution_fields(name, matrix, report.solution, params.q)
    record.update(
        {
            "elapsed_seconds": report.elapsed,
            "seed": params.seed,
            "allow_singletons": params.allow_singletons,
            "method": "multistart",
            "min_cells": report.cell_range[0],
            "max_cells": report.cell_range[1],
        }
    )
    if summary is None:
        efficiency = Fraction(record["efficiency"])
        record.update(_run_fields(efficiency, efficiency, efficiency, 1))
    else:
        runs = len(summary.reports)
        record.update(_run_fields(summary.minimum, summary.average, summary.maximum, runs))
        record["elapsed_seconds"] = round(summary.total_elapsed / runs, 3)
    return record  # type: ignore[return-value]


def oracle_record(
    name: str, matrix: IncidenceMatrix, q: Weight, allow_singletons: bool, result: OracleResult
) -> ResultRecord:
    """Record of an exact enumeration result."""
    record: Dict[str, Any] = _solution_fields(name, matrix, result.solution, q)
    record.update(
        {
            "elapsed_seconds": result.elapsed,
            "seed": 0,
            "allow_singletons": allow_singletons,
            "method": "oracle",
            "enumerated": result.enumerated,
        }
    )
    efficiency = result.efficiency
    record.update(_run_fields(efficiency, efficiency, efficiency, 1))
    return record  # type: ignore[return-value]


def verify_record(matrix: IncidenceMatrix, record: ResultRecord) -> bool:
    """True when the stored metrics recompute exactly from the stored assignment."""
    machine_cell = [cell - 1 for cell in record["machine_cells"]]
    part_cell = [cell - 1 for cell in record["part_cells"]]
    counters = compute_counters(matrix, machine_cell, part_cell)
    q = parse_weight(record["q"])
    return (
        record["efficiency"] == fraction_text(grouping_efficiency(counters, q))
        and record["efficacy"] == fraction_text(grouping_efficacy(counters))
        and record["group_capability_index"] == fraction_text(group_capability_index(counters))
        and record["exceptions_plus_voids"] == exceptions_plus_voids(counters)
    )


# --- Encodings ---


def to_json(records: List[ResultRecord]) -> str:
    """A single record is written as an object, several as an array."""
    payload: Any = records[0] if len(records) == 1 else records
    return json.dumps(payload, indent=2, sort_keys=True)


def records_from_json(text: str) -> List[ResultRecord]:
    payload = json.loads(text)
    if isinstance(payload, dict):
        return [payload]  # type: ignore[list-item]
    if isinstance(payload, list):
        return payload
    raise ValidationError("JSON result must be an object or an array of objects")


def to_csv(records: Iterable[ResultRecord]) -> str:
    """CSV with a header row; assignment lists are space-separated."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for record in records:
        row: Dict[str, Any] = {}
        for name in CSV_FIELDS:
            value = record.get(name, "")
            if name in _LIST_FIELDS:
                value = " ".join(str(cell) for cell in value)
            elif name in _BOOL_FIELDS and value != "":
                value = "true" if value else "false"
            row[name] = value
        writer.writerow(row)
    return buffer.getvalue()


def records_from_csv(text: str) -> List[ResultRecord]:
    """Parse CSV written by to_csv back into typed records (empty cells are dropped)."""
    records = []
    for row in csv.DictReader(io.StringIO(text)):
        record: Dict[str, Any] = {}
        for name, value in row.items():
            if value == "":
                continue
            if name in _INT_FIELDS:
                record[name] = int(value)
            elif name in _FLOAT_FIELDS:
                record[name] = float(value)
            elif name in _LIST_FIELDS:
                record[name] = [int(cell) for cell in value.split()]
            elif name in _BOOL_FIELDS:
                record[name] = value == "true"
            else:
                record[name] = value
        records.append(record)
    return records  # type: ignore[return-value]


def to_text(records: Iterable[ResultRecord]) -> str:
    """Human-readable summary, one block per record."""
    blocks = []
    for record in records:
        lines = [
            f"Instance {record['instance']} ({record['m']}x{record['p']}), "
            f"method {record.get('method', '-')}, q={record['q']}, "
            f"singletons {'allowed' if record['allow_singletons'] else 'forbidden'}",
            f"  cells: {record['cells']}",
            f"  efficiency: {record['efficiency_pct']:.2f}% ({record['efficiency']})",
            f"  efficacy: {record['efficacy_pct']:.2f}% ({record['efficacy']})",
            f"  GCI: {record['group_capability_index_pct']:.2f}% "
            f"({record['group_capability_index']})",
            f"  E+V: {record['exceptions_plus_voids']}",
        ]
        if record.get("runs", 1) > 1:
            lines.append(
                f"  runs: {record['runs']}  min {record['efficiency_min_pct']:.2f}%  "
                f"avg {record['efficiency_avg_pct']:.2f}%  max {record['efficiency_max_pct']:.2f}%"
            )
        if "min_cells" in record:
            lines.append(f"  cell range: {record['min_cells']}..{record['max_cells']}")
        if "enumerated" in record:
            lines.append(f"  feasible solutions enumerated: {record['enumerated']}")
        lines.append(f"  time: {record['elapsed_seconds']:.3f}s  seed: {record['seed']}")
        lines.append(f"  machine cells: {' '.join(map(str, record['machine_cells']))}")
        lines.append(f"  part cells: {' '.join(map(str, record['part_cells']))}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def bench_table(records: Iterable[ResultRecord]) -> str:
    """Min/Avg/Max/Time/Cells table for benchmark runs."""
    header = f"{'instance':<20} {'m x p':>9} {'Min':>7} {'Avg':>7} {'Max':>7} {'Time, s':>8} {'Cells':>5}"
    lines = [header, "-" * len(header)]
    for record in records:
        size = f"{record['m']}x{record['p']}"
        lines.append(
            f"{record['instance']:<20} {size:>9} "
            f"{record.get('efficiency_min_pct', record['efficiency_pct']):>7.2f} "
            f"{record.get('efficiency_avg_pct', record['efficiency_pct']):>7.2f} "
            f"{record.get('efficiency_max_pct', record['efficiency_pct']):>7.2f} "
            f"{record['elapsed_seconds']:>8.3f} {record['cells']:>5}"
        )
    return "\n".join(lines) + "\n"
