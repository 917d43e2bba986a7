"""CSV and JSON-lines report writers.

Every number goes through ``format_number`` so identical inputs give
byte-identical files.
"""

import csv
import json
import math
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

CellValue = str | int | float | bool | None


def format_number(value: CellValue) -> str:
    """Render a report cell.

    Args:
        value: Cell value. None renders as an empty cell.

    Returns:
        Text with 10 significant digits for floats, "inf"/"-inf" for infinities.
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".10g")
    return str(value)


def write_csv(path: Path, *, header: Sequence[str], rows: Iterable[Sequence[CellValue]]) -> int:
    """Write a UTF-8 comma separated file with a header row.

    Args:
        path: Destination file.
        header: Column names.
        rows: Cell values, one sequence per row.

    Returns:
        Number of data rows written.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    written = 0
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(cell) for cell in row])
            written += 1
    return written


def _json_ready(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return format_number(value) if not math.isnan(value) else None
    if isinstance(value, Mapping):
        return {str(k): _json_ready(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_json_ready(v) for v in value]
    return value


def write_jsonl(path: Path, records: Iterable[Mapping[str, Any]]) -> int:
    """Write one JSON object per line with sorted keys.

    Returns:
        Number of records written.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    written = 0
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(_json_ready(record), sort_keys=True, ensure_ascii=False))
            handle.write("\n")
            written += 1
    return written
