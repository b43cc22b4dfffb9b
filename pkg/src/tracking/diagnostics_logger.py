"""CSV export and re-import of diagnostics series."""
import csv
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Union

from src.diagnostics.records import DiagnosticsRecord
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

PathLike = Union[str, Path]


def format_value(value) -> str:
    """Floats with 17 significant digits so float(text) restores them exactly."""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_rows(rows: Sequence[Dict[str, object]], path: PathLike) -> Path:
    """
    Write dict rows to CSV with the union of keys as header, in first-seen order.

    Raises:
        ValueError: no rows
    """
    if not rows:
        raise ValueError(f"refusing to write an empty table to {path}")
    columns: List[str] = []
    for row in rows:
        columns.extend(key for key in row if key not in columns)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.DictWriter(f, fieldnames=columns, lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({key: format_value(row[key]) if key in row else '' for key in columns})
    return path


def export_diagnostics(series: Iterable[DiagnosticsRecord], path: PathLike) -> Path:
    """
    One row per record, header naming every field.

    Raises:
        ValueError: empty series
    """
    records = list(series)
    if not records:
        raise ValueError("cannot export an empty diagnostics series")
    path = write_rows([r.as_row() for r in records], path)
    logger.info(f"Diagnostics exported to {path} ({len(records)} records)")
    return path


def import_diagnostics(path: PathLike) -> List[DiagnosticsRecord]:
    with open(path, newline='', encoding='utf-8') as f:
        reader = csv.DictReader(f)
        return [DiagnosticsRecord.from_row({k: v for k, v in row.items() if v != ''}) for row in reader]
