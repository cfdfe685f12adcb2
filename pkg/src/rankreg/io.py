"""CSV ingestion and byte-stable result / plot-data emission."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .data import PanelSample, Sample, require_binary
from .errors import InvalidInput, MissingColumn, ParseError

PLOT_COLUMNS = ("run_id", "n", "rep", "estimate", "oracle")
ROLES = ("y", "w", "x", "z", "run", "y_pre")


def _parse_float(text: str, row: int, col: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(row, col, text) from None
    if not math.isfinite(value):
        raise ParseError(row, col, text)
    return value


def load_csv(
    path: Union[str, Path],
    column_map: Mapping[str, Any],
    binary: Sequence[str] = ("w",),
    panel: bool = False,
) -> Union[Sample, PanelSample]:
    """Read the mapped columns of a headed UTF-8 CSV file.

    ``column_map`` maps roles (``y, w, x, z, run, y_pre``) to header names;
    ``x`` takes a list. Cells must be finite decimal numbers; the row number in
    a :class:`ParseError` is the 1-based line in the file, header included.
    Roles listed in ``binary`` must be 0/1. With ``panel=True`` the result is a
    :class:`PanelSample` with ``y_pre`` as the first period and ``y`` as the
    second.
    """
    unknown = set(column_map) - set(ROLES)
    if unknown:
        raise InvalidInput(f"unknown column roles {sorted(unknown)}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InvalidInput(f"{path} is empty") from None
        wanted: dict[str, list[str]] = {}
        for role, cols in column_map.items():
            if cols is None:
                continue
            names = [cols] if isinstance(cols, str) else list(cols)
            for name in names:
                if name not in header:
                    raise MissingColumn(f"column {name!r} (role {role}) not found in {path}")
            wanted[role] = names
        index = {name: header.index(name) for names in wanted.values() for name in names}
        values: dict[str, list[float]] = {name: [] for name in index}
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            for name, j in index.items():
                cell = row[j].strip() if j < len(row) else ""
                values[name].append(_parse_float(cell, line_no, name))

    cols = {name: np.asarray(v, dtype=float) for name, v in values.items()}
    for role in binary:
        if role in wanted:
            require_binary(cols[wanted[role][0]], wanted[role][0])

    def single(role: str) -> Optional[np.ndarray]:
        return cols[wanted[role][0]] if role in wanted else None

    for role in ("y", "w"):
        if role not in wanted:
            raise MissingColumn(f"a {role} column must be mapped")
    if panel:
        if "y_pre" not in wanted:
            raise MissingColumn("a pre-period outcome column (y_pre) must be mapped")
        return PanelSample(y0=single("y_pre"), y1=single("y"), w=single("w"))
    x = None
    if "x" in wanted and wanted["x"]:
        x = np.column_stack([cols[name] for name in wanted["x"]])
    return Sample(y=single("y"), w=single("w"), x=x, z=single("z"), run=single("run"), y_pre=single("y_pre"))


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (dict, list, tuple)):
        return json.dumps(value, sort_keys=True, default=_json_default)
    if value is None:
        return ""
    return str(value)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


def to_csv(rows: Iterable[Mapping[str, Any]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def write_text(text: str, out_path: Optional[Union[str, Path]], stream=None) -> None:
    if out_path is None:
        (stream or sys.stdout).write(text)
        return
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _records(table) -> list[dict]:
    if table is None:
        return []
    if hasattr(table, "records"):
        return list(table.records)
    out: list[dict] = []
    for item in table:
        out.extend(_records(item) if hasattr(item, "records") else [item])
    return out


def emit_plotdata(table, out_path: Union[str, Path], format: str = "csv") -> None:
    """Write long-format ``run_id, n, rep, estimate, oracle`` records.

    ``table`` is a convergence table, a list of them, or a list of record
    dicts. Floats are written with ``repr`` so a reload is exact and the bytes
    only depend on the inputs.
    """
    records = [{c: r[c] for c in PLOT_COLUMNS} for r in _records(table)]
    if format == "csv":
        text = to_csv(records, PLOT_COLUMNS)
    elif format == "json":
        text = to_json(records)
    else:
        raise InvalidInput(f"unknown plot-data format {format!r}")
    write_text(text, out_path)


def read_plotdata(path: Union[str, Path]) -> list[dict]:
    """Inverse of :func:`emit_plotdata` for the CSV format."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [
            {"run_id": r["run_id"], "n": int(r["n"]), "rep": int(r["rep"]),
             "estimate": float(r["estimate"]), "oracle": float(r["oracle"])}
            for r in reader
        ]
