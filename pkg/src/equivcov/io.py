"""CSV/JSON readers and writers with provenance headers.

Floats are written with 17 significant digits so repeated runs can be
compared byte for byte.  CSV files start with ``#`` comment lines carrying
the package version and the configuration echo.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

from . import __version__
from .errors import InvalidDataError

__all__ = ["fmt", "read_observations", "to_jsonable", "write_csv", "write_json"]


def fmt(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays and non-finite floats into strict-JSON values."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    return value


def _provenance(config: dict[str, Any]) -> list[str]:
    echo = json.dumps(to_jsonable(config), sort_keys=True, separators=(",", ":"))
    return [f"# equivcov {__version__}", f"# config {echo}"]


def write_csv(
    path: Path,
    columns: Sequence[str],
    rows: Iterable[dict[str, Any] | Sequence[Any]],
    config: dict[str, Any],
) -> None:
    buf = io.StringIO()
    for line in _provenance(config):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    if columns:
        writer.writerow(columns)
    for row in rows:
        values = [row.get(c, "") for c in columns] if isinstance(row, dict) else list(row)
        writer.writerow([fmt(v) for v in values])
    Path(path).write_text(buf.getvalue())


def write_json(path: Path, payload: dict[str, Any], config: dict[str, Any]) -> None:
    doc = {"version": __version__, "config": config, **payload}
    Path(path).write_text(json.dumps(to_jsonable(doc), indent=2, sort_keys=True) + "\n")


def read_observations(path: Path, skip_header: bool = False) -> NDArray[np.float64]:
    """Read a headerless numeric CSV (rows = observations) into an ``n x p`` array.

    Blank lines and ``#`` comment lines are ignored.  Any ragged or
    non-numeric row raises :class:`InvalidDataError` with its line number.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidDataError(f"cannot read {path}: {exc}") from None
    rows: list[list[float]] = []
    width = None
    header_pending = skip_header
    for lineno, record in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not record or all(not f.strip() for f in record) or record[0].lstrip().startswith("#"):
            continue
        if header_pending:
            header_pending = False
            continue
        try:
            values = [float(f) for f in record]
        except ValueError:
            raise InvalidDataError(f"{path}:{lineno}: non-numeric field") from None
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise InvalidDataError(f"{path}:{lineno}: expected {width} fields, got {len(values)}")
        if not all(math.isfinite(v) for v in values):
            raise InvalidDataError(f"{path}:{lineno}: non-finite value")
        rows.append(values)
    if not rows:
        raise InvalidDataError(f"{path}: no observations")
    return np.asarray(rows, dtype=np.float64)
