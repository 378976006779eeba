"""CSV reading with schema validation for solver output files.

The solver's delimited formats guarantee a documented set of columns but may
grow extra ones; readers here accept unknown extra columns and reject files
with missing required columns or unparseable cells, pointing at the offending
line and column.
"""

from __future__ import annotations

import csv

import numpy as np


class SchemaError(ValueError):
    """Input file does not conform to the documented CSV schema."""


# required columns per known file kind; extra columns are always allowed
REQUIRED = {
    "convergence": ("problem", "order", "h", "error"),
    "timeseries": ("time",),
    "fields": ("panel", "lon", "lat", "H", "u1", "u2", "zeta"),
}

# columns read as text rather than floats
TEXT_COLUMNS = {"problem"}


def read_table(path: str, kind: str) -> dict[str, np.ndarray]:
    """Parse a CSV file into column arrays, validating the schema.

    Returns every column present in the file (documented and extra alike);
    numeric columns become float arrays, text columns object arrays.
    """
    required = REQUIRED[kind]
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(f"{path}: empty file") from None
            header = [h.strip() for h in header]
            missing = [c for c in required if c not in header]
            if missing:
                raise SchemaError(
                    f"{path}: missing required column(s) "
                    f"{', '.join(missing)} (found: {', '.join(header)})")
            rows = [[] for _ in header]
            for lineno, record in enumerate(reader, start=2):
                if not record or (len(record) == 1 and not record[0].strip()):
                    continue
                if len(record) != len(header):
                    raise SchemaError(
                        f"{path}:{lineno}: expected {len(header)} fields, "
                        f"got {len(record)}")
                for col, cell in zip(rows, record):
                    col.append(cell)
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror or exc}") from exc

    out: dict[str, np.ndarray] = {}
    for j, name in enumerate(header):
        if name in TEXT_COLUMNS:
            out[name] = np.array(rows[j], dtype=object)
            continue
        try:
            out[name] = np.array([float(c) if c.strip() else np.nan
                                  for c in rows[j]])
        except ValueError:
            bad = next(i for i, c in enumerate(rows[j])
                       if _not_a_number(c))
            raise SchemaError(
                f"{path}:{bad + 2}: column {name!r}: "
                f"cannot parse {rows[j][bad]!r} as a number") from None
    if not out[header[0]].size:
        raise SchemaError(f"{path}: no data rows")
    return out


def _not_a_number(cell: str) -> bool:
    if not cell.strip():
        return False
    try:
        float(cell)
    except ValueError:
        return True
    return False
