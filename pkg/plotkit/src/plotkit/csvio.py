"""Schema-checked reading of experiment result CSVs.

The experiment driver and this package share nothing but the file
format: UTF-8 CSV whose first line pins the schema version.  Readers
reject any other version outright.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

SCHEMA_LINE = "#schema=1"


class SchemaMismatchError(ValueError):
    """First line of the CSV is not the supported schema marker."""


class EmptyInputError(ValueError):
    """CSV carries no data rows; nothing to plot."""


class MissingColumnError(ValueError):
    """A required column is absent; the message names it."""


@dataclass(frozen=True)
class Table:
    path: str
    columns: tuple
    rows: tuple


def read_table(path):
    path = str(path)
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline().rstrip("\r\n")
        if first != SCHEMA_LINE:
            raise SchemaMismatchError(
                f"{path}: expected schema line {SCHEMA_LINE!r}, found {first!r}"
            )
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise EmptyInputError(f"{path}: missing header row")
        rows = tuple(dict(zip(header, row)) for row in reader)
    if not rows:
        raise EmptyInputError(f"{path}: header only, no data rows")
    return Table(path=path, columns=tuple(header), rows=rows)


def require_columns(table, names):
    for name in names:
        if name not in table.columns:
            raise MissingColumnError(f"{table.path}: missing column {name!r}")
