"""CSV tables with a provenance header.

Files are RFC-4180 CSV with LF line endings and floats written with 12
significant digits.  Leading ``# key: value`` lines carry provenance.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

UNITS = "energy eV; time fs; length nm; wavevector 1/nm; velocity nm/fs; temperature K"


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if v == 0.0:
            return "0"  # folds -0.0
        return f"{v:.12g}"
    return str(value)


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def dumps(self) -> str:
        buf = io.StringIO()
        for key, val in self.provenance.items():
            buf.write(f"# {key}: {val}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"row has {len(row)} fields, expected {len(self.columns)}")
            writer.writerow([fmt(v) for v in row])
        return buf.getvalue()

    def write(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(self.dumps())

    def column(self, name, cast=float):
        j = self.columns.index(name)
        return [parse_value(r[j], cast) for r in self.rows]

    def records(self):
        return [dict(zip(self.columns, r)) for r in self.rows]


def parse_value(text, cast=float):
    if text is None or text == "":
        return None
    if cast is bool:
        return text == "true"
    return cast(text)


def read_table(path) -> Table:
    with open(path, newline="", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    provenance = {}
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        key, _, val = lines[i][1:].strip().partition(":")
        provenance[key.strip()] = val.strip()
        i += 1
    body = [ln for ln in lines[i:] if ln]
    if not body:
        raise ValueError(f"{path}: no header row")
    reader = csv.reader(body)
    columns = next(reader)
    return Table(columns=columns, rows=[row for row in reader], provenance=provenance)
