"""Versioned CSV/JSON emitters for distribution tables and plot series.

Distribution tables have the columns of :data:`DISTRIBUTION_COLUMNS`;
plot series use ``(series, x, y)``.  Floats are written with ``repr`` so
they round-trip at full double precision; exact rationals are written as
``"num/den"`` strings.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction

SCHEMA_VERSION = 1

DISTRIBUTION_COLUMNS = (
    "entity",
    "class_k",
    "class_size",
    "representative",
    "value_float",
    "value_exact",
)
SERIES_COLUMNS = ("series", "x", "y")


def exact_string(value) -> str | None:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, int):
        return f"{value}/1"
    return None


@dataclass(frozen=True)
class DistributionRow:
    entity: str
    class_k: int | None
    class_size: int | None
    representative: int | None
    value: object  # float or Fraction

    def as_record(self) -> dict:
        return {
            "entity": self.entity,
            "class_k": self.class_k,
            "class_size": self.class_size,
            "representative": self.representative,
            "value_float": float(self.value),
            "value_exact": exact_string(self.value),
        }


@dataclass
class Table:
    """Rows plus the column layout they are written with."""

    columns: tuple
    records: list
    command: str = ""
    meta: dict | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(self.columns), lineterminator="\n")
        writer.writeheader()
        for rec in self.records:
            writer.writerow({k: _cell(rec.get(k, "")) for k in self.columns})
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "columns": list(self.columns),
            "rows": [{k: rec.get(k) for k in self.columns} for rec in self.records],
        }
        if self.meta:
            doc["meta"] = self.meta
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_json() if fmt == "json" else self.to_csv()


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def distribution_table(rows: list[DistributionRow], command: str, meta=None) -> Table:
    return Table(DISTRIBUTION_COLUMNS, [r.as_record() for r in rows], command, meta)


def series_table(series: dict, command: str, meta=None) -> Table:
    """``series`` maps a name to ``(xs, ys)``."""
    records = []
    for name, (xs, ys) in series.items():
        for x, y in zip(xs, ys):
            records.append({"series": name, "x": float(x), "y": float(y)})
    return Table(SERIES_COLUMNS, records, command, meta)
