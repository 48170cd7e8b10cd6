"""Result tables and their canonical text renderings.

Cells are ints, :class:`~fractions.Fraction`, :class:`Root` or strings.
Rendering is exact: decimals are rounded half-to-even from the rational
value, never from a float, so two independent computations that agree on
the math agree on the bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

DECIMALS = 6
NA = "n/a"


@dataclass(frozen=True)
class Root:
    """The non-negative square root of an exact rational."""

    square: Fraction

    def __post_init__(self):
        if self.square < 0:
            raise ValueError("negative square")


def _fixed(scaled: int) -> str:
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10**DECIMALS)
    return f"{sign}{whole}.{frac:0{DECIMALS}d}"


def _round_root(square: Fraction) -> int:
    """round(sqrt(square) * 10**DECIMALS), half to even, computed exactly."""
    w = Fraction(square) * 10 ** (2 * DECIMALS)
    f = math.isqrt(math.floor(w))
    half = Fraction(2 * f + 1, 2) ** 2
    if w > half or (w == half and f % 2 == 1):
        return f + 1
    return f


def format_cell(value) -> str:
    if value is None:
        return NA
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        return _fixed(round(value * 10**DECIMALS))
    if isinstance(value, Root):
        return _fixed(_round_root(value.square))
    return str(value)


def json_cell(value):
    if value is None or isinstance(value, (bool, int)):
        return value
    if isinstance(value, (Fraction, Root)):
        return float(format_cell(value))
    return str(value)


@dataclass
class Table:
    name: str
    columns: tuple
    rows: list = field(default_factory=list)

    def add(self, *cells) -> None:
        if len(cells) != len(self.columns):
            raise ValueError(f"{self.name}: expected {len(self.columns)} cells, got {len(cells)}")
        self.rows.append(tuple(cells))

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def filter_mode(self, mode: str) -> "Table":
        if "mode" not in self.columns:
            return self
        i = self.columns.index("mode")
        return Table(self.name, self.columns, [r for r in self.rows if r[i] == mode])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_cell(c) for c in row])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [dict(zip(self.columns, (json_cell(c) for c in row))) for row in self.rows]
        return json.dumps({"table": self.name, "columns": list(self.columns), "rows": rows}, sort_keys=False)

    def render(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json() + "\n"
        raise ValueError(f"unknown format {fmt!r}")


def percent(part, whole):
    """Exact percentage, or None when the whole is zero."""
    if not whole:
        return None
    return Fraction(part) * 100 / whole
