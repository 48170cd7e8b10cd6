"""Single-interval approximation of the lines edited since the last reset.

Only one interval is kept. Editing line 2 and then line 900 yields
``[2, 900]`` even though nothing in between changed; that coarseness is
what keeps records small.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class EditRange:
    start: int | None = None
    end: int | None = None

    def __post_init__(self):
        if (self.start is None) != (self.end is None):
            raise ValueError("EditRange needs both endpoints or neither")
        if self.start is not None and not 1 <= self.start <= self.end:
            raise ValueError(f"invalid interval ({self.start}, {self.end})")

    @classmethod
    def interval(cls, start: int, end: int) -> "EditRange":
        return cls(start, end)

    @property
    def empty(self) -> bool:
        return self.start is None

    @property
    def width(self) -> int:
        if self.start is None:
            return 0
        return self.end - self.start + 1

    def __contains__(self, line: int) -> bool:
        return self.start is not None and self.start <= line <= self.end

    def __repr__(self):
        if self.empty:
            return "EditRange(empty)"
        return f"EditRange({self.start}, {self.end})"


EMPTY = EditRange()


@dataclass(frozen=True)
class Insert:
    at_line: int
    n_lines: int = 1

    def __post_init__(self):
        if self.at_line < 1 or self.n_lines < 1:
            raise ValueError(f"bad insert {self}")


@dataclass(frozen=True)
class Delete:
    from_line: int
    n_lines: int = 1

    def __post_init__(self):
        if self.from_line < 1 or self.n_lines < 1:
            raise ValueError(f"bad delete {self}")


@dataclass(frozen=True)
class Modify:
    from_line: int
    to_line: int

    def __post_init__(self):
        if self.from_line < 1 or self.to_line < self.from_line:
            raise ValueError(f"bad modify {self}")


EditOp = Union[Insert, Delete, Modify]


def _hull(a: EditRange, lo: int, hi: int) -> EditRange:
    if a.empty:
        return EditRange(lo, hi)
    return EditRange(min(a.start, lo), max(a.end, hi))


def apply_edit(rng: EditRange, op: EditOp) -> EditRange:
    """Return the smallest single interval covering ``rng`` (moved) and the lines ``op`` touches.

    Inserted lines count as touched. Deleted lines vanish; a deletion that
    swallows the whole interval leaves it empty.
    """
    if isinstance(op, Modify):
        return _hull(rng, op.from_line, op.to_line)

    if isinstance(op, Insert):
        at, n = op.at_line, op.n_lines
        if rng.empty:
            return EditRange(at, at + n - 1)
        start, end = rng.start, rng.end
        # lines at or below the insertion point move down by n
        if start >= at:
            start += n
        if end >= at:
            end += n
        return _hull(EditRange(start, end), at, at + n - 1)

    if isinstance(op, Delete):
        if rng.empty:
            return rng
        lo, hi = op.from_line, op.from_line + op.n_lines - 1
        n = op.n_lines
        start, end = rng.start, rng.end
        if end < lo:
            return rng
        if start > hi:
            return EditRange(start - n, end - n)
        keep_low = start < lo
        keep_high = end > hi
        if not keep_low and not keep_high:
            return EMPTY
        new_start = start if keep_low else lo
        new_end = end - n if keep_high else lo - 1
        return EditRange(new_start, new_end)

    raise TypeError(f"unknown edit op {op!r}")


def overlaps(rng: EditRange, start_line: int, end_line: int | None = None) -> bool:
    """True iff ``[start_line, end_line]`` intersects the interval.

    ``start_line`` may also be any object with ``start_line``/``end_line``
    attributes, such as an analysis error.
    """
    if end_line is None:
        start_line, end_line = start_line.start_line, start_line.end_line
    if rng.empty:
        return False
    return start_line <= rng.end and end_line >= rng.start


def reset(rng: EditRange) -> EditRange:
    return EMPTY
