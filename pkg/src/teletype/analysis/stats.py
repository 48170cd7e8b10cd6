"""Exact distribution summaries: mean, population stddev, nearest-rank percentiles."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from teletype.analysis.tables import Root

STAT_COLUMNS = ("n", "mean", "stddev", "median", "p99")


def nearest_rank(sorted_values: Sequence, pct: int):
    """Smallest value with at least ``pct`` percent of the sample at or below it."""
    n = len(sorted_values)
    if n == 0:
        return None
    rank = max(1, -(-pct * n // 100))
    return sorted_values[rank - 1]


@dataclass(frozen=True)
class DistStats:
    n: int
    mean: Fraction | None
    stddev: Root | None
    median: object
    p99: object

    def cells(self) -> tuple:
        return (self.n, self.mean, self.stddev, self.median, self.p99)


EMPTY_STATS = DistStats(0, None, None, None, None)


def dist_stats(values: Sequence) -> DistStats:
    if not values:
        return EMPTY_STATS
    xs = sorted(Fraction(v) for v in values)
    n = len(xs)
    mean = sum(xs, Fraction(0)) / n
    var = sum(((x - mean) ** 2 for x in xs), Fraction(0)) / n
    return DistStats(n, mean, Root(var), _plain(nearest_rank(xs, 50)), _plain(nearest_rank(xs, 99)))


def _plain(x: Fraction):
    return x.numerator if x.denominator == 1 else x
