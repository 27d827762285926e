"""Correlations restricted to system pairs that are close in metric score.

The full system-level tau rewards a metric for ordering pairs that are far
apart, which is easy. Here only pairs whose metric-score gap lies in a window
are classified. A window is given either by gap values (``lower <= gap <=
upper``) or by gap-rank fractions: with pairs sorted by gap, the window
``(f_lo, f_hi]`` keeps ranks ``k`` with ``ceil(f_lo * n0) < k <= ceil(f_hi * n0)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .correlation import DELTA_WINDOW, CorrelationResult, classify_pairs, tau_from_components
from .errors import EmptySelectionError, InputError, UndefinedCorrelationError
from .scoredata import SystemAggregate

VALUE_BOUNDS = "value-bounds"
RANK_BOUNDS = "rank-bounds"

DEFAULT_FRACTIONS = tuple(round(0.1 * k, 1) for k in range(1, 11))
# typical ROUGE-1 margin by which new summarization systems beat prior ones
DEFAULT_WINDOW = (0.0, 0.49)

GRID_CSV_HEADER = ("fraction_low", "fraction_high", "l_value", "u_value", "pairs", "tau")


class GapPair(NamedTuple):
    first: str
    second: str
    gap: float
    i: int
    j: int


def pairwise_score_gaps(agg: SystemAggregate) -> list[GapPair]:
    """All unordered system pairs sorted by ascending absolute mean gap.

    Within a pair the ids are in lexicographic order; equal gaps are ordered
    by ``(first, second)``.
    """
    n = len(agg.system_ids)
    if n < 2:
        raise InputError("at least 2 systems are required")
    ids = agg.system_ids
    means = agg.means
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            a, b = (i, j) if ids[i] <= ids[j] else (j, i)
            pairs.append(GapPair(ids[a], ids[b], abs(float(means[i]) - float(means[j])), a, b))
    pairs.sort(key=lambda p: (p.gap, p.first, p.second))
    return pairs


def rank_bound(fraction: float, n0: int) -> int:
    """Number of closest pairs covered by ``fraction`` of ``n0`` pairs (ceiling)."""
    # the small slack absorbs float error such as 0.3 * 10 == 3.0000000000000004
    return min(n0, max(0, math.ceil(fraction * n0 - 1e-9)))


def gap_threshold_for_fraction(gaps: Sequence[float], fraction: float) -> float:
    """Smallest gap ``u`` such that at least ``ceil(fraction * n0)`` pairs have gap <= u."""
    if len(gaps) == 0:
        raise InputError("gap list is empty")
    if not 0.0 < fraction <= 1.0:
        raise InputError(f"fraction must be in (0, 1], got {fraction}")
    values = [g.gap if isinstance(g, GapPair) else float(g) for g in gaps]
    k = max(1, rank_bound(fraction, len(values)))
    return values[k - 1]


@dataclass(frozen=True)
class DeltaWindow:
    lower: float = 0.0
    upper: float = math.inf
    selection: str = VALUE_BOUNDS
    fraction_low: float | None = None
    fraction_high: float | None = None

    def __post_init__(self):
        if self.selection == VALUE_BOUNDS:
            if not (self.lower >= 0 and self.lower <= self.upper):
                raise InputError(f"window needs 0 <= lower <= upper, got ({self.lower}, {self.upper})")
        elif self.selection == RANK_BOUNDS:
            lo, hi = self.fraction_low, self.fraction_high
            if lo is None or hi is None or not (0.0 <= lo < hi <= 1.0):
                raise InputError(f"rank window needs 0 <= fraction_low < fraction_high <= 1, got ({lo}, {hi})")
        else:
            raise InputError(f"unknown selection {self.selection!r}")

    @classmethod
    def by_value(cls, lower: float, upper: float) -> "DeltaWindow":
        return cls(lower=float(lower), upper=float(upper))

    @classmethod
    def by_fraction(cls, fraction_low: float, fraction_high: float) -> "DeltaWindow":
        return cls(selection=RANK_BOUNDS, fraction_low=fraction_low, fraction_high=fraction_high)

    def select(self, gaps: Sequence[GapPair]) -> list[GapPair]:
        """The pairs of the sorted ``gaps`` that fall in this window."""
        if self.selection == VALUE_BOUNDS:
            return [p for p in gaps if self.lower <= p.gap <= self.upper]
        n0 = len(gaps)
        return list(gaps[rank_bound(self.fraction_low, n0) : rank_bound(self.fraction_high, n0)])

    def describe(self) -> str:
        if self.selection == VALUE_BOUNDS:
            return f"gap in [{self.lower:g}, {self.upper:g}]"
        return f"gap rank in ({self.fraction_low:g}, {self.fraction_high:g}]"


def _check_aligned(metric_agg: SystemAggregate, human_agg: SystemAggregate) -> None:
    if metric_agg.system_ids != human_agg.system_ids:
        raise InputError("metric and human aggregates must list the same systems in the same order")


def _correlate_pairs(metric_agg, human_agg, pairs: Sequence[GapPair]) -> CorrelationResult:
    first = np.fromiter((p.i for p in pairs), dtype=np.intp, count=len(pairs))
    second = np.fromiter((p.j for p in pairs), dtype=np.intp, count=len(pairs))
    c = classify_pairs(metric_agg.means, human_agg.means, first, second)
    return CorrelationResult(tau_from_components(c), c, len(pairs), DELTA_WINDOW)


def delta_correlation(
    metric_agg: SystemAggregate, human_agg: SystemAggregate, window: DeltaWindow
) -> CorrelationResult:
    """tau-b over only the system pairs whose metric gap falls in ``window``."""
    _check_aligned(metric_agg, human_agg)
    pairs = window.select(pairwise_score_gaps(metric_agg))
    if not pairs:
        raise EmptySelectionError(f"no system pairs with {window.describe()}")
    return _correlate_pairs(metric_agg, human_agg, pairs)


@dataclass(frozen=True)
class DeltaCell:
    fraction_low: float
    fraction_high: float
    l_value: float | None
    u_value: float | None
    pairs: int
    result: CorrelationResult | None

    @property
    def tau(self) -> float | None:
        return None if self.result is None else self.result.coefficient

    def to_dict(self) -> dict:
        return {
            "fraction_low": self.fraction_low,
            "fraction_high": self.fraction_high,
            "l_value": self.l_value,
            "u_value": self.u_value,
            "pairs": self.pairs,
            "tau": self.tau,
            "result": None if self.result is None else self.result.to_dict(),
        }


@dataclass(frozen=True)
class DeltaGrid:
    """Upper-triangular table of rank-window correlations.

    ``cells[(lo, hi)]`` covers the gap-rank window ``(lo, hi]`` where ``lo`` is
    0 or one of ``fractions`` and ``hi`` a larger fraction. Row ``lo = 0`` is
    the sweep over the closest 10%, 20%, ... of pairs.
    """

    fractions: tuple[float, ...]
    cells: dict[tuple[float, float], DeltaCell]
    n_pairs: int

    def lows(self) -> tuple[float, ...]:
        return (0.0,) + self.fractions[:-1]

    def row(self, fraction_low: float) -> list[DeltaCell]:
        return [c for (lo, _), c in self.cells.items() if lo == fraction_low]

    def to_dict(self) -> dict:
        return {
            "fractions": list(self.fractions),
            "n_pairs": self.n_pairs,
            "cells": [c.to_dict() for c in self.cells.values()],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(GRID_CSV_HEADER)
        for c in self.cells.values():
            writer.writerow(
                (
                    repr(c.fraction_low),
                    repr(c.fraction_high),
                    "" if c.l_value is None else repr(c.l_value),
                    "" if c.u_value is None else repr(c.u_value),
                    c.pairs,
                    "" if c.tau is None else repr(c.tau),
                )
            )
        return buf.getvalue()


def _check_fractions(fractions: Sequence[float]) -> tuple[float, ...]:
    fractions = tuple(float(f) for f in fractions)
    if not fractions:
        raise InputError("at least one fraction is required")
    if any(not 0.0 < f <= 1.0 for f in fractions):
        raise InputError("fractions must lie in (0, 1]")
    if any(b <= a for a, b in zip(fractions, fractions[1:])):
        raise InputError("fractions must be strictly increasing")
    return fractions


def delta_grid(
    metric_agg: SystemAggregate,
    human_agg: SystemAggregate,
    fractions: Sequence[float] = DEFAULT_FRACTIONS,
) -> DeltaGrid:
    """Rank-window correlations for every ``fraction_low < fraction_high`` combination.

    Cells whose window is empty, or whose tau is undefined, are kept with
    ``result=None`` so one degenerate band does not sink the whole grid.
    """
    _check_aligned(metric_agg, human_agg)
    fractions = _check_fractions(fractions)
    gaps = pairwise_score_gaps(metric_agg)
    n0 = len(gaps)
    lows = (0.0,) + tuple(f for f in fractions if f < fractions[-1])
    cells: dict[tuple[float, float], DeltaCell] = {}
    for lo in lows:
        for hi in fractions:
            if hi <= lo:
                continue
            start, stop = rank_bound(lo, n0), rank_bound(hi, n0)
            selected = gaps[start:stop]
            if not selected:
                cells[lo, hi] = DeltaCell(lo, hi, None, None, 0, None)
                continue
            l_value = 0.0 if lo == 0.0 else selected[0].gap
            u_value = selected[-1].gap
            try:
                result = _correlate_pairs(metric_agg, human_agg, selected)
            except UndefinedCorrelationError:
                result = None
            cells[lo, hi] = DeltaCell(lo, hi, l_value, u_value, len(selected), result)
    return DeltaGrid(fractions, cells, n0)
