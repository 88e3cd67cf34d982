"""Rolling-window geometry, activeness filtering, smoothing, and data panels.

Windows are backward-looking spans of ``width_days`` trading days advanced by
``step_days``; window 0 covers days ``0 .. width_days-1`` and results are
reported at each window's end date.  Investors enter a window's panel only if
they traded on at least ``min_active_days`` days inside it, evaluated on raw
transaction days.  Net-volume series are smoothed once, globally, with a
trailing moving average (zero left-padding, consistent with silent-day
zeros), and windows slice the smoothed series.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from typing import Mapping, Sequence

import numpy as np

from investornet.errors import ConfigError, DataError
from investornet.ingest import (
    CATEGORY_TOKENS,
    MERGED,
    CategoryAssignment,
    NetVolumeSeries,
    TradingCalendar,
)


@dataclass(frozen=True)
class WindowSpec:
    """Window geometry and filter parameters (defaults: 126/21/20/5 days)."""

    width_days: int = 126
    step_days: int = 21
    min_active_days: int = 20
    smooth_days: int = 5

    def __post_init__(self) -> None:
        if self.min_active_days < 1:
            raise ConfigError("min_active_days must be >= 1")
        if self.width_days < self.min_active_days:
            raise ConfigError(
                f"width_days ({self.width_days}) must be >= min_active_days "
                f"({self.min_active_days})"
            )
        if self.step_days < 1:
            raise ConfigError("step_days must be >= 1")
        if self.smooth_days < 1:
            raise ConfigError("smooth_days must be >= 1")


@dataclass(frozen=True)
class Window:
    """One estimation window: inclusive day span plus its calendar end points."""

    index: int
    start_day: int
    end_day: int
    start_date: date
    end_date: date

    @property
    def width(self) -> int:
        return self.end_day - self.start_day + 1


@dataclass(frozen=True)
class WindowPanel:
    """Aligned per-window input to the correlation network.

    Rows are smoothed net-volume values over the window for the category's
    active investors, ordered by ascending owner id.  ``gross_volume`` holds
    each investor's raw bought+sold share total inside the window.
    """

    window: Window
    category: str
    investors: tuple[str, ...]
    matrix: np.ndarray
    gross_volume: np.ndarray


def enumerate_windows(calendar: TradingCalendar, spec: WindowSpec) -> list[Window]:
    """All rolling windows that fit the calendar: floor((D-W)/step)+1 of them."""
    d = len(calendar)
    w, step = spec.width_days, spec.step_days
    if d < w:
        raise DataError(f"insufficient history: {d} days < window width {w}")
    count = (d - w) // step + 1
    out = []
    for t in range(count):
        start = t * step
        end = start + w - 1
        out.append(
            Window(
                index=t,
                start_day=start,
                end_day=end,
                start_date=calendar.dates[start],
                end_date=calendar.dates[end],
            )
        )
    return out


def active_investors(
    window: Window,
    series_by_owner: Mapping[str, NetVolumeSeries],
    min_active_days: int,
) -> list[str]:
    """Owners with at least ``min_active_days`` trading days inside the window, sorted."""
    lo, hi = window.start_day, window.end_day
    out = [
        owner
        for owner, series in series_by_owner.items()
        if sum(1 for d in series.active_days if lo <= d <= hi) >= min_active_days
    ]
    out.sort()
    return out


def smooth(values: Sequence[float] | np.ndarray, smooth_days: int) -> np.ndarray:
    """Trailing moving average of width ``smooth_days`` with zero left-padding.

    ``out[t]`` averages ``values[t-smooth_days+1 .. t]``, treating indices
    before the series start as zeros; width 1 is the identity.
    """
    if smooth_days < 1:
        raise ConfigError("smooth_days must be >= 1")
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError("smooth expects a 1-d series")
    if smooth_days == 1:
        return arr.astype(np.float64)
    # integer prefix sums stay exact; floats fall back to float64
    acc = np.int64 if arr.dtype.kind in "iu" else np.float64
    cum = np.concatenate([np.zeros(1, dtype=acc), np.cumsum(arr, dtype=acc)])
    upper = np.arange(1, arr.shape[0] + 1)
    lower = np.maximum(upper - smooth_days, 0)
    return (cum[upper] - cum[lower]) / smooth_days


def _smooth_matrix(values: np.ndarray, smooth_days: int) -> np.ndarray:
    if smooth_days == 1:
        return values.astype(np.float64)
    n, d = values.shape
    cum = np.zeros((n, d + 1), dtype=np.int64)
    np.cumsum(values, axis=1, out=cum[:, 1:])
    upper = np.arange(1, d + 1)
    lower = np.maximum(upper - smooth_days, 0)
    return (cum[:, upper] - cum[:, lower]) / smooth_days


class PanelBuilder:
    """Shared, immutable state for building panels across many windows.

    Stacks the categorized owners' series into matrices once (owner order is
    ascending), smooths globally, and answers per-window activeness via
    prefix sums; individual panels are cheap slices.
    """

    def __init__(
        self,
        series_by_owner: Mapping[str, NetVolumeSeries],
        assignment: CategoryAssignment,
        spec: WindowSpec,
    ) -> None:
        self.spec = spec
        self.owners: tuple[str, ...] = tuple(
            o for o in sorted(series_by_owner) if o in assignment.categories
        )
        n = len(self.owners)
        if n:
            d = series_by_owner[self.owners[0]].values.shape[0]
        else:
            d = 0
        net = np.zeros((n, d), dtype=np.int64)
        gross = np.zeros((n, d), dtype=np.int64)
        for i, o in enumerate(self.owners):
            net[i] = series_by_owner[o].values
            gross[i] = series_by_owner[o].gross_values
        self.smoothed = _smooth_matrix(net, spec.smooth_days)
        active = gross > 0
        self._active_prefix = np.zeros((n, d + 1), dtype=np.int64)
        np.cumsum(active, axis=1, out=self._active_prefix[:, 1:])
        self._gross_prefix = np.zeros((n, d + 1), dtype=np.int64)
        np.cumsum(gross, axis=1, out=self._gross_prefix[:, 1:])
        self._category_rows = {
            tok: np.array(
                [i for i, o in enumerate(self.owners) if assignment.categories[o] == tok],
                dtype=np.int64,
            )
            for tok in CATEGORY_TOKENS
        }

    def active_mask(self, window: Window) -> np.ndarray:
        counts = (
            self._active_prefix[:, window.end_day + 1]
            - self._active_prefix[:, window.start_day]
        )
        return counts >= self.spec.min_active_days

    def active_owner_set(self, window: Window, category: str) -> frozenset[str]:
        rows = self._rows_for(window, category)
        return frozenset(self.owners[i] for i in rows)

    def _rows_for(self, window: Window, category: str) -> np.ndarray:
        mask = self.active_mask(window)
        if category == MERGED:
            return np.flatnonzero(mask)
        rows = self._category_rows[category]
        return rows[mask[rows]]

    def panel(self, window: Window, category: str) -> WindowPanel:
        rows = self._rows_for(window, category)
        matrix = self.smoothed[rows, window.start_day : window.end_day + 1]
        gross = (
            self._gross_prefix[rows, window.end_day + 1]
            - self._gross_prefix[rows, window.start_day]
        )
        return WindowPanel(
            window=window,
            category=category,
            investors=tuple(self.owners[i] for i in rows),
            matrix=matrix,
            gross_volume=gross,
        )


def build_panel(
    window: Window,
    category: str,
    series_by_owner: Mapping[str, NetVolumeSeries],
    assignment: CategoryAssignment,
    spec: WindowSpec,
) -> WindowPanel:
    """One-shot panel construction; the pipeline reuses a :class:`PanelBuilder`."""
    if category != MERGED and category not in CATEGORY_TOKENS:
        raise ConfigError(f"unknown category {category!r}")
    return PanelBuilder(series_by_owner, assignment, spec).panel(window, category)
