"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

from datetime import date

import numpy as np
import pytest

from investornet.ingest import (
    DEFAULT_CATEGORY_MAPPING,
    Direction,
    TransactionRecord,
    aggregate_net_volumes,
    build_calendar,
    categorize,
)
from investornet.synth import SynthConfig, generate_market, weekday_dates
from investornet.windows import Window, WindowPanel


def rec(
    owner: str,
    day: str,
    direction: str = "B",
    volume: int = 100,
    price: float | None = None,
    sector: str = "HH",
) -> TransactionRecord:
    """Terse transaction-record builder for hand-written cases."""
    return TransactionRecord(
        owner_id=owner,
        trade_date=date.fromisoformat(day),
        direction=Direction.BUY if direction == "B" else Direction.SELL,
        volume=volume,
        price=price,
        sector_code=sector,
    )


def mk_window(width: int, index: int = 0, start_day: int = 0) -> Window:
    """A window over synthetic weekday dates, for unit-level graph tests."""
    dates = weekday_dates(start_day + width)
    return Window(
        index=index,
        start_day=start_day,
        end_day=start_day + width - 1,
        start_date=dates[start_day],
        end_date=dates[-1],
    )


def mk_panel(matrix, investors, gross=None, category: str = "HH") -> WindowPanel:
    """Wrap a raw matrix as a window panel with the given node names."""
    m = np.asarray(matrix, dtype=np.float64)
    if gross is None:
        gross = np.abs(m).sum(axis=1).astype(np.int64) + 1
    return WindowPanel(
        window=mk_window(m.shape[1] if m.ndim == 2 and m.shape[1] else 2),
        category=category,
        investors=tuple(investors),
        matrix=m,
        gross_volume=np.asarray(gross, dtype=np.int64),
    )


SMALL_MARKET_CONFIG = SynthConfig(
    n_households=40,
    n_nfi=12,
    n_fi=8,
    n_days=300,
    tipping_day=160,
    herding_ramp=0.003,
    contrarian_fraction=0.25,
    contrarian_onset_day=120,
    trade_probability=0.8,
    noise_scale=1.0,
    volume_scale=100.0,
    seed=7,
)


@pytest.fixture(scope="session")
def small_market():
    """A deterministic 60-investor, 300-day market shared across tests."""
    return generate_market(SMALL_MARKET_CONFIG)


@pytest.fixture(scope="session")
def small_series(small_market):
    """(records, calendar, series, assignment) for the small market."""
    records = small_market.records
    calendar = build_calendar(records)
    series = aggregate_net_volumes(records, calendar)
    assignment = categorize(records, DEFAULT_CATEGORY_MAPPING)
    return records, calendar, series, assignment


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One summary line per acceptance criterion, in order."""
    lines = []
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            if "test_acceptance.py::test_criterion_" in rep.nodeid:
                name = rep.nodeid.split("::")[-1]
                lines.append((name, "PASS" if rep.passed else "FAIL"))
    if lines:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for name, outcome in sorted(set(lines)):
            terminalreporter.write_line(f"  {name}: {outcome}")
