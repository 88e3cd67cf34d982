"""Transaction ingestion: CSV parsing, trading calendar, daily net volumes, categories.

Input files are UTF-8 CSV with a header row and columns
``owner_id,trade_date,direction,volume,price,sector_code`` (extra columns are
ignored, ``price`` may be empty).  ``direction`` is ``B`` or ``S`` and dates
are ``YYYY-MM-DD``.  All downstream day indexing runs against a
:class:`TradingCalendar` built from the distinct trade dates present in the
data.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from investornet.errors import ConfigError, DataError

_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")

#: Default logical-field -> column-name mapping for input CSVs.
DEFAULT_SCHEMA = {
    "owner_id": "owner_id",
    "trade_date": "trade_date",
    "direction": "direction",
    "volume": "volume",
    "price": "price",
    "sector_code": "sector_code",
    "ticker": "ticker",
}

_REQUIRED_FIELDS = ("owner_id", "trade_date", "direction", "volume", "sector_code")


class Direction(Enum):
    BUY = "B"
    SELL = "S"


class InvestorCategory(Enum):
    """The three investor categories; tokens match the output-file vocabulary."""

    HOUSEHOLD = "HH"
    NON_FINANCIAL_INSTITUTION = "NFI"
    FINANCIAL_INSTITUTION = "FI"


#: Pseudo-category for the union of all three categories.
MERGED = "MERGED"

#: Canonical per-row category order used in outputs.
CATEGORY_TOKENS = ("HH", "NFI", "FI")


@dataclass(frozen=True, slots=True)
class TransactionRecord:
    """One trade row: who traded, when, which way, and how much."""

    owner_id: str
    trade_date: date
    direction: Direction
    volume: int
    price: float | None = None
    sector_code: str = ""

    def signed_volume(self) -> int:
        return self.volume if self.direction is Direction.BUY else -self.volume


@dataclass(frozen=True)
class TradingCalendar:
    """Strictly increasing distinct trade dates with a date <-> day-index bijection."""

    dates: tuple[date, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {d: i for i, d in enumerate(self.dates)})

    def __len__(self) -> int:
        return len(self.dates)

    def index_of(self, d: date) -> int:
        return self._index[d]

    def __contains__(self, d: date) -> bool:
        return d in self._index


@dataclass(frozen=True)
class NetVolumeSeries:
    """Per-investor daily net volume aligned to the calendar.

    ``values[t]`` is shares bought minus shares sold on day ``t``; silent days
    are 0, not missing.  ``gross_values[t]`` is shares bought plus shares sold
    (used for node sizing).  ``active_days`` holds the day indices with at
    least one transaction, including days that netted to zero.
    """

    owner_id: str
    values: np.ndarray
    gross_values: np.ndarray
    active_days: frozenset[int]


@dataclass
class ParseResult:
    """Outcome of :func:`parse_transactions`."""

    records: list[TransactionRecord]
    rows_read: int
    errors: list[tuple[int, str]] = field(default_factory=list)

    @property
    def dropped_rows(self) -> int:
        return len(self.errors)


@dataclass
class CategoryAssignment:
    """Owner -> category tokens, plus owners dropped for unmapped sector codes."""

    categories: dict[str, str]
    dropped_owners: frozenset[str]

    @property
    def dropped_count(self) -> int:
        return len(self.dropped_owners)


def _open_source(source: str | Path | IO) -> tuple[IO[str], bool]:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline=""), True
    if isinstance(source, io.TextIOBase):
        return source, False
    # binary stream
    return io.TextIOWrapper(source, encoding="utf-8", newline=""), False


def parse_transactions(
    source: str | Path | IO,
    schema: dict[str, str] | None = None,
    *,
    lenient: bool = False,
) -> ParseResult:
    """Parse a transaction CSV into records, in file order.

    Row-level problems (malformed date, non-positive volume, unknown direction)
    are reported with their file line number.  By default any bad row aborts
    the run; with ``lenient=True`` bad rows are dropped and counted.  If a
    ticker column is present it must hold a single constant value.
    """
    colmap = dict(DEFAULT_SCHEMA)
    if schema:
        colmap.update(schema)

    stream, owns = _open_source(source)
    try:
        reader = csv.reader(stream)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError("empty input: missing header row") from None

        positions: dict[str, int] = {}
        for logical in _REQUIRED_FIELDS + ("price", "ticker"):
            name = colmap.get(logical, logical)
            if name in header:
                positions[logical] = header.index(name)
        missing = [f for f in _REQUIRED_FIELDS if f not in positions]
        if missing:
            raise DataError(
                "missing required columns: " + ", ".join(colmap[f] for f in missing)
            )

        i_owner = positions["owner_id"]
        i_date = positions["trade_date"]
        i_dir = positions["direction"]
        i_vol = positions["volume"]
        i_sector = positions["sector_code"]
        i_price = positions.get("price")
        i_ticker = positions.get("ticker")
        n_cols = max(positions.values()) + 1

        records: list[TransactionRecord] = []
        errors: list[tuple[int, str]] = []
        rows_read = 0
        date_cache: dict[str, date] = {}
        tickers: set[str] = set()

        for row in reader:
            rows_read += 1
            line = reader.line_num
            if len(row) < n_cols:
                errors.append((line, f"expected at least {n_cols} columns, got {len(row)}"))
                continue

            raw_date = row[i_date].strip()
            parsed = date_cache.get(raw_date)
            if parsed is None:
                if not _DATE_RE.match(raw_date):
                    errors.append((line, f"malformed date {raw_date!r} at line {line}"))
                    continue
                try:
                    parsed = date.fromisoformat(raw_date)
                except ValueError:
                    errors.append((line, f"malformed date {raw_date!r} at line {line}"))
                    continue
                date_cache[raw_date] = parsed

            raw_dir = row[i_dir].strip()
            if raw_dir == "B":
                direction = Direction.BUY
            elif raw_dir == "S":
                direction = Direction.SELL
            else:
                errors.append((line, f"unknown direction token {raw_dir!r} at line {line}"))
                continue

            try:
                volume = int(row[i_vol].strip())
            except ValueError:
                errors.append((line, f"non-integer volume {row[i_vol]!r} at line {line}"))
                continue
            if volume <= 0:
                errors.append((line, f"non-positive volume at line {line}"))
                continue

            price: float | None = None
            if i_price is not None:
                raw_price = row[i_price].strip()
                if raw_price:
                    try:
                        price = float(raw_price)
                    except ValueError:
                        errors.append((line, f"malformed price {raw_price!r} at line {line}"))
                        continue
                    if price < 0:
                        errors.append((line, f"negative price at line {line}"))
                        continue

            if i_ticker is not None:
                tickers.add(row[i_ticker].strip())

            records.append(
                TransactionRecord(
                    owner_id=row[i_owner],
                    trade_date=parsed,
                    direction=direction,
                    volume=volume,
                    price=price,
                    sector_code=row[i_sector],
                )
            )

        if len(tickers) > 1:
            raise DataError(
                "input mixes multiple tickers (single-stock runs only): "
                + ", ".join(sorted(tickers)[:5])
            )
        if errors and not lenient:
            line, msg = errors[0]
            raise DataError(f"{len(errors)} bad row(s); first: {msg}")
        return ParseResult(records=records, rows_read=rows_read, errors=errors)
    finally:
        if owns:
            stream.close()


def build_calendar(records: Sequence[TransactionRecord]) -> TradingCalendar:
    """Trading calendar of the run: the distinct trade dates, sorted."""
    if not records:
        raise DataError("no transactions")
    return TradingCalendar(dates=tuple(sorted({r.trade_date for r in records})))


def aggregate_net_volumes(
    records: Sequence[TransactionRecord], calendar: TradingCalendar
) -> dict[str, NetVolumeSeries]:
    """Aggregate records into per-owner daily net (and gross) volume series.

    Same-day buys and sells of one owner net against each other; a day with
    transactions that net to zero still counts as an active day.
    """
    owners = sorted({r.owner_id for r in records})
    owner_idx = {o: i for i, o in enumerate(owners)}
    day_index = {d: i for i, d in enumerate(calendar.dates)}

    n, d = len(owners), len(calendar)
    oi = np.fromiter((owner_idx[r.owner_id] for r in records), dtype=np.int64, count=len(records))
    try:
        di = np.fromiter((day_index[r.trade_date] for r in records), dtype=np.int64, count=len(records))
    except KeyError as exc:
        raise DataError(f"record date {exc.args[0]} not present in calendar") from None
    vol = np.fromiter((r.volume for r in records), dtype=np.int64, count=len(records))
    signed = np.where(
        np.fromiter((r.direction is Direction.BUY for r in records), dtype=bool, count=len(records)),
        vol,
        -vol,
    )

    net = np.zeros((n, d), dtype=np.int64)
    gross = np.zeros((n, d), dtype=np.int64)
    np.add.at(net, (oi, di), signed)
    np.add.at(gross, (oi, di), vol)

    out: dict[str, NetVolumeSeries] = {}
    for o, i in owner_idx.items():
        active = frozenset(np.flatnonzero(gross[i]).tolist())
        out[o] = NetVolumeSeries(
            owner_id=o, values=net[i], gross_values=gross[i], active_days=active
        )
    return out


def daily_price_series(
    records: Sequence[TransactionRecord],
) -> tuple[list[date], list[float]]:
    """Volume-weighted mean price per day, over rows that carry a price.

    Days without any priced row are omitted; this is a pass-through of the
    input data for plotting, not a computed quantity.
    """
    weighted: dict[date, float] = {}
    volume: dict[date, int] = {}
    for r in records:
        if r.price is None:
            continue
        d = r.trade_date
        weighted[d] = weighted.get(d, 0.0) + r.price * r.volume
        volume[d] = volume.get(d, 0) + r.volume
    days = sorted(weighted)
    return days, [weighted[d] / volume[d] for d in days]


def categorize(
    records: Sequence[TransactionRecord], mapping: dict[str, str]
) -> CategoryAssignment:
    """Assign each owner the category of its sector code.

    Owners whose codes are absent from the mapping (e.g. nominee-registered
    foreigners) are dropped and counted.  An owner carrying two sector codes
    that map to different categories is an error.
    """
    bad = {code: tok for code, tok in mapping.items() if tok not in CATEGORY_TOKENS}
    if bad:
        raise ConfigError(
            "category mapping values must be one of "
            f"{CATEGORY_TOKENS}; got {sorted(bad.items())[:5]}"
        )

    codes_by_owner: dict[str, set[str]] = {}
    for r in records:
        codes_by_owner.setdefault(r.owner_id, set()).add(r.sector_code)

    categories: dict[str, str] = {}
    dropped: set[str] = set()
    for owner, codes in codes_by_owner.items():
        mapped = {mapping[c] for c in codes if c in mapping}
        if len(mapped) > 1:
            raise DataError(f"inconsistent category for owner {owner}: {sorted(mapped)}")
        if not mapped:
            dropped.add(owner)
        else:
            categories[owner] = mapped.pop()
    return CategoryAssignment(categories=categories, dropped_owners=frozenset(dropped))


def load_category_mapping(path: str | Path) -> dict[str, str]:
    """Load a sector_code -> category-token mapping from a JSON object file."""
    import json

    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read category mapping {path}: {exc}") from exc
    if not isinstance(raw, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in raw.items()
    ):
        raise ConfigError(f"category mapping {path} must be a JSON object of strings")
    return raw


#: Mapping used when no config is supplied; matches the synthetic generator's codes.
DEFAULT_CATEGORY_MAPPING = {"HH": "HH", "NFI": "NFI", "FI": "FI"}
