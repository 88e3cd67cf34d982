"""Seeded synthetic single-stock market generator.

A single latent innovation drives both the price path and investor demand.
The price climbs with small noisy steps until ``tipping_day`` and declines
after it, so the path has a unique peak there.  The demand factor is the
sign of the day's return innovation (investors chase the daily move), which
keeps every estimation window's factor variance exactly one.  Household
demand loads on the factor with a coefficient that ramps up until the
tipping day (herding), and a configurable fraction of households flips the
sign of its loading at ``contrarian_onset_day``.  Non-financial
institutions keep constant positive loadings.  Financial institutions have
no ramp; their loadings follow a fixed, trendless participation cycle
(roughly annual), so their network intensity oscillates but never drifts.

All randomness comes from one seeded generator consumed in day order after a
fixed block of per-investor draws, so extending ``n_days`` with the same seed
reproduces the shorter run's records exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields, replace
from datetime import date, timedelta
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError
from .exports import atomic_writer, write_price_csv
from .ingest import Direction, TransactionRecord

TRANSACTIONS_HEADER = "owner_id,trade_date,direction,volume,price,sector_code"

_START_DATE = date(1998, 1, 2)
_START_PRICE = 10.0
_DRIFT = 0.004
_PRICE_SIGMA = 0.001
_CLIP = 3.0
_LOAD_LOW = 0.2
_LOAD_HIGH = 0.8
_RESAMPLE_CAP = 16
# Trendless participation cycle for the no-ramp (FI) group.  The period is a
# multiple of common window steps and incommensurate with typical window
# widths, which keeps the rank correlation of any windowed average of the
# cycle against time near zero.
_FI_CYCLE_AMP = 0.8
_FI_CYCLE_PERIOD = 294.0
_FI_CYCLE_PHASE = 105.0


@dataclass(frozen=True, slots=True)
class SynthConfig:
    """Knobs of the synthetic market; see module docstring for the model."""

    n_households: int
    n_nfi: int
    n_fi: int
    n_days: int
    tipping_day: int
    herding_ramp: float
    contrarian_fraction: float
    contrarian_onset_day: int
    trade_probability: float
    noise_scale: float
    volume_scale: float
    seed: int | None = None

    def __post_init__(self) -> None:
        def require(cond: bool, message: str) -> None:
            if not cond:
                raise ConfigError(message)

        require(self.n_households >= 0, "n_households must be >= 0")
        require(self.n_nfi >= 0, "n_nfi must be >= 0")
        require(self.n_fi >= 0, "n_fi must be >= 0")
        require(self.n_investors >= 2, "need at least two investors")
        require(self.n_days >= 1, "n_days must be >= 1")
        require(
            0 <= self.tipping_day < self.n_days,
            f"tipping_day must lie in [0, n_days); got {self.tipping_day}",
        )
        require(
            0 <= self.contrarian_onset_day <= self.n_days,
            f"contrarian_onset_day must lie in [0, n_days]; got {self.contrarian_onset_day}",
        )
        require(
            math.isfinite(self.herding_ramp) and self.herding_ramp >= 0,
            "herding_ramp must be finite and >= 0",
        )
        require(
            0.0 <= self.contrarian_fraction <= 1.0,
            "contrarian_fraction must lie in [0, 1]",
        )
        require(
            0.0 < self.trade_probability <= 1.0,
            "trade_probability must lie in (0, 1]",
        )
        require(self.noise_scale > 0, "noise_scale must be > 0")
        require(self.volume_scale > 0, "volume_scale must be > 0")
        require(
            self.seed is None or (isinstance(self.seed, int) and self.seed >= 0),
            "seed must be a non-negative integer",
        )

    @property
    def n_investors(self) -> int:
        return self.n_households + self.n_nfi + self.n_fi

    @classmethod
    def from_dict(cls, raw: Mapping[str, object]) -> "SynthConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown synth config keys: {', '.join(unknown)}")
        missing = sorted(known - {"seed"} - set(raw))
        if missing:
            raise ConfigError(f"missing synth config keys: {', '.join(missing)}")
        try:
            return cls(**raw)  # type: ignore[arg-type]
        except TypeError as exc:
            raise ConfigError(f"bad synth config: {exc}") from exc

    def with_overrides(self, **overrides: object) -> "SynthConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


@dataclass(frozen=True)
class PricePath:
    """Daily closing prices aligned to the trading dates."""

    dates: tuple[date, ...]
    values: np.ndarray

    @property
    def peak_day(self) -> int:
        return int(np.argmax(self.values))


@dataclass(frozen=True)
class SyntheticMarket:
    config: SynthConfig
    records: list[TransactionRecord]
    price: PricePath


def weekday_dates(n: int, start: date = _START_DATE) -> tuple[date, ...]:
    """The first ``n`` Monday-to-Friday dates starting at ``start``."""
    out: list[date] = []
    d = start
    one = timedelta(days=1)
    while len(out) < n:
        if d.weekday() < 5:
            out.append(d)
        d += one
    return tuple(out)


def _owner_ids(config: SynthConfig) -> tuple[list[str], list[str]]:
    """Owner IDs in draw order plus each owner's sector code."""
    ids: list[str] = []
    sectors: list[str] = []
    for prefix, count in (
        ("HH", config.n_households),
        ("NFI", config.n_nfi),
        ("FI", config.n_fi),
    ):
        width = max(4, len(str(count)))
        for k in range(count):
            ids.append(f"{prefix}{k + 1:0{width}d}")
            sectors.append(prefix)
    return ids, sectors


def generate_market(config: SynthConfig) -> SyntheticMarket:
    """Generate the full transaction list and price path for one seed."""
    if config.seed is None:
        raise ConfigError("synthetic generation requires a seed")
    rng = np.random.default_rng(config.seed)
    n_hh, n_nfi, n_fi = config.n_households, config.n_nfi, config.n_fi
    n_total = config.n_investors
    ids, sectors = _owner_ids(config)

    # Static draws: counts depend only on the investor population, never on
    # n_days, so longer runs replay shorter runs' day draws verbatim.
    base = rng.uniform(_LOAD_LOW, _LOAD_HIGH, size=n_total)
    contrarian = np.zeros(n_total, dtype=bool)
    contrarian[:n_hh] = rng.random(n_hh) < config.contrarian_fraction

    ramp_mask = np.zeros(n_total)
    ramp_mask[:n_hh] = 1.0
    fi_start = n_hh + n_nfi

    dates = weekday_dates(config.n_days)
    prices = np.empty(config.n_days)
    records: list[TransactionRecord] = []
    price = _START_PRICE
    buy, sell = Direction.BUY, Direction.SELL

    for t in range(config.n_days):
        z = float(rng.standard_normal())
        drift = _DRIFT if t <= config.tipping_day else -_DRIFT
        price *= math.exp(drift + _PRICE_SIGMA * float(np.clip(z, -_CLIP, _CLIP)))
        prices[t] = price
        f = 1.0 if z >= 0 else -1.0

        trading = rng.random(n_total) < config.trade_probability
        eta = rng.standard_normal(n_total)

        load = base + config.herding_ramp * min(t, config.tipping_day) * ramp_mask
        if n_fi:
            cycle = 1.0 + _FI_CYCLE_AMP * math.sin(
                2.0 * math.pi * (t + _FI_CYCLE_PHASE) / _FI_CYCLE_PERIOD
            )
            load[fi_start:] = base[fi_start:] * cycle
        if t >= config.contrarian_onset_day:
            load = np.where(contrarian, -load, load)

        net = np.rint(
            config.volume_scale * (load * f + config.noise_scale * eta)
        ).astype(np.int64)
        pending = np.flatnonzero(trading & (net == 0))
        for _ in range(_RESAMPLE_CAP):
            if pending.size == 0:
                break
            eta_again = rng.standard_normal(pending.size)
            redrawn = np.rint(
                config.volume_scale
                * (load[pending] * f + config.noise_scale * eta_again)
            ).astype(np.int64)
            net[pending] = redrawn
            pending = pending[redrawn == 0]
        if pending.size:
            net[pending] = np.where(load[pending] * f >= 0, 1, -1)

        day = dates[t]
        traders = np.flatnonzero(trading)
        day_net = net[traders]
        for i, signed in zip(traders.tolist(), day_net.tolist()):
            records.append(
                TransactionRecord(
                    owner_id=ids[i],
                    trade_date=day,
                    direction=buy if signed > 0 else sell,
                    volume=abs(signed),
                    price=price,
                    sector_code=sectors[i],
                )
            )

    return SyntheticMarket(
        config=config, records=records, price=PricePath(dates=dates, values=prices)
    )


def write_transactions_csv(records: Sequence[TransactionRecord], path: str | Path) -> None:
    with atomic_writer(path) as fh:
        fh.write(TRANSACTIONS_HEADER + "\n")
        for r in records:
            price = "" if r.price is None else format(r.price, ".12g")
            fh.write(
                f"{r.owner_id},{r.trade_date.isoformat()},{r.direction.value},"
                f"{r.volume},{price},{r.sector_code}\n"
            )


def write_price(path_values: PricePath, path: str | Path) -> None:
    write_price_csv(path_values.dates, path_values.values.tolist(), path)


def load_preset(name_or_path: str) -> dict:
    """Load a synth preset by packaged name (e.g. ``dotcom``) or file path."""
    candidate = Path(name_or_path)
    if candidate.suffix == ".json" or candidate.exists():
        try:
            with open(candidate, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read preset {name_or_path}: {exc}") from exc
    else:
        ref = resources.files("investornet").joinpath("presets", f"{name_or_path}.json")
        try:
            raw = json.loads(ref.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"unknown preset {name_or_path!r}") from None
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read preset {name_or_path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"preset {name_or_path} must be a JSON object")
    return raw
