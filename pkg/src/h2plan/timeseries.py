"""Hourly scenario data: CSV ingestion, slicing, and planning-window assembly."""

from __future__ import annotations

import csv
import gzip
import io
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .errors import (
    InsufficientHistory,
    MissingColumn,
    NegativeIntensity,
    NonHourlyStep,
    OutOfBounds,
    OutOfRangeCapacityFactor,
    ScenarioError,
)

COLUMNS = ("timestamp", "cf_solar", "cf_wind", "price_eur_mwh", "co2_kg_mwh")
FORECAST_HORIZON = 34
HOURS_PER_DAY = 24
_SERIES = ("cf_solar", "cf_wind", "price", "co2_intensity")


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


def _validate(cf_solar, cf_wind, price, co2, row_offset=0):
    n = len(cf_solar)
    if not (len(cf_wind) == len(price) == len(co2) == n):
        raise ScenarioError("series lengths differ")
    for name, arr in (("cf_solar", cf_solar), ("cf_wind", cf_wind), ("price", price), ("co2_intensity", co2)):
        bad = ~np.isfinite(arr)
        if bad.any():
            raise ScenarioError(f"missing or non-finite {name}", row=row_offset + int(np.argmax(bad)))
    for name, arr in (("cf_solar", cf_solar), ("cf_wind", cf_wind)):
        bad = (arr < 0) | (arr > 1)
        if bad.any():
            i = int(np.argmax(bad))
            raise OutOfRangeCapacityFactor(f"{name} = {arr[i]} outside [0, 1]", row=row_offset + i)
    bad = co2 < 0
    if bad.any():
        i = int(np.argmax(bad))
        raise NegativeIntensity(f"co2 intensity = {co2[i]} is negative", row=row_offset + i)


@dataclass(frozen=True, eq=False)
class ScenarioSlice:
    """Read-only run of hours. ``offset`` is the parent hour index, or ``None``
    for composite windows that do not map onto one contiguous parent range."""

    offset: int | None
    cf_solar: np.ndarray
    cf_wind: np.ndarray
    price: np.ndarray
    co2_intensity: np.ndarray
    source_hours: np.ndarray | None = None  # parent hour of every entry, when known

    @property
    def n_hours(self) -> int:
        return len(self.price)

    def __len__(self) -> int:
        return self.n_hours

    def equals(self, other: "ScenarioSlice") -> bool:
        return all(np.array_equal(getattr(self, f), getattr(other, f)) for f in _SERIES)


@dataclass(frozen=True, eq=False)
class ScenarioData:
    """Aligned hourly series; immutable after construction."""

    start_time: datetime
    cf_solar: np.ndarray
    cf_wind: np.ndarray
    price: np.ndarray
    co2_intensity: np.ndarray

    def __post_init__(self):
        arrays = [_readonly(getattr(self, f)) for f in _SERIES]
        _validate(*arrays)
        if len(arrays[0]) < HOURS_PER_DAY:
            raise ScenarioError(f"scenario needs at least {HOURS_PER_DAY} hours, got {len(arrays[0])}")
        for f, a in zip(_SERIES, arrays):
            object.__setattr__(self, f, a)
        st = self.start_time
        if st.tzinfo is None:
            st = st.replace(tzinfo=timezone.utc)
        if st.minute or st.second or st.microsecond:
            raise ScenarioError("start_time must be hour-aligned")
        object.__setattr__(self, "start_time", st.astimezone(timezone.utc))

    @property
    def n_hours(self) -> int:
        return len(self.price)

    @property
    def n_days(self) -> int:
        return self.n_hours // HOURS_PER_DAY

    def __len__(self) -> int:
        return self.n_hours

    def timestamp(self, hour: int) -> datetime:
        return self.start_time + timedelta(hours=int(hour))

    def as_slice(self) -> ScenarioSlice:
        return window(self, 0, self.n_hours)


def _open_text(path: Path):
    if path.suffix == ".gz":
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8", newline="")
    return open(path, encoding="utf-8", newline="")


def _parse_time(text: str, row: int) -> datetime:
    text = text.strip()
    try:
        ts = datetime.fromisoformat(text[:-1] + "+00:00" if text.endswith("Z") else text)
    except ValueError:
        raise ScenarioError(f"unparseable timestamp {text!r}", row=row) from None
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def load_scenario(path) -> ScenarioData:
    """Read a scenario CSV (optionally ``.gz``) with header
    ``timestamp,cf_solar,cf_wind,price_eur_mwh,co2_kg_mwh``.

    Timestamps are ISO-8601 (UTC when no offset is given) and must advance by
    exactly one hour per row. Error messages name the 0-based data row.
    """
    path = Path(path)
    with _open_text(path) as fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        for col in COLUMNS:
            if col not in header:
                raise MissingColumn(f"missing column {col!r} in {path.name}")
        reader.fieldnames = header
        times, rows = [], []
        for i, rec in enumerate(reader):
            times.append(_parse_time(rec["timestamp"], i))
            try:
                rows.append([float(rec[c]) if rec[c] not in (None, "") else np.nan for c in COLUMNS[1:]])
            except ValueError as exc:
                raise ScenarioError(f"non-numeric value ({exc})", row=i) from None
    if not rows:
        raise ScenarioError(f"{path.name} has no data rows")
    one_hour = timedelta(hours=1)
    for i in range(1, len(times)):
        if times[i] - times[i - 1] != one_hour:
            raise NonHourlyStep(f"step from {times[i - 1].isoformat()} to {times[i].isoformat()} is not one hour", row=i)
    data = np.array(rows, dtype=float)
    _validate(data[:, 0], data[:, 1], data[:, 2], data[:, 3])
    return ScenarioData(times[0], data[:, 0], data[:, 1], data[:, 2], data[:, 3])


def write_scenario(scenario: ScenarioData, path) -> None:
    path = Path(path)
    opener = (lambda: io.TextIOWrapper(gzip.open(path, "wb"), encoding="utf-8", newline="")) \
        if path.suffix == ".gz" else (lambda: open(path, "w", encoding="utf-8", newline=""))
    with opener() as fh:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for t in range(scenario.n_hours):
            w.writerow([scenario.timestamp(t).strftime("%Y-%m-%dT%H:%M:%SZ"),
                        repr(float(scenario.cf_solar[t])), repr(float(scenario.cf_wind[t])),
                        repr(float(scenario.price[t])), repr(float(scenario.co2_intensity[t]))])


def window(scenario: ScenarioData, start: int, length: int) -> ScenarioSlice:
    """Hours ``[start, start + length)`` as read-only views."""
    start, length = int(start), int(length)
    if start < 0 or length < 0 or start + length > scenario.n_hours:
        raise OutOfBounds(f"window [{start}, {start + length}) outside scenario of {scenario.n_hours} hours")
    sl = slice(start, start + length)
    return ScenarioSlice(start, scenario.cf_solar[sl], scenario.cf_wind[sl], scenario.price[sl],
                         scenario.co2_intensity[sl], np.arange(start, start + length))


def _compose(scenario: ScenarioData, hours: np.ndarray) -> ScenarioSlice:
    return ScenarioSlice(None, _readonly(scenario.cf_solar[hours]), _readonly(scenario.cf_wind[hours]),
                         _readonly(scenario.price[hours]), _readonly(scenario.co2_intensity[hours]), hours)


def history_hours(next_day_start: int, needed: int) -> np.ndarray:
    """Parent hour indices of the most recent whole days before ``next_day_start``,
    chronological and cut at the tail to ``needed`` hours. May start below zero."""
    end = (int(next_day_start) // HOURS_PER_DAY) * HOURS_PER_DAY
    n_days = -(-int(needed) // HOURS_PER_DAY)
    start = end - n_days * HOURS_PER_DAY
    return np.arange(start, start + needed)


def build_planning_window(scenario: ScenarioData, next_day_start: int, remaining_hours: int,
                          forecast_horizon: int = FORECAST_HORIZON, allow_partial_history: bool = False) -> ScenarioSlice:
    """Forecast block followed by historical days standing in for the unforecastable rest.

    The first ``min(forecast_horizon, remaining_hours)`` hours are the (perfect)
    forecast from ``next_day_start``; the remaining hours come from the most
    recent whole days before ``next_day_start`` in calendar order, truncated to
    fit ``remaining_hours``.

    Raises :class:`InsufficientHistory` when those days precede the dataset. With
    ``allow_partial_history`` the history block is instead cut to the whole days
    that exist and the returned window is shorter than ``remaining_hours``.
    """
    if remaining_hours < HOURS_PER_DAY:
        raise ValueError(f"remaining_hours must be at least {HOURS_PER_DAY}")
    n_forecast = min(int(forecast_horizon), int(remaining_hours))
    forecast = window(scenario, next_day_start, n_forecast)
    needed = int(remaining_hours) - n_forecast
    if needed == 0:
        return forecast
    hist = history_hours(next_day_start, needed)
    if hist[0] < 0:
        available_days = (int(next_day_start) // HOURS_PER_DAY)
        available = min(available_days * HOURS_PER_DAY, needed)
        if not allow_partial_history:
            raise InsufficientHistory(
                f"window needs {needed} historical hours before hour {next_day_start}, "
                f"only {available} available", available_hours=available)
        end = available_days * HOURS_PER_DAY
        hist = np.arange(end - available_days * HOURS_PER_DAY, end)[:available]
    hours = np.concatenate([np.asarray(forecast.source_hours), hist]).astype(np.int64)
    return _compose(scenario, hours)
