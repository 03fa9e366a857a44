"""Hourly carbon-intensity traces and per-client carbon-cost matrices.

CSV layout (one row per region-hour, any row order)::

    timestamp,region,ci_kg_per_kwh
    2022-01-01T00:00:00Z,FR,0.052113

Values are kgCO2e/kWh. One slot is one hour.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import GapError, HorizonTooLong, SchemaError, UnknownRegion

HEADER = ("timestamp", "region", "ci_kg_per_kwh")
TIMESTAMP_FORMAT = "%Y-%m-%dT%H:00:00Z"
SAMPLE_FILE = "sample_ci_336h_7regions.csv"
SAMPLE_START = datetime(2022, 1, 1, tzinfo=timezone.utc)
ONE_HOUR = timedelta(hours=1)


def parse_timestamp(text: str) -> datetime:
    try:
        ts = datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ")
    except ValueError as exc:
        raise SchemaError(f"bad timestamp {text!r}; expected YYYY-MM-DDTHH:00:00Z") from exc
    if ts.minute or ts.second:
        raise SchemaError(f"timestamp {text!r} is not hour-aligned")
    return ts.replace(tzinfo=timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime(TIMESTAMP_FORMAT)


def _as_utc(ts: datetime | str) -> datetime:
    if isinstance(ts, str):
        return parse_timestamp(ts)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    ts = ts.astimezone(timezone.utc)
    if ts.minute or ts.second or ts.microsecond:
        raise ValueError(f"start {ts.isoformat()} is not hour-aligned")
    return ts


@dataclass(frozen=True)
class CiTraceSet:
    """Region x hour carbon-intensity matrix covering ``[start, start + hours)``."""

    regions: tuple[str, ...]
    start: datetime
    values: np.ndarray
    filled_count: int = 0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != len(self.regions):
            raise SchemaError("values must be a (regions x hours) matrix")
        if len(set(self.regions)) != len(self.regions):
            raise SchemaError("region identifiers must be unique")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise SchemaError("carbon intensities must be finite and non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "regions", tuple(self.regions))
        object.__setattr__(self, "values", values)

    @property
    def hours(self) -> int:
        return self.values.shape[1]

    def series(self, region: str) -> np.ndarray:
        try:
            return self.values[self.regions.index(region)]
        except ValueError:
            raise UnknownRegion(f"region {region!r} not in trace set") from None

    def window(self, offset: int, hours: int) -> "CiTraceSet":
        if offset < 0 or offset + hours > self.hours:
            raise HorizonTooLong(f"window [{offset}, {offset + hours}) exceeds {self.hours} hours")
        return CiTraceSet(self.regions, self.start + offset * ONE_HOUR, self.values[:, offset:offset + hours])


@dataclass(frozen=True)
class ClientProfile:
    client_id: int
    region: str
    power_kw: float

    def __post_init__(self):
        if not self.power_kw > 0:
            raise ValueError(f"client {self.client_id}: power_kw must be > 0")

    @property
    def energy_per_slot_kwh(self) -> float:
        return self.power_kw * 1.0


@dataclass(frozen=True)
class CarbonCostMatrix:
    """Carbon cost in kgCO2e of selecting client ``c`` during slot ``t``."""

    costs: np.ndarray
    clients: tuple[ClientProfile, ...] = field(default=())

    def __post_init__(self):
        costs = np.array(self.costs, dtype=np.float64)
        if costs.ndim != 2:
            raise ValueError("costs must be a (clients x slots) matrix")
        if not np.all(np.isfinite(costs)) or np.any(costs < 0):
            raise ValueError("costs must be finite and non-negative")
        costs.setflags(write=False)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "clients", tuple(self.clients))

    @property
    def num_clients(self) -> int:
        return self.costs.shape[0]

    @property
    def horizon(self) -> int:
        return self.costs.shape[1]

    @property
    def g_max(self) -> float:
        return float(self.costs.max()) if self.costs.size else 0.0

    def window(self, offset: int, hours: int) -> "CarbonCostMatrix":
        if offset < 0 or offset + hours > self.horizon:
            raise HorizonTooLong(f"window [{offset}, {offset + hours}) exceeds horizon {self.horizon}")
        return CarbonCostMatrix(self.costs[:, offset:offset + hours], self.clients)


def load_ci_traces(
    path: str | Path,
    regions: Sequence[str] | None = None,
    start: datetime | str | None = None,
    hours: int | None = None,
    gap_policy: str = "reject",
) -> CiTraceSet:
    """Read a CI CSV and return the requested regions over ``[start, start + hours)``.

    ``regions`` defaults to every region in file order of first appearance;
    ``start``/``hours`` default to the span of the file. Under
    ``gap_policy="forward_fill"`` missing hours copy the most recent earlier
    value for that region (which may lie before ``start``); the number of
    filled cells is returned as ``filled_count``.
    """
    if gap_policy not in ("reject", "forward_fill"):
        raise ValueError(f"unknown gap_policy {gap_policy!r}")
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"CI file not found: {path}")

    data: dict[str, dict[datetime, float]] = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != HEADER:
            raise SchemaError(f"{path}: header must be {','.join(HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise SchemaError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            ts = parse_timestamp(row[0].strip())
            region = row[1].strip()
            if not region:
                raise SchemaError(f"{path}:{lineno}: empty region")
            try:
                value = float(row[2])
            except ValueError:
                raise SchemaError(f"{path}:{lineno}: bad value {row[2]!r}") from None
            if not math.isfinite(value) or value < 0:
                raise SchemaError(f"{path}:{lineno}: value must be finite and >= 0")
            series = data.setdefault(region, {})
            if ts in series:
                raise SchemaError(f"{path}:{lineno}: duplicate ({row[0]}, {region})")
            series[ts] = value

    if regions is None:
        regions = list(data)
    for region in regions:
        if region not in data:
            raise UnknownRegion(f"region {region!r} not present in {path}")
    if not regions:
        raise SchemaError(f"{path}: no data rows")

    if start is None:
        start = min(min(data[r]) for r in regions)
    start = _as_utc(start)
    if hours is None:
        last = max(max(data[r]) for r in regions)
        hours = int((last - start) / ONE_HOUR) + 1
    if hours < 1:
        raise ValueError("hours must be >= 1")

    values = np.empty((len(regions), hours))
    filled = 0
    for i, region in enumerate(regions):
        series = data[region]
        earlier = sorted(ts for ts in series if ts < start)
        prev = series[earlier[-1]] if earlier else None
        for h in range(hours):
            ts = start + h * ONE_HOUR
            if ts in series:
                prev = series[ts]
            elif gap_policy == "reject":
                raise GapError(f"{region}: missing hour {format_timestamp(ts)}")
            elif prev is None:
                raise GapError(f"{region}: missing hour {format_timestamp(ts)} with no earlier value to copy")
            else:
                filled += 1
            values[i, h] = prev
    return CiTraceSet(tuple(regions), start, values, filled_count=filled)


def write_ci_traces(traces: CiTraceSet, path: str | Path) -> None:
    """Write in region-major order with 6 fractional digits."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        for i, region in enumerate(traces.regions):
            for h in range(traces.hours):
                ts = format_timestamp(traces.start + h * ONE_HOUR)
                writer.writerow((ts, region, f"{traces.values[i, h]:.6f}"))


def carbon_cost_matrix(
    traces: CiTraceSet, profiles: Sequence[ClientProfile], horizon: int | None = None
) -> CarbonCostMatrix:
    horizon = traces.hours if horizon is None else horizon
    if horizon > traces.hours:
        raise HorizonTooLong(f"horizon {horizon} exceeds trace length {traces.hours}")
    rows = [p.energy_per_slot_kwh * traces.series(p.region)[:horizon] for p in profiles]
    costs = np.vstack(rows) if rows else np.zeros((0, horizon))
    return CarbonCostMatrix(costs, tuple(profiles))


def profiles_for_regions(regions: Iterable[str], power_kw: float | Sequence[float] = 1.0) -> list[ClientProfile]:
    regions = list(regions)
    if np.isscalar(power_kw):
        power_kw = [float(power_kw)] * len(regions)
    if len(power_kw) != len(regions):
        raise ValueError("power_kw must be scalar or one value per region")
    return [ClientProfile(c, r, float(p)) for c, (r, p) in enumerate(zip(regions, power_kw))]


# Regional shape parameters for the synthetic fixture:
# (mean, daily amplitude, multi-day amplitude, noise sd), all kg/kWh.
# Solar- and wind-heavy grids are clean on average but dip deeply; the
# coal-heavy grid is dirty and nearly flat.
SAMPLE_REGIONS = {
    "ES": (0.130, 0.070, 0.030, 0.008),
    "DK": (0.140, 0.020, 0.100, 0.010),
    "PT": (0.150, 0.050, 0.070, 0.008),
    "GB": (0.210, 0.050, 0.060, 0.008),
    "IE": (0.300, 0.060, 0.110, 0.010),
    "DE": (0.380, 0.090, 0.110, 0.012),
    "PL": (0.700, 0.030, 0.020, 0.010),
}


def make_sample_traces(hours: int = 336, seed: int = 2022) -> CiTraceSet:
    """Deterministic sinusoid-plus-noise traces, one row per region in ``SAMPLE_REGIONS``."""
    rng = np.random.default_rng(seed)
    t = np.arange(hours)
    rows = []
    for mean, daily, slow, noise in SAMPLE_REGIONS.values():
        phase, slow_phase = rng.uniform(0, 2 * np.pi, size=2)
        row = (
            mean
            + daily * np.sin(2 * np.pi * t / 24 + phase)
            + slow * np.sin(2 * np.pi * t / 84 + slow_phase)
            + noise * rng.standard_normal(hours)
        )
        rows.append(np.round(np.maximum(row, 0.005), 6))
    return CiTraceSet(tuple(SAMPLE_REGIONS), SAMPLE_START, np.vstack(rows))


def sample_ci_path() -> Path:
    return Path(str(resources.files("carbonfl") / "data" / SAMPLE_FILE))
