"""Series identity and observation containers.

A series is identified by (metric, item, region, optional secondary region,
frequency). Observations are (date, value) pairs ordered by date. Period
arithmetic converts calendar dates to integer period ordinals per frequency,
which is what resampling and alignment operate on.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from datetime import date, timedelta
from enum import Enum

from .errors import VarcastError

_CANONICAL_RE = re.compile(r"^\S(.*\S)?$")

# Monday anchoring the weekly grid.
_WEEK_EPOCH = date(1970, 1, 5)


class Frequency(Enum):
    """Observation frequency, ordered by period length (annual is coarsest)."""

    ANNUAL = "annual"
    MONTHLY = "monthly"
    WEEKLY = "weekly"
    DAILY = "daily"

    @property
    def approx_days(self) -> int:
        return {"annual": 365, "monthly": 30, "weekly": 7, "daily": 1}[self.value]

    def is_coarser_or_equal(self, other: "Frequency") -> bool:
        return self.approx_days >= other.approx_days

    @classmethod
    def parse(cls, token: str) -> "Frequency":
        try:
            return cls(token.strip().lower())
        except ValueError:
            raise VarcastError(f"unknown frequency token: {token!r}") from None


def coarsest(frequencies) -> Frequency:
    return max(frequencies, key=lambda f: f.approx_days)


def to_period(d: date, freq: Frequency) -> int:
    """Map a date to its integer period ordinal on the given frequency grid."""
    if freq is Frequency.ANNUAL:
        return d.year
    if freq is Frequency.MONTHLY:
        return d.year * 12 + (d.month - 1)
    if freq is Frequency.WEEKLY:
        return (d - _WEEK_EPOCH).days // 7
    return d.toordinal()


def period_start(period: int, freq: Frequency) -> date:
    """Canonical (first) date of a period ordinal."""
    if freq is Frequency.ANNUAL:
        return date(period, 1, 1)
    if freq is Frequency.MONTHLY:
        return date(period // 12, period % 12 + 1, 1)
    if freq is Frequency.WEEKLY:
        return _WEEK_EPOCH + timedelta(days=7 * period)
    return date.fromordinal(period)


def _check_canonical(value: str, name: str) -> None:
    if not isinstance(value, str) or not value or value != value.strip():
        raise VarcastError(f"{name} must be a non-empty trimmed string, got {value!r}")
    if value != value.lower():
        raise VarcastError(f"{name} must be lowercase, got {value!r}")


@dataclass(frozen=True, order=True)
class SeriesKey:
    """Unique identity of a time series in the catalog."""

    metric: str
    item: str
    region: str
    secondary_region: str | None = None
    frequency: Frequency = Frequency.ANNUAL

    def __post_init__(self):
        _check_canonical(self.metric, "metric")
        _check_canonical(self.item, "item")
        _check_canonical(self.region, "region")
        if self.secondary_region is not None:
            _check_canonical(self.secondary_region, "secondary_region")
        if not isinstance(self.frequency, Frequency):
            raise VarcastError(f"frequency must be a Frequency, got {self.frequency!r}")

    def label(self) -> str:
        """Human-readable label, e.g. ``price of wheat (uae)``."""
        region = self.region
        if self.secondary_region:
            region = f"{self.region}->{self.secondary_region}"
        return f"{self.metric} of {self.item} ({region})"

    def to_dict(self) -> dict:
        out = {
            "metric": self.metric,
            "item": self.item,
            "region": self.region,
            "frequency": self.frequency.value,
        }
        if self.secondary_region is not None:
            out["secondary_region"] = self.secondary_region
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "SeriesKey":
        return cls(
            metric=d["metric"],
            item=d["item"],
            region=d["region"],
            secondary_region=d.get("secondary_region"),
            frequency=Frequency.parse(d["frequency"]),
        )


@dataclass(frozen=True)
class TimeSeries:
    """An ordered sequence of (date, value) observations for one key.

    ``validate=False`` skips the invariant checks so that dirty data can be
    carried into :func:`varcast.cleaning.clean_series`.
    """

    key: SeriesKey
    points: tuple = ()
    unit: str = ""
    source: str = ""
    validate: bool = field(default=True, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple((d, float(v)) for d, v in self.points))
        if not self.validate:
            return
        prev = None
        for d, v in self.points:
            if prev is not None and d <= prev:
                raise VarcastError(f"timestamps must be strictly increasing at {d}")
            if not math.isfinite(v):
                raise VarcastError(f"non-finite value at {d}")
            prev = d

    def __len__(self) -> int:
        return len(self.points)

    @property
    def timestamps(self) -> list[date]:
        return [d for d, _ in self.points]

    @property
    def values(self) -> list[float]:
        return [v for _, v in self.points]

    @property
    def last(self) -> tuple:
        if not self.points:
            raise VarcastError("series has no points")
        return self.points[-1]

    def replace_points(self, points) -> "TimeSeries":
        return TimeSeries(key=self.key, points=tuple(points), unit=self.unit, source=self.source)
