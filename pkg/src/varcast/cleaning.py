"""Label normalization and series cleaning.

Normalization is deterministic: trim, lowercase, collapse runs of internal
whitespace, then an exact lookup in a per-kind synonym table. Cleaning removes
duplicate timestamps (first wins), handles missing values, clamps or drops
outliers by z-score against the whole series, and optionally log-transforms.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from importlib import resources

from .errors import DegenerateSeriesError, InvalidLabelError, TransformError, VarcastError
from .series import Frequency, TimeSeries, period_start, to_period

_WS_RE = re.compile(r"\s+")

LABEL_KINDS = ("metric", "item", "region")


class SynonymTable:
    """Exact-match synonym lookup scoped by label kind.

    File format: one ``kind,raw,canonical`` row per line. Raw labels are
    normalized (trim/lower/collapse) before being stored, so lookups are
    case- and whitespace-insensitive.
    """

    def __init__(self, entries=()):
        self._map: dict[tuple[str, str], str] = {}
        for kind, raw, canonical in entries:
            self.add(kind, raw, canonical)

    def add(self, kind: str, raw: str, canonical: str) -> None:
        if kind not in LABEL_KINDS:
            raise VarcastError(f"unknown label kind {kind!r}")
        self._map[(kind, _basic_normalize(raw))] = _basic_normalize(canonical)

    def lookup(self, kind: str, normalized: str) -> str | None:
        return self._map.get((kind, normalized))

    @classmethod
    def from_file(cls, path) -> "SynonymTable":
        table = cls()
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                if len(row) != 3:
                    raise VarcastError(f"synonym rows must be kind,raw,canonical: {row!r}")
                table.add(*[cell.strip() for cell in row])
        return table


def _basic_normalize(raw: str) -> str:
    return _WS_RE.sub(" ", raw.strip()).lower()


_default_table: SynonymTable | None = None


def default_synonyms() -> SynonymTable:
    """The synonym table shipped with the package (``data/synonyms.csv``)."""
    global _default_table
    if _default_table is None:
        path = resources.files("varcast").joinpath("data/synonyms.csv")
        with resources.as_file(path) as p:
            _default_table = SynonymTable.from_file(p)
    return _default_table


def normalize_label(raw: str, kind: str, table: SynonymTable | None = None) -> str:
    """Canonicalize a metric/item/region label.

    Unmapped labels pass through in normalized form; empty or whitespace-only
    input is an error.
    """
    if kind not in LABEL_KINDS:
        raise VarcastError(f"unknown label kind {kind!r}")
    if raw is None or not str(raw).strip():
        raise InvalidLabelError(f"empty {kind} label")
    normalized = _basic_normalize(str(raw))
    if table is None:
        table = default_synonyms()
    return table.lookup(kind, normalized) or normalized


@dataclass(frozen=True)
class CleaningPolicy:
    missing_strategy: str = "drop"  # drop | linear_interpolate
    outlier_z_threshold: float = 4.0
    outlier_action: str = "winsorize"  # winsorize | drop
    transform: str = "none"  # none | log

    def __post_init__(self):
        if self.missing_strategy not in ("drop", "linear_interpolate"):
            raise VarcastError(f"unknown missing_strategy {self.missing_strategy!r}")
        if self.outlier_action not in ("winsorize", "drop"):
            raise VarcastError(f"unknown outlier_action {self.outlier_action!r}")
        if self.transform not in ("none", "log"):
            raise VarcastError(f"unknown transform {self.transform!r}")
        if not (self.outlier_z_threshold > 0):
            raise VarcastError("outlier_z_threshold must be > 0")


@dataclass
class CleaningReport:
    duplicates_removed: int = 0
    missing_dropped: int = 0
    missing_interpolated: int = 0
    outliers_winsorized: int = 0
    outliers_dropped: int = 0
    log_transformed: bool = False

    def as_dict(self) -> dict:
        return dict(self.__dict__)

    @property
    def total_modifications(self) -> int:
        return (
            self.duplicates_removed
            + self.missing_dropped
            + self.missing_interpolated
            + self.outliers_winsorized
            + self.outliers_dropped
        )


def _mean_std(values: list[float]) -> tuple[float, float]:
    # Sample standard deviation (n-1 denominator); 0 for n < 2.
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def clean_series(series: TimeSeries, policy: CleaningPolicy) -> tuple[TimeSeries, CleaningReport]:
    """Apply a cleaning policy; returns the cleaned series and an action count report.

    Order of operations: duplicates, missing values, outliers, transform.
    Outlier bounds use the mean and sample std of the series as it stands
    after missing-value handling (a single pass, not iterated).
    """
    if len(series.points) < 1:
        raise DegenerateSeriesError("cannot clean an empty series")
    report = CleaningReport()
    freq = series.key.frequency

    # Duplicate timestamps: first occurrence wins.
    seen: set = set()
    points: list[tuple] = []
    for d, v in series.points:
        if d in seen:
            report.duplicates_removed += 1
            continue
        seen.add(d)
        points.append((d, v))
    points.sort(key=lambda p: p[0])

    # Missing values: non-finite observations always go; gaps in the period
    # grid are filled only under linear_interpolate.
    finite = [(d, v) for d, v in points if math.isfinite(v)]
    report.missing_dropped += len(points) - len(finite)
    points = finite
    if not points:
        raise DegenerateSeriesError("series empty after dropping missing values")

    if policy.missing_strategy == "linear_interpolate":
        points = _interpolate_gaps(points, freq, report)

    # Outliers, one pass with bounds from the current series statistics.
    values = [v for _, v in points]
    mean, std = _mean_std(values)
    if std > 0:
        lo = mean - policy.outlier_z_threshold * std
        hi = mean + policy.outlier_z_threshold * std
        cleaned = []
        for d, v in points:
            if v > hi or v < lo:
                if policy.outlier_action == "winsorize":
                    cleaned.append((d, hi if v > hi else lo))
                    report.outliers_winsorized += 1
                else:
                    report.outliers_dropped += 1
            else:
                cleaned.append((d, v))
        points = cleaned
    if not points:
        raise DegenerateSeriesError("series empty after outlier removal")

    if policy.transform == "log":
        if any(v <= 0 for _, v in points):
            raise TransformError("log transform requires strictly positive values")
        points = [(d, math.log(v)) for d, v in points]
        report.log_transformed = True

    return series.replace_points(points), report


def _interpolate_gaps(points, freq: Frequency, report: CleaningReport):
    """Fill interior period-grid gaps by linear interpolation between neighbors."""
    out = [points[0]]
    for (d0, v0), (d1, v1) in zip(points, points[1:]):
        p0, p1 = to_period(d0, freq), to_period(d1, freq)
        for p in range(p0 + 1, p1):
            frac = (p - p0) / (p1 - p0)
            out.append((period_start(p, freq), v0 + frac * (v1 - v0)))
            report.missing_interpolated += 1
        out.append((d1, v1))
    return out
