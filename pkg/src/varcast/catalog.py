"""Time-series catalog: CSV ingestion, querying, alignment, persistence.

The catalog maps a SeriesKey to exactly one TimeSeries. Writers (ingest,
replace) take an internal lock and swap in a new snapshot dict, so readers
always see a consistent catalog without locking (single-writer/multi-reader).

Persistence is a flat, inspectable layout: ``index.json`` plus one
``<slug>.csv`` per series in the data directory.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import threading
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from .cleaning import SynonymTable, normalize_label
from .errors import AlignmentError, FormatError, VarcastError
from .series import Frequency, SeriesKey, TimeSeries, period_start, to_period

CSV_HEADER = [
    "metric",
    "item",
    "region",
    "secondary_region",
    "frequency",
    "timestamp",
    "value",
    "unit",
    "source",
]

# Metrics that downsample by sum instead of mean (flow-like quantities).
# Opt in by passing ``sum_metrics=FLOW_METRICS`` (or your own set) to align().
FLOW_METRICS = frozenset({"production", "trade", "consumption"})


@dataclass
class IngestionSummary:
    accepted: int = 0
    rejected: int = 0
    reasons: Counter = field(default_factory=Counter)
    rejected_rows: list = field(default_factory=list)  # (row number, reason)

    def reject(self, row_num: int, reason: str) -> None:
        self.rejected += 1
        self.reasons[reason] += 1
        self.rejected_rows.append((row_num, reason))

    def as_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "rejected": self.rejected,
            "reasons": dict(self.reasons),
            "rejected_rows": [list(r) for r in self.rejected_rows],
        }


class Catalog:
    """In-memory series catalog keyed by SeriesKey."""

    def __init__(self, synonyms: SynonymTable | None = None):
        self._series: dict[SeriesKey, TimeSeries] = {}
        self._write_lock = threading.Lock()
        self.synonyms = synonyms

    def __len__(self) -> int:
        return len(self._series)

    def __contains__(self, key: SeriesKey) -> bool:
        return key in self._series

    def get(self, key: SeriesKey) -> TimeSeries:
        try:
            return self._series[key]
        except KeyError:
            raise VarcastError(f"no series for key {key}") from None

    def keys(self) -> list[SeriesKey]:
        return sorted(self._series)

    def put(self, series: TimeSeries) -> None:
        with self._write_lock:
            snapshot = dict(self._series)
            snapshot[series.key] = series
            self._series = snapshot

    # ------------------------------------------------------------------
    # Ingestion
    # ------------------------------------------------------------------

    def ingest_csv(self, source, dialect: dict | None = None) -> IngestionSummary:
        """Ingest rows from a CSV byte or text stream.

        A missing required column is fatal and leaves the catalog unchanged.
        Malformed rows and duplicate (key, timestamp) rows are rejected and
        counted; everything else is appended to its series, creating the
        series when absent.
        """
        if isinstance(source, (bytes, bytearray)):
            source = io.BytesIO(bytes(source))
        if isinstance(source, str):
            text = io.StringIO(source)
        elif hasattr(source, "read"):
            raw = source.read()
            text = io.StringIO(raw.decode("utf-8") if isinstance(raw, bytes) else raw)
        else:
            raise FormatError(f"unsupported source type {type(source).__name__}")

        reader = csv.DictReader(text, **(dialect or {}))
        if reader.fieldnames is None:
            raise FormatError("empty document: no header row")
        missing = [c for c in CSV_HEADER if c not in reader.fieldnames]
        if missing:
            raise FormatError(f"missing required columns: {', '.join(missing)}")

        summary = IngestionSummary()
        # Stage all updates, then commit, so a fatal error cannot half-apply.
        # The write lock spans staging because duplicate detection reads the
        # current snapshot (single-writer contract).
        with self._write_lock:
            staged: dict[SeriesKey, dict] = {}
            existing_stamps: dict[SeriesKey, set] = {}

            for row_num, row in enumerate(reader, start=2):
                try:
                    key, stamp, value, unit, src = self._parse_row(row)
                except VarcastError as exc:
                    summary.reject(row_num, str(exc))
                    continue

                if key not in staged:
                    current = self._series.get(key)
                    staged[key] = {
                        "points": list(current.points) if current else [],
                        "unit": unit if current is None else current.unit,
                        "source": src if current is None else current.source,
                    }
                    existing_stamps[key] = {d for d, _ in staged[key]["points"]}
                if stamp in existing_stamps[key]:
                    summary.reject(row_num, "duplicate-timestamp")
                    continue
                staged[key]["points"].append((stamp, value))
                existing_stamps[key].add(stamp)
                summary.accepted += 1

            snapshot = dict(self._series)
            for key, entry in staged.items():
                points = sorted(entry["points"], key=lambda p: p[0])
                snapshot[key] = TimeSeries(
                    key=key, points=points, unit=entry["unit"], source=entry["source"]
                )
            self._series = snapshot
        return summary

    def _parse_row(self, row: dict) -> tuple:
        for col in ("metric", "item", "region", "frequency", "timestamp", "value"):
            if row.get(col) is None or not str(row[col]).strip():
                raise VarcastError(f"missing value in column {col!r}")
        frequency = Frequency.parse(row["frequency"])
        secondary = (row.get("secondary_region") or "").strip() or None
        key = SeriesKey(
            metric=normalize_label(row["metric"], "metric", self.synonyms),
            item=normalize_label(row["item"], "item", self.synonyms),
            region=normalize_label(row["region"], "region", self.synonyms),
            secondary_region=(
                normalize_label(secondary, "region", self.synonyms) if secondary else None
            ),
            frequency=frequency,
        )
        try:
            stamp = date.fromisoformat(row["timestamp"].strip())
        except ValueError:
            raise VarcastError(f"unparseable timestamp {row['timestamp']!r}") from None
        try:
            value = float(row["value"])
        except ValueError:
            raise VarcastError(f"unparseable value {row['value']!r}") from None
        if not np.isfinite(value):
            raise VarcastError(f"non-finite value {row['value']!r}")
        return key, stamp, value, (row.get("unit") or "").strip(), (row.get("source") or "").strip()

    # ------------------------------------------------------------------
    # Query and alignment
    # ------------------------------------------------------------------

    def query(
        self,
        metric: str | None = None,
        item: str | None = None,
        region: str | None = None,
        secondary_region: str | None = None,
        frequency: Frequency | str | None = None,
    ) -> list[SeriesKey]:
        """Keys whose fields match every non-empty filter field, sorted."""
        if isinstance(frequency, str) and frequency:
            frequency = Frequency.parse(frequency)
        out = []
        for key in self._series:
            if metric and key.metric != metric:
                continue
            if item and key.item != item:
                continue
            if region and key.region != region:
                continue
            if secondary_region and key.secondary_region != secondary_region:
                continue
            if frequency and key.frequency != frequency:
                continue
            out.append(key)
        return sorted(out)

    def align(
        self,
        keys: list[SeriesKey],
        frequency: Frequency,
        window: tuple[date | None, date | None] | None = None,
        sum_metrics: frozenset | set | None = None,
    ) -> tuple[np.ndarray, list[date]]:
        """Resample each series to ``frequency`` and intersect their time indexes.

        Downsampling aggregates by mean, or by sum for metrics listed in
        ``sum_metrics``. Only periods where every series has a value survive.
        Returns (T x k matrix, shared index of period-start dates); columns
        follow ``keys`` order.
        """
        if not keys:
            raise AlignmentError("align requires at least one key")
        sum_metrics = sum_metrics or frozenset()
        lo, hi = window if window else (None, None)

        columns: list[dict[int, float]] = []
        for key in keys:
            if key not in self._series:
                raise AlignmentError(f"unresolvable key {key}")
            if not frequency.is_coarser_or_equal(key.frequency):
                raise AlignmentError(
                    f"target frequency {frequency.value} is finer than native "
                    f"{key.frequency.value} for {key}"
                )
            buckets: dict[int, list[float]] = {}
            for d, v in self._series[key].points:
                if lo is not None and d < lo:
                    continue
                if hi is not None and d > hi:
                    continue
                buckets.setdefault(to_period(d, frequency), []).append(v)
            agg = sum if key.metric in sum_metrics else (lambda vs: sum(vs) / len(vs))
            columns.append({p: float(agg(vs)) for p, vs in buckets.items()})

        common = set(columns[0])
        for col in columns[1:]:
            common &= set(col)
        periods = sorted(common)
        index = [period_start(p, frequency) for p in periods]
        matrix = np.array([[col[p] for col in columns] for p in periods], dtype=float)
        matrix = matrix.reshape(len(periods), len(keys))
        return matrix, index

    # ------------------------------------------------------------------
    # Persistence
    # ------------------------------------------------------------------

    def save(self, data_dir) -> None:
        root = Path(data_dir)
        root.mkdir(parents=True, exist_ok=True)
        index = []
        for key in self.keys():
            series = self._series[key]
            slug = _series_slug(key)
            index.append({**key.to_dict(), "unit": series.unit, "source": series.source,
                          "file": f"{slug}.csv", "n_points": len(series)})
            with open(root / f"{slug}.csv", "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["timestamp", "value"])
                for d, v in series.points:
                    writer.writerow([d.isoformat(), repr(v)])
        tmp = root / "index.json.tmp"
        tmp.write_text(json.dumps({"series": index}, indent=2), encoding="utf-8")
        tmp.replace(root / "index.json")

    @classmethod
    def load(cls, data_dir, synonyms: SynonymTable | None = None) -> "Catalog":
        root = Path(data_dir)
        catalog = cls(synonyms=synonyms)
        index_path = root / "index.json"
        if not index_path.exists():
            return catalog
        index = json.loads(index_path.read_text(encoding="utf-8"))
        for entry in index["series"]:
            key = SeriesKey.from_dict(entry)
            points = []
            with open(root / entry["file"], newline="", encoding="utf-8") as fh:
                reader = csv.reader(fh)
                next(reader)
                for stamp, value in reader:
                    points.append((date.fromisoformat(stamp), float(value)))
            catalog.put(TimeSeries(key=key, points=points,
                                   unit=entry.get("unit", ""), source=entry.get("source", "")))
        return catalog


def _series_slug(key: SeriesKey) -> str:
    parts = [key.metric, key.item, key.region, key.secondary_region or "", key.frequency.value]
    base = "__".join(p.replace(" ", "-") for p in parts if p)
    digest = hashlib.sha1("|".join(parts).encode()).hexdigest()[:8]
    safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in base)
    return f"{safe}__{digest}"
