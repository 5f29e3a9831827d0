"""What-if scenario definition: assumptions, impacts, parsing, validation.

A scenario document is strict JSON: unknown fields are rejected so that typos
fail loudly, and every parse or validation finding carries the path of the
offending element. Validation against a catalog never raises; problems come
back as error/warning findings in a ValidationReport.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date

from .catalog import Catalog
from .cleaning import SynonymTable, normalize_label
from .errors import ScenarioParseError
from .series import Frequency, SeriesKey, coarsest, to_period

MAX_LAG_DEFAULT = 8
MIN_HISTORY_MARGIN = 10
SHORT_HISTORY_THRESHOLD = 30

SHOCK_SHAPES = ("step", "linear_ramp")


@dataclass(frozen=True)
class Assumption:
    """A user-specified percent change on one series over a period."""

    key: SeriesKey
    change_pct: float
    period: tuple[date, date]
    shock_shape: str = "step"
    uncertainty_std_pct: float | None = None  # None -> simulation default applies

    def __post_init__(self):
        if self.change_pct < -100:
            raise ScenarioParseError("change_pct must be >= -100", "change_pct")
        if self.shock_shape not in SHOCK_SHAPES:
            raise ScenarioParseError(f"shock_shape must be one of {SHOCK_SHAPES}", "shock_shape")
        if self.uncertainty_std_pct is not None and self.uncertainty_std_pct < 0:
            raise ScenarioParseError("uncertainty_std_pct must be >= 0", "uncertainty_std_pct")
        if self.period[0] > self.period[1]:
            raise ScenarioParseError("period start must not be after end", "period")


@dataclass(frozen=True)
class Impact:
    """A series whose future change the evaluation predicts."""

    key: SeriesKey
    horizon: int

    def __post_init__(self):
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ScenarioParseError("horizon must be an integer >= 1", "horizon")


@dataclass(frozen=True)
class Scenario:
    id: str
    name: str
    assumptions: tuple[Assumption, ...]
    impacts: tuple[Impact, ...]

    def __post_init__(self):
        if not self.assumptions:
            raise ScenarioParseError("assumptions must be non-empty", "assumptions")
        if not self.impacts:
            raise ScenarioParseError("impacts must be non-empty", "impacts")


@dataclass(frozen=True)
class Finding:
    severity: str  # error | warning
    code: str
    message: str
    path: str

    def as_dict(self) -> dict:
        return {"severity": self.severity, "code": self.code,
                "message": self.message, "path": self.path}


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def status(self) -> str:
        return "invalid" if any(f.severity == "error" for f in self.findings) else "valid"

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "error"]

    def add(self, severity: str, code: str, message: str, path: str) -> None:
        self.findings.append(Finding(severity, code, message, path))

    def as_dict(self) -> dict:
        return {"status": self.status, "findings": [f.as_dict() for f in self.findings]}


# ----------------------------------------------------------------------
# Parsing (strict, closed-world)
# ----------------------------------------------------------------------

_KEY_FIELDS = {"metric", "item", "region", "secondary_region", "frequency"}
_ASSUMPTION_FIELDS = _KEY_FIELDS | {"change_pct", "period", "shock_shape", "uncertainty_std_pct"}
_IMPACT_FIELDS = _KEY_FIELDS | {"horizon"}
_SCENARIO_FIELDS = {"id", "name", "assumptions", "impacts"}


def _reject_unknown(obj: dict, allowed: set, path: str) -> None:
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ScenarioParseError(f"unknown field(s): {', '.join(unknown)}", path)


def _require(obj: dict, name: str, path: str):
    if name not in obj:
        raise ScenarioParseError(f"missing required field {name!r}", path)
    return obj[name]


def _parse_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioParseError(f"expected a number, got {value!r}", path)
    return float(value)


def _parse_date(value, path: str) -> date:
    try:
        return date.fromisoformat(str(value))
    except ValueError:
        raise ScenarioParseError(f"expected ISO-8601 date, got {value!r}", path) from None


def _parse_key(obj: dict, path: str, synonyms: SynonymTable | None) -> SeriesKey:
    for name in ("metric", "item", "region", "frequency"):
        _require(obj, name, path)
    secondary = obj.get("secondary_region")
    try:
        frequency = Frequency.parse(str(obj["frequency"]))
    except Exception:
        raise ScenarioParseError(
            f"unknown frequency {obj['frequency']!r}", f"{path}.frequency"
        ) from None
    try:
        return SeriesKey(
            metric=normalize_label(str(obj["metric"]), "metric", synonyms),
            item=normalize_label(str(obj["item"]), "item", synonyms),
            region=normalize_label(str(obj["region"]), "region", synonyms),
            secondary_region=(
                normalize_label(str(secondary), "region", synonyms) if secondary else None
            ),
            frequency=frequency,
        )
    except Exception as exc:
        raise ScenarioParseError(str(exc), path) from None


def _parse_assumption(obj, path: str, synonyms) -> Assumption:
    if not isinstance(obj, dict):
        raise ScenarioParseError("assumption must be an object", path)
    _reject_unknown(obj, _ASSUMPTION_FIELDS, path)
    key = _parse_key(obj, path, synonyms)
    change = _parse_number(_require(obj, "change_pct", path), f"{path}.change_pct")
    if change < -100:
        raise ScenarioParseError("change_pct must be >= -100", f"{path}.change_pct")
    period_obj = _require(obj, "period", path)
    if not isinstance(period_obj, dict) or set(period_obj) != {"start", "end"}:
        raise ScenarioParseError("period must be {start, end}", f"{path}.period")
    period = (
        _parse_date(period_obj["start"], f"{path}.period.start"),
        _parse_date(period_obj["end"], f"{path}.period.end"),
    )
    if period[0] > period[1]:
        raise ScenarioParseError("period start must not be after end", f"{path}.period")
    shape = obj.get("shock_shape", "step")
    if shape not in SHOCK_SHAPES:
        raise ScenarioParseError(
            f"shock_shape must be one of {SHOCK_SHAPES}", f"{path}.shock_shape"
        )
    std = obj.get("uncertainty_std_pct")
    if std is not None:
        std = _parse_number(std, f"{path}.uncertainty_std_pct")
        if std < 0:
            raise ScenarioParseError(
                "uncertainty_std_pct must be >= 0", f"{path}.uncertainty_std_pct"
            )
    return Assumption(key=key, change_pct=change, period=period,
                      shock_shape=shape, uncertainty_std_pct=std)


def _parse_impact(obj, path: str, synonyms) -> Impact:
    if not isinstance(obj, dict):
        raise ScenarioParseError("impact must be an object", path)
    _reject_unknown(obj, _IMPACT_FIELDS, path)
    key = _parse_key(obj, path, synonyms)
    horizon = _require(obj, "horizon", path)
    if isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 1:
        raise ScenarioParseError("horizon must be an integer >= 1", f"{path}.horizon")
    return Impact(key=key, horizon=horizon)


def parse_scenario(document, synonyms: SynonymTable | None = None) -> Scenario:
    """Parse a scenario JSON document (bytes, text, or already-decoded dict)."""
    if isinstance(document, (bytes, bytearray)):
        document = document.decode("utf-8")
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ScenarioParseError(f"invalid JSON: {exc}", "$") from None
    if not isinstance(document, dict):
        raise ScenarioParseError("scenario document must be a JSON object", "$")
    _reject_unknown(document, _SCENARIO_FIELDS, "$")
    scenario_id = str(_require(document, "id", "$"))
    name = str(_require(document, "name", "$"))
    raw_assumptions = _require(document, "assumptions", "$")
    raw_impacts = _require(document, "impacts", "$")
    if not isinstance(raw_assumptions, list) or not raw_assumptions:
        raise ScenarioParseError("assumptions must be non-empty", "$.assumptions")
    if not isinstance(raw_impacts, list) or not raw_impacts:
        raise ScenarioParseError("impacts must be non-empty", "$.impacts")
    assumptions = tuple(
        _parse_assumption(a, f"$.assumptions[{i}]", synonyms)
        for i, a in enumerate(raw_assumptions)
    )
    impacts = tuple(
        _parse_impact(m, f"$.impacts[{i}]", synonyms) for i, m in enumerate(raw_impacts)
    )
    return Scenario(id=scenario_id, name=name, assumptions=assumptions, impacts=impacts)


def serialize_scenario(scenario: Scenario) -> str:
    """Canonical JSON form; parse(serialize(s)) == s."""
    doc = {
        "id": scenario.id,
        "name": scenario.name,
        "assumptions": [],
        "impacts": [],
    }
    for a in scenario.assumptions:
        entry = dict(a.key.to_dict())
        entry["change_pct"] = a.change_pct
        entry["period"] = {"start": a.period[0].isoformat(), "end": a.period[1].isoformat()}
        if a.shock_shape != "step":
            entry["shock_shape"] = a.shock_shape
        if a.uncertainty_std_pct is not None:
            entry["uncertainty_std_pct"] = a.uncertainty_std_pct
        doc["assumptions"].append(entry)
    for m in scenario.impacts:
        entry = dict(m.key.to_dict())
        entry["horizon"] = m.horizon
        doc["impacts"].append(entry)
    return json.dumps(doc, indent=2)


# ----------------------------------------------------------------------
# Validation against a catalog
# ----------------------------------------------------------------------

def validate(scenario: Scenario, catalog: Catalog) -> ValidationReport:
    """Completeness and consistency checks; reports every finding, never raises."""
    report = ValidationReport()

    for i, a in enumerate(scenario.assumptions):
        if a.key not in catalog:
            report.add("error", "unknown-series", f"no catalog series for {a.key.label()}",
                       f"$.assumptions[{i}]")
    for i, m in enumerate(scenario.impacts):
        if m.key not in catalog:
            report.add("error", "unknown-series", f"no catalog series for {m.key.label()}",
                       f"$.impacts[{i}]")

    seen: dict[SeriesKey, int] = {}
    for i, a in enumerate(scenario.assumptions):
        if a.key in seen:
            report.add("error", "duplicate-assumption",
                       f"assumption {i} repeats the key of assumption {seen[a.key]}",
                       f"$.assumptions[{i}]")
        else:
            seen[a.key] = i
    assumption_keys = set(seen)
    for i, m in enumerate(scenario.impacts):
        if m.key in assumption_keys:
            report.add("error", "assumption-impact-collision",
                       f"impact {i} uses an assumption key {m.key.label()}",
                       f"$.impacts[{i}]")

    for i, a in enumerate(scenario.assumptions):
        if a.change_pct < -100:
            report.add("error", "change-out-of-range", "change_pct must be >= -100",
                       f"$.assumptions[{i}].change_pct")

    if report.errors:
        return report

    # All keys resolve from here on.
    all_keys = [a.key for a in scenario.assumptions] + [m.key for m in scenario.impacts]
    freq = coarsest(k.frequency for k in all_keys)
    for i, m in enumerate(scenario.impacts):
        if m.key.frequency != freq:
            report.add("warning", "horizon-frequency-reinterpreted",
                       f"impact horizon is interpreted at the evaluation frequency "
                       f"({freq.value}), not {m.key.frequency.value}",
                       f"$.impacts[{i}].horizon")

    matrix, index = catalog.align(all_keys, freq)
    t = len(index)
    k = len(all_keys)
    p_max = min(MAX_LAG_DEFAULT, max(1, (t - 1) // (k + 2)))
    if t < p_max + MIN_HISTORY_MARGIN:
        report.add("error", "insufficient-history",
                   f"only {t} common observations; need at least {p_max + MIN_HISTORY_MARGIN}",
                   "$")
    elif t < SHORT_HISTORY_THRESHOLD:
        report.add("warning", "short-history",
                   f"only {t} common observations; estimates may be unstable", "$")

    if index:
        origin_period = to_period(index[-1], freq) + 1
        horizon = max(m.horizon for m in scenario.impacts)
        for i, a in enumerate(scenario.assumptions):
            last_observed = catalog.get(a.key).last[0]
            if a.period[0] <= last_observed:
                report.add("error", "period-in-history",
                           f"assumption period starts {a.period[0]}, on or before the last "
                           f"observation {last_observed}", f"$.assumptions[{i}].period")
            if to_period(a.period[0], freq) >= origin_period + horizon:
                report.add("warning", "period-beyond-horizon",
                           "assumption period begins after the last forecast step; "
                           "it will have no effect", f"$.assumptions[{i}].period")
    return report
