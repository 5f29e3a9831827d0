"""What-if scenario evaluation for multivariate time-series indicators.

Fit a joint VAR over the series a scenario touches, pin the assumption
series to generated shock paths, and quantify impact uncertainty with a
seeded, reproducible Monte Carlo simulation.
"""

from .catalog import Catalog, IngestionSummary
from .cleaning import CleaningPolicy, CleaningReport, SynonymTable, clean_series, normalize_label
from .errors import VarcastError
from .montecarlo import SimulationConfig, SimulationResult, SummaryStats, summarize
from .pipeline import (
    ConditionalForecaster,
    EvaluationReport,
    evaluate,
    generate_assumption_path,
    render_report,
)
from .scenario import (
    Assumption,
    Impact,
    Scenario,
    ValidationReport,
    parse_scenario,
    serialize_scenario,
    validate,
)
from .series import Frequency, SeriesKey, TimeSeries
from .var import LagSelection, VectorAutoregression, select_lag

__version__ = "0.1.0"

__all__ = [
    "Assumption",
    "Catalog",
    "CleaningPolicy",
    "CleaningReport",
    "ConditionalForecaster",
    "EvaluationReport",
    "Frequency",
    "Impact",
    "IngestionSummary",
    "LagSelection",
    "Scenario",
    "SeriesKey",
    "SimulationConfig",
    "SimulationResult",
    "SummaryStats",
    "SynonymTable",
    "TimeSeries",
    "ValidationReport",
    "VarcastError",
    "VectorAutoregression",
    "clean_series",
    "evaluate",
    "generate_assumption_path",
    "normalize_label",
    "parse_scenario",
    "render_report",
    "select_lag",
    "serialize_scenario",
    "summarize",
    "validate",
]
