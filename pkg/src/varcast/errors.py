"""Exception types shared across the package."""


class VarcastError(Exception):
    """Base class for all package errors."""


class InvalidLabelError(VarcastError):
    """Raised for empty or whitespace-only labels."""


class TransformError(VarcastError):
    """Raised when a log transform is requested on a non-positive series."""


class DegenerateSeriesError(VarcastError):
    """Raised when a series is empty after cleaning."""


class FormatError(VarcastError):
    """Fatal ingestion format error; the catalog is left unchanged."""


class AlignmentError(VarcastError):
    """Raised for unresolvable keys or an over-fine target frequency."""


class ScenarioParseError(VarcastError):
    """Scenario document error, carrying the path to the offending element."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.reason = message


class SampleSizeError(VarcastError):
    """Too few observations to fit the requested model."""


class SingularDesignError(VarcastError):
    """Rank-deficient regression design; names the offending columns."""

    def __init__(self, message: str, columns: list[str] | None = None):
        super().__init__(message)
        self.columns = columns or []


class ExogenousRequiredError(VarcastError):
    """Forecast requires future exogenous values that were not supplied."""


class LagSelectionError(VarcastError):
    """Every candidate lag order failed to fit."""


class SimulationError(VarcastError):
    """Raised when more than the tolerated share of simulations abort."""


class PipelineError(VarcastError):
    """Evaluation failure naming the stage that failed."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage '{stage}': {message}")
        self.stage = stage
