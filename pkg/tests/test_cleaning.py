import math
from datetime import date

import pytest
from hypothesis import given
from hypothesis import strategies as st

from varcast.cleaning import (
    CleaningPolicy,
    SynonymTable,
    clean_series,
    default_synonyms,
    normalize_label,
)
from varcast.errors import (
    DegenerateSeriesError,
    InvalidLabelError,
    TransformError,
    VarcastError,
)
from varcast.series import Frequency, SeriesKey, TimeSeries

from conftest import annual_series

KEY = SeriesKey("price", "wheat", "uae", frequency=Frequency.ANNUAL)


def single_pass_mean_std(values):
    """Independent Welford-style oracle for the winsorize boundary."""
    mean = 0.0
    m2 = 0.0
    for n, v in enumerate(values, start=1):
        delta = v - mean
        mean += delta / n
        m2 += delta * (v - mean)
    std = math.sqrt(m2 / (len(values) - 1)) if len(values) > 1 else 0.0
    return mean, std


# ----------------------------------------------------------------------
# normalize_label
# ----------------------------------------------------------------------

def test_normalize_trims_and_lowercases():
    assert normalize_label("  Wheat ", "item") == "wheat"


def test_normalize_uses_shipped_synonym_table():
    assert normalize_label("United Arab Emirates", "region") == "uae"
    # lookup is insensitive to case and internal whitespace
    assert normalize_label("  UNITED   ARAB  EMIRATES ", "region") == "uae"


def test_normalize_unmapped_passes_through():
    assert normalize_label("Производство", "metric") == "производство"


def test_normalize_rejects_empty():
    with pytest.raises(InvalidLabelError):
        normalize_label("   ", "region")
    with pytest.raises(VarcastError):
        normalize_label("wheat", "flavor")


def test_custom_table_overrides():
    table = SynonymTable([("item", "Blé", "wheat")])
    assert normalize_label("blé", "item", table) == "wheat"
    assert normalize_label("United Arab Emirates", "region", table) == "united arab emirates"


@given(st.text(min_size=1).filter(lambda s: s.strip()))
def test_normalize_idempotent_and_case_insensitive(raw):
    table = default_synonyms()
    once = normalize_label(raw, "item", table)
    assert normalize_label(once, "item", table) == once
    assert normalize_label(raw.upper(), "item", table) == normalize_label(raw.lower(), "item", table)


# ----------------------------------------------------------------------
# clean_series
# ----------------------------------------------------------------------

def test_clean_fixed_point_on_clean_series():
    series = annual_series(KEY, 2000, [1.0, 2.0, 3.0, 4.0])
    cleaned, report = clean_series(series, CleaningPolicy())
    assert cleaned.points == series.points
    assert report.total_modifications == 0
    assert not report.log_transformed


def test_clean_winsorizes_to_oracle_boundary():
    values = [1.0, 2.0, 1000.0, 2.0, 1.0]
    series = annual_series(KEY, 2000, values)
    policy = CleaningPolicy(outlier_z_threshold=1.5, outlier_action="winsorize")
    cleaned, report = clean_series(series, policy)

    mean, std = single_pass_mean_std(values)
    expected_boundary = mean + 1.5 * std
    # frozen from the oracle: mean 201.2, std 446.54305..., boundary 871.01458...
    assert expected_boundary == pytest.approx(871.0145825525151, abs=1e-9)
    assert cleaned.values[2] == pytest.approx(expected_boundary, abs=1e-9)
    assert cleaned.values[0] == 1.0
    assert report.outliers_winsorized == 1


def test_clean_drops_outliers_when_configured():
    values = [1.0, 2.0, 1000.0, 2.0, 1.0]
    series = annual_series(KEY, 2000, values)
    policy = CleaningPolicy(outlier_z_threshold=1.5, outlier_action="drop")
    cleaned, report = clean_series(series, policy)
    assert len(cleaned) == 4
    assert report.outliers_dropped == 1


def test_clean_interpolates_monthly_gap():
    series = TimeSeries(
        key=SeriesKey("price", "wheat", "uae", frequency=Frequency.MONTHLY),
        points=[(date(2020, 1, 1), 5.0), (date(2020, 3, 1), 7.0)],
    )
    policy = CleaningPolicy(missing_strategy="linear_interpolate")
    cleaned, report = clean_series(series, policy)
    assert cleaned.points[1] == (date(2020, 2, 1), 6.0)
    assert report.missing_interpolated == 1


def test_clean_removes_duplicates_first_wins():
    series = TimeSeries(
        key=KEY,
        points=[(date(2000, 1, 1), 1.0), (date(2000, 1, 1), 9.0), (date(2001, 1, 1), 2.0)],
        validate=False,
    )
    cleaned, report = clean_series(series, CleaningPolicy())
    assert cleaned.values == [1.0, 2.0]
    assert report.duplicates_removed == 1


def test_clean_drops_nan_points():
    series = TimeSeries(
        key=KEY,
        points=[(date(2000, 1, 1), 1.0), (date(2001, 1, 1), float("nan"))],
        validate=False,
    )
    cleaned, report = clean_series(series, CleaningPolicy(missing_strategy="drop"))
    assert cleaned.values == [1.0]
    assert report.missing_dropped == 1


def test_clean_log_transform():
    series = annual_series(KEY, 2000, [1.0, math.e, math.e**2])
    cleaned, report = clean_series(series, CleaningPolicy(transform="log"))
    assert cleaned.values == pytest.approx([0.0, 1.0, 2.0])
    assert report.log_transformed


def test_clean_log_transform_rejects_nonpositive():
    series = annual_series(KEY, 2000, [1.0, -2.0, 3.0])
    with pytest.raises(TransformError):
        clean_series(series, CleaningPolicy(transform="log"))


def test_clean_empty_after_cleaning_is_degenerate():
    series = TimeSeries(key=KEY, points=[(date(2000, 1, 1), float("inf"))], validate=False)
    with pytest.raises(DegenerateSeriesError):
        clean_series(series, CleaningPolicy())


def test_policy_validation():
    with pytest.raises(VarcastError):
        CleaningPolicy(outlier_z_threshold=0.0)
    with pytest.raises(VarcastError):
        CleaningPolicy(missing_strategy="zero-fill")


@given(
    st.lists(
        st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False),
        min_size=1,
        max_size=40,
    ),
    st.sampled_from(["drop", "linear_interpolate"]),
)
def test_clean_idempotent_without_outlier_or_transform_passes(values, strategy):
    # Idempotence holds for duplicate/missing handling; the single-pass
    # outlier rule and the log transform intentionally re-apply (see docs),
    # so they are excluded by using an unreachable threshold.
    series = annual_series(KEY, 1900, values)
    policy = CleaningPolicy(missing_strategy=strategy, outlier_z_threshold=1e12)
    once, _ = clean_series(series, policy)
    twice, report = clean_series(once, policy)
    assert twice.points == once.points
    assert report.total_modifications == 0
