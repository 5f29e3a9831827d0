from datetime import date

import numpy as np
import pytest

from varcast.catalog import Catalog, FLOW_METRICS
from varcast.errors import AlignmentError, FormatError, VarcastError
from varcast.series import Frequency, SeriesKey, TimeSeries

HEADER = "metric,item,region,secondary_region,frequency,timestamp,value,unit,source"

WHEAT_ROWS = "\n".join(
    [
        HEADER,
        "price,wheat,uae,,annual,2000-01-01,10.5,usd,test",
        "price,wheat,uae,,annual,2001-01-01,11.0,usd,test",
        "price,wheat,uae,,annual,2002-01-01,12.25,usd,test",
    ]
)


def make_catalog():
    return Catalog()


def test_ingest_clean_rows():
    catalog = make_catalog()
    summary = catalog.ingest_csv(WHEAT_ROWS)
    assert summary.accepted == 3
    assert summary.rejected == 0
    key = SeriesKey("price", "wheat", "uae", frequency=Frequency.ANNUAL)
    assert catalog.get(key).values == [10.5, 11.0, 12.25]
    assert catalog.get(key).unit == "usd"


def test_ingest_duplicates_rejected_on_second_pass():
    catalog = make_catalog()
    assert catalog.ingest_csv(WHEAT_ROWS).accepted == 3
    second = catalog.ingest_csv(WHEAT_ROWS)
    assert second.accepted == 0
    assert second.rejected == 3
    assert second.reasons == {"duplicate-timestamp": 3}


def test_ingest_bad_value_rejects_row_only():
    doc = WHEAT_ROWS.replace("11.0", "abc")
    summary = make_catalog().ingest_csv(doc)
    assert summary.accepted == 2
    assert summary.rejected == 1
    assert any("unparseable value" in reason for reason in summary.reasons)


def test_ingest_unknown_frequency_rejects_row():
    doc = WHEAT_ROWS.replace("annual,2001", "hourly,2001")
    summary = make_catalog().ingest_csv(doc)
    assert summary.accepted == 2
    assert any("frequency" in reason for reason in summary.reasons)


def test_ingest_missing_column_is_fatal_and_catalog_unchanged():
    catalog = make_catalog()
    bad = WHEAT_ROWS.replace("secondary_region,", "")
    with pytest.raises(FormatError):
        catalog.ingest_csv(bad)
    assert len(catalog) == 0


def test_ingest_normalizes_labels():
    doc = "\n".join(
        [HEADER, "Price , Wheat ,United Arab Emirates,,annual,2000-01-01,1.0,usd,test"]
    )
    catalog = make_catalog()
    assert catalog.ingest_csv(doc).accepted == 1
    assert catalog.keys() == [SeriesKey("price", "wheat", "uae", frequency=Frequency.ANNUAL)]


def test_ingest_accepts_bytes_and_streams(tmp_path):
    catalog = make_catalog()
    assert catalog.ingest_csv(WHEAT_ROWS.encode()).accepted == 3
    path = tmp_path / "more.csv"
    path.write_text(WHEAT_ROWS.replace("wheat", "rice"))
    with open(path, "rb") as fh:
        assert catalog.ingest_csv(fh).accepted == 3
    assert len(catalog) == 2


# ----------------------------------------------------------------------
# query
# ----------------------------------------------------------------------

def seeded_catalog():
    catalog = make_catalog()
    rows = [
        "price,wheat,uae,,annual,2000-01-01,1,usd,t",
        "production,wheat,russia,,annual,2000-01-01,2,t,t",
        "price,rice,india,,annual,2000-01-01,3,usd,t",
    ]
    catalog.ingest_csv("\n".join([HEADER] + rows))
    return catalog


def test_query_by_item():
    keys = seeded_catalog().query(item="wheat")
    assert len(keys) == 2
    assert all(k.item == "wheat" for k in keys)


def test_query_empty_filter_returns_all_sorted():
    keys = seeded_catalog().query()
    assert len(keys) == 3
    assert keys == sorted(keys)


def test_query_no_match():
    assert seeded_catalog().query(region="mars") == []


# ----------------------------------------------------------------------
# align
# ----------------------------------------------------------------------

def put_annual(catalog, key, start_year, values):
    catalog.put(
        TimeSeries(key=key, points=[(date(start_year + i, 1, 1), v) for i, v in enumerate(values)])
    )


def test_align_full_overlap():
    catalog = make_catalog()
    a = SeriesKey("price", "wheat", "uae", frequency=Frequency.ANNUAL)
    b = SeriesKey("production", "wheat", "russia", frequency=Frequency.ANNUAL)
    put_annual(catalog, a, 2000, list(range(21)))
    put_annual(catalog, b, 2000, list(range(100, 121)))
    matrix, index = catalog.align([a, b], Frequency.ANNUAL)
    assert matrix.shape == (21, 2)
    assert index[0] == date(2000, 1, 1)
    assert index[-1] == date(2020, 1, 1)
    np.testing.assert_array_equal(matrix[:, 0], np.arange(21, dtype=float))


def test_align_monthly_to_annual_mean_of_constant():
    catalog = make_catalog()
    key = SeriesKey("price", "wheat", "uae", frequency=Frequency.MONTHLY)
    points = []
    for year in (2000, 2001):
        for month in range(1, 13):
            points.append((date(year, month, 1), 7.0))
    catalog.put(TimeSeries(key=key, points=points))
    matrix, index = catalog.align([key], Frequency.ANNUAL)
    assert matrix.shape == (2, 1)
    np.testing.assert_allclose(matrix[:, 0], [7.0, 7.0])


def test_align_flow_metric_sums_when_requested():
    catalog = make_catalog()
    key = SeriesKey("production", "wheat", "russia", frequency=Frequency.MONTHLY)
    points = [(date(2000, m, 1), 2.0) for m in range(1, 13)]
    catalog.put(TimeSeries(key=key, points=points))
    mean_matrix, _ = catalog.align([key], Frequency.ANNUAL)
    sum_matrix, _ = catalog.align([key], Frequency.ANNUAL, sum_metrics=FLOW_METRICS)
    assert mean_matrix[0, 0] == 2.0
    assert sum_matrix[0, 0] == 24.0


def test_align_intersection_window():
    catalog = make_catalog()
    a = SeriesKey("price", "wheat", "uae", frequency=Frequency.ANNUAL)
    b = SeriesKey("access", "wheat", "uae", frequency=Frequency.ANNUAL)
    put_annual(catalog, a, 2000, list(range(11)))  # 2000-2010
    put_annual(catalog, b, 2005, list(range(16)))  # 2005-2020
    matrix, index = catalog.align([a, b], Frequency.ANNUAL)
    assert len(index) == 6
    assert index[0] == date(2005, 1, 1)
    assert index[-1] == date(2010, 1, 1)


def test_align_respects_window_argument():
    catalog = make_catalog()
    a = SeriesKey("price", "wheat", "uae", frequency=Frequency.ANNUAL)
    put_annual(catalog, a, 2000, list(range(11)))
    matrix, index = catalog.align(
        [a], Frequency.ANNUAL, window=(date(2002, 1, 1), date(2004, 12, 31))
    )
    assert [d.year for d in index] == [2002, 2003, 2004]


def test_align_rejects_finer_target():
    catalog = make_catalog()
    a = SeriesKey("price", "wheat", "uae", frequency=Frequency.ANNUAL)
    put_annual(catalog, a, 2000, [1, 2, 3])
    with pytest.raises(AlignmentError):
        catalog.align([a], Frequency.MONTHLY)


def test_align_rejects_unknown_key():
    with pytest.raises(AlignmentError):
        make_catalog().align(
            [SeriesKey("price", "wheat", "uae", frequency=Frequency.ANNUAL)], Frequency.ANNUAL
        )


def test_ingest_query_align_round_trip():
    # No resampling: aligned values equal ingested values exactly.
    catalog = make_catalog()
    catalog.ingest_csv(WHEAT_ROWS)
    keys = catalog.query(item="wheat")
    matrix, index = catalog.align(keys, Frequency.ANNUAL)
    assert matrix[:, 0].tolist() == [10.5, 11.0, 12.25]
    assert np.isfinite(matrix).all()
    assert matrix.shape[0] <= min(len(catalog.get(k)) for k in keys)


# ----------------------------------------------------------------------
# persistence
# ----------------------------------------------------------------------

def test_save_load_round_trip(tmp_path):
    catalog = seeded_catalog()
    catalog.save(tmp_path)
    loaded = Catalog.load(tmp_path)
    assert loaded.keys() == catalog.keys()
    for key in catalog.keys():
        assert loaded.get(key).points == catalog.get(key).points
        assert loaded.get(key).unit == catalog.get(key).unit


def test_load_missing_dir_gives_empty_catalog(tmp_path):
    assert len(Catalog.load(tmp_path / "nope")) == 0
