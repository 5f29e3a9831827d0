from datetime import date

import pytest

from varcast.errors import VarcastError
from varcast.series import (
    Frequency,
    SeriesKey,
    TimeSeries,
    coarsest,
    period_start,
    to_period,
)


def test_frequency_order_by_period_length():
    assert Frequency.ANNUAL.approx_days > Frequency.MONTHLY.approx_days
    assert Frequency.MONTHLY.approx_days > Frequency.WEEKLY.approx_days
    assert Frequency.WEEKLY.approx_days > Frequency.DAILY.approx_days
    assert Frequency.ANNUAL.is_coarser_or_equal(Frequency.DAILY)
    assert Frequency.MONTHLY.is_coarser_or_equal(Frequency.MONTHLY)
    assert not Frequency.DAILY.is_coarser_or_equal(Frequency.WEEKLY)


def test_frequency_parse():
    assert Frequency.parse(" Annual ") is Frequency.ANNUAL
    with pytest.raises(VarcastError):
        Frequency.parse("fortnightly")


def test_coarsest():
    assert coarsest([Frequency.MONTHLY, Frequency.ANNUAL, Frequency.DAILY]) is Frequency.ANNUAL


@pytest.mark.parametrize(
    "freq,d,expected_start",
    [
        (Frequency.ANNUAL, date(2020, 7, 15), date(2020, 1, 1)),
        (Frequency.MONTHLY, date(2020, 7, 15), date(2020, 7, 1)),
        (Frequency.WEEKLY, date(1970, 1, 7), date(1970, 1, 5)),
        (Frequency.DAILY, date(2020, 7, 15), date(2020, 7, 15)),
    ],
)
def test_period_round_trip(freq, d, expected_start):
    assert period_start(to_period(d, freq), freq) == expected_start
    # period ordinals advance by one per period
    assert to_period(expected_start, freq) + 1 == to_period(
        {
            Frequency.ANNUAL: date(2021, 1, 1),
            Frequency.MONTHLY: date(2020, 8, 1),
            Frequency.WEEKLY: date(1970, 1, 12),
            Frequency.DAILY: date(2020, 7, 16),
        }[freq],
        freq,
    )


def test_series_key_requires_canonical_labels():
    with pytest.raises(VarcastError):
        SeriesKey("Price", "wheat", "uae")
    with pytest.raises(VarcastError):
        SeriesKey(" price", "wheat", "uae")
    with pytest.raises(VarcastError):
        SeriesKey("price", "", "uae")


def test_series_key_secondary_region_and_ordering():
    trade = SeriesKey("trade", "wheat", "russia", secondary_region="uae")
    assert trade.secondary_region == "uae"
    assert trade.label() == "trade of wheat (russia->uae)"
    keys = sorted([SeriesKey("price", "wheat", "uae"), SeriesKey("access", "wheat", "uae")])
    assert keys[0].metric == "access"


def test_series_key_dict_round_trip(wheat_key):
    assert SeriesKey.from_dict(wheat_key.to_dict()) == wheat_key


def test_timeseries_invariants(wheat_key):
    with pytest.raises(VarcastError):
        TimeSeries(key=wheat_key, points=[(date(2020, 1, 1), 1.0), (date(2020, 1, 1), 2.0)])
    with pytest.raises(VarcastError):
        TimeSeries(key=wheat_key, points=[(date(2020, 1, 1), float("nan"))])
    dirty = TimeSeries(
        key=wheat_key,
        points=[(date(2020, 1, 1), float("nan"))],
        validate=False,
    )
    assert len(dirty) == 1


def test_timeseries_accessors(wheat_key):
    ts = TimeSeries(key=wheat_key, points=[(date(2020, 1, 1), 1.5), (date(2021, 1, 1), 2.5)])
    assert ts.timestamps == [date(2020, 1, 1), date(2021, 1, 1)]
    assert ts.values == [1.5, 2.5]
    assert ts.last == (date(2021, 1, 1), 2.5)
