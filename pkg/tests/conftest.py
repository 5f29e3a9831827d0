from datetime import date
from pathlib import Path

import pytest

from varcast.datasets import (
    case_study_process,
    make_case_study_scenario,
    make_synthetic_catalog,
)
from varcast.series import Frequency, SeriesKey, TimeSeries

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"


@pytest.fixture(scope="session")
def fixture_catalog():
    catalog, _ = make_synthetic_catalog()
    return catalog


@pytest.fixture(scope="session")
def fixture_process():
    return case_study_process()


@pytest.fixture(scope="session")
def case_study_scenario():
    return make_case_study_scenario()


@pytest.fixture
def wheat_key():
    return SeriesKey("price", "wheat", "uae", frequency=Frequency.ANNUAL)


def annual_series(key, start_year, values):
    return TimeSeries(
        key=key,
        points=[(date(start_year + i, 1, 1), v) for i, v in enumerate(values)],
        unit="unit",
        source="test",
    )
