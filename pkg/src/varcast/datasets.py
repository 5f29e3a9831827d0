"""Synthetic data generators for demos and verification.

The flagship generator builds a small food-security style catalog from a
known stationary linear process, so that evaluation results can be checked
against the process's own closed-form response. Supply variables feed
price, availability, access, and diet quality with fixed coefficients;
signs are economically self-consistent (a supply shortfall raises price and
lowers the rest).
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from datetime import date

import numpy as np

from .catalog import CSV_HEADER, Catalog
from .scenario import Assumption, Impact, Scenario
from .series import Frequency, SeriesKey, TimeSeries

FIXTURE_SEED = 71

ANNUAL = Frequency.ANNUAL

RUSSIA_WHEAT = SeriesKey("production", "wheat", "russia", frequency=ANNUAL)
UKRAINE_WHEAT = SeriesKey("production", "wheat", "ukraine", frequency=ANNUAL)
UAE_POPULATION = SeriesKey("population", "total", "uae", frequency=ANNUAL)
UAE_WHEAT_PRICE = SeriesKey("price", "wheat", "uae", frequency=ANNUAL)
UAE_WHEAT_AVAILABILITY = SeriesKey("availability", "wheat", "uae", frequency=ANNUAL)
UAE_WHEAT_ACCESS = SeriesKey("access", "wheat", "uae", frequency=ANNUAL)
UAE_DIET_NUTRITION = SeriesKey("nutritional_value", "diet", "uae", frequency=ANNUAL)


@dataclass(frozen=True)
class LinearProcess:
    """A stationary VAR(1) process: y_{t+1} = c + A y_t + diag(s) z_t."""

    keys: tuple[SeriesKey, ...]
    intercept: np.ndarray
    transition: np.ndarray
    noise_std: np.ndarray
    units: tuple[str, ...]

    @property
    def mean(self) -> np.ndarray:
        return np.linalg.solve(np.eye(len(self.keys)) - self.transition, self.intercept)


def case_study_process() -> LinearProcess:
    """Seven-series process: two wheat producers, one consumer region.

    Column order: russia production, ukraine production, uae population,
    then uae price / availability / access / diet nutrition. Production and
    population are autonomous AR(1) blocks; the consumer indicators respond
    to lagged supply (russia + ukraine), population pressure, and each
    other. Stationary means: 80, 30, 9, 31, 10, 10, ~11.4.
    """
    keys = (
        RUSSIA_WHEAT,
        UKRAINE_WHEAT,
        UAE_POPULATION,
        UAE_WHEAT_PRICE,
        UAE_WHEAT_AVAILABILITY,
        UAE_WHEAT_ACCESS,
        UAE_DIET_NUTRITION,
    )
    transition = np.array(
        [
            #  rus    ukr    pop    price  avail  access nutri
            [0.50, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00],
            [0.00, 0.50, 0.00, 0.00, 0.00, 0.00, 0.00],
            [0.00, 0.00, 0.50, 0.00, 0.00, 0.00, 0.00],
            [-0.08, -0.08, 3.00, 0.30, 0.00, 0.00, 0.00],
            [0.02, 0.02, -1.00, 0.00, 0.30, 0.00, 0.00],
            [0.015, 0.015, -0.80, -0.10, 0.00, 0.30, 0.00],
            [0.01, 0.01, 0.00, 0.00, 0.00, 0.40, 0.30],
        ]
    )
    intercept = np.array([40.0, 15.0, 4.5, 3.5, 13.8, 15.65, 2.9])
    noise_std = np.array([5.0, 2.5, 0.25, 0.03, 0.012, 0.010, 0.008])
    units = (
        "million tonnes",
        "million tonnes",
        "million persons",
        "usd per tonne",
        "index",
        "index",
        "index",
    )
    return LinearProcess(
        keys=keys, intercept=intercept, transition=transition, noise_std=noise_std, units=units
    )


def make_synthetic_catalog(
    seed: int = FIXTURE_SEED,
    start_year: int = 1965,
    n_years: int = 60,
    process: LinearProcess | None = None,
) -> tuple[Catalog, LinearProcess]:
    """Simulate the process and load it into a fresh catalog.

    A 200-period burn-in from the stationary mean removes any transient.
    """
    process = process or case_study_process()
    k = len(process.keys)
    rng = np.random.default_rng(seed)
    y = process.mean.copy()
    for _ in range(200):
        y = process.intercept + process.transition @ y + process.noise_std * rng.standard_normal(k)
    rows = np.empty((n_years, k))
    for t in range(n_years):
        y = process.intercept + process.transition @ y + process.noise_std * rng.standard_normal(k)
        rows[t] = y

    catalog = Catalog()
    for j, key in enumerate(process.keys):
        points = [(date(start_year + t, 1, 1), float(rows[t, j])) for t in range(n_years)]
        catalog.put(TimeSeries(key=key, points=points, unit=process.units[j], source="synthetic"))
    return catalog, process


def make_case_study_scenario(horizon: int = 5, first_year: int = 2025) -> Scenario:
    """Wheat-crisis style scenario: two supply cuts plus population growth."""
    period = (date(first_year, 1, 1), date(first_year + horizon - 1, 12, 31))
    return Scenario(
        id="uae-wheat-crisis",
        name="Wheat supply disruption with population growth",
        assumptions=(
            Assumption(key=RUSSIA_WHEAT, change_pct=-50.0, period=period,
                       uncertainty_std_pct=5.0),
            Assumption(key=UKRAINE_WHEAT, change_pct=-100.0, period=period,
                       uncertainty_std_pct=0.0),
            Assumption(key=UAE_POPULATION, change_pct=5.0, period=period,
                       uncertainty_std_pct=1.0),
        ),
        impacts=(
            Impact(key=UAE_WHEAT_PRICE, horizon=horizon),
            Impact(key=UAE_WHEAT_AVAILABILITY, horizon=horizon),
            Impact(key=UAE_WHEAT_ACCESS, horizon=horizon),
            Impact(key=UAE_DIET_NUTRITION, horizon=horizon),
        ),
    )


def catalog_to_csv(catalog: Catalog) -> str:
    """Render a catalog in the ingestion CSV format (full float precision)."""
    out = io.StringIO()
    out.write(",".join(CSV_HEADER) + "\n")
    for key in catalog.keys():
        series = catalog.get(key)
        for d, v in series.points:
            fields = [
                key.metric,
                key.item,
                key.region,
                key.secondary_region or "",
                key.frequency.value,
                d.isoformat(),
                repr(v),
                series.unit,
                series.source,
            ]
            out.write(",".join(fields) + "\n")
    return out.getvalue()
