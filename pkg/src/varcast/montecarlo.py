"""Seeded Monte Carlo uncertainty quantification for scenario forecasts.

Each simulation draws one perturbed change per assumption from a normal
distribution centered on the specified change, builds the shocked paths,
re-forecasts, and records each impact's percent change against the baseline
forecast. Sampling uses a counter-based generator (Philox) with one
substream per simulation index, keyed by (seed, simulation index, draw
order), so results are bit-identical regardless of worker count or
completion order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import SimulationError, VarcastError

ABORT_TOLERANCE = 0.01
# Baselines smaller than this switch the impact to an absolute difference.
PERCENT_DENOMINATOR_EPS = 1e-9


@dataclass(frozen=True)
class SimulationConfig:
    n_sims: int = 5000
    seed: int = 0
    ci_level: float = 0.95
    default_uncertainty_std_pct: float = 0.0
    include_residual_noise: bool = True

    def __post_init__(self):
        if self.n_sims < 1:
            raise VarcastError("n_sims must be >= 1")
        if not (0.0 < self.ci_level < 1.0):
            raise VarcastError("ci_level must be in (0, 1)")
        if self.default_uncertainty_std_pct < 0:
            raise VarcastError("default_uncertainty_std_pct must be >= 0")
        if not (0 <= int(self.seed) < 2**64):
            raise VarcastError("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    std: float
    median: float
    iqr: tuple[float, float]
    ci: tuple[float, float]
    ci_level: float

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std": self.std,
            "median": self.median,
            "iqr": list(self.iqr),
            "ci": list(self.ci),
            "ci_level": self.ci_level,
        }


def quantile(sorted_values, q: float) -> float:
    """Inclusive linear-interpolation quantile on pre-sorted values.

    Rule (pinned): position = (n - 1) * q; the result interpolates linearly
    between the two bracketing order statistics.
    """
    n = len(sorted_values)
    if n == 0:
        raise VarcastError("quantile of empty sample")
    if n == 1:
        return float(sorted_values[0])
    pos = (n - 1) * q
    i = int(math.floor(pos))
    if i >= n - 1:
        return float(sorted_values[-1])
    frac = pos - i
    a = float(sorted_values[i])
    b = float(sorted_values[i + 1])
    return a + frac * (b - a)


def summarize(samples, ci_level: float = 0.95) -> SummaryStats:
    """Summary statistics of a finite sample list.

    std uses the n-1 denominator (0 for a single sample); quantiles follow
    :func:`quantile`; the CI is the central percentile interval at ci_level.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise VarcastError("summarize requires at least one sample")
    if not np.all(np.isfinite(arr)):
        raise VarcastError("summarize requires finite samples")
    if not (0.0 < ci_level < 1.0):
        raise VarcastError("ci_level must be in (0, 1)")
    s = np.sort(arr)
    mean = float(np.mean(s))
    std = 0.0 if s.size == 1 else float(np.std(s, ddof=1))
    alpha = (1.0 - ci_level) / 2.0
    return SummaryStats(
        mean=mean,
        std=std,
        median=quantile(s, 0.5),
        iqr=(quantile(s, 0.25), quantile(s, 0.75)),
        ci=(quantile(s, alpha), quantile(s, 1.0 - alpha)),
        ci_level=ci_level,
    )


def substream(seed: int, sim_index: int) -> np.random.Generator:
    """Independent deterministic stream for one simulation index.

    Counter-based: the 256-bit Philox counter's high word is the simulation
    index, so streams never overlap and draw j of simulation s is a pure
    function of (seed, s, j).
    """
    return np.random.Generator(np.random.Philox(key=int(seed), counter=(int(sim_index) << 192)))


@dataclass(frozen=True)
class AssumptionDraw:
    """One assumption's perturbation spec plus its shocked-path builder.

    ``build_path`` maps a drawn percent change to (level path of length h,
    clamped flag); clamping at -100 happens inside the builder.
    """

    label: str
    column: int
    change_pct: float
    uncertainty_std_pct: float
    build_path: Callable[[float], tuple[np.ndarray, bool]]


@dataclass(frozen=True)
class ImpactSlot:
    """Where to read one impact out of the forecast matrix."""

    label: str
    column: int
    step: int  # 0-based final horizon step


@dataclass
class ImpactDistribution:
    label: str
    samples: np.ndarray
    stats: SummaryStats
    absolute: bool
    path_mean: np.ndarray
    path_lo: np.ndarray
    path_hi: np.ndarray


@dataclass
class SimulationResult:
    impacts: list[ImpactDistribution]
    n_sims: int
    aborted: int
    clamped_draws: int


def _psd_factor(sigma: np.ndarray) -> np.ndarray:
    """Factor L with L L^T = sigma, tolerant of semi-definite inputs."""
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(sigma)
        return vecs @ np.diag(np.sqrt(np.clip(vals, 0.0, None)))


def run(
    forecaster,
    baseline_forecast: np.ndarray,
    assumptions: list[AssumptionDraw],
    impacts: list[ImpactSlot],
    config: SimulationConfig,
    n_workers: int = 1,
) -> SimulationResult:
    """Run the simulation loop and aggregate per-impact distributions.

    ``forecaster`` must expose ``forecast_levels(paths, noise)`` returning an
    (h, k) level matrix, plus ``horizon``, ``k`` and ``sigma_u`` attributes;
    ``baseline_forecast`` is its zero-change forecast. Draw order per
    simulation is fixed: one standard normal per assumption (in order), then
    the h x k residual noise block when enabled. Aggregation is by
    simulation index, never completion order.
    """
    h, k = baseline_forecast.shape
    n = config.n_sims
    noise_factor = _psd_factor(np.asarray(forecaster.sigma_u, dtype=float))

    base_at = {}
    for slot in impacts:
        if not (0 <= slot.step < h):
            raise VarcastError(f"impact step {slot.step} outside horizon {h}")
        base_at[slot.label] = float(baseline_forecast[slot.step, slot.column])

    samples = np.full((n, len(impacts)), np.nan)
    paths = np.full((n, h, len(impacts)), np.nan)
    aborted = np.zeros(n, dtype=bool)
    clamped = np.zeros(n, dtype=np.int64)

    def run_one(s: int) -> None:
        rng = substream(config.seed, s)
        pinned = {}
        n_clamped = 0
        for a in assumptions:
            z = rng.standard_normal()
            drawn = a.change_pct + a.uncertainty_std_pct * z
            path, was_clamped = a.build_path(drawn)
            pinned[a.column] = path
            n_clamped += int(was_clamped)
        noise = None
        if config.include_residual_noise:
            noise = rng.standard_normal((h, k)) @ noise_factor.T
        levels = forecaster.forecast_levels(pinned, noise)
        clamped[s] = n_clamped
        if not np.all(np.isfinite(levels)):
            aborted[s] = True
            return
        for j, slot in enumerate(impacts):
            shocked = float(levels[slot.step, slot.column])
            base = base_at[slot.label]
            if abs(base) < PERCENT_DENOMINATOR_EPS:
                samples[s, j] = shocked - base
            else:
                samples[s, j] = 100.0 * (shocked - base) / abs(base)
            paths[s, :, j] = levels[:, slot.column]

    if n_workers <= 1:
        for s in range(n):
            run_one(s)
    else:
        chunk = max(1, math.ceil(n / n_workers))
        ranges = [range(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]

        def run_chunk(r):
            for s in r:
                run_one(s)

        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(run_chunk, ranges))

    n_aborted = int(aborted.sum())
    if n_aborted > ABORT_TOLERANCE * n:
        raise SimulationError(
            f"{n_aborted} of {n} simulations produced non-finite forecasts "
            f"(tolerance {ABORT_TOLERANCE:.0%}); the model is likely unstable"
        )
    ok = ~aborted

    result_impacts = []
    alpha = (1.0 - config.ci_level) / 2.0
    for j, slot in enumerate(impacts):
        vals = samples[ok, j]
        stats = summarize(vals, config.ci_level)
        sorted_paths = np.sort(paths[ok, :, j], axis=0)
        result_impacts.append(
            ImpactDistribution(
                label=slot.label,
                samples=vals,
                stats=stats,
                absolute=abs(base_at[slot.label]) < PERCENT_DENOMINATOR_EPS,
                path_mean=paths[ok, :, j].mean(axis=0),
                path_lo=np.array([quantile(sorted_paths[:, t], alpha) for t in range(h)]),
                path_hi=np.array([quantile(sorted_paths[:, t], 1.0 - alpha) for t in range(h)]),
            )
        )
    return SimulationResult(
        impacts=result_impacts,
        n_sims=n,
        aborted=n_aborted,
        clamped_draws=int(clamped.sum()),
    )
