"""End-to-end scenario evaluation.

Workflow: resolve and align every scenario series at the coarsest common
frequency, first-difference near-unit-root variables, select the lag order
and fit a joint VAR, then forecast conditionally by pinning the assumption
variables' future values to generated shock paths (path substitution).
Monte Carlo perturbation of the assumption changes quantifies uncertainty,
and the result is a table-shaped report of predicted percent change with
confidence intervals per impact.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from datetime import date

import numpy as np

from . import montecarlo
from .catalog import Catalog
from .errors import PipelineError, VarcastError
from .montecarlo import AssumptionDraw, ImpactSlot, SimulationConfig
from .scenario import Assumption, Scenario, validate
from .series import Frequency, SeriesKey, TimeSeries, coarsest, period_start, to_period
from .var import VectorAutoregression, select_lag

# AR(1) coefficient above which a variable is treated as near-unit-root and
# first-differenced before fitting.
UNIT_ROOT_THRESHOLD = 0.98
MAX_LAG_CAP = 8
MIN_OVERLAP_MARGIN = 10


def generate_assumption_path(
    assumption: Assumption,
    baseline_series: TimeSeries,
    horizon: int,
    drawn_change_pct: float,
) -> tuple[np.ndarray, bool]:
    """Level path an assumption variable is pinned to during forecasting.

    Steps run on the frequency grid of ``baseline_series``, starting the
    period after its last observation. Inside the assumption period a step
    shock multiplies the last observed value by (1 + change/100); a
    linear_ramp interpolates the multiplier from 1 at the period start to the
    full value at the period end. Steps outside the period keep the last
    observed value. Draws below -100 are clamped (flagged in the result).
    """
    if horizon < 1:
        raise VarcastError("horizon must be >= 1")
    clamped = drawn_change_pct < -100.0
    change = max(drawn_change_pct, -100.0)
    freq = baseline_series.key.frequency
    last_date, last_value = baseline_series.last
    origin = to_period(last_date, freq) + 1

    start_p = to_period(assumption.period[0], freq)
    end_p = to_period(assumption.period[1], freq)
    n_in_period = end_p - start_p + 1

    path = np.empty(horizon)
    for s in range(horizon):
        p = origin + s
        if start_p <= p <= end_p:
            if assumption.shock_shape == "linear_ramp":
                multiplier = 1.0 + (change / 100.0) * ((p - start_p + 1) / n_in_period)
            else:
                multiplier = 1.0 + change / 100.0
            path[s] = last_value * multiplier
        else:
            path[s] = last_value
    return path, clamped


class ConditionalForecaster:
    """Iterated VAR forecasting with pinned assumption paths.

    Works in the model's (possibly differenced) space and reconstructs
    levels, so callers only ever see level paths. Residual noise, when
    supplied, is added per step in model space before the pin override.
    """

    def __init__(
        self,
        model: VectorAutoregression,
        history_levels: np.ndarray,
        differenced: np.ndarray,
        horizon: int,
    ):
        self.model = model
        self.history_levels = np.asarray(history_levels, dtype=float)
        self.differenced = np.asarray(differenced, dtype=bool)
        self.horizon = horizon
        self.k = model.k_
        self.sigma_u = model.sigma_u_
        self._last_levels = self.history_levels[-1]
        self._z_history = self._transform(self.history_levels)

    def _transform(self, levels: np.ndarray) -> np.ndarray:
        if not self.differenced.any():
            return levels
        z = levels[1:].copy()
        z[:, self.differenced] = np.diff(levels[:, self.differenced], axis=0)
        return z

    def forecast_levels(self, pinned_paths: dict[int, np.ndarray], noise=None) -> np.ndarray:
        """(h, k) level forecast with assumption columns pinned.

        ``pinned_paths`` maps column index to a length-h level path.
        """
        h = self.horizon
        pins = {}
        for col, path in pinned_paths.items():
            path = np.asarray(path, dtype=float)
            if path.shape != (h,):
                raise VarcastError(f"pinned path for column {col} must have length {h}")
            if self.differenced[col]:
                z_path = np.diff(np.concatenate(([self._last_levels[col]], path)))
            else:
                z_path = path
            pins[col] = z_path

        model = self.model
        window = [row for row in self._z_history[-model.p :]]
        z_out = np.empty((h, self.k))
        for s in range(h):
            z = model.intercept_.copy()
            for i in range(model.p):
                z += model.coefs_[i] @ window[-1 - i]
            if noise is not None:
                z = z + noise[s]
            for col, z_path in pins.items():
                z[col] = z_path[s]
            z_out[s] = z
            window.append(z)
            window.pop(0)

        levels = z_out.copy()
        if self.differenced.any():
            levels[:, self.differenced] = self._last_levels[self.differenced] + np.cumsum(
                z_out[:, self.differenced], axis=0
            )
        return levels


@dataclass
class ImpactResult:
    key: SeriesKey
    horizon: int
    predicted_change_pct: float
    std: float
    median: float
    iqr: tuple[float, float]
    ci: tuple[float, float]
    absolute: bool
    baseline_path: list[float]
    shocked_path_mean: list[float]
    shocked_path_lo: list[float]
    shocked_path_hi: list[float]


@dataclass
class EvaluationReport:
    scenario_id: str
    scenario_name: str
    frequency: str
    forecast_origin: date
    step_dates: list[date]
    impacts: list[ImpactResult]
    diagnostics: dict
    config: SimulationConfig
    warnings: list[str] = field(default_factory=list)
    timing_seconds: float | None = None  # informational; not part of the canonical JSON

    def to_dict(self) -> dict:
        """Canonical JSON-ready form; deterministic for fixed inputs and seed."""
        return {
            "scenario_id": self.scenario_id,
            "scenario_name": self.scenario_name,
            "frequency": self.frequency,
            "forecast_origin": self.forecast_origin.isoformat(),
            "step_dates": [d.isoformat() for d in self.step_dates],
            "impacts": [
                {
                    "key": r.key.to_dict(),
                    "label": r.key.label(),
                    "horizon": r.horizon,
                    "predicted_change_pct": r.predicted_change_pct,
                    "std": r.std,
                    "median": r.median,
                    "iqr": list(r.iqr),
                    "ci": list(r.ci),
                    "absolute": r.absolute,
                    "baseline_path": r.baseline_path,
                    "shocked_path_mean": r.shocked_path_mean,
                    "shocked_path_lo": r.shocked_path_lo,
                    "shocked_path_hi": r.shocked_path_hi,
                }
                for r in self.impacts
            ],
            "diagnostics": self.diagnostics,
            "config": {
                "n_sims": self.config.n_sims,
                "seed": self.config.seed,
                "ci_level": self.config.ci_level,
                "default_uncertainty_std_pct": self.config.default_uncertainty_std_pct,
                "include_residual_noise": self.config.include_residual_noise,
            },
            "warnings": self.warnings,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvaluationReport":
        impacts = [
            ImpactResult(
                key=SeriesKey.from_dict(r["key"]),
                horizon=int(r["horizon"]),
                predicted_change_pct=r["predicted_change_pct"],
                std=r["std"],
                median=r["median"],
                iqr=tuple(r["iqr"]),
                ci=tuple(r["ci"]),
                absolute=r["absolute"],
                baseline_path=list(r["baseline_path"]),
                shocked_path_mean=list(r["shocked_path_mean"]),
                shocked_path_lo=list(r["shocked_path_lo"]),
                shocked_path_hi=list(r["shocked_path_hi"]),
            )
            for r in d["impacts"]
        ]
        return cls(
            scenario_id=d["scenario_id"],
            scenario_name=d["scenario_name"],
            frequency=d["frequency"],
            forecast_origin=date.fromisoformat(d["forecast_origin"]),
            step_dates=[date.fromisoformat(s) for s in d["step_dates"]],
            impacts=impacts,
            diagnostics=d["diagnostics"],
            config=SimulationConfig(**d["config"]),
            warnings=list(d.get("warnings", [])),
        )


def _ar1_coef(col: np.ndarray) -> float:
    design = np.column_stack([np.ones(len(col) - 1), col[:-1]])
    beta, *_ = np.linalg.lstsq(design, col[1:], rcond=None)
    return float(beta[1])


def evaluate(scenario: Scenario, catalog: Catalog, config: SimulationConfig,
             n_workers: int = 1) -> EvaluationReport:
    """Evaluate a scenario against the catalog; deterministic given the seed."""
    started = time.perf_counter()
    report = validate(scenario, catalog)
    if report.status != "valid":
        details = "; ".join(f"{f.code} at {f.path}" for f in report.errors)
        raise PipelineError("validate", f"scenario failed validation: {details}")
    warnings = [f"{f.code}: {f.message}" for f in report.findings]

    keys = [a.key for a in scenario.assumptions] + [m.key for m in scenario.impacts]
    freq = coarsest(k.frequency for k in keys)
    levels, index = catalog.align(keys, freq)
    t, k = levels.shape

    p_max = min(MAX_LAG_CAP, max(1, (t - 1) // (k + 2)))
    if t < p_max + MIN_OVERLAP_MARGIN:
        raise PipelineError(
            "align", f"insufficient overlap: {t} common observations, need {p_max + MIN_OVERLAP_MARGIN}"
        )

    differenced = np.array([_ar1_coef(levels[:, j]) > UNIT_ROOT_THRESHOLD for j in range(k)])
    z = levels[1:].copy() if differenced.any() else levels
    if differenced.any():
        z[:, differenced] = np.diff(levels[:, differenced], axis=0)

    names = [key.label() for key in keys]
    p_max = min(MAX_LAG_CAP, max(1, (z.shape[0] - 1) // (k + 2)))
    try:
        selection = select_lag(z, p_max, criterion="aic")
        model = VectorAutoregression(selection.chosen_p).fit(z, variable_names=names)
    except VarcastError as exc:
        raise PipelineError("fit", str(exc)) from exc
    stable, radius = model.stability()

    horizon = max(m.horizon for m in scenario.impacts)
    origin_period = to_period(index[-1], freq) + 1
    step_dates = [period_start(origin_period + s, freq) for s in range(horizon)]

    forecaster = ConditionalForecaster(model, levels, differenced, horizon)

    draws = []
    for j, a in enumerate(scenario.assumptions):
        column_series = TimeSeries(
            key=a.key, points=[(d, levels[i, j]) for i, d in enumerate(index)]
        )
        std = (
            a.uncertainty_std_pct
            if a.uncertainty_std_pct is not None
            else config.default_uncertainty_std_pct
        )
        draws.append(
            AssumptionDraw(
                label=a.key.label(),
                column=j,
                change_pct=a.change_pct,
                uncertainty_std_pct=std,
                build_path=(
                    lambda drawn, a=a, s=column_series: generate_assumption_path(
                        a, s, horizon, drawn
                    )
                ),
            )
        )
    slots = [
        ImpactSlot(label=m.key.label(), column=len(scenario.assumptions) + j, step=m.horizon - 1)
        for j, m in enumerate(scenario.impacts)
    ]

    baseline_pins = {d.column: d.build_path(0.0)[0] for d in draws}
    baseline = forecaster.forecast_levels(baseline_pins)
    try:
        sim = montecarlo.run(forecaster, baseline, draws, slots, config, n_workers=n_workers)
    except VarcastError as exc:
        raise PipelineError("simulate", str(exc)) from exc

    impacts = []
    for m, slot, dist in zip(scenario.impacts, slots, sim.impacts):
        impacts.append(
            ImpactResult(
                key=m.key,
                horizon=m.horizon,
                predicted_change_pct=dist.stats.mean,
                std=dist.stats.std,
                median=dist.stats.median,
                iqr=dist.stats.iqr,
                ci=dist.stats.ci,
                absolute=dist.absolute,
                baseline_path=[float(v) for v in baseline[:, slot.column]],
                shocked_path_mean=[float(v) for v in dist.path_mean],
                shocked_path_lo=[float(v) for v in dist.path_lo],
                shocked_path_hi=[float(v) for v in dist.path_hi],
            )
        )

    diagnostics = {
        "chosen_p": selection.chosen_p,
        "criterion": selection.criterion,
        "lag_scores": [[p, s] for p, s in selection.scores],
        "stable": stable,
        "stability_radius": radius,
        "differenced": [names[j] for j in range(k) if differenced[j]],
        "n_obs": int(model.n_obs_),
        "r_squared": {names[j]: float(model.r_squared_[j]) for j in range(k)},
        "resid_autocorr_lag1": {
            names[j]: float(model.resid_autocorr_lag1_[j]) for j in range(k)
        },
        "aborted_sims": sim.aborted,
        "clamped_draws": sim.clamped_draws,
    }
    return EvaluationReport(
        scenario_id=scenario.id,
        scenario_name=scenario.name,
        frequency=freq.value,
        forecast_origin=step_dates[0],
        step_dates=step_dates,
        impacts=impacts,
        diagnostics=diagnostics,
        config=config,
        warnings=warnings,
        timing_seconds=time.perf_counter() - started,
    )


def render_report(report: EvaluationReport, format: str = "json") -> bytes:
    """Serialize a report: full JSON, or the summary text table.

    Both renderings are stable across runs for the same report; timing is
    deliberately excluded so equal inputs and seed produce equal bytes.
    """
    if format == "json":
        return json.dumps(report.to_dict(), indent=2).encode("utf-8")
    if format in ("table", "text-table"):
        pct = int(round(report.config.ci_level * 100))
        lines = [f"Impact | Predicted change (%) | {pct}% CI"]
        for r in report.impacts:
            note = " [absolute change]" if r.absolute else ""
            lines.append(
                f"{r.key.label()} | {r.predicted_change_pct:+.1f} | "
                f"({r.ci[0]:.1f}, {r.ci[1]:.1f}){note}"
            )
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise VarcastError(f"unknown report format {format!r}")
