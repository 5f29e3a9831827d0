"""Vector autoregression estimated by equation-wise ordinary least squares.

The estimator follows the fit/predict convention: hyperparameters are
constructor arguments, ``fit`` returns ``self`` and exposes fitted state in
trailing-underscore attributes, and ``get_params``/``set_params`` make it
clone-compatible with scikit-learn tooling without importing it.

Model form, for k variables and lag order p:

    y_t = c + A_1 y_{t-1} + ... + A_p y_{t-p} + B x_t + u_t

with intercept c (k), coefficient matrices A_i (k x k), optional exogenous
coefficients B (k x m), and residual covariance sigma_u (k x k).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ExogenousRequiredError,
    LagSelectionError,
    SampleSizeError,
    SingularDesignError,
    VarcastError,
)
from .validation import check_constant_columns, check_matrix

STABILITY_MARGIN = 1e-9


def _design_matrix(Y: np.ndarray, p: int, X: np.ndarray | None):
    """Stack [1, y_{t-1}, ..., y_{t-p}, x_t] rows for t = p..T-1."""
    T, k = Y.shape
    rows = T - p
    blocks = [np.ones((rows, 1))]
    for lag in range(1, p + 1):
        blocks.append(Y[p - lag : T - lag])
    if X is not None:
        blocks.append(X[p:])
    return np.hstack(blocks), Y[p:]


def _column_names(variable_names: list[str], p: int, m: int) -> list[str]:
    names = ["const"]
    for lag in range(1, p + 1):
        names.extend(f"{v}.l{lag}" for v in variable_names)
    names.extend(f"exog{j}" for j in range(m))
    return names


def _dependent_columns(design: np.ndarray, names: list[str]) -> list[str]:
    """Greedy scan for columns that add no rank."""
    offending = []
    kept: list[int] = []
    rank = 0
    for j in range(design.shape[1]):
        candidate = design[:, kept + [j]]
        new_rank = np.linalg.matrix_rank(candidate)
        if new_rank > rank:
            kept.append(j)
            rank = new_rank
        else:
            offending.append(names[j])
    return offending


class VectorAutoregression:
    """VAR(p) with intercept and optional exogenous regressors.

    Parameters
    ----------
    p : int
        Lag order, at least 1.

    Attributes (after fit)
    ----------------------
    k_ : number of endogenous variables
    intercept_ : (k,) intercept vector
    coefs_ : (p, k, k) lag coefficient matrices; coefs_[i] multiplies lag i+1
    exog_coefs_ : (k, m) exogenous coefficients, or None
    sigma_u_ : (k, k) residual covariance, dof-corrected
    residuals_ : (T-p, k) OLS residuals
    n_obs_ : effective sample size T - p
    variable_names_ : column labels used in diagnostics and serialization
    r_squared_ : per-equation R^2
    resid_autocorr_lag1_ : per-equation lag-1 residual autocorrelation
    """

    def __init__(self, p: int = 1):
        self.p = p

    # -- sklearn-style parameter plumbing --------------------------------

    def get_params(self, deep: bool = True) -> dict:
        return {"p": self.p}

    def set_params(self, **params) -> "VectorAutoregression":
        for name, value in params.items():
            if name not in self.get_params():
                raise VarcastError(f"unknown parameter {name!r}")
            setattr(self, name, value)
        return self

    # -- estimation -------------------------------------------------------

    def fit(self, Y, X=None, variable_names: list[str] | None = None) -> "VectorAutoregression":
        if not isinstance(self.p, int) or self.p < 1:
            raise VarcastError(f"lag order p must be an integer >= 1, got {self.p!r}")
        Y = check_matrix(Y, "Y")
        T, k = Y.shape
        m = 0
        if X is not None:
            X = check_matrix(X, "X", min_rows=T)
            if X.shape[0] != T:
                raise VarcastError("X must have the same number of rows as Y")
            m = X.shape[1]
        names = list(variable_names) if variable_names else [f"y{j}" for j in range(k)]
        if len(names) != k:
            raise VarcastError("variable_names length must match the number of columns")

        n_params = 1 + k * self.p + m
        if T < self.p + n_params + 1:
            raise SampleSizeError(
                f"need at least {self.p + n_params + 1} rows to fit VAR({self.p}) "
                f"with k={k}, m={m}; got {T}"
            )
        constant = check_constant_columns(Y, names)
        if constant:
            raise SingularDesignError(
                f"constant columns cannot be fitted: {', '.join(constant)}", constant
            )

        design, targets = _design_matrix(Y, self.p, X)
        col_names = _column_names(names, self.p, m)
        rank = np.linalg.matrix_rank(design)
        if rank < design.shape[1]:
            offending = _dependent_columns(design, col_names)
            raise SingularDesignError(
                f"rank-deficient design (rank {rank} < {design.shape[1]}); "
                f"offending columns: {', '.join(offending)}",
                offending,
            )

        beta, *_ = np.linalg.lstsq(design, targets, rcond=None)
        residuals = targets - design @ beta
        dof = targets.shape[0] - n_params
        sigma_u = (residuals.T @ residuals) / dof

        self.k_ = k
        self.m_ = m
        self.variable_names_ = names
        self.intercept_ = beta[0].copy()
        self.coefs_ = np.stack(
            [beta[1 + i * k : 1 + (i + 1) * k].T for i in range(self.p)]
        )
        self.exog_coefs_ = beta[1 + k * self.p :].T.copy() if m else None
        self.sigma_u_ = sigma_u
        self.residuals_ = residuals
        self.n_obs_ = targets.shape[0]

        sst = ((targets - targets.mean(axis=0)) ** 2).sum(axis=0)
        ssr = (residuals**2).sum(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            self.r_squared_ = np.where(sst > 0, 1.0 - ssr / sst, 0.0)
        self.resid_autocorr_lag1_ = self._lag1_autocorr(residuals)
        return self

    @staticmethod
    def _lag1_autocorr(residuals: np.ndarray) -> np.ndarray:
        centered = residuals - residuals.mean(axis=0)
        denom = (centered**2).sum(axis=0)
        num = (centered[1:] * centered[:-1]).sum(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(denom > 0, num / denom, 0.0)

    def _check_fitted(self) -> None:
        if not hasattr(self, "coefs_"):
            raise VarcastError("model is not fitted")

    # -- stability --------------------------------------------------------

    def companion_matrix(self) -> np.ndarray:
        """(k p) x (k p) VAR(1) companion form of the lag polynomial."""
        self._check_fitted()
        k, p = self.k_, self.p
        comp = np.zeros((k * p, k * p))
        comp[:k] = np.hstack([self.coefs_[i] for i in range(p)])
        if p > 1:
            comp[k:, :-k] = np.eye(k * (p - 1))
        return comp

    def stability(self) -> tuple[bool, float]:
        """(is_stable, spectral radius) of the companion matrix."""
        radius = float(np.max(np.abs(np.linalg.eigvals(self.companion_matrix()))))
        return radius < 1.0 - STABILITY_MARGIN, radius

    def unconditional_mean(self) -> np.ndarray:
        """(I - sum A_i)^-1 c; only meaningful for stable models without exog."""
        self._check_fitted()
        return np.linalg.solve(np.eye(self.k_) - self.coefs_.sum(axis=0), self.intercept_)

    # -- forecasting ------------------------------------------------------

    def forecast(self, history, steps: int, X_future=None) -> np.ndarray:
        """Iterated multi-step forecast; returns a (steps, k) matrix.

        ``history`` supplies at least the last p observed rows. Exogenous
        future values are required exactly when the model was fitted with X.
        """
        self._check_fitted()
        if steps < 0:
            raise VarcastError("steps must be >= 0")
        history = check_matrix(history, "history", min_rows=self.p)
        if history.shape[1] != self.k_:
            raise VarcastError(f"history must have k={self.k_} columns")
        if self.m_:
            if X_future is None:
                raise ExogenousRequiredError(
                    f"model has {self.m_} exogenous variables; X_future is required"
                )
            X_future = check_matrix(X_future, "X_future", min_rows=steps)
            if X_future.shape != (steps, self.m_):
                raise VarcastError(f"X_future must be ({steps}, {self.m_})")
        elif X_future is not None:
            raise VarcastError("model has no exogenous variables; X_future not accepted")

        out = np.empty((steps, self.k_))
        window = list(history[-self.p:])
        for s in range(steps):
            y = self.intercept_.copy()
            for i in range(self.p):
                y += self.coefs_[i] @ window[-1 - i]
            if self.m_:
                y += self.exog_coefs_ @ X_future[s]
            out[s] = y
            window.append(y)
            window.pop(0)
        return out

    def predict(self, history, steps: int, X_future=None) -> np.ndarray:
        """Alias for :meth:`forecast`."""
        return self.forecast(history, steps, X_future)

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        self._check_fitted()
        stable, radius = self.stability()
        return {
            "p": self.p,
            "k": self.k_,
            "variable_names": list(self.variable_names_),
            "intercept": self.intercept_.tolist(),
            "coefs": self.coefs_.tolist(),
            "exog_coefs": None if self.exog_coefs_ is None else self.exog_coefs_.tolist(),
            "sigma_u": self.sigma_u_.tolist(),
            "n_obs": int(self.n_obs_),
            "diagnostics": {
                "stable": stable,
                "stability_radius": radius,
                "r_squared": [float(v) for v in self.r_squared_],
                "resid_autocorr_lag1": [float(v) for v in self.resid_autocorr_lag1_],
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VectorAutoregression":
        model = cls(p=int(d["p"]))
        model.k_ = int(d["k"])
        model.variable_names_ = list(d["variable_names"])
        model.intercept_ = np.asarray(d["intercept"], dtype=float)
        model.coefs_ = np.asarray(d["coefs"], dtype=float)
        model.exog_coefs_ = (
            None if d.get("exog_coefs") is None else np.asarray(d["exog_coefs"], dtype=float)
        )
        model.m_ = 0 if model.exog_coefs_ is None else model.exog_coefs_.shape[1]
        model.sigma_u_ = np.asarray(d["sigma_u"], dtype=float)
        model.n_obs_ = int(d["n_obs"])
        model.residuals_ = np.zeros((0, model.k_))
        model.r_squared_ = np.asarray(d.get("diagnostics", {}).get("r_squared", [0.0] * model.k_))
        model.resid_autocorr_lag1_ = np.asarray(
            d.get("diagnostics", {}).get("resid_autocorr_lag1", [0.0] * model.k_)
        )
        return model


@dataclass(frozen=True)
class LagSelection:
    chosen_p: int
    criterion: str
    scores: tuple  # ((p, score), ...); failed fits carry score=None


def select_lag(Y, p_max: int, criterion: str = "aic", X=None) -> LagSelection:
    """Pick the lag order minimizing an information criterion.

    Every candidate is fitted on the common sample (the first p_max rows of Y
    serve only as presample history) so that scores are comparable. Criterion:
    ln det(sigma_u) + penalty * q / T_eff with q = k (1 + k p + m); penalty is
    2 for AIC, ln(T_eff) for BIC. Ties break toward the smaller p.
    """
    if criterion not in ("aic", "bic"):
        raise VarcastError(f"criterion must be 'aic' or 'bic', got {criterion!r}")
    if p_max < 1:
        raise VarcastError("p_max must be >= 1")
    Y = check_matrix(Y, "Y", min_rows=p_max + 2)
    T, k = Y.shape
    t_eff = T - p_max
    m = 0 if X is None else check_matrix(X, "X").shape[1]

    scores: list[tuple] = []
    errors: list[str] = []
    best_p, best_score = None, None
    for p in range(1, p_max + 1):
        try:
            model = VectorAutoregression(p).fit(
                Y[p_max - p :], X=None if X is None else X[p_max - p :]
            )
        except VarcastError as exc:
            scores.append((p, None))
            errors.append(f"p={p}: {exc}")
            continue
        sign, logdet = np.linalg.slogdet(model.sigma_u_)
        if sign <= 0:
            scores.append((p, None))
            errors.append(f"p={p}: singular residual covariance")
            continue
        q = k * (1 + k * p + m)
        penalty = 2.0 if criterion == "aic" else float(np.log(t_eff))
        score = float(logdet + penalty * q / t_eff)
        scores.append((p, score))
        if best_score is None or score < best_score:
            best_p, best_score = p, score
    if best_p is None:
        raise LagSelectionError("; ".join(errors) or "no candidate lag order could be fitted")
    return LagSelection(chosen_p=best_p, criterion=criterion, scores=tuple(scores))
