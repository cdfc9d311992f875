"""Forecast-quality metrics and the train/test backtest harness.

RMSE and MAPE follow the usual definitions (MAPE in percent, reported as
absent with a reason when any actual is zero). The r2 field is the squared
Pearson correlation between actuals and predictions (the R2 of regressing
actual on predicted): it rewards trend agreement even when the forecast
level is off, where the 1 - SSE/SST variant goes negative for biased but
well-correlated forecasts. A constant side yields r2 = 0 (no measurable
linear association), so the mean-predictor scores exactly 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from typing import Optional, Sequence, Union

import numpy as np

from .arima import ArimaFit, ArimaSpec, ForecastResult, fit_arima, forecast
from .errors import ValidationError
from .series import CaseSeries
from .var import VarFit, fit_var, forecast_var


@dataclass(frozen=True)
class MetricsReport:
    rmse: float
    mape: Optional[float]       # percent; None when undefined
    mape_reason: Optional[str]
    r2: float
    n: int


def metrics(actual: Sequence[float], predicted: Sequence[float]) -> MetricsReport:
    """Score predictions against actuals (RMSE, MAPE %, squared correlation)."""
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if a.shape != p.shape or a.ndim != 1:
        raise ValidationError("actual and predicted must be equal-length 1-d series")
    if len(a) == 0:
        raise ValidationError("empty input")
    err = a - p
    rmse = float(np.sqrt(np.mean(err**2)))
    if np.any(a == 0.0):
        mape, mape_reason = None, "undefined: actuals contain zero values"
    else:
        mape, mape_reason = float(100.0 * np.mean(np.abs(err / a))), None
    if np.ptp(a) == 0.0 or np.ptp(p) == 0.0:
        r2 = 0.0
    else:
        r = float(np.corrcoef(a, p)[0, 1])
        r2 = r * r
    return MetricsReport(rmse=rmse, mape=mape, mape_reason=mape_reason, r2=r2, n=len(a))


Model = Union[ArimaSpec, int]


@dataclass(frozen=True)
class BacktestResult:
    fit: Union[ArimaFit, VarFit]
    point_forecast: np.ndarray
    interval_forecast: Optional[ForecastResult]     # None for VAR models
    test_dates: tuple[date, ...]
    test_actual: np.ndarray
    point_metrics: MetricsReport
    upper_metrics: dict[float, MetricsReport]       # per significance


def backtest(
    y: CaseSeries,
    split: date,
    model: Model,
    exog: Optional[np.ndarray] = None,
    exog_names: Optional[Sequence[str]] = None,
    significances: Sequence[float] = (0.05, 0.01),
) -> BacktestResult:
    """Fit on dates <= split, forecast the rest, and score.

    ``model`` is an ArimaSpec (ARIMA, or ARIMAX when exog columns are
    given) or an integer VAR order, in which case y and the exog columns
    are modelled jointly and the y equation's forecast is scored. Interval
    (upper-bound) metrics are reported per significance for ARIMA-family
    fits; point-forecast metrics are always reported. The fit never sees
    test-segment y values.
    """
    dates = y.dates()
    if not (y.start_date <= split < y.end_date):
        raise ValidationError(
            f"split {split} must lie strictly inside {y.start_date}..{y.end_date}"
        )
    n_train = (split - y.start_date).days + 1
    horizon = len(dates) - n_train
    y_train = y.values[:n_train].astype(float)
    y_test = y.values[n_train:].astype(float)
    test_dates = tuple(dates[n_train:])

    if exog is not None:
        exog = np.asarray(exog, dtype=float)
        if exog.ndim == 1:
            exog = exog[:, None]
        if len(exog) != len(dates):
            raise ValidationError("exog must be row-aligned with y")

    if isinstance(model, ArimaSpec):
        exog_train = exog[:n_train] if exog is not None else None
        fit = fit_arima(y_train, model, exog=exog_train, exog_names=exog_names)
        future_exog = exog[n_train:] if exog is not None else None
        fc = forecast(fit, horizon, significances=significances, future_exog=future_exog)
        point = fc.point
        upper_metrics = {
            alpha: metrics(y_test, upper) for alpha, (_, upper) in fc.bounds.items()
        }
        interval = fc
    elif isinstance(model, int):
        if exog is None:
            matrix_train = y_train[:, None]
            names = ("y",)
        else:
            matrix_train = np.column_stack([y_train, exog[:n_train]])
            names = ("y",) + tuple(exog_names or (f"x{i}" for i in range(exog.shape[1])))
        fit = fit_var(matrix_train, model, variable_names=names)
        last_obs = matrix_train[len(matrix_train) - fit.p :] if fit.p else matrix_train[:0]
        point = forecast_var(fit, last_obs, horizon)[:, 0]
        upper_metrics = {}
        interval = None
    else:
        raise ValidationError(f"model must be an ArimaSpec or VAR order, got {model!r}")

    return BacktestResult(
        fit=fit,
        point_forecast=point,
        interval_forecast=interval,
        test_dates=test_dates,
        test_actual=y_test,
        point_metrics=metrics(y_test, point),
        upper_metrics=upper_metrics,
    )
