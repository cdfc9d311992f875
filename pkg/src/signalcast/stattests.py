"""Stationarity testing, automatic differencing, Granger causality, and the
component-ranking procedure used for exogenous feature selection.

The ADF regression is the constant-only form: Delta y_t on y_{t-1}, lagged
differences, and an intercept, with the augmentation lag chosen by AIC over
a common sample. P-values come from MacKinnon's (1994) response-surface
polynomials for the constant-only single-series case; finite-sample
critical values use the MacKinnon (2010) surfaces. Both sets of constants
are hard-coded below.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import f as f_dist
from scipy.stats import norm

from ._linalg import ols
from .errors import (
    NonStationaryError,
    SingularMatrixError,
    ValidationError,
    ZeroVarianceError,
)
from .series import N_SENTIMENTS, CaseSeries, SeriesTensor, component_name, difference

# MacKinnon (1994) p-value response surface, regression="c", one series.
_TAU_MAX = 2.74
_TAU_MIN = -18.83
_TAU_STAR = -1.61
_SMALL_P = (2.1659, 1.4412, 0.038269)
_LARGE_P = (1.7339, 0.93202, -0.12745, -0.010368)

# MacKinnon (2010) critical-value surface, regression="c":
# crit = b0 + b1/n + b2/n^2 + b3/n^3.
_CRIT_2010 = {
    0.01: (-3.43035, -6.5393, -16.786, -79.433),
    0.05: (-2.86154, -2.8903, -4.234, -40.040),
    0.10: (-2.56677, -1.5384, -2.809, 0.0),
}


def mackinnon_pvalue(statistic: float) -> float:
    """Approximate ADF p-value (constant-only regression)."""
    if statistic > _TAU_MAX:
        return 1.0
    if statistic < _TAU_MIN:
        return 0.0
    coeffs = _SMALL_P if statistic <= _TAU_STAR else _LARGE_P
    z = sum(c * statistic**i for i, c in enumerate(coeffs))
    return float(norm.cdf(z))


def adf_critical_values(nobs: int) -> dict[float, float]:
    """Finite-sample 1%/5%/10% critical values (constant-only regression)."""
    return {
        level: b[0] + b[1] / nobs + b[2] / nobs**2 + b[3] / nobs**3
        for level, b in _CRIT_2010.items()
    }


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    p_value: float
    chosen_lag: int
    reject_h0: bool     # H0 = unit root; rejection means stationary
    alpha: float
    nobs: int


def _adf_design(x: np.ndarray, lag: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows for Delta y_t ~ [y_{t-1}, Delta y_{t-1..lag}, 1]."""
    dx = np.diff(x)
    nobs = len(dx) - lag
    y = dx[lag:]
    cols = [x[lag:-1]]
    for i in range(1, lag + 1):
        cols.append(dx[lag - i : len(dx) - i])
    cols.append(np.ones(nobs))
    return y, np.column_stack(cols)


def default_adf_max_lag(nobs: int) -> int:
    """Schwert's rule: ceil(12 * (n/100)^0.25), capped for sample usability."""
    lag = int(np.ceil(12.0 * (nobs / 100.0) ** 0.25))
    return max(0, min(lag, nobs // 2 - 2))


def adf_test(
    series: Sequence[float],
    max_lag: Optional[int] = None,
    regression: str = "c",
    alpha: float = 0.05,
) -> AdfResult:
    """Augmented Dickey-Fuller unit-root test, constant-only regression.

    The augmentation lag minimizes OLS AIC over 0..max_lag computed on a
    shared sample (so the criteria are comparable), then the reported
    statistic comes from a refit at the chosen lag on its full usable
    sample. reject_h0 is p_value < alpha.
    """
    if regression != "c":
        raise ValidationError("only the constant-only regression is implemented")
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValidationError("series must be one-dimensional")
    if np.ptp(x) == 0.0:
        raise ZeroVarianceError("cannot run the ADF test on a constant series")
    if max_lag is None:
        max_lag = default_adf_max_lag(len(x))
    if len(x) <= max_lag + 10:
        raise ValidationError(
            f"series of length {len(x)} too short for max_lag={max_lag}"
        )

    y_full, x_full = _adf_design(x, max_lag)
    best_lag, best_aic = 0, np.inf
    for lag in range(max_lag + 1):
        cols = [0] + list(range(1, lag + 1)) + [max_lag + 1]
        res = ols(x_full[:, cols], y_full, context=f"ADF lag selection (lag {lag})")
        aic = 2.0 * len(cols) - 2.0 * res.loglik()
        if aic < best_aic:
            best_lag, best_aic = lag, aic

    y_sel, x_sel = _adf_design(x, best_lag)
    res = ols(x_sel, y_sel, context=f"ADF regression (lag {best_lag})")
    tau = float(res.params[0] / res.stderr()[0])
    p_value = mackinnon_pvalue(tau)
    return AdfResult(
        statistic=tau,
        p_value=p_value,
        chosen_lag=best_lag,
        reject_h0=bool(p_value < alpha),
        alpha=alpha,
        nobs=res.nobs,
    )


def ensure_stationary(
    series: Sequence[float],
    max_d: int = 2,
    alpha: float = 0.05,
    max_lag: Optional[int] = None,
) -> tuple[np.ndarray, int]:
    """Difference until the ADF test rejects the unit root, up to max_d times.

    Returns (differenced series, d used) for the first passing order;
    raises NonStationaryError carrying the last AdfResult otherwise.
    """
    if max_d < 0:
        raise ValidationError("max_d must be >= 0")
    result = None
    for d in range(max_d + 1):
        diffed = difference(series, d)
        result = adf_test(diffed, max_lag=max_lag, alpha=alpha)
        if result.reject_h0:
            return diffed, d
    raise NonStationaryError(
        f"series still non-stationary after d={max_d} "
        f"(last p-value {result.p_value:.4f})",
        adf_result=result,
    )


@dataclass(frozen=True)
class GrangerResult:
    per_lag: dict[int, tuple[float, float]]     # lag -> (F statistic, p-value)
    significant_count: int
    alpha: float
    max_lag: int


def _lag_matrix(series: np.ndarray, lag: int, t0: int) -> np.ndarray:
    """Columns series_{t-1} .. series_{t-lag} for rows t = t0..end."""
    return np.column_stack([series[t0 - i : len(series) - i] for i in range(1, lag + 1)])


def granger_test(
    x: Sequence[float],
    y: Sequence[float],
    max_lag: int = 14,
    alpha: float = 0.05,
) -> GrangerResult:
    """SSR-based Granger F-tests of "x helps predict y" at lags 1..max_lag.

    Both series must already be stationary; this function never
    re-differences. For each lag L the restricted model regresses y_t on a
    constant and y_{t-1..L}; the unrestricted model adds x_{t-1..L};
    F = ((SSR_r - SSR_u)/L) / (SSR_u/(n - 2L - 1)) with n the number of
    regression rows, referred to F(L, n - 2L - 1).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("x and y must be equal-length one-dimensional series")
    if max_lag < 1:
        raise ValidationError("max_lag must be >= 1")
    n_total = len(y)
    worst_df = (n_total - max_lag) - 2 * max_lag - 1
    if worst_df < 1:
        raise ValidationError(
            f"series of length {n_total} too short for max_lag={max_lag}"
        )
    per_lag: dict[int, tuple[float, float]] = {}
    significant = 0
    for lag in range(1, max_lag + 1):
        target = y[lag:]
        nobs = len(target)
        const = np.ones(nobs)
        y_lags = _lag_matrix(y, lag, lag)
        x_lags = _lag_matrix(x, lag, lag)
        try:
            restricted = ols(
                np.column_stack([const, y_lags]), target,
                context=f"Granger restricted model (lag {lag})",
            )
            unrestricted = ols(
                np.column_stack([const, y_lags, x_lags]), target,
                context=f"Granger unrestricted model (lag {lag})",
            )
        except SingularMatrixError as exc:
            raise SingularMatrixError(f"lag {lag}: {exc}") from exc
        df_denom = nobs - 2 * lag - 1
        f_stat = max(
            0.0,
            ((restricted.ssr - unrestricted.ssr) / lag) / (unrestricted.ssr / df_denom),
        )
        p_value = float(f_dist.sf(f_stat, lag, df_denom))
        per_lag[lag] = (f_stat, p_value)
        if p_value < alpha:
            significant += 1
    return GrangerResult(
        per_lag=per_lag,
        significant_count=significant,
        alpha=alpha,
        max_lag=max_lag,
    )


@dataclass(frozen=True)
class FeatureRank:
    index: int          # flattened component index, topic * 3 + sentiment
    topic: int
    sentiment: int
    name: str
    significant_count: int
    d_used: int
    p_values: tuple[float, ...]     # per lag, 1..max_lag


def select_features(
    tensor: SeriesTensor,
    y: CaseSeries,
    max_lag: int = 14,
    alpha: float = 0.05,
    min_count: int = 10,
    max_d: int = 2,
    adf_max_lag: Optional[int] = None,
) -> list[FeatureRank]:
    """Rank tensor components by how many lags they Granger-cause y at.

    Every component and y are differenced to their own passing order via
    ensure_stationary (capped at max_d); when the orders differ the longer
    head is trimmed so the Granger regressions align on common dates.
    Constant components are skipped outright (no variation can
    Granger-cause anything); other numeric failures propagate. Output is
    sorted by significant_count descending (component index ascending on
    ties) and filtered at min_count.
    """
    if (y.start_date, y.end_date) != (tensor.start_date, tensor.end_date):
        raise ValidationError("tensor and y must cover identical date ranges")
    y_st, d_y = ensure_stationary(
        y.values.astype(float), max_d=max_d, alpha=alpha, max_lag=adf_max_lag
    )
    ranked: list[FeatureRank] = []
    for topic in range(tensor.n_topics):
        for sentiment in range(N_SENTIMENTS):
            comp = tensor.component(topic, sentiment).astype(float)
            if np.ptp(comp) == 0.0:
                continue
            comp_st, d_x = ensure_stationary(
                comp, max_d=max_d, alpha=alpha, max_lag=adf_max_lag
            )
            trim = max(d_x, d_y)
            x_al = comp_st[trim - d_x :] if trim > d_x else comp_st
            y_al = y_st[trim - d_y :] if trim > d_y else y_st
            result = granger_test(x_al, y_al, max_lag=max_lag, alpha=alpha)
            ranked.append(
                FeatureRank(
                    index=topic * N_SENTIMENTS + sentiment,
                    topic=topic,
                    sentiment=sentiment,
                    name=component_name(topic, sentiment),
                    significant_count=result.significant_count,
                    d_used=d_x,
                    p_values=tuple(
                        result.per_lag[lag][1] for lag in range(1, max_lag + 1)
                    ),
                )
            )
    ranked = [r for r in ranked if r.significant_count >= min_count]
    ranked.sort(key=lambda r: (-r.significant_count, r.index))
    return ranked


def write_feature_report(path, ranked: Sequence[FeatureRank]) -> None:
    """Feature-ranking CSV: component,topic,sentiment,significant_count,p_values."""
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["component", "topic", "sentiment", "significant_count", "p_values"])
        for r in ranked:
            writer.writerow(
                [r.name, r.topic, r.sentiment, r.significant_count,
                 ";".join(f"{p:.6g}" for p in r.p_values)]
            )
