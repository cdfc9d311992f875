"""ARIMA/ARIMAX estimation by conditional sum of squares, AIC grid search,
psi-weight interval forecasting, and residual correlogram checks.

Model, on the d-times-differenced scale w_t:

    w_t = b0 + sum_i ar_i * w_{t-i} + sum_j ma_j * e_{t-j}
               + sum_m beta_m * x_{m,t} + e_t

Exogenous columns enter undifferenced at time t. Estimation conditions on
the first p differenced observations and zero presample innovations; the
CSS objective is minimized exactly by OLS when q = 0 and by a
Hannan-Rissanen-started simplex search otherwise. The Gaussian
log-likelihood is evaluated at sigma2 = CSS / n_effective.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.signal import lfilter
from scipy.stats import norm

from ._linalg import ols
from ._optimize import nelder_mead
from .errors import EstimationError, SingularMatrixError, ValidationError
from .series import difference

CSS_TOL = 1e-10
MAX_ITER = 5000


@dataclass(frozen=True)
class ArimaSpec:
    p: int
    d: int
    q: int

    def __post_init__(self):
        if min(self.p, self.d, self.q) < 0:
            raise ValidationError("p, d, q must be non-negative")

    def __str__(self):
        return f"({self.p},{self.d},{self.q})"


@dataclass
class ArimaFit:
    spec: ArimaSpec
    intercept: float
    ar: np.ndarray
    ma: np.ndarray
    exog_coeffs: dict[str, float]
    sigma2: float
    loglik: float
    aic: float
    bic: float
    residuals: np.ndarray
    n_effective: int
    converged: bool
    css: float
    ma_reflected: bool
    y_train: np.ndarray = field(repr=False)
    w_train: np.ndarray = field(repr=False)

    @property
    def n_params(self) -> int:
        # intercept + AR + MA + exog + innovation variance
        return 1 + self.spec.p + self.spec.q + len(self.exog_coeffs) + 1

    def exog_names(self) -> list[str]:
        return list(self.exog_coeffs)


@dataclass(frozen=True)
class ForecastResult:
    horizon: int
    point: np.ndarray
    bounds: dict[float, tuple[np.ndarray, np.ndarray]]  # alpha -> (lower, upper)
    se: np.ndarray


def information_criteria(loglik: float, k: int, n: int) -> tuple[float, float]:
    """AIC = 2k - 2*loglik, BIC = ln(n)*k - 2*loglik."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    if k < 0:
        raise ValidationError("k must be >= 0")
    return 2.0 * k - 2.0 * loglik, math.log(n) * k - 2.0 * loglik


def _css_residuals(
    w: np.ndarray,
    exog: Optional[np.ndarray],
    p: int,
    q: int,
    params: np.ndarray,
) -> np.ndarray:
    """Innovations over the effective sample t = p..len(w)-1.

    params = [b0, ar (p), ma (q), exog betas]; presample innovations are 0.
    """
    b0 = params[0]
    ar = params[1 : 1 + p]
    ma = params[1 + p : 1 + p + q]
    a = w[p:] - b0
    for i in range(1, p + 1):
        a = a - ar[i - 1] * w[p - i : len(w) - i]
    if exog is not None:
        a = a - exog[p:] @ params[1 + p + q :]
    if q == 0:
        return a
    return lfilter([1.0], np.concatenate(([1.0], ma)), a)


def _hannan_rissanen_start(
    w: np.ndarray, exog: Optional[np.ndarray], p: int, q: int
) -> np.ndarray:
    """Long-AR residual proxy initialization for the CSS search."""
    n = len(w)
    n_exog = 0 if exog is None else exog.shape[1]
    fallback = np.zeros(1 + p + q + n_exog)
    fallback[0] = float(np.mean(w))

    m = min(max(10, 2 * (p + q)), max(1, (n - 1) // 3))
    if n - m < m + 2:
        return fallback
    rows = n - m
    design = np.column_stack(
        [np.ones(rows)] + [w[m - i : n - i] for i in range(1, m + 1)]
    )
    try:
        long_ar = ols(design, w[m:], context="Hannan-Rissanen long AR")
    except SingularMatrixError:
        return fallback
    ehat = long_ar.resid    # aligned with w indices m..n-1

    t0 = max(p, m + q)
    rows = n - t0
    if rows < 1 + p + q + n_exog + 2:
        return fallback
    cols = [np.ones(rows)]
    for i in range(1, p + 1):
        cols.append(w[t0 - i : n - i])
    for j in range(1, q + 1):
        cols.append(ehat[t0 - j - m : n - j - m])
    if exog is not None:
        cols.append(exog[t0:])
    try:
        joint = ols(np.column_stack(cols), w[t0:], context="Hannan-Rissanen joint")
    except SingularMatrixError:
        return fallback
    return joint.params


def _reflect_ma_roots(ma: np.ndarray) -> tuple[np.ndarray, bool]:
    """Move MA polynomial roots outside the unit circle (invertibility)."""
    q = len(ma)
    if q == 0:
        return ma, False
    poly = np.concatenate(([1.0], ma))          # 1 + ma_1 z + ... + ma_q z^q
    roots = np.roots(poly[::-1])
    inside = np.abs(roots) < 1.0 - 1e-10
    if not inside.any():
        return ma, False
    roots = np.where(inside, 1.0 / np.conj(roots), roots)
    rebuilt = np.array([1.0], dtype=complex)
    for r in roots:
        rebuilt = np.convolve(rebuilt, np.array([1.0, -1.0 / r]))
    out = rebuilt[1:].real
    if len(out) < q:    # np.roots drops (near-)zero leading coefficients
        out = np.concatenate((out, np.zeros(q - len(out))))
    return out, True


def fit_arima(
    y: Sequence[float],
    spec: ArimaSpec,
    exog: Optional[np.ndarray] = None,
    exog_names: Optional[Sequence[str]] = None,
    restarts: int = 0,
    seed: int = 0,
) -> ArimaFit:
    """Estimate the model by conditional sum of squares.

    ``exog`` is a (len(y), m) column matrix aligned with y and entering
    undifferenced. With restarts > 0 the simplex search is re-run from that
    many jittered starts (seeded; off by default). A fit that stops on the
    iteration cap is returned with converged=False rather than raised.
    """
    y = np.asarray(y, dtype=float)
    p, d, q = spec.p, spec.d, spec.q
    if exog is not None:
        exog = np.asarray(exog, dtype=float)
        if exog.ndim == 1:
            exog = exog[:, None]
        if len(exog) != len(y):
            raise ValidationError("exog must be row-aligned with y")
        if exog_names is None:
            exog_names = [f"x{i}" for i in range(exog.shape[1])]
        if len(exog_names) != exog.shape[1]:
            raise ValidationError("exog_names length must match exog columns")
    n_exog = 0 if exog is None else exog.shape[1]
    if len(y) <= d + max(p, q) + n_exog + 10:
        raise ValidationError(
            f"series of length {len(y)} too short for spec {spec} with "
            f"{n_exog} exogenous column(s)"
        )

    w = difference(y, d)
    exog_w = exog[d:] if exog is not None else None
    n_eff = len(w) - p

    converged = True
    if q == 0:
        # The CSS objective is linear least squares; OLS is its exact minimum.
        rows = n_eff
        cols = [np.ones(rows)]
        for i in range(1, p + 1):
            cols.append(w[p - i : len(w) - i])
        if exog_w is not None:
            cols.append(exog_w[p:])
        res = ols(np.column_stack(cols), w[p:], context=f"ARIMA{spec} CSS")
        params = res.params
    else:
        start = _hannan_rissanen_start(w, exog_w, p, q)

        def objective(theta: np.ndarray) -> float:
            eps = _css_residuals(w, exog_w, p, q, theta)
            css = float(eps @ eps)
            return css if np.isfinite(css) else 1e300

        params, best_css, converged = nelder_mead(
            objective, start, f_tol_rel=CSS_TOL, max_iter=MAX_ITER
        )
        if restarts > 0:
            rng = np.random.default_rng(seed)
            scale = np.abs(start) * 0.25 + 0.05
            for _ in range(restarts):
                jittered = start + rng.normal(0.0, scale)
                cand, cand_css, cand_conv = nelder_mead(
                    objective, jittered, f_tol_rel=CSS_TOL, max_iter=MAX_ITER
                )
                if cand_css < best_css:
                    params, best_css, converged = cand, cand_css, cand_conv
        if not converged:
            warnings.warn(f"ARIMA{spec} CSS search hit the iteration cap; "
                          "returning best point found")

    ar = np.array(params[1 : 1 + p], dtype=float)
    ma = np.array(params[1 + p : 1 + p + q], dtype=float)
    ma, reflected = _reflect_ma_roots(ma)
    params = np.concatenate(([params[0]], ar, ma, params[1 + p + q :]))

    eps = _css_residuals(w, exog_w, p, q, params)
    css = float(eps @ eps)
    sigma2 = css / n_eff
    loglik = -0.5 * n_eff * (math.log(2.0 * math.pi * sigma2) + 1.0)
    exog_coeffs = {}
    if exog is not None:
        exog_coeffs = {
            name: float(v) for name, v in zip(exog_names, params[1 + p + q :])
        }
    k = 1 + p + q + n_exog + 1
    aic, bic = information_criteria(loglik, k, n_eff)
    return ArimaFit(
        spec=spec,
        intercept=float(params[0]),
        ar=ar,
        ma=ma,
        exog_coeffs=exog_coeffs,
        sigma2=sigma2,
        loglik=loglik,
        aic=aic,
        bic=bic,
        residuals=eps,
        n_effective=n_eff,
        converged=converged,
        css=css,
        ma_reflected=reflected,
        y_train=y.copy(),
        w_train=w,
    )


@dataclass(frozen=True)
class GridSearchResult:
    fits: list[ArimaFit]                    # ranked by (aic, p+q, p)
    failures: list[tuple[ArimaSpec, str]]


def grid_search(
    y: Sequence[float],
    exog: Optional[np.ndarray] = None,
    p_range: Sequence[int] = range(0, 4),
    d: int = 0,
    q_range: Sequence[int] = range(0, 4),
    exog_names: Optional[Sequence[str]] = None,
) -> GridSearchResult:
    """Fit every (p, d, q) combination and rank by AIC ascending.

    Failed cells are recorded and excluded from the ranking; ties break by
    p+q then p ascending. Raises EstimationError when every cell fails.
    """
    p_values = sorted(set(p_range))
    q_values = sorted(set(q_range))
    if not p_values or not q_values:
        raise ValidationError("p_range and q_range must be nonempty")
    fits: list[ArimaFit] = []
    failures: list[tuple[ArimaSpec, str]] = []
    for p in p_values:
        for q in q_values:
            spec = ArimaSpec(p, d, q)
            try:
                fits.append(fit_arima(y, spec, exog=exog, exog_names=exog_names))
            except Exception as exc:       # cell failure is data, not fatal
                failures.append((spec, f"{type(exc).__name__}: {exc}"))
    if not fits:
        raise EstimationError(
            "every grid cell failed: "
            + "; ".join(f"{spec}: {msg}" for spec, msg in failures)
        )
    fits.sort(key=lambda f: (f.aic, f.spec.p + f.spec.q, f.spec.p))
    return GridSearchResult(fits=fits, failures=failures)


def psi_weights(ar: np.ndarray, ma: np.ndarray, d: int, n: int) -> np.ndarray:
    """First n psi weights of the ARIMA process on the undifferenced scale.

    The differencing operator is folded into the AR polynomial:
    (1 - sum ar_i L^i)(1 - L)^d, then psi_j = ma_j + sum a_i psi_{j-i}.
    """
    poly = np.concatenate(([1.0], -np.asarray(ar, dtype=float)))
    for _ in range(d):
        poly = np.convolve(poly, [1.0, -1.0])
    a = -poly[1:]           # full AR coefficients a_i
    psi = np.zeros(n)
    psi[0] = 1.0
    for j in range(1, n):
        acc = ma[j - 1] if j <= len(ma) else 0.0
        for i in range(1, min(j, len(a)) + 1):
            acc += a[i - 1] * psi[j - i]
        psi[j] = acc
    return psi


def forecast(
    fit: ArimaFit,
    horizon: int,
    significances: Sequence[float] = (0.05, 0.01),
    future_exog: Optional[np.ndarray] = None,
) -> ForecastResult:
    """Iterate the fitted recursion forward with future innovations at zero.

    Differencing is inverted back to the original scale; the h-step
    standard error comes from the psi-weight recursion and two-sided normal
    bounds are point +/- z_{1-alpha/2} * se_h per significance level.
    """
    if horizon < 1:
        raise ValidationError("horizon must be >= 1")
    p, d, q = fit.spec.p, fit.spec.d, fit.spec.q
    n_exog = len(fit.exog_coeffs)
    if n_exog and future_exog is None:
        raise ValidationError("fit has exogenous columns; future_exog is required")
    if not n_exog and future_exog is not None:
        raise ValidationError("fit has no exogenous columns; future_exog given")
    if future_exog is not None:
        future_exog = np.asarray(future_exog, dtype=float)
        if future_exog.ndim == 1:
            future_exog = future_exog[:, None]
        if future_exog.shape != (horizon, n_exog):
            raise ValidationError(
                f"future_exog must be ({horizon}, {n_exog}), got {future_exog.shape}"
            )

    w = fit.w_train
    t_last = len(w) - 1
    beta = np.array([fit.exog_coeffs[n] for n in fit.exog_names()])
    w_fc = np.zeros(horizon)

    def w_at(s: int) -> float:
        return w[s] if s <= t_last else w_fc[s - t_last - 1]

    def eps_at(s: int) -> float:
        if s > t_last or s < p:
            return 0.0
        return float(fit.residuals[s - p])

    for h in range(1, horizon + 1):
        s = t_last + h
        val = fit.intercept
        for i in range(1, p + 1):
            val += fit.ar[i - 1] * w_at(s - i)
        for j in range(1, q + 1):
            val += fit.ma[j - 1] * eps_at(s - j)
        if n_exog:
            val += float(future_exog[h - 1] @ beta)
        w_fc[h - 1] = val

    point = w_fc
    for level in range(d - 1, -1, -1):
        head = difference(fit.y_train, level)[-1]
        point = head + np.cumsum(point)

    psi = psi_weights(fit.ar, fit.ma, d, horizon)
    se = np.sqrt(fit.sigma2 * np.cumsum(psi**2))
    bounds: dict[float, tuple[np.ndarray, np.ndarray]] = {}
    for alpha in significances:
        if not 0.0 < alpha < 1.0:
            raise ValidationError(f"significance {alpha} outside (0, 1)")
        z = float(norm.ppf(1.0 - alpha / 2.0))
        bounds[alpha] = (point - z * se, point + z * se)
    return ForecastResult(horizon=horizon, point=point, bounds=bounds, se=se)


@dataclass(frozen=True)
class AcfResult:
    acf: np.ndarray             # lags 0..max_lag
    band: float                 # +/- 1.96 / sqrt(n)
    flagged: tuple[int, ...]    # lags outside the band


def residual_acf(fit: ArimaFit, max_lag: int) -> AcfResult:
    """Sample autocorrelations of the fit residuals with a 1.96/sqrt(n) band."""
    e = fit.residuals
    n = len(e)
    if n <= max_lag:
        raise ValidationError(f"{n} residuals cannot support max_lag={max_lag}")
    band = 1.96 / math.sqrt(n)
    centered = e - e.mean()
    denom = float(centered @ centered)
    acf = np.zeros(max_lag + 1)
    acf[0] = 1.0
    if denom == 0.0:
        warnings.warn("constant residuals: ACF defined as 0 beyond lag 0")
        return AcfResult(acf=acf, band=band, flagged=())
    for lag in range(1, max_lag + 1):
        acf[lag] = float(centered[lag:] @ centered[:-lag]) / denom
    flagged = tuple(l for l in range(1, max_lag + 1) if abs(acf[l]) > band)
    return AcfResult(acf=acf, band=band, flagged=flagged)
