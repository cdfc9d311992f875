"""Vector autoregression: equation-by-equation OLS, AIC order selection on a
common sample, and the deterministic multi-step forecast recursion

    y_t = c + sum_{j=1..p} Theta_j y_{t-j} + e_t
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._linalg import ols
from .arima import information_criteria
from .errors import SingularMatrixError, ValidationError, ZeroVarianceError


@dataclass
class VarFit:
    p: int
    c: np.ndarray                   # n-vector intercept
    coeff: np.ndarray               # (p, n, n); coeff[j] multiplies y_{t-j-1}
    resid_cov: np.ndarray           # n x n, residual cross-moment / (T - p)
    loglik: float
    aic: float
    variable_names: tuple[str, ...]
    n_obs_used: int

    @property
    def n_vars(self) -> int:
        return len(self.c)

    @property
    def n_params(self) -> int:
        n = self.n_vars
        return n + self.p * n * n


def _design(y: np.ndarray, p: int, offset: int) -> tuple[np.ndarray, np.ndarray]:
    """Stacked regressors [1, y_{t-1}, ..., y_{t-p}] for rows t = offset..T-1."""
    t_total, n = y.shape
    rows = t_total - offset
    cols = [np.ones((rows, 1))]
    for j in range(1, p + 1):
        cols.append(y[offset - j : t_total - j])
    return np.hstack(cols), y[offset:]


def _gaussian_loglik(resid: np.ndarray, cov: np.ndarray) -> float:
    t_eff, n = resid.shape
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise SingularMatrixError("residual covariance is not positive definite")
    # trace term equals n * t_eff at the ML covariance
    return -0.5 * t_eff * (n * math.log(2.0 * math.pi) + logdet + n)


def fit_var(
    y: np.ndarray,
    p: int,
    variable_names: Optional[Sequence[str]] = None,
    _offset: Optional[int] = None,
) -> VarFit:
    """OLS VAR(p) on a T x n matrix (identical regressors per equation).

    p <= 0 collapses to the intercept-only model. The residual covariance
    divides by the effective sample T - p (maximum-likelihood convention)
    and the AIC counts n + p*n^2 mean parameters.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 2:
        raise ValidationError("Y must be a T x n matrix")
    t_total, n = y.shape
    p = max(0, int(p))
    if variable_names is None:
        variable_names = tuple(f"y{i}" for i in range(n))
    else:
        variable_names = tuple(variable_names)
        if len(variable_names) != n:
            raise ValidationError("variable_names must match the column count")
    if t_total <= n * p + 1:
        raise ValidationError(
            f"T={t_total} observations cannot support VAR({p}) in {n} variables"
        )
    if np.any(np.ptp(y, axis=0) == 0.0):
        flat = [variable_names[i] for i in range(n) if np.ptp(y[:, i]) == 0.0]
        raise ZeroVarianceError(f"columns with zero variance: {', '.join(flat)}")

    offset = p if _offset is None else _offset
    if offset < p:
        raise ValidationError("offset must be >= p")
    design, target = _design(y, p, offset)
    t_eff = len(target)
    res = ols(design, target, context=f"VAR({p})")
    params = res.params                 # (1 + p*n) x n
    resid = target - design @ params
    cov = resid.T @ resid / t_eff
    loglik = _gaussian_loglik(resid, cov)
    k = n + p * n * n
    aic, _ = information_criteria(loglik, k, t_eff)
    coeff = np.zeros((p, n, n))
    for j in range(p):
        # params rows 1 + j*n .. 1 + (j+1)*n hold Theta_{j+1}' (regressors are stacked)
        coeff[j] = params[1 + j * n : 1 + (j + 1) * n].T
    return VarFit(
        p=p,
        c=params[0].copy(),
        coeff=coeff,
        resid_cov=cov,
        loglik=loglik,
        aic=aic,
        variable_names=variable_names,
        n_obs_used=t_eff,
    )


def select_var_order(
    y: np.ndarray,
    p_max: int = 20,
    variable_names: Optional[Sequence[str]] = None,
) -> tuple[VarFit, dict[int, float]]:
    """Fit VAR(0..p_max), compare AIC on the common sample, refit the winner.

    All candidates are estimated on rows p_max..T-1 so their criteria are
    comparable; ties go to the smaller p; the returned fit is re-estimated
    at the chosen order on its full usable sample.
    """
    y = np.asarray(y, dtype=float)
    if p_max < 0:
        raise ValidationError("p_max must be >= 0")
    table: dict[int, float] = {}
    best_p, best_aic = 0, np.inf
    for p in range(p_max + 1):
        fit = fit_var(y, p, variable_names=variable_names, _offset=p_max)
        table[p] = fit.aic
        if fit.aic < best_aic:
            best_p, best_aic = p, fit.aic
    return fit_var(y, best_p, variable_names=variable_names), table


def forecast_var(fit: VarFit, last_obs: np.ndarray, horizon: int = 7) -> np.ndarray:
    """Deterministic horizon x n forecast with future innovations at zero.

    last_obs holds the most recent p observations, oldest first (ignored,
    but required shape (0, n) or any (p, n), when p = 0).
    """
    if horizon < 1:
        raise ValidationError("horizon must be >= 1")
    n = fit.n_vars
    last_obs = np.asarray(last_obs, dtype=float).reshape(-1, n)
    if fit.p > 0 and len(last_obs) != fit.p:
        raise ValidationError(
            f"last_obs must hold exactly p={fit.p} rows, got {len(last_obs)}"
        )
    history = [row.copy() for row in last_obs]
    out = np.zeros((horizon, n))
    for h in range(horizon):
        val = fit.c.copy()
        for j in range(1, fit.p + 1):
            val += fit.coeff[j - 1] @ history[len(history) - j]
        out[h] = val
        history.append(val)
    return out


def var_unconditional_mean(fit: VarFit) -> np.ndarray:
    """(I - sum Theta_j)^-1 c; the horizon-infinity point of a stable VAR."""
    n = fit.n_vars
    a = np.eye(n) - fit.coeff.sum(axis=0) if fit.p else np.eye(n)
    return np.linalg.solve(a, fit.c)
