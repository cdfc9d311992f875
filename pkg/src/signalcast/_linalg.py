"""Least squares via normal equations with an explicit conditioning gate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrixError

# Condition estimate of X'X above this is treated as singular.
COND_LIMIT = 1e12


@dataclass(frozen=True)
class OlsResult:
    params: np.ndarray
    resid: np.ndarray
    ssr: float
    nobs: int
    xtx_inv: np.ndarray

    @property
    def n_params(self) -> int:
        return len(self.params)

    def stderr(self) -> np.ndarray:
        dof = self.nobs - self.n_params
        sigma2 = self.ssr / dof
        return np.sqrt(sigma2 * np.diag(self.xtx_inv))

    def loglik(self) -> float:
        """Gaussian log-likelihood at the ML variance ssr/nobs."""
        sigma2 = self.ssr / self.nobs
        return -0.5 * self.nobs * (np.log(2.0 * np.pi * sigma2) + 1.0)


def ols(x: np.ndarray, y: np.ndarray, context: str = "") -> OlsResult:
    """Solve min ||y - X b||^2; raises SingularMatrixError when cond(X'X) > 1e12.

    y may be a matrix (one regression per column on shared regressors);
    ssr is then the total over all columns and stderr() does not apply.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or len(x) != len(y):
        raise ValueError("X must be 2-d and row-aligned with y")
    gram = x.T @ x
    eigs = np.linalg.eigvalsh(gram)
    if eigs[0] <= 0 or eigs[-1] / eigs[0] > COND_LIMIT:
        where = f" in {context}" if context else ""
        raise SingularMatrixError(
            f"regressor matrix is numerically singular{where} "
            f"(condition estimate {np.inf if eigs[0] <= 0 else eigs[-1] / eigs[0]:.3g})"
        )
    params = np.linalg.solve(gram, x.T @ y)
    resid = y - x @ params
    return OlsResult(
        params=params,
        resid=resid,
        ssr=float(np.sum(resid * resid)),
        nobs=len(y),
        xtx_inv=np.linalg.inv(gram),
    )
