import numpy as np
import pytest


def simulate_arma(seed, n, ar=(), ma=(), intercept=0.0, sigma=1.0, burn=100):
    """ARMA sample path with a burn-in, driven by a seeded Gaussian stream."""
    rng = np.random.default_rng(seed)
    p, q = len(ar), len(ma)
    e = rng.normal(0.0, sigma, size=n + burn)
    y = np.zeros(n + burn)
    for t in range(n + burn):
        val = intercept + e[t]
        for i in range(1, min(p, t) + 1):
            val += ar[i - 1] * y[t - i]
        for j in range(1, min(q, t) + 1):
            val += ma[j - 1] * e[t - j]
        y[t] = val
    return y[burn:]


@pytest.fixture
def arma_sim():
    return simulate_arma
