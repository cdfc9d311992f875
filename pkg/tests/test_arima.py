import math

import numpy as np
import pytest

from signalcast._linalg import ols
from signalcast.arima import (
    ArimaFit,
    ArimaSpec,
    _reflect_ma_roots,
    fit_arima,
    forecast,
    grid_search,
    information_criteria,
    psi_weights,
    residual_acf,
)
from signalcast.errors import EstimationError, ValidationError
from tests.conftest import simulate_arma


class TestInformationCriteria:
    def test_direct_substitution(self):
        aic, _ = information_criteria(-10.0, 2, 100)
        assert aic == 24.0

    def test_zero_everything(self):
        assert information_criteria(0.0, 0, 5) == (0.0, 0.0)

    def test_bic_at_n_e_squared(self):
        # ln(n) = 2 at n = e^2; with the nearest integer n the formula gives
        # ln(7)*2 + 20, a whisker under the idealized 24.
        n = int(round(math.e**2))
        _, bic = information_criteria(-10.0, 2, n)
        assert bic == pytest.approx(2 * math.log(n) + 20.0, abs=1e-12)
        assert bic == pytest.approx(24.0, abs=0.15)

    def test_ranking_invariant_under_loglik_shift(self):
        candidates = [(-50.0, 3), (-48.0, 5), (-52.0, 2)]
        base = [information_criteria(l, k, 100)[0] for l, k in candidates]
        shifted = [information_criteria(l + 7.5, k, 100)[0] for l, k in candidates]
        assert np.argsort(base).tolist() == np.argsort(shifted).tolist()

    def test_validation(self):
        with pytest.raises(ValidationError):
            information_criteria(0.0, -1, 10)
        with pytest.raises(ValidationError):
            information_criteria(0.0, 1, 0)


class TestFitArima:
    def test_white_noise_intercept_only_matches_ols(self):
        y = np.random.default_rng(0).normal(5.0, 2.0, 500)
        fit = fit_arima(y, ArimaSpec(0, 0, 0))
        oracle = ols(np.ones((500, 1)), y)
        assert fit.intercept == pytest.approx(float(oracle.params[0]), abs=1e-6)
        assert fit.intercept == pytest.approx(float(y.mean()), abs=1e-10)
        assert fit.sigma2 == pytest.approx(oracle.ssr / 500, abs=1e-6)

    def test_exog_coefficient_recovered(self):
        rng = np.random.default_rng(1)
        z = rng.normal(0, 1, 400)
        y = 2.0 * z + rng.normal(0, 0.5, 400)
        fit = fit_arima(y, ArimaSpec(0, 0, 0), exog=z, exog_names=["z"])
        oracle = ols(np.column_stack([np.ones(400), z]), y)
        assert fit.exog_coeffs["z"] == pytest.approx(2.0, abs=0.05)
        assert fit.exog_coeffs["z"] == pytest.approx(float(oracle.params[1]), abs=1e-6)

    def test_arma11_recovery_short_mc(self):
        # 20-seed spot check; the 100-seed version is an acceptance criterion.
        ok = 0
        for seed in range(20):
            y = simulate_arma(1000 + seed, 2000, ar=(0.5,), ma=(0.3,))
            fit = fit_arima(y, ArimaSpec(1, 0, 1))
            if abs(fit.ar[0] - 0.5) <= 0.08 and abs(fit.ma[0] - 0.3) <= 0.08:
                ok += 1
        assert ok >= 18

    def test_pure_ar_css_equals_lagged_ols(self):
        y = simulate_arma(7, 600, ar=(0.5, -0.25))
        fit = fit_arima(y, ArimaSpec(2, 0, 0))
        design = np.column_stack([np.ones(598), y[1:-1], y[:-2]])
        oracle = ols(design, y[2:])
        assert fit.intercept == pytest.approx(float(oracle.params[0]), abs=1e-6)
        assert fit.ar[0] == pytest.approx(float(oracle.params[1]), abs=1e-6)
        assert fit.ar[1] == pytest.approx(float(oracle.params[2]), abs=1e-6)
        assert fit.css == pytest.approx(oracle.ssr, rel=1e-10)

    def test_residual_length_and_aic_identity(self):
        y = simulate_arma(8, 300, ar=(0.4,), ma=(0.2,))
        fit = fit_arima(y, ArimaSpec(1, 0, 1))
        assert len(fit.residuals) == fit.n_effective == 300 - 1
        k = 1 + 1 + 1 + 0 + 1
        assert fit.aic == pytest.approx(2 * k - 2 * fit.loglik, abs=1e-10)
        assert fit.bic == pytest.approx(math.log(fit.n_effective) * k - 2 * fit.loglik, abs=1e-10)

    def test_differenced_fit_matches_manual_differencing(self):
        y = np.cumsum(simulate_arma(9, 400, ar=(0.5,)))
        a = fit_arima(y, ArimaSpec(1, 1, 0))
        b = fit_arima(np.diff(y), ArimaSpec(1, 0, 0))
        assert a.ar[0] == pytest.approx(b.ar[0], abs=1e-10)
        assert a.intercept == pytest.approx(b.intercept, abs=1e-10)

    def test_too_short_series_is_an_error(self):
        with pytest.raises(ValidationError):
            fit_arima(np.arange(8.0), ArimaSpec(1, 0, 1))

    def test_deterministic(self):
        y = simulate_arma(10, 400, ar=(0.3,), ma=(0.4,))
        a = fit_arima(y, ArimaSpec(1, 0, 1))
        b = fit_arima(y, ArimaSpec(1, 0, 1))
        assert a.ar[0] == b.ar[0] and a.ma[0] == b.ma[0] and a.css == b.css


class TestMaReflection:
    def test_real_root_reflected(self):
        # 1 + 2z has root -0.5 inside the unit circle; reflecting gives
        # root -2, i.e. the polynomial 1 + 0.5 z.
        out, changed = _reflect_ma_roots(np.array([2.0]))
        assert changed
        assert out == pytest.approx([0.5], abs=1e-12)

    def test_invertible_untouched(self):
        out, changed = _reflect_ma_roots(np.array([0.4, 0.1]))
        assert not changed
        assert out == pytest.approx([0.4, 0.1])

    def test_roots_outside_after_reflection(self):
        # product of the roots of 1 + 0.5 z + 2 z^2 is 1/2: at least one inside
        out, changed = _reflect_ma_roots(np.array([0.5, 2.0]))
        assert changed
        roots = np.roots(np.concatenate(([1.0], out))[::-1])
        assert (np.abs(roots) >= 1.0 - 1e-9).all()


class TestPsiWeights:
    def test_ar1_geometric(self):
        psi = psi_weights(np.array([0.5]), np.array([]), d=0, n=6)
        assert psi == pytest.approx([0.5**j for j in range(6)])

    def test_ma1_truncates(self):
        psi = psi_weights(np.array([]), np.array([0.7]), d=0, n=4)
        assert psi == pytest.approx([1.0, 0.7, 0.0, 0.0])

    def test_pure_integration_is_constant_one(self):
        psi = psi_weights(np.array([]), np.array([]), d=1, n=5)
        assert psi == pytest.approx([1.0] * 5)

    def test_arima110_matches_power_series_division(self):
        # oracle: coefficients of (1 + 0) / ((1 - 0.4 L)(1 - L)) by long division
        n = 10
        full = np.convolve([1.0, -0.4], [1.0, -1.0])
        oracle = np.zeros(n)
        oracle[0] = 1.0
        for j in range(1, n):
            oracle[j] = -sum(full[i] * oracle[j - i] for i in range(1, min(j, 2) + 1))
        psi = psi_weights(np.array([0.4]), np.array([]), d=1, n=n)
        assert psi == pytest.approx(oracle, abs=1e-12)


def hand_fit(ar=(), ma=(), d=0, intercept=0.0, sigma2=1.0, y_train=None):
    ar = np.asarray(ar, dtype=float)
    ma = np.asarray(ma, dtype=float)
    y_train = np.asarray(y_train, dtype=float)
    w = np.diff(y_train, n=d) if d else y_train.copy()
    n_eff = len(w) - len(ar)
    return ArimaFit(
        spec=ArimaSpec(len(ar), d, len(ma)),
        intercept=intercept, ar=ar, ma=ma, exog_coeffs={},
        sigma2=sigma2, loglik=0.0, aic=0.0, bic=0.0,
        residuals=np.zeros(n_eff), n_effective=n_eff, converged=True,
        css=float(n_eff), ma_reflected=False, y_train=y_train, w_train=w,
    )


class TestForecast:
    def test_intercept_only_is_flat(self):
        fit = hand_fit(intercept=7.5, y_train=np.full(30, 7.5))
        fc = forecast(fit, 4)
        assert fc.point == pytest.approx([7.5] * 4)
        assert fc.se == pytest.approx([1.0] * 4)
        lower, upper = fc.bounds[0.05]
        assert np.allclose(upper - fit.sigma2**0.5 * 0, upper)
        assert np.allclose(upper - lower, 2 * 1.959963984540054 * fc.se)

    def test_ar1_geometric_decay(self):
        fit = hand_fit(ar=(0.5,), y_train=np.concatenate((np.zeros(20), [10.0])))
        fc = forecast(fit, 3)
        assert fc.point == pytest.approx([5.0, 2.5, 1.25])
        assert fc.se == pytest.approx(np.sqrt(np.cumsum([1.0, 0.25, 0.0625])))

    def test_bounds_ordering_and_nesting(self):
        y = simulate_arma(11, 300, ar=(0.6,), ma=(0.2,))
        fit = fit_arima(y, ArimaSpec(1, 0, 1))
        fc = forecast(fit, 10, significances=(0.05, 0.01))
        l5, u5 = fc.bounds[0.05]
        l1, u1 = fc.bounds[0.01]
        assert (l1 <= l5).all() and (l5 <= fc.point).all()
        assert (fc.point <= u5).all() and (u5 <= u1).all()

    def test_ar1_interval_matches_monte_carlo_quantiles(self):
        y = simulate_arma(12, 1500, ar=(0.6,))
        fit = fit_arima(y, ArimaSpec(1, 0, 0))
        fc = forecast(fit, 3, significances=(0.05,))
        rng = np.random.default_rng(99)
        n_paths = 100_000
        sims = np.empty((n_paths, 3))
        prev = np.full(n_paths, y[-1])
        for h in range(3):
            prev = fit.intercept + fit.ar[0] * prev + rng.normal(
                0.0, math.sqrt(fit.sigma2), n_paths
            )
            sims[:, h] = prev
        upper_mc = np.quantile(sims[:, 2], 0.975)
        lower_mc = np.quantile(sims[:, 2], 0.025)
        width_mc = upper_mc - lower_mc
        width = fc.bounds[0.05][1][2] - fc.bounds[0.05][0][2]
        assert width == pytest.approx(width_mc, rel=0.02)

    def test_differencing_round_trip(self):
        y = np.cumsum(simulate_arma(13, 400, ar=(0.5,))) + 50
        fit_d = fit_arima(y, ArimaSpec(1, 1, 0))
        fc_d = forecast(fit_d, 6)
        fit_w = fit_arima(np.diff(y), ArimaSpec(1, 0, 0))
        fc_w = forecast(fit_w, 6)
        rediffed = np.diff(np.concatenate(([y[-1]], fc_d.point)))
        assert rediffed == pytest.approx(fc_w.point, abs=1e-9)

    def test_exog_forecast_requires_future_rows(self):
        rng = np.random.default_rng(14)
        z = rng.normal(0, 1, 200)
        y = 2 * z + rng.normal(0, 0.1, 200)
        fit = fit_arima(y, ArimaSpec(0, 0, 0), exog=z, exog_names=["z"])
        with pytest.raises(ValidationError):
            forecast(fit, 3)
        with pytest.raises(ValidationError):
            forecast(fit, 3, future_exog=np.zeros((2, 1)))
        fc = forecast(fit, 3, future_exog=np.array([[1.0], [2.0], [0.0]]))
        beta = fit.exog_coeffs["z"]
        assert fc.point == pytest.approx(
            [fit.intercept + beta, fit.intercept + 2 * beta, fit.intercept], abs=1e-12
        )

    def test_nonpositive_horizon(self):
        fit = hand_fit(intercept=1.0, y_train=np.ones(30))
        with pytest.raises(ValidationError):
            forecast(fit, 0)


class TestGridSearch:
    def test_ar2_top_rank_has_p_at_least_two(self):
        hits = 0
        for seed in range(50):
            y = simulate_arma(3000 + seed, 400, ar=(0.7, -0.45))
            result = grid_search(y, p_range=range(0, 4), d=0, q_range=range(0, 3))
            if result.fits[0].spec.p >= 2:
                hits += 1
        assert hits >= 45

    def test_single_spec_range(self):
        y = simulate_arma(15, 200, ar=(0.5,))
        result = grid_search(y, p_range=[1], d=0, q_range=[0])
        assert len(result.fits) == 1
        assert result.fits[0].spec == ArimaSpec(1, 0, 0)

    def test_ranking_is_by_aic_then_parsimony(self):
        y = simulate_arma(16, 300, ar=(0.5,))
        result = grid_search(y, p_range=range(0, 3), d=0, q_range=range(0, 3))
        aics = [f.aic for f in result.fits]
        assert aics == sorted(aics)

    def test_all_failures_raise(self):
        with pytest.raises(EstimationError):
            grid_search(np.arange(12.0), p_range=[3], d=0, q_range=[3])

    def test_failures_recorded_not_fatal(self):
        # p=3 needs more than 13 observations; p=0 fits on 12
        y = simulate_arma(17, 12, ar=(0.2,))
        result = grid_search(y, p_range=[0, 3], d=0, q_range=[0])
        assert len(result.fits) == 1
        assert len(result.failures) == 1
        assert result.failures[0][0] == ArimaSpec(3, 0, 0)


class TestResidualAcf:
    def test_iid_noise_rarely_flagged(self):
        y = simulate_arma(18, 1001, ar=(0.5,))
        fit = fit_arima(y, ArimaSpec(1, 0, 0))
        acf = residual_acf(fit, 20)
        assert len(acf.flagged) <= 3    # ~5% nominal, 10% ceiling per the contract
        assert acf.acf[0] == 1.0

    def test_alternating_residuals_flag_lag_one(self):
        fit = hand_fit(intercept=0.0, y_train=np.zeros(40))
        fit.residuals = np.array([1.0, -1.0] * 20)
        acf = residual_acf(fit, 5)
        assert acf.acf[1] == pytest.approx(-1.0, abs=0.03)  # -(n-1)/n at n=40
        assert 1 in acf.flagged

    def test_constant_residuals_degenerate_with_warning(self):
        fit = hand_fit(intercept=0.0, y_train=np.zeros(40))
        fit.residuals = np.full(40, 2.0)
        with pytest.warns(UserWarning):
            acf = residual_acf(fit, 5)
        assert acf.acf[1:] == pytest.approx([0.0] * 5)
        assert acf.flagged == ()

    def test_max_lag_validation(self):
        fit = hand_fit(intercept=0.0, y_train=np.zeros(15))
        with pytest.raises(ValidationError):
            residual_acf(fit, 40)
