"""Staggered asymptotic fits: exact recovery and extrapolation."""

import numpy as np
import pytest

from kryf.baseline import baseline_predict, extrapolate_baseline, fit_baseline, FitParams
from kryf.exceptions import SingularDesign


class TestFitRecovery:
    def test_staggered_linear(self):
        n = np.arange(1, 11)
        b = 2.0 * n + 0.5 + 0.1 * (-1.0) ** n
        fit = fit_baseline(b, form="linear")
        np.testing.assert_allclose(
            [fit.alpha, fit.gamma, fit.gamma_star], [2.0, 0.5, 0.1], atol=1e-8
        )
        assert fit.residual < 1e-16

    def test_staggered_loglinear(self):
        n = np.arange(2, 11)
        b = np.concatenate([[1.0], 3.0 * n / np.log(n) + 1.0])
        fit = fit_baseline(b, form="loglinear")
        np.testing.assert_allclose(
            [fit.alpha, fit.gamma, fit.gamma_star], [3.0, 1.0, 0.0], atol=1e-8
        )

    def test_constant_input(self):
        fit = fit_baseline(np.full(8, 4.2), form="linear")
        np.testing.assert_allclose(
            [fit.alpha, fit.gamma, fit.gamma_star], [0.0, 4.2, 0.0], atol=1e-10
        )

    def test_staggering_sign_recovered(self):
        n = np.arange(1, 13)
        for gs in (0.3, -0.3):
            b = 1.5 * n + 2.0 + gs * (-1.0) ** n
            fit = fit_baseline(b, form="linear")
            assert np.sign(fit.gamma_star) == np.sign(gs)

    def test_short_prefix_rejected(self):
        with pytest.raises(SingularDesign):
            fit_baseline([1.0, 2.0, 3.0], form="linear")

    def test_least_squares_optimality(self):
        # perturbing any fitted parameter must not decrease the residual
        rng = np.random.default_rng(0)
        n = np.arange(1, 11)
        b = 1.2 * n + 0.7 + 0.2 * (-1.0) ** n + rng.normal(0, 0.05, 10)
        fit = fit_baseline(b, form="linear")
        design = np.column_stack([n.astype(float), np.ones(10), (-1.0) ** n])
        theta = np.array([fit.alpha, fit.gamma, fit.gamma_star])
        best = np.sum((design @ theta - b) ** 2)
        for i in range(3):
            for delta in (1e-3, -1e-3):
                other = theta.copy()
                other[i] += delta
                assert np.sum((design @ other - b) ** 2) >= best


class TestExtrapolation:
    def test_linear_point_value(self):
        fit = FitParams(alpha=2.0, gamma=0.5, gamma_star=0.1, form="linear")
        np.testing.assert_allclose(extrapolate_baseline(fit, 4)[3], 8.6)

    def test_loglinear_point_value(self):
        fit = FitParams(alpha=3.0, gamma=1.0, gamma_star=0.0, form="loglinear")
        np.testing.assert_allclose(
            extrapolate_baseline(fit, 3)[2], 3.0 * 3.0 / np.log(3.0) + 1.0
        )

    def test_constant_any_form(self):
        for form in ("linear", "loglinear"):
            fit = FitParams(alpha=0.0, gamma=1.7, gamma_star=0.0, form=form)
            np.testing.assert_allclose(extrapolate_baseline(fit, 6)[1:], 1.7)

    def test_prefix_copied_verbatim(self):
        rng = np.random.default_rng(1)
        b = 0.8 * np.arange(1, 11) + 0.3 + rng.normal(0, 0.02, 10)
        out = baseline_predict(b, 25, form="linear")
        np.testing.assert_array_equal(out[:10], b)
        assert out.shape == (25,)

    def test_loglinear_prediction_tracks_model(self):
        n = np.arange(2, 12)
        b = np.concatenate([[0.5], 2.0 * n / np.log(n) + 0.4])
        out = baseline_predict(b, 30, form="loglinear")
        n_far = np.arange(12, 31)
        np.testing.assert_allclose(
            out[11:], 2.0 * n_far / np.log(n_far) + 0.4, rtol=1e-6
        )
