"""Estimator API: parameter handling, fitting, prediction shapes."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from kryf.baseline import baseline_predict
from kryf.estimators import AsymptoticFitExtrapolator, TransformerExtrapolator


def toy_sequences(rng, n=48, length=12):
    alpha = rng.uniform(0.4, 1.2, size=(n, 1))
    return alpha * np.arange(1, length + 1) + rng.uniform(0.1, 0.3, size=(n, 1))


class TestTransformerExtrapolator:
    def small(self):
        return TransformerExtrapolator(
            d_model=8, n_layers=1, n_heads=2, dropout_rate=0.0, max_position=16,
            epochs=2, batch_size=16, n_in=4, random_state=1,
        )

    def test_get_set_params_round_trip(self):
        est = self.small()
        params = est.get_params()
        assert params["d_model"] == 8 and params["epochs"] == 2
        est.set_params(epochs=5)
        assert est.epochs == 5

    def test_clone_preserves_params(self):
        est = self.small()
        dup = clone(est)
        assert dup.get_params() == est.get_params()

    def test_predict_before_fit_raises(self):
        with pytest.raises(NotFittedError):
            self.small().predict(np.ones((2, 4)))

    def test_fit_predict_shapes(self):
        rng = np.random.default_rng(0)
        seqs = toy_sequences(rng)
        est = self.small().fit(seqs)
        pred = est.predict(seqs[:5, :4])
        assert pred.shape == (5, 12)
        np.testing.assert_allclose(pred[:, :4], seqs[:5, :4], atol=1e-10)

    def test_explicit_target_length(self):
        rng = np.random.default_rng(1)
        est = self.small().fit(toy_sequences(rng))
        pred = est.predict(np.cumsum(np.ones((2, 4)), axis=1), target_length=9)
        assert pred.shape == (2, 9)


class TestAsymptoticFitExtrapolator:
    def test_matches_functional_baseline(self):
        rng = np.random.default_rng(2)
        seqs = toy_sequences(rng, n=6)
        est = AsymptoticFitExtrapolator(form="linear", n_in=5).fit(seqs)
        pred = est.predict(seqs[:, :5])
        for i in range(6):
            np.testing.assert_allclose(
                pred[i], baseline_predict(seqs[i, :5], 12, form="linear")
            )

    def test_requires_target_or_fit(self):
        est = AsymptoticFitExtrapolator(n_in=4)
        with pytest.raises(NotFittedError):
            est.predict(np.ones((1, 4)) * np.arange(1, 5))

    def test_unfitted_with_explicit_target(self):
        est = AsymptoticFitExtrapolator(form="linear", n_in=4)
        seq = np.arange(1.0, 5.0)[None, :]
        pred = est.predict(seq, target_length=8)
        assert pred.shape == (1, 8)

    def test_clone(self):
        est = AsymptoticFitExtrapolator(form="loglinear", n_in=8)
        assert clone(est).get_params() == {"form": "loglinear", "n_in": 8}
