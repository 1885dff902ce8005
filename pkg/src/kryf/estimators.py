"""Scikit-learn style estimators wrapping the functional core.

Both estimators consume sequence batches shaped (n_sequences, length):
``fit`` takes full-length coefficient sequences, ``predict`` takes prefix
batches and returns extrapolated full sequences.  Hyperparameters follow
the sklearn convention (constructor args mirrored as attributes), so
``get_params`` / ``set_params`` / ``clone`` work out of the box.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import baseline
from .model import MaskPolicy, ModelConfig, extrapolate
from .training import TrainConfig, increments_from_sequences, train
from .validation import check_sequence_batch

__all__ = ["TransformerExtrapolator", "AsymptoticFitExtrapolator"]


class TransformerExtrapolator(BaseEstimator):
    """Autoregressive transformer extrapolator for Lanczos sequences.

    Parameters mirror the model and training configuration; ``fit`` trains
    on full sequences, ``predict`` extends prefixes to the training length
    (or an explicit ``target_length``).
    """

    def __init__(
        self,
        d_model=64,
        n_layers=3,
        n_heads=4,
        dropout_rate=0.1,
        max_position=128,
        learning_rate=1e-3,
        batch_size=64,
        epochs=300,
        n_in=10,
        weight_decay=0.01,
        val_fraction=0.1,
        random_state=0,
    ):
        self.d_model = d_model
        self.n_layers = n_layers
        self.n_heads = n_heads
        self.dropout_rate = dropout_rate
        self.max_position = max_position
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.n_in = n_in
        self.weight_decay = weight_decay
        self.val_fraction = val_fraction
        self.random_state = random_state

    def _configs(self):
        model_cfg = ModelConfig(
            d_model=self.d_model,
            n_layers=self.n_layers,
            n_heads=self.n_heads,
            dropout_rate=self.dropout_rate,
            max_position=self.max_position,
        )
        train_cfg = TrainConfig(
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            epochs=self.epochs,
            n_in=self.n_in,
            weight_decay=self.weight_decay,
            val_fraction=self.val_fraction,
            seed=self.random_state,
        )
        return model_cfg, train_cfg

    def fit(self, X, y=None):
        """Train on an (n_sequences, T) array of coefficient sequences."""
        X = check_sequence_batch(X, "X", min_length=self.n_in + 1)
        model_cfg, train_cfg = self._configs()
        increments = increments_from_sequences(X)
        self.params_, self.report_ = train(increments, train_cfg, model_cfg)
        self.model_config_ = model_cfg
        self.sequence_length_ = X.shape[1]
        return self

    def predict(self, X, target_length=None, mask=None):
        """Extrapolate prefix rows (n_sequences, n_prefix) to full length."""
        self._check_fitted()
        X = check_sequence_batch(X, "X")
        target = int(target_length or self.sequence_length_)
        prefix_increments = np.diff(X, axis=1, prepend=0.0)
        return extrapolate(
            self.params_, self.model_config_, prefix_increments, target,
            mask=mask or MaskPolicy.full(),
        )

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError("TransformerExtrapolator is not fitted yet")


class AsymptoticFitExtrapolator(BaseEstimator):
    """Staggered asymptotic-fit baseline in estimator clothing.

    Stateless across rows: each prefix is fit independently; ``fit`` only
    records the target sequence length.
    """

    def __init__(self, form="linear", n_in=10):
        self.form = form
        self.n_in = n_in

    def fit(self, X, y=None):
        X = check_sequence_batch(X, "X", min_length=self.n_in)
        self.sequence_length_ = X.shape[1]
        return self

    def predict(self, X, target_length=None):
        X = check_sequence_batch(X, "X", min_length=4)
        if target_length is None:
            if not hasattr(self, "sequence_length_"):
                raise NotFittedError(
                    "pass target_length or fit on full sequences first"
                )
            target_length = self.sequence_length_
        out = np.empty((X.shape[0], int(target_length)))
        for i, row in enumerate(X):
            out[i] = baseline.baseline_predict(
                row[: self.n_in], target_length, form=self.form
            )
        return out
