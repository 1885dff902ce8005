"""Coefficient-level and observable-level comparison of extrapolation
methods against ground truth.

Coefficient error is the per-index RMSE over the test set at extrapolated
indices n > n_in.  Observable error reconstructs K(t) and C(t) on the
truncated Krylov chain from both the true and the predicted coefficients
and aggregates |K - K_pred| and |C - C_pred| in quadrature over the test
set.  Reports are emitted as plain CSV tables (one row per (method, n) or
(method, t)) plus a JSON metadata sidecar, so any plotting tool can
consume them.
"""

import csv
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from . import baseline
from .chain import observable_series
from .exceptions import DataLeak, PrefixMismatch
from .model import MaskPolicy, extrapolate
from .training import increments_from_sequences
from .validation import check_sequence_batch

__all__ = [
    "DEFAULT_TIMES",
    "rmse_per_index",
    "observable_errors",
    "EvalReport",
    "compare_methods",
    "write_report",
]

logger = logging.getLogger(__name__)

# Default grid covers the window where extrapolation quality separates
# (divergence shows up from tJ ~ 2 onward).
DEFAULT_TIMES = np.linspace(0.0, 10.0, 200)

CLAMP = 1e-8


def rmse_per_index(truth, pred, n_in):
    """RMSE(n) over the test set at each extrapolated index n in (n_in, T].

    Returns (n_values, rmse) with 1-based n.  Raises PrefixMismatch when a
    prediction does not carry the truth's first n_in entries verbatim.
    """
    truth = check_sequence_batch(truth, "truth")
    pred = check_sequence_batch(pred, "pred")
    if truth.shape != pred.shape:
        raise ValueError("truth and pred must have identical shapes")
    n_in = int(n_in)
    if not np.array_equal(truth[:, :n_in], pred[:, :n_in]):
        raise PrefixMismatch("predictions do not share the ground-truth prefix")
    err = truth[:, n_in:] - pred[:, n_in:]
    rmse = np.sqrt(np.mean(err**2, axis=0))
    n_values = np.arange(n_in + 1, truth.shape[1] + 1)
    return n_values, rmse


@dataclass(frozen=True)
class ObservableErrorCurves:
    times: np.ndarray
    delta_complexity: np.ndarray
    delta_autocorrelation: np.ndarray
    n_clamped: int = 0


def observable_errors(truth, pred, times=None):
    """|dK(t)| and |dC(t)| between reconstructions from true and predicted
    coefficients, aggregated in quadrature over the test set.

    Non-positive predicted coefficients are clamped to 1e-8 when building
    the chain; the number of affected sequences is reported, not hidden.
    """
    truth = check_sequence_batch(truth, "truth")
    pred = check_sequence_batch(pred, "pred")
    if truth.shape != pred.shape:
        raise ValueError("truth and pred must have identical shapes")
    times = DEFAULT_TIMES if times is None else np.asarray(times, dtype=np.float64)
    dk2 = np.zeros(times.size)
    dc2 = np.zeros(times.size)
    n_clamped = 0
    for b_true, b_pred in zip(truth, pred):
        ref = observable_series(b_true, times)
        if (b_pred <= 0.0).any():
            n_clamped += 1
        hat = observable_series(b_pred, times, clamp=CLAMP)
        dk2 += np.abs(ref.complexity - hat.complexity) ** 2
        dc2 += np.abs(ref.autocorrelation - hat.autocorrelation) ** 2
    n = truth.shape[0]
    return ObservableErrorCurves(
        times=times,
        delta_complexity=np.sqrt(dk2 / n),
        delta_autocorrelation=np.sqrt(dc2 / n),
        n_clamped=n_clamped,
    )


@dataclass
class EvalReport:
    """Curves for both methods plus run metadata."""

    n_values: np.ndarray
    rmse_transformer: np.ndarray
    rmse_baseline: np.ndarray
    times: np.ndarray
    observables_transformer: ObservableErrorCurves
    observables_baseline: ObservableErrorCurves
    metadata: dict = field(default_factory=dict)

    @property
    def ratio(self):
        """Transformer / baseline RMSE where the baseline error is nonzero."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(
                self.rmse_baseline > 0.0,
                self.rmse_transformer / self.rmse_baseline,
                np.nan,
            )


def _predict_transformer(params, cfg, truth, n_in, mask):
    prefixes = increments_from_sequences(truth)[:, :n_in]
    pred = extrapolate(params, cfg, prefixes, truth.shape[1], mask=mask)
    pred[:, :n_in] = truth[:, :n_in]  # exact within rounding; pin bitwise
    return pred


def _predict_baseline(truth, n_in, form):
    pred = np.empty_like(truth)
    for i, b in enumerate(truth):
        pred[i] = baseline.baseline_predict(b[:n_in], truth.shape[1], form=form)
    return pred


def compare_methods(
    test_set,
    params,
    model_cfg,
    fit_form,
    n_in=10,
    times=None,
    mask=None,
    extra_metadata=None,
):
    """Evaluate transformer and baseline extrapolations on a test dataset.

    ``test_set`` is a ``kryf.datasets.Dataset``; feeding a train-tagged
    dataset raises DataLeak.  Cross-size (zero-shot) evaluation is allowed
    and recorded in the metadata when the checkpoint's training metadata is
    supplied via ``extra_metadata``.
    """
    if test_set.split != "test":
        raise DataLeak(
            f"evaluation requires a test-tagged dataset, got split={test_set.split!r}"
        )
    truth = test_set.sequences
    mask = mask or MaskPolicy.full()
    times = DEFAULT_TIMES if times is None else np.asarray(times, dtype=np.float64)

    pred_tf = _predict_transformer(params, model_cfg, truth, n_in, mask)
    pred_bl = _predict_baseline(truth, n_in, fit_form)

    n_values, rmse_tf = rmse_per_index(truth, pred_tf, n_in)
    _, rmse_bl = rmse_per_index(truth, pred_bl, n_in)
    obs_tf = observable_errors(truth, pred_tf, times)
    obs_bl = observable_errors(truth, pred_bl, times)

    from .model import params_checksum

    metadata = {
        "n_test": int(truth.shape[0]),
        "sequence_length": int(truth.shape[1]),
        "n_in": int(n_in),
        "fit_form": fit_form,
        "mask": {"kind": mask.kind, "k": mask.k},
        "dataset": test_set.describe(),
        "model_checksum": params_checksum(params),
        "clamped_transformer": obs_tf.n_clamped,
        "clamped_baseline": obs_bl.n_clamped,
    }
    if extra_metadata:
        metadata.update(extra_metadata)
        train_meta = extra_metadata.get("trained_on") or {}
        if train_meta:
            zero_shot = (
                train_meta.get("family") != test_set.family
                or train_meta.get("L") != test_set.L
                or train_meta.get("T") != test_set.T
            )
            metadata["zero_shot"] = bool(zero_shot)

    return EvalReport(
        n_values=n_values,
        rmse_transformer=rmse_tf,
        rmse_baseline=rmse_bl,
        times=times,
        observables_transformer=obs_tf,
        observables_baseline=obs_bl,
        metadata=metadata,
    )


def write_report(report, prefix, methods=("transformer", "baseline")):
    """Write CSV curve tables and the JSON metadata sidecar.

    Produces ``<prefix>.coefficients.csv`` with rows (method, n, rmse),
    ``<prefix>.observables.csv`` with rows (method, t, delta_k, delta_c),
    and ``<prefix>.meta.json``.  Returns the list of paths written.
    """
    paths = []
    coeff_path = f"{prefix}.coefficients.csv"
    with open(coeff_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "n", "rmse"])
        curves = {"transformer": report.rmse_transformer,
                  "baseline": report.rmse_baseline}
        for method in methods:
            for n, value in zip(report.n_values, curves[method]):
                writer.writerow([method, int(n), f"{value:.12g}"])
    paths.append(coeff_path)

    obs_path = f"{prefix}.observables.csv"
    with open(obs_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "t", "delta_complexity", "delta_autocorrelation"])
        curves = {"transformer": report.observables_transformer,
                  "baseline": report.observables_baseline}
        for method in methods:
            obs = curves[method]
            for t, dk, dc in zip(obs.times, obs.delta_complexity,
                                 obs.delta_autocorrelation):
                writer.writerow([method, f"{t:.12g}", f"{dk:.12g}", f"{dc:.12g}"])
    paths.append(obs_path)

    meta_path = f"{prefix}.meta.json"
    with open(meta_path, "w") as fh:
        json.dump(report.metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.append(meta_path)
    return paths
