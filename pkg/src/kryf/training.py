"""Next-step prediction loss, exact reverse-mode gradients, AdamW, and the
epoch loop.

The loss scores positions m >= n_in of each increment sequence:

    L = mean over sequences and scored positions of
        (increment[m+1] - prediction at position m)^2

Gradients are computed by hand-written reverse-mode differentiation of the
forward graph (float64 throughout), validated against central finite
differences.  Dropout masks are drawn once per optimizer step from a
counter-derived seed, so the loss and its gradient always see the same
realization, and whole runs are bit-reproducible from the seed.
"""

import math
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .model import ModelConfig, MaskPolicy, _head_matrix, _mask_additive, _run_forward, \
    init_params, make_dropout_masks, params_checksum
from .seeding import derive_seed
from .validation import check_sequence_batch

__all__ = [
    "TrainConfig",
    "TrainReport",
    "increments_from_sequences",
    "loss",
    "gradients",
    "init_adamw_state",
    "adamw_step",
    "train",
]

# Stream tags for deriving independent RNG streams from the master seed.
_STREAM_INIT, _STREAM_SHUFFLE, _STREAM_DROPOUT, _STREAM_SPLIT = 1, 2, 3, 4


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 64
    epochs: int = 300
    n_in: int = 10
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.01
    val_fraction: float = 0.1
    seed: int = 0


@dataclass
class TrainReport:
    """Per-epoch record stream plus final state fingerprint."""

    epochs: list = field(default_factory=list)
    final_checksum: str = ""
    config: dict = field(default_factory=dict)

    def add_epoch(self, epoch, train_loss, val_loss, wall_time):
        self.epochs.append(
            {
                "epoch": int(epoch),
                "train_loss": float(train_loss),
                "val_loss": float(val_loss),
                "wall_time": float(wall_time),
            }
        )

    @property
    def final_val_loss(self):
        return self.epochs[-1]["val_loss"] if self.epochs else math.nan


def increments_from_sequences(sequences):
    """Row-wise differences with b_0 = 0 (inverse of row-wise cumsum)."""
    b = check_sequence_batch(sequences, "sequences")
    return np.diff(b, axis=1, prepend=0.0)


def _split_batch(batch, n_in):
    x = batch[:, :-1]
    targets = batch[:, 1:]
    scored = slice(n_in - 1, batch.shape[1] - 1)
    n_scored = batch.shape[1] - n_in
    return x, targets, scored, n_scored


def _check_batch(batch, n_in):
    batch = check_sequence_batch(batch, "batch", min_length=2)
    if n_in < 1:
        raise ValueError("n_in must be >= 1")
    if batch.shape[1] <= n_in:
        raise ValueError(
            f"sequence length {batch.shape[1]} must exceed n_in = {n_in}"
        )
    return batch


def loss(params, cfg, batch, n_in, training_mode=False, dropout_rng=None):
    """Mean squared next-step error over scored positions m in [n_in, T-1]."""
    batch = _check_batch(batch, n_in)
    x, targets, scored, n_scored = _split_batch(batch, n_in)
    drop_masks = None
    if training_mode and cfg.dropout_rate > 0.0:
        if dropout_rng is None:
            raise ValueError("training_mode with dropout requires dropout_rng")
        drop_masks = make_dropout_masks(cfg, x.shape[0], x.shape[1], dropout_rng)
    preds, _, _ = _run_forward(
        params, cfg, x, _mask_additive(MaskPolicy.full(), x.shape[1]),
        False, drop_masks, need_cache=False,
    )
    err = preds[:, scored] - targets[:, scored]
    return float(np.mean(err**2))


def gradients(params, cfg, batch, n_in, training_mode=False, dropout_rng=None):
    """Loss and its gradient for every tensor, in one fused pass.

    When dropout is active the masks are drawn once here, so the returned
    loss is evaluated under the exact realization the gradient differentiates.
    Returns (loss_value, grads) with grads keyed like params.
    """
    batch = _check_batch(batch, n_in)
    x, targets, scored, n_scored = _split_batch(batch, n_in)
    bsz, t = x.shape
    drop_masks = None
    if training_mode and cfg.dropout_rate > 0.0:
        if dropout_rng is None:
            raise ValueError("training_mode with dropout requires dropout_rng")
        drop_masks = make_dropout_masks(cfg, bsz, t, dropout_rng)

    preds, _, cache = _run_forward(
        params, cfg, x, _mask_additive(MaskPolicy.full(), t),
        False, drop_masks, need_cache=True,
    )
    err = preds[:, scored] - targets[:, scored]
    loss_value = float(np.mean(err**2))

    d_preds = np.zeros_like(preds)
    d_preds[:, scored] = (2.0 / (bsz * n_scored)) * err

    grads = {name: None for name in params}
    d, h, dk, df = cfg.d_model, cfg.n_heads, cfg.d_k, cfg.d_ff
    scale = 1.0 / np.sqrt(dk)

    # unembedding
    h_final = cache["h_final"]
    grads["unembed.weight"] = np.einsum("bt,btd->d", d_preds, h_final)
    grads["unembed.bias"] = np.array([d_preds.sum()])
    d_hidden = d_preds[:, :, None] * params["unembed.weight"]

    for l in reversed(range(cfg.n_layers)):
        p = f"layers.{l}."
        c = cache["layers"][l]

        # layer-norm 2
        d_hidden, g_gain, g_bias = _layer_norm_backward(
            d_hidden, c["xhat2"], c["inv2"], params[p + "ln2.gain"]
        )
        grads[p + "ln2.gain"], grads[p + "ln2.bias"] = g_gain, g_bias

        # residual: res2 = h1 + dropout(ffn)
        d_f = d_hidden if drop_masks is None else d_hidden * drop_masks[l][1]
        d_h1 = d_hidden.copy()

        # ffn
        grads[p + "ffn.w2"] = c["r"].reshape(-1, df).T @ d_f.reshape(-1, d)
        grads[p + "ffn.b2"] = d_f.sum(axis=(0, 1))
        d_u = (d_f @ params[p + "ffn.w2"].T) * c["relu_mask"]
        grads[p + "ffn.w1"] = c["h1"].reshape(-1, d).T @ d_u.reshape(-1, df)
        grads[p + "ffn.b1"] = d_u.sum(axis=(0, 1))
        d_h1 += d_u @ params[p + "ffn.w1"].T

        # layer-norm 1
        d_res1, g_gain, g_bias = _layer_norm_backward(
            d_h1, c["xhat1"], c["inv1"], params[p + "ln1.gain"]
        )
        grads[p + "ln1.gain"], grads[p + "ln1.bias"] = g_gain, g_bias

        # residual: res1 = h_in + dropout(attention)
        d_attn_out = d_res1 if drop_masks is None else d_res1 * drop_masks[l][0]
        d_hin = d_res1.copy()

        # attention output projection
        grads[p + "attn.wo"] = c["ctx"].reshape(-1, d).T @ d_attn_out.reshape(-1, d)
        d_ctx = (d_attn_out @ params[p + "attn.wo"].T).reshape(bsz, t, h, dk)
        d_ctx = np.ascontiguousarray(d_ctx.transpose(0, 2, 1, 3))  # (B, H, T, dk)

        # attention weights and values
        alpha = c["alpha"]
        d_alpha = d_ctx @ c["v"].swapaxes(-1, -2)
        d_v = alpha.swapaxes(-1, -2) @ d_ctx
        inner = (d_alpha * alpha).sum(axis=-1, keepdims=True)
        d_scores = alpha * (d_alpha - inner)
        d_scores *= scale
        d_q = d_scores @ c["k"]
        d_k = d_scores.swapaxes(-1, -2) @ c["q"]

        # head projections
        h_in = c["h_in"]
        flat_in = h_in.reshape(-1, d)
        for name, d_head in (("attn.wq", d_q), ("attn.wk", d_k), ("attn.wv", d_v)):
            d_flat = d_head.transpose(0, 2, 1, 3).reshape(bsz, t, d)
            g_mat = flat_in.T @ d_flat.reshape(-1, d)  # (D, H*dk)
            grads[p + name] = np.ascontiguousarray(
                g_mat.reshape(d, h, dk).transpose(1, 2, 0)
            )
            d_hin += d_flat @ _head_matrix(params[p + name]).T
        d_hidden = d_hin

    # embedding
    grads["embed.weight"] = (d_hidden * cache["x"][:, :, None]).sum(axis=(0, 1))
    grads["embed.bias"] = d_hidden.sum(axis=(0, 1))
    return loss_value, grads


def _layer_norm_backward(d_out, xhat, inv, gain):
    g_gain = (d_out * xhat).sum(axis=(0, 1))
    g_bias = d_out.sum(axis=(0, 1))
    d_xhat = d_out * gain
    mean1 = d_xhat.mean(axis=-1, keepdims=True)
    mean2 = (d_xhat * xhat).mean(axis=-1, keepdims=True)
    d_in = inv * (d_xhat - mean1 - xhat * mean2)
    return d_in, g_gain, g_bias


# Decoupled weight decay applies to weight matrices only.
def _decayed(name):
    return name.rsplit(".", 1)[-1] in ("weight", "wq", "wk", "wv", "wo", "w1", "w2")


def init_adamw_state(params):
    return {
        name: {"m": np.zeros_like(p), "v": np.zeros_like(p)}
        for name, p in params.items()
    }


def adamw_step(params, grads, state, t, cfg):
    """One AdamW update (in place) with bias correction and decoupled decay.

    Decay is applied to weight matrices only, never to biases or layer-norm
    parameters.  ``t`` is the 1-based step index.
    """
    if t < 1:
        raise ValueError("step index t must be >= 1")
    lr, b1, b2 = cfg.learning_rate, cfg.beta1, cfg.beta2
    bc1 = 1.0 - b1**t
    bc2 = 1.0 - b2**t
    for name, g in grads.items():
        st = state[name]
        st["m"] *= b1
        st["m"] += (1.0 - b1) * g
        st["v"] *= b2
        st["v"] += (1.0 - b2) * (g * g)
        update = (st["m"] / bc1) / (np.sqrt(st["v"] / bc2) + cfg.eps)
        if cfg.weight_decay and _decayed(name):
            update = update + cfg.weight_decay * params[name]
        params[name] -= lr * update
    return params, state


def _batched_eval_loss(params, model_cfg, data, n_in, batch_size):
    if data.shape[0] == 0:
        return math.nan
    total, count = 0.0, 0
    for start in range(0, data.shape[0], batch_size):
        part = data[start : start + batch_size]
        total += loss(params, model_cfg, part, n_in) * part.shape[0]
        count += part.shape[0]
    return total / count


def train(dataset, cfg, model_cfg=None, callback=None):
    """Train on a (N, T) array of increment sequences.

    Deterministic given cfg.seed: initialization, the train/validation
    split, epoch shuffles, and dropout are all derived from it.  Runs
    exactly cfg.epochs epochs with no early stopping, recording train and
    validation loss per epoch.

    Returns (params, TrainReport).
    """
    model_cfg = model_cfg or ModelConfig()
    data = check_sequence_batch(dataset, "dataset", min_length=cfg.n_in + 1)
    n = data.shape[0]
    if n < cfg.batch_size:
        raise ValueError(f"dataset size {n} < batch_size {cfg.batch_size}")

    split_rng = np.random.default_rng(derive_seed(cfg.seed, _STREAM_SPLIT))
    order = split_rng.permutation(n)
    n_val = int(round(cfg.val_fraction * n))
    val_idx, train_idx = order[:n_val], order[n_val:]

    params = init_params(model_cfg, derive_seed(cfg.seed, _STREAM_INIT))
    state = init_adamw_state(params)
    report = TrainReport(
        config={"train": asdict(cfg), "model": asdict(model_cfg),
                "n_train": int(train_idx.size), "n_val": int(val_idx.size)}
    )

    step = 0
    for epoch in range(1, cfg.epochs + 1):
        tic = time.perf_counter()
        shuffle_rng = np.random.default_rng(
            derive_seed(cfg.seed, _STREAM_SHUFFLE, epoch)
        )
        epoch_order = train_idx[shuffle_rng.permutation(train_idx.size)]
        losses = []
        for start in range(0, epoch_order.size, cfg.batch_size):
            step += 1
            batch = data[epoch_order[start : start + cfg.batch_size]]
            drop_rng = np.random.default_rng(
                derive_seed(cfg.seed, _STREAM_DROPOUT, step)
            )
            loss_value, grads = gradients(
                params, model_cfg, batch, cfg.n_in,
                training_mode=True, dropout_rng=drop_rng,
            )
            adamw_step(params, grads, state, step, cfg)
            losses.append(loss_value)
        val_loss = _batched_eval_loss(params, model_cfg, data[val_idx], cfg.n_in,
                                      cfg.batch_size)
        report.add_epoch(epoch, float(np.mean(losses)), val_loss,
                         time.perf_counter() - tic)
        if callback is not None:
            callback(epoch, report)
    report.final_checksum = params_checksum(params)
    return params, report
