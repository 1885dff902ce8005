"""Decoder-only transformer over Lanczos increment sequences.

Scalar increments are affinely embedded into d_model dimensions, augmented
with sinusoidal position encodings, and passed through a stack of decoder
blocks (masked multi-head self-attention, then a position-wise feed-forward
network, each followed by add & layer-norm in post-norm order).  A learned
affine unembedding maps every position's final hidden state to the
predicted next increment.

Everything is plain float64 numpy.  The forward pass optionally records
per-layer attention weights and accepts inference-time mask policies that
restrict attention support beyond the causal mask (parity / recent-k /
drop-early-k ablations).

Array conventions: parameters are a flat dict of named float64 tensors;
activations are batch-first (B, T, d_model); attention weights are
(layers, heads, T, T) with rows stochastic over their allowed support.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import AllMasked, SequenceTooLong
from .validation import check_sequence_batch

__all__ = [
    "ModelConfig",
    "MaskPolicy",
    "positional_encoding",
    "softmax",
    "ablation_mask",
    "attention_mask",
    "init_params",
    "parameter_count",
    "params_checksum",
    "forward",
    "extrapolate",
    "averaged_attention_map",
]


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters (defaults follow the trained model)."""

    d_model: int = 64
    n_layers: int = 3
    n_heads: int = 4
    d_ff: int = 0  # 0 means 4 * d_model
    dropout_rate: float = 0.1
    max_position: int = 128
    layer_norm_eps: float = 1e-5

    def __post_init__(self):
        if self.d_model % self.n_heads != 0:
            raise ValueError("d_model must be divisible by n_heads")
        if self.d_ff == 0:
            object.__setattr__(self, "d_ff", 4 * self.d_model)

    @property
    def d_k(self):
        return self.d_model // self.n_heads


@dataclass(frozen=True)
class MaskPolicy:
    """Inference-time attention restriction, always intersected with the
    causal mask.  ``kind`` is one of full, parity, long_range, early; ``k``
    parametrizes the latter two."""

    kind: str = "full"
    k: int = 3

    def __post_init__(self):
        if self.kind not in ("full", "parity", "long_range", "early"):
            raise ValueError(f"unknown mask kind {self.kind!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")

    @classmethod
    def full(cls):
        return cls("full")

    @classmethod
    def parity(cls):
        return cls("parity")

    @classmethod
    def long_range(cls, k=3):
        return cls("long_range", k)

    @classmethod
    def early(cls, k=3):
        return cls("early", k)


def positional_encoding(position, cfg):
    """Sinusoidal encoding of one (0-indexed) position as a d_model vector."""
    if position < 0:
        raise ValueError("position must be >= 0")
    d = cfg.d_model
    out = np.empty(d)
    i = np.arange(0, d, 2)
    angle = position / (10000.0 ** (i / d))
    out[0::2] = np.sin(angle)
    out[1::2] = np.cos(angle[: d // 2])
    return out


@lru_cache(maxsize=16)
def _position_table(d_model, max_position):
    pos = np.arange(max_position)[:, None]
    i = np.arange(0, d_model, 2)[None, :]
    angle = pos / (10000.0 ** (i / d_model))
    table = np.empty((max_position, d_model))
    table[:, 0::2] = np.sin(angle)
    table[:, 1::2] = np.cos(angle[:, : d_model // 2])
    return table


def softmax(z):
    """Exp-normalize a vector with max-subtraction; -inf entries map to 0.

    Raises AllMasked when every entry is -inf.
    """
    z = np.asarray(z, dtype=np.float64)
    top = z.max()
    if np.isneginf(top):
        raise AllMasked("softmax over a fully masked vector")
    e = np.exp(z - top)
    return e / e.sum()


def ablation_mask(policy, n, n_prime):
    """Whether the policy allows the (1-based) query index n to attend to
    key index n_prime.  The causal constraint is applied separately by
    intersection; this is the bare policy rule."""
    if n < 1 or n_prime < 1:
        raise ValueError("indices are 1-based coefficient positions")
    if policy.kind == "full":
        return True
    if policy.kind == "parity":
        return (n - n_prime) % 2 == 0
    if policy.kind == "long_range":
        return n_prime > n - policy.k
    return n_prime > policy.k  # early


@lru_cache(maxsize=64)
def _mask_additive(policy, length):
    """(T, T) additive mask: 0 on allowed pairs, -inf on blocked ones.

    Positions are 0-based internally; the policy rules use 1-based
    coefficient indices (position p holds increment p+1).  Rows whose
    allowed support would be empty (early masking at n <= k) fall back to
    the diagonal so the softmax stays defined; those rows never feed a
    scored prediction in practice.
    """
    q = np.arange(1, length + 1)[:, None]  # 1-based query index
    s = np.arange(1, length + 1)[None, :]
    allowed = s <= q  # causal
    if policy.kind == "parity":
        allowed &= (q - s) % 2 == 0
    elif policy.kind == "long_range":
        allowed &= s > q - policy.k
    elif policy.kind == "early":
        allowed &= s > policy.k
    empty = ~allowed.any(axis=1)
    if empty.any():
        allowed[empty, empty.nonzero()[0]] = True
    out = np.where(allowed, 0.0, -np.inf)
    out.flags.writeable = False
    return out


def attention_mask(policy, length):
    """Boolean (T, T) allowed-support matrix for a policy, causal included."""
    return np.isfinite(_mask_additive(policy, length))


def parameter_count(cfg):
    """Closed-form total number of learnable scalars."""
    d, df, L = cfg.d_model, cfg.d_ff, cfg.n_layers
    per_layer = 3 * d * d + d * d + 2 * d * df + df + d + 4 * d
    return 2 * d + L * per_layer + d + 1


def _tensor_spec(cfg):
    """Ordered (name, shape, fan_in) description of every tensor."""
    d, df, h, dk = cfg.d_model, cfg.d_ff, cfg.n_heads, cfg.d_k
    spec = [("embed.weight", (d,), 1), ("embed.bias", (d,), None)]
    for l in range(cfg.n_layers):
        p = f"layers.{l}."
        spec += [
            (p + "attn.wq", (h, dk, d), d),
            (p + "attn.wk", (h, dk, d), d),
            (p + "attn.wv", (h, dk, d), d),
            (p + "attn.wo", (d, d), d),
            (p + "ffn.w1", (d, df), d),
            (p + "ffn.b1", (df,), None),
            (p + "ffn.w2", (df, d), df),
            (p + "ffn.b2", (d,), None),
            (p + "ln1.gain", (d,), "one"),
            (p + "ln1.bias", (d,), None),
            (p + "ln2.gain", (d,), "one"),
            (p + "ln2.bias", (d,), None),
        ]
    spec += [("unembed.weight", (d,), d), ("unembed.bias", (1,), None)]
    return spec


def init_params(cfg, seed):
    """Fresh parameters: weights ~ U(-1/sqrt(fan_in), +1/sqrt(fan_in)),
    biases zero, layer-norm gains one.  Deterministic in the seed."""
    rng = np.random.default_rng(int(seed))
    params = {}
    for name, shape, fan_in in _tensor_spec(cfg):
        if fan_in is None:
            params[name] = np.zeros(shape)
        elif fan_in == "one":
            params[name] = np.ones(shape)
        else:
            bound = 1.0 / np.sqrt(fan_in)
            params[name] = rng.uniform(-bound, bound, size=shape)
    total = sum(p.size for p in params.values())
    assert total == parameter_count(cfg)
    return params


def params_checksum(params):
    """Hex digest over tensor names and exact bytes."""
    import hashlib

    digest = hashlib.sha256()
    for name in sorted(params):
        digest.update(name.encode())
        digest.update(np.ascontiguousarray(params[name]).tobytes())
    return digest.hexdigest()


def _head_matrix(w):
    """(H, DK, D) stacked head projections as one (D, H*DK) matrix."""
    h, dk, d = w.shape
    return w.transpose(2, 0, 1).reshape(d, h * dk)


def _layer_norm(x, gain, bias, eps):
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x - mu) * inv
    return gain * xhat + bias, xhat, inv


def make_dropout_masks(cfg, batch, length, rng):
    """Inverted-dropout masks for each layer's attention and FFN outputs."""
    p = cfg.dropout_rate
    if p <= 0.0:
        return None
    keep = 1.0 - p
    masks = []
    for _ in range(cfg.n_layers):
        m_attn = (rng.random((batch, length, cfg.d_model)) < keep) / keep
        m_ffn = (rng.random((batch, length, cfg.d_model)) < keep) / keep
        masks.append((m_attn, m_ffn))
    return masks


def _run_forward(params, cfg, x, mask_add, capture, drop_masks, need_cache):
    """Batched forward pass.  x is (B, T); returns (preds, attn, cache)."""
    b, t = x.shape
    d, h, dk = cfg.d_model, cfg.n_heads, cfg.d_k
    scale = 1.0 / np.sqrt(dk)

    hidden = x[:, :, None] * params["embed.weight"] + params["embed.bias"]
    hidden += _position_table(d, cfg.max_position)[:t]

    attn_maps = np.empty((b, cfg.n_layers, h, t, t)) if capture else None
    cache = {"x": x, "layers": []} if need_cache else None

    for l in range(cfg.n_layers):
        p = f"layers.{l}."
        wq = _head_matrix(params[p + "attn.wq"])
        wk = _head_matrix(params[p + "attn.wk"])
        wv = _head_matrix(params[p + "attn.wv"])
        h_in = hidden

        # contiguous head-major copies: batched matmul is ~2x faster on them
        q = np.ascontiguousarray((h_in @ wq).reshape(b, t, h, dk).transpose(0, 2, 1, 3))
        k = np.ascontiguousarray((h_in @ wk).reshape(b, t, h, dk).transpose(0, 2, 1, 3))
        v = np.ascontiguousarray((h_in @ wv).reshape(b, t, h, dk).transpose(0, 2, 1, 3))

        scores = q @ k.swapaxes(-1, -2)
        scores *= scale
        scores += mask_add
        scores -= scores.max(axis=-1, keepdims=True)
        np.exp(scores, out=scores)
        scores /= scores.sum(axis=-1, keepdims=True)
        alpha = scores

        if capture:
            attn_maps[:, l] = alpha

        ctx = (alpha @ v).transpose(0, 2, 1, 3).reshape(b, t, d)
        attn_out = ctx @ params[p + "attn.wo"]
        if drop_masks is not None:
            attn_out *= drop_masks[l][0]
        res1 = h_in + attn_out
        h1, xhat1, inv1 = _layer_norm(
            res1, params[p + "ln1.gain"], params[p + "ln1.bias"], cfg.layer_norm_eps
        )

        u = h1 @ params[p + "ffn.w1"] + params[p + "ffn.b1"]
        r = np.maximum(u, 0.0)
        f = r @ params[p + "ffn.w2"] + params[p + "ffn.b2"]
        if drop_masks is not None:
            f *= drop_masks[l][1]
        res2 = h1 + f
        h2, xhat2, inv2 = _layer_norm(
            res2, params[p + "ln2.gain"], params[p + "ln2.bias"], cfg.layer_norm_eps
        )

        if need_cache:
            cache["layers"].append(
                {
                    "h_in": h_in,
                    "q": q,
                    "k": k,
                    "v": v,
                    "alpha": alpha,
                    "ctx": ctx,
                    "xhat1": xhat1,
                    "inv1": inv1,
                    "h1": h1,
                    "relu_mask": u > 0.0,
                    "r": r,
                    "xhat2": xhat2,
                    "inv2": inv2,
                }
            )
        hidden = h2

    preds = hidden @ params["unembed.weight"] + params["unembed.bias"][0]
    if need_cache:
        cache["h_final"] = hidden
    return preds, attn_maps, cache


def _prepare_input(x, cfg):
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    arr = check_sequence_batch(arr, "increments")
    if arr.shape[1] > cfg.max_position:
        raise SequenceTooLong(
            f"sequence length {arr.shape[1]} exceeds max_position {cfg.max_position}"
        )
    return arr, single


def forward(
    params,
    cfg,
    increments,
    mask=None,
    capture_attention=False,
    training_mode=False,
    dropout_rng=None,
):
    """Predict the next increment at every position.

    Parameters
    ----------
    increments : (T,) or (B, T) increment values.
    mask : MaskPolicy; defaults to full (causal-only) attention.
    capture_attention : also return the attention weights, shaped
        (layers, heads, T, T) for 1-D input and (B, layers, heads, T, T)
        for batched input.
    training_mode : apply dropout; requires ``dropout_rng`` when the
        configured rate is positive.

    Returns
    -------
    (predictions, attention) where predictions[..., n] is the model's
    estimate of the increment following position n, and attention is None
    unless requested.
    """
    x, single = _prepare_input(increments, cfg)
    mask = mask or MaskPolicy.full()
    mask_add = _mask_additive(mask, x.shape[1])
    drop_masks = None
    if training_mode and cfg.dropout_rate > 0.0:
        if dropout_rng is None:
            raise ValueError("training_mode with dropout requires dropout_rng")
        drop_masks = make_dropout_masks(cfg, x.shape[0], x.shape[1], dropout_rng)
    preds, attn, _ = _run_forward(
        params, cfg, x, mask_add, capture_attention, drop_masks, need_cache=False
    )
    if single:
        preds = preds[0]
        attn = attn[0] if attn is not None else None
    return preds, attn


def extrapolate(
    params, cfg, prefix_increments, target_length, mask=None, return_info=False
):
    """Autoregressively extend increment prefixes and reconstruct b_n.

    The prefix (length n_in >= 1) is kept verbatim; each iteration feeds
    the current sequence through the model and appends the last position's
    prediction until ``target_length`` increments exist.  The returned
    coefficients are the raw cumulative sums: extrapolations can dip below
    zero, which downstream chain construction clamps and counts.  Dropout
    is never applied here.

    Returns the (B, target_length) or (target_length,) coefficient array;
    with ``return_info=True`` also a dict with the count of non-positive
    reconstructed coefficients.
    """
    x, single = _prepare_input(prefix_increments, cfg)
    target_length = int(target_length)
    if target_length <= x.shape[1]:
        raise ValueError("target_length must exceed the prefix length")
    if target_length - 1 > cfg.max_position:
        raise SequenceTooLong(
            f"target_length {target_length} exceeds max_position {cfg.max_position}"
        )
    mask = mask or MaskPolicy.full()
    for m in range(x.shape[1], target_length):
        preds, _, _ = _run_forward(
            params, cfg, x, _mask_additive(mask, m), False, None, need_cache=False
        )
        x = np.concatenate([x, preds[:, -1:]], axis=1)
    b = np.cumsum(x, axis=1)
    info = {"n_nonpositive": int((b <= 0.0).sum())}
    if single:
        b = b[0]
    return (b, info) if return_info else b


def averaged_attention_map(params, cfg, batch, mask=None, chunk=16):
    """Per-head attention averaged over all layers and a batch of
    equal-length increment sequences.  Returns (heads, T, T)."""
    x = check_sequence_batch(batch, "batch")
    total = np.zeros((cfg.n_heads, x.shape[1], x.shape[1]))
    for start in range(0, x.shape[0], chunk):
        part = x[start : start + chunk]
        _, attn = forward(params, cfg, part, mask=mask, capture_attention=True)
        total += attn.sum(axis=(0, 1))
    return total / (x.shape[0] * cfg.n_layers)
