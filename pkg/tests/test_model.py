"""Transformer forward pass: encodings, masks, causality, and extrapolation."""

import numpy as np
import pytest

from kryf.exceptions import AllMasked, SequenceTooLong
from kryf.model import (
    MaskPolicy,
    ModelConfig,
    ablation_mask,
    attention_mask,
    averaged_attention_map,
    extrapolate,
    forward,
    init_params,
    parameter_count,
    positional_encoding,
    softmax,
)

TINY = ModelConfig(d_model=8, n_layers=2, n_heads=2, dropout_rate=0.0, max_position=32)
ALL_POLICIES = [
    MaskPolicy.full(),
    MaskPolicy.parity(),
    MaskPolicy.long_range(3),
    MaskPolicy.early(3),
]


def tiny_params(seed=0):
    return init_params(TINY, seed)


def random_increments(rng, *shape):
    return rng.normal(size=shape) * 0.4 + 0.6


class TestPositionalEncoding:
    def test_position_zero_alternates(self):
        p = positional_encoding(0, TINY)
        np.testing.assert_array_equal(p, [0, 1, 0, 1, 0, 1, 0, 1])

    def test_position_one_first_entry(self):
        p = positional_encoding(1, ModelConfig(d_model=64))
        np.testing.assert_allclose(p[0], np.sin(1.0), atol=1e-12)

    def test_bounded(self):
        for pos in range(50):
            p = positional_encoding(pos, TINY)
            assert np.all(np.abs(p) <= 1.0)


class TestSoftmax:
    def test_symmetric_pair(self):
        np.testing.assert_allclose(softmax([0.0, 0.0]), [0.5, 0.5])

    def test_mask_absorbing(self):
        np.testing.assert_array_equal(softmax([0.0, -np.inf]), [1.0, 0.0])

    def test_overflow_protection(self):
        np.testing.assert_allclose(softmax([1000.0, 1000.0]), [0.5, 0.5])

    def test_all_masked_raises(self):
        with pytest.raises(AllMasked):
            softmax([-np.inf, -np.inf])


class TestAblationMask:
    def test_parity_rule(self):
        assert not ablation_mask(MaskPolicy.parity(), 4, 3)
        assert ablation_mask(MaskPolicy.parity(), 4, 2)

    def test_long_range_rule(self):
        assert not ablation_mask(MaskPolicy.long_range(3), 10, 7)
        assert ablation_mask(MaskPolicy.long_range(3), 10, 8)

    def test_early_rule(self):
        assert not ablation_mask(MaskPolicy.early(3), 10, 2)
        assert ablation_mask(MaskPolicy.early(3), 10, 4)

    def test_support_intersected_with_causal(self):
        allowed = attention_mask(MaskPolicy.full(), 6)
        assert allowed[2, 3] == False  # noqa: E712  (future key blocked)
        assert allowed[3, 2] == True  # noqa: E712

    def test_early_rows_fall_back_to_diagonal(self):
        allowed = attention_mask(MaskPolicy.early(3), 8)
        for row in range(8):
            assert allowed[row].any()
        np.testing.assert_array_equal(allowed[0], np.eye(8, dtype=bool)[0])


class TestForward:
    def test_causality_every_policy(self):
        rng = np.random.default_rng(0)
        params = tiny_params()
        x = random_increments(rng, 14)
        x_pert = x.copy()
        x_pert[8] += 0.7
        for policy in ALL_POLICIES:
            before, _ = forward(params, TINY, x, mask=policy)
            after, _ = forward(params, TINY, x_pert, mask=policy)
            np.testing.assert_array_equal(before[:8], after[:8])
            assert np.any(before[8:] != after[8:])

    def test_attention_rows_stochastic(self):
        rng = np.random.default_rng(1)
        params = tiny_params()
        for policy in ALL_POLICIES:
            _, attn = forward(params, TINY, random_increments(rng, 12),
                              mask=policy, capture_attention=True)
            np.testing.assert_allclose(attn.sum(axis=-1), 1.0, atol=1e-6)
            support = attention_mask(policy, 12)
            assert np.all(attn[..., ~support] == 0.0)

    def test_zero_unembedding_gives_constant(self):
        params = tiny_params()
        params["unembed.weight"][:] = 0.0
        params["unembed.bias"][:] = 3.25
        preds, _ = forward(params, TINY, np.linspace(0.2, 1.0, 9))
        np.testing.assert_array_equal(preds, np.full(9, 3.25))

    def test_long_range_window_covering_sequence_equals_full(self):
        rng = np.random.default_rng(2)
        params = tiny_params()
        x = random_increments(rng, 10)
        full, _ = forward(params, TINY, x)
        windowed, _ = forward(params, TINY, x, mask=MaskPolicy.long_range(10))
        np.testing.assert_array_equal(full, windowed)

    def test_permutation_sensitivity(self):
        rng = np.random.default_rng(3)
        params = tiny_params()
        x = random_increments(rng, 10)
        swapped = x.copy()
        swapped[[2, 5]] = swapped[[5, 2]]
        a, _ = forward(params, TINY, x)
        b, _ = forward(params, TINY, swapped)
        assert np.any(a != b)

    def test_batch_matches_single(self):
        rng = np.random.default_rng(4)
        params = tiny_params()
        batch = random_increments(rng, 3, 11)
        batched, _ = forward(params, TINY, batch)
        for i in range(3):
            single, _ = forward(params, TINY, batch[i])
            np.testing.assert_allclose(batched[i], single, atol=1e-12)

    def test_sequence_too_long(self):
        with pytest.raises(SequenceTooLong):
            forward(tiny_params(), TINY, np.ones(33))

    def test_parameter_count_matches_tensors(self):
        for cfg in (TINY, ModelConfig(), ModelConfig(d_model=32, n_heads=4)):
            params = init_params(cfg, 1)
            assert sum(p.size for p in params.values()) == parameter_count(cfg)

    def test_dropout_changes_training_output_only(self):
        cfg = ModelConfig(d_model=8, n_layers=1, n_heads=2, dropout_rate=0.5,
                          max_position=32)
        params = init_params(cfg, 5)
        x = np.linspace(0.2, 1.2, 8)
        eval_a, _ = forward(params, cfg, x)
        eval_b, _ = forward(params, cfg, x)
        np.testing.assert_array_equal(eval_a, eval_b)
        train_a, _ = forward(params, cfg, x, training_mode=True,
                             dropout_rng=np.random.default_rng(0))
        train_b, _ = forward(params, cfg, x, training_mode=True,
                             dropout_rng=np.random.default_rng(1))
        assert np.any(train_a != train_b)


class TestExtrapolate:
    def test_length_and_prefix_contract(self):
        rng = np.random.default_rng(5)
        params = tiny_params()
        prefix_b = np.cumsum(random_increments(rng, 6))
        prefix_inc = np.diff(prefix_b, prepend=0.0)
        out = extrapolate(params, TINY, prefix_inc, 15)
        assert out.shape == (15,)
        np.testing.assert_allclose(out[:6], prefix_b, atol=1e-12)

    def test_constant_stub_accumulates_linearly(self):
        params = tiny_params()
        params["unembed.weight"][:] = 0.0
        params["unembed.bias"][:] = 0.25
        prefix = np.array([1.0, 0.5, 0.5])
        out = extrapolate(params, TINY, prefix, 8)
        b3 = 2.0
        np.testing.assert_allclose(
            out[3:], b3 + 0.25 * np.arange(1, 6), atol=1e-12
        )

    def test_deterministic(self):
        rng = np.random.default_rng(6)
        params = tiny_params()
        prefix = random_increments(rng, 2, 5)
        a = extrapolate(params, TINY, prefix, 12)
        b = extrapolate(params, TINY, prefix, 12)
        np.testing.assert_array_equal(a, b)

    def test_nonpositive_flagged(self):
        params = tiny_params()
        params["unembed.weight"][:] = 0.0
        params["unembed.bias"][:] = -2.0
        _, info = extrapolate(params, TINY, np.array([0.5, 0.1]), 6,
                              return_info=True)
        assert info["n_nonpositive"] > 0


class TestAveragedAttention:
    def test_identical_batch_equals_single(self):
        rng = np.random.default_rng(7)
        params = tiny_params()
        seq = random_increments(rng, 9)
        batch = np.tile(seq, (4, 1))
        avg = averaged_attention_map(params, TINY, batch)
        _, attn = forward(params, TINY, seq, capture_attention=True)
        np.testing.assert_allclose(avg, attn.mean(axis=0), atol=1e-12)

    def test_causal_support_and_row_sums(self):
        rng = np.random.default_rng(8)
        params = tiny_params()
        avg = averaged_attention_map(params, TINY, random_increments(rng, 6, 9))
        tri = np.triu_indices(9, k=1)
        assert np.all(avg[:, tri[0], tri[1]] == 0.0)
        np.testing.assert_allclose(avg.sum(axis=-1), 1.0, atol=1e-6)
