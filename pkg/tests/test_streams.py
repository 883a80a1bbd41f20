"""Stream model forward contract, sampling, augmentation, initialization."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lens.streams import (
    IDENTITY_AUGMENT,
    AugmentConfig,
    StreamKind,
    augment,
    center_segment_frames,
    cross_modality_init,
    eval_transform,
    forward,
    gradient_check,
    new_model,
    sample_segment_frames,
    segment_windows,
    segmental_consensus,
    zero_model,
)
from lens.videoio.clips import Frame


def rgb_frame(value=128, size=32):
    pixels = np.full((size, size, 3), value, dtype=np.uint8)
    return Frame(size, size, pixels, 0, 0)


class TestForward:
    def test_zero_weights_uniform(self):
        model = zero_model(StreamKind.SPATIAL, 3)
        x = np.random.default_rng(0).normal(0, 1, (3, 32, 32))
        np.testing.assert_allclose(forward(model, x), [0.25] * 4, atol=1e-12)

    def test_bias_saturation(self):
        model = zero_model(StreamKind.SPATIAL, 3)
        model.fc2_b[:] = [10.0, 0.0, 0.0, 0.0]
        probs = forward(model, np.zeros((3, 16, 16)))
        assert probs[0] > 0.999

    def test_deterministic(self):
        model = new_model(StreamKind.SPATIAL, 3, seed=4)
        x = np.random.default_rng(1).normal(0, 1, (3, 24, 24))
        np.testing.assert_array_equal(forward(model, x), forward(model, x))

    def test_channel_mismatch_rejected(self):
        model = new_model(StreamKind.TEMPORAL, 20, seed=0)
        with pytest.raises(ValueError):
            forward(model, np.zeros((3, 16, 16)))

    def test_output_is_distribution(self):
        model = new_model(StreamKind.SPATIAL, 3, seed=9)
        rng = np.random.default_rng(2)
        for _ in range(5):
            probs = forward(model, rng.normal(0, 3, (3, 20, 20)))
            assert probs.min() >= 0
            assert probs.sum() == pytest.approx(1.0, abs=1e-6)


class TestConsensus:
    def test_idempotent_on_identical_inputs(self):
        s = np.array([0.7, 0.1, 0.1, 0.1])
        np.testing.assert_allclose(segmental_consensus([s, s, s]), s)

    def test_average(self):
        a = np.array([1.0, 0, 0, 0])
        b = np.array([0, 1.0, 0, 0])
        np.testing.assert_allclose(segmental_consensus([a, b]), [0.5, 0.5, 0, 0])

    def test_single_identity(self):
        s = np.array([0.2, 0.3, 0.4, 0.1])
        np.testing.assert_allclose(segmental_consensus([s]), s)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            segmental_consensus(np.empty((0, 4)))

    @given(
        st.lists(
            st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4),
            min_size=1,
            max_size=6,
        )
    )
    @settings(max_examples=40, deadline=None)
    def test_permutation_invariant(self, rows):
        arr = [np.array(r) / np.sum(r) for r in rows]
        base = segmental_consensus(arr)
        rng = np.random.default_rng(0)
        perm = [arr[i] for i in rng.permutation(len(arr))]
        np.testing.assert_allclose(segmental_consensus(perm), base, atol=1e-12)


class TestSegmentSampling:
    def test_window_bounds(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            idx = sample_segment_frames(90, 3, rng)
            assert 0 <= idx[0] < 30 and 30 <= idx[1] < 60 and 60 <= idx[2] < 90
            assert idx == sorted(idx)

    def test_forced_when_length_equals_n(self):
        rng = np.random.default_rng(0)
        assert sample_segment_frames(3, 3, rng) == [0, 1, 2]

    def test_reproducible_given_seed(self):
        a = sample_segment_frames(90, 3, np.random.default_rng(42))
        b = sample_segment_frames(90, 3, np.random.default_rng(42))
        assert a == b

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            sample_segment_frames(2, 3, np.random.default_rng(0))

    def test_centers_deterministic(self):
        assert center_segment_frames(90, 3) == [15, 45, 75]
        assert segment_windows(90, 3) == [(0, 30), (30, 60), (60, 90)]


class TestAugment:
    def test_identity_configuration_preserves_pixels(self):
        frame = rgb_frame(value=77, size=32)
        cfg = AugmentConfig(
            crop_min=1.0, crop_max=1.0, out_size=32,
            mean=(0.0, 0.0, 0.0), std=(1.0, 1.0, 1.0),
            scale_jitter=(1.0, 1.0), aspect_jitter=(1.0, 1.0),
        )
        out = augment(frame, cfg, np.random.default_rng(0))
        np.testing.assert_allclose(out, 77 / 255.0, atol=1e-12)

    def test_normalization_zeroes_constant_frame(self):
        frame = rgb_frame(value=128, size=32)
        cfg = AugmentConfig(
            crop_min=1.0, crop_max=1.0, out_size=32,
            mean=(128 / 255,) * 3, std=(64 / 255,) * 3,
            scale_jitter=(1.0, 1.0), aspect_jitter=(1.0, 1.0),
        )
        np.testing.assert_allclose(
            augment(frame, cfg, np.random.default_rng(0)), 0.0, atol=1e-12
        )

    def test_seeded_determinism(self):
        rng_img = np.random.default_rng(5)
        pixels = rng_img.integers(0, 255, (48, 48, 3), dtype=np.uint8)
        frame = Frame(48, 48, pixels, 0, 0)
        cfg = AugmentConfig(out_size=32)
        a = augment(frame, cfg, np.random.default_rng(7))
        b = augment(frame, cfg, np.random.default_rng(7))
        np.testing.assert_array_equal(a, b)

    def test_output_shape(self):
        frame = rgb_frame(size=48)
        cfg = AugmentConfig(out_size=24)
        assert augment(frame, cfg, np.random.default_rng(0)).shape == (3, 24, 24)
        assert eval_transform(frame, cfg).shape == (3, 24, 24)

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError):
            AugmentConfig(crop_min=0.0)
        with pytest.raises(ValueError):
            AugmentConfig(std=(0.0, 1.0, 1.0))

    def test_identity_augment_is_noop_alias(self):
        frame = rgb_frame(value=10, size=64)
        out = augment(frame, IDENTITY_AUGMENT, np.random.default_rng(0))
        np.testing.assert_allclose(out, 10 / 255.0, atol=1e-12)


class TestCrossModality:
    def test_constant_channels_mean(self):
        w = np.zeros((2, 3, 3, 3))
        w[:, 0] = 1.0
        w[:, 1] = 2.0
        w[:, 2] = 3.0
        out = cross_modality_init(w, 20)
        assert out.shape == (2, 20, 3, 3)
        np.testing.assert_allclose(out, 2.0)

    def test_equal_channels_preserved(self):
        rng = np.random.default_rng(0)
        base = rng.normal(0, 1, (4, 1, 3, 3))
        w = np.repeat(base, 3, axis=1)
        out = cross_modality_init(w, 8)
        np.testing.assert_allclose(out, np.repeat(base, 8, axis=1))

    def test_shape_and_zero_variance(self):
        rng = np.random.default_rng(1)
        w = rng.normal(0, 1, (8, 3, 3, 3))
        out = cross_modality_init(w, 20)
        assert out.shape == (8, 20, 3, 3)
        # replication makes every channel bit-identical within a filter
        for c in range(20):
            np.testing.assert_array_equal(out[:, c], out[:, 0])
        assert out.var(axis=1).max() < 1e-30

    def test_malformed_shapes_rejected(self):
        with pytest.raises(ValueError):
            cross_modality_init(np.zeros((3, 3, 3)), 20)
        with pytest.raises(ValueError):
            cross_modality_init(np.zeros((2, 3, 3, 3)), 0)


class TestGradientCheck:
    @pytest.mark.parametrize("seed", range(5))
    def test_analytic_matches_finite_differences(self, seed):
        model = new_model(StreamKind.SPATIAL, 3, seed=seed)
        rng = np.random.default_rng(seed + 100)
        x = rng.normal(0, 1, (3, 3, 24, 24))
        assert gradient_check(model, x, label=seed % 4, rng=rng) < 1e-4

    def test_zero_model_finite(self):
        model = zero_model(StreamKind.SPATIAL, 3)
        x = np.random.default_rng(0).normal(0, 1, (1, 3, 24, 24))
        err = gradient_check(model, x, label=1)
        assert np.isfinite(err) and err < 1e-4

    def test_corrupted_gradient_detected(self):
        from lens.streams.gradcheck import _analytic_grads

        model = new_model(StreamKind.SPATIAL, 3, seed=0)
        rng = np.random.default_rng(50)
        x = rng.normal(0, 1, (3, 3, 24, 24))
        bad = {k: v * 1.1 for k, v in _analytic_grads(model, x, 2).items()}
        err = gradient_check(model, x, label=2, rng=np.random.default_rng(51),
                             grad_override=bad)
        assert err > 1e-2
