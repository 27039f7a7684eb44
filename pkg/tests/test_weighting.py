"""Tests for dynamic weight scores, softmax weighting and aggregation."""

import math

import numpy as np
import pytest

from hirqm import (
    FIXED_WEIGHTS,
    aggregate,
    build_pyramid,
    softmax_weights,
    weight_scores,
)
from hirqm.weighting import weights_for_mode

from helpers import constant_image

EQUAL_WEIGHT_GEOMEAN = 0.7958114415792784  # (0.8 * 0.9 * 0.7) ** (1/3)


def _synthetic_pyramid(variances):
    """Levels with exactly the requested population variances."""
    levels = []
    for var in variances:
        d = math.sqrt(var)
        levels.append(np.array([[0.5 - d, 0.5 + d], [0.5 - d, 0.5 + d]]))
    return levels


class TestWeightScores:
    def test_constant_image_concentrates_on_pdf(self):
        img = constant_image(8, 8, 0.5)
        pyramid = build_pyramid(img, levels=4)
        feats = [np.zeros((4, 2, 2), np.float32)]
        scores = weight_scores(img, pyramid, feats)
        np.testing.assert_allclose(scores, (1.0, 0.0, 0.0), atol=1e-9)

    def test_hand_arithmetic_case(self):
        # image with mean 0.5 and variance 0.1
        d = math.sqrt(0.1)
        img = np.array([[0.5 - d, 0.5 + d]] * 2, dtype=np.float32)
        pyramid = _synthetic_pyramid([0.1, 0.1, 0.1, 0.1])  # spread 0
        feats = [np.full((1, 2, 2), 0.2, np.float32)]  # RMS exactly 0.2
        scores = weight_scores(img, pyramid, feats)
        np.testing.assert_allclose(scores, (0.75, 0.0, 0.25), atol=1e-6)

    def test_always_finite_and_nonnegative(self):
        rng = np.random.default_rng(61)
        for _ in range(10):
            img = rng.random((12, 12), dtype=np.float32)
            pyramid = build_pyramid(img, levels=4)
            feats = [rng.normal(size=(3, 4, 4)).astype(np.float32)]
            scores = weight_scores(img, pyramid, feats)
            assert all(np.isfinite(s) and s >= 0.0 for s in scores)

    def test_coefficient_matrix_remixes_properties(self):
        img = constant_image(8, 8, 0.5)
        pyramid = build_pyramid(img, levels=4)
        feats = [np.full((1, 2, 2), 0.25, np.float32)]
        # route the feature RMS into the pdf slot
        coefs = ((0.0, 0.0, 1.0), (0.0, 1.0, 0.0), (1.0, 0.0, 0.0))
        scores = weight_scores(img, pyramid, feats, coefs)
        np.testing.assert_allclose(
            scores, (0.25 / 0.75, 0.0, 0.5 / 0.75), atol=1e-9
        )

    def test_rejects_bad_matrix(self):
        img = constant_image(4, 4, 0.5)
        pyramid = build_pyramid(img, levels=2)
        with pytest.raises(ValueError):
            weight_scores(img, pyramid, [np.zeros((1, 1, 1))], coefs=((1, 0),))


class TestSoftmaxWeights:
    def test_symmetric_scores_give_thirds(self):
        for c in (-3.0, 0.0, 42.0):
            np.testing.assert_allclose(
                softmax_weights((c, c, c)), (1 / 3, 1 / 3, 1 / 3), atol=1e-12
            )

    def test_log_two_analytic_case(self):
        np.testing.assert_allclose(
            softmax_weights((math.log(2.0), 0.0, 0.0)), (0.5, 0.25, 0.25), atol=1e-9
        )

    def test_large_scores_do_not_overflow(self):
        w = softmax_weights((1000.0, 0.0, 0.0))
        assert all(np.isfinite(v) for v in w)
        assert w[0] == pytest.approx(1.0, abs=1e-12)
        assert sum(w) == pytest.approx(1.0, abs=1e-12)

    def test_sums_to_one_and_shift_invariant(self):
        rng = np.random.default_rng(62)
        for _ in range(50):
            s = rng.uniform(-50, 50, size=3)
            w = softmax_weights(tuple(s))
            assert sum(w) == pytest.approx(1.0, abs=1e-9)
            shifted = softmax_weights(tuple(s + 17.5))
            np.testing.assert_allclose(w, shifted, atol=1e-9)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            softmax_weights((math.nan, 0.0, 0.0))


class TestAggregate:
    def test_perfect_scores(self):
        assert aggregate((1.0, 1.0, 1.0), (0.2, 0.5, 0.3)) == 1.0

    def test_equal_weight_geometric_mean(self):
        got = aggregate((0.8, 0.9, 0.7), (1 / 3, 1 / 3, 1 / 3))
        assert got == pytest.approx(EQUAL_WEIGHT_GEOMEAN, abs=1e-12)
        assert got == pytest.approx(0.79580, abs=1e-4)

    def test_zero_component_annihilates(self):
        assert aggregate((0.9, 0.0, 0.95), (0.3, 0.4, 0.3)) == 0.0

    def test_zero_weight_skips_component(self):
        # a disabled component must not influence the result, even when zero
        assert aggregate((0.9, 0.0, 0.95), (0.5, 0.0, 0.5)) > 0.0
        a = aggregate((0.9, 0.123, 0.95), (0.5, 0.0, 0.5))
        b = aggregate((0.9, 0.789, 0.95), (0.5, 0.0, 0.5))
        assert a == b

    def test_monotone_in_each_component(self):
        rng = np.random.default_rng(63)
        for _ in range(50):
            weights = softmax_weights(tuple(rng.uniform(-2, 2, size=3)))
            base = rng.uniform(0.05, 0.95, size=3)
            bumped = base.copy()
            idx = int(rng.integers(0, 3))
            bumped[idx] = min(1.0, bumped[idx] + rng.uniform(0.0, 0.05))
            assert aggregate(tuple(bumped), weights) >= aggregate(tuple(base), weights)

    def test_bounded_by_component_extremes(self):
        rng = np.random.default_rng(64)
        for _ in range(50):
            weights = softmax_weights(tuple(rng.uniform(-2, 2, size=3)))
            scores = rng.uniform(0.01, 1.0, size=3)
            total = aggregate(tuple(scores), weights)
            assert total <= max(scores) + 1e-12
            assert total >= min(scores) - 1e-12

    def test_validation(self):
        with pytest.raises(ValueError):
            aggregate((1.2, 0.5, 0.5), (1 / 3, 1 / 3, 1 / 3))
        with pytest.raises(ValueError):
            aggregate((0.5, 0.5, 0.5), (-0.1, 0.6, 0.5))


class TestModeWeights:
    def test_fixed_tables(self):
        assert FIXED_WEIGHTS["no_pdf"] == (0.0, 0.5, 0.5)
        assert FIXED_WEIGHTS["no_mfs"] == (0.5, 0.0, 0.5)
        assert FIXED_WEIGHTS["no_hdif"] == (0.5, 0.5, 0.0)
        assert FIXED_WEIGHTS["static_equal"] == (1 / 3, 1 / 3, 1 / 3)

    def test_dynamic_passthrough(self):
        assert weights_for_mode("full_dynamic", (0.2, 0.3, 0.5)) == (0.2, 0.3, 0.5)

    def test_dynamic_requires_weights(self):
        with pytest.raises(ValueError):
            weights_for_mode("full_dynamic")

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            weights_for_mode("bogus")
