import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from calibkit.errors import DegenerateEmbeddingError, RangeError, ShapeError
from calibkit.head import (
    COSINE_SCALE,
    PROVENANCE_COSINE,
    LogitMatrix,
    ProbabilityMatrix,
    cosine_logits,
    predict,
    softmax,
    softmax_values,
)
from calibkit.tensorio import LabelVector


class TestCosineLogits:
    def test_aligned_unit_vectors_score_100(self):
        out = cosine_logits(np.array([[1.0, 0.0]]), np.array([[1.0, 0.0]]))
        assert out.values[0, 0] == 100.0
        assert out.provenance == PROVENANCE_COSINE

    def test_orthogonal_vectors_score_0(self):
        out = cosine_logits(np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]]))
        assert out.values[0, 0] == 0.0

    def test_opposite_vectors_score_minus_100(self):
        out = cosine_logits(np.array([[1.0, 0.0]]), np.array([[-2.0, 0.0]]))
        assert out.values[0, 0] == -100.0

    def test_45_degree_pair(self):
        out = cosine_logits(np.array([[1.0, 0.0]]), np.array([[1.0, 1.0]]))
        assert out.values[0, 0] == pytest.approx(100.0 / math.sqrt(2), abs=1e-9)
        assert out.values[0, 0] == pytest.approx(70.7106781, abs=1e-6)

    def test_shape_is_images_by_classes(self):
        rng = np.random.default_rng(0)
        out = cosine_logits(rng.normal(size=(5, 8)), rng.normal(size=(3, 8)))
        assert out.values.shape == (5, 3)
        assert out.values.dtype == np.float64

    def test_values_within_scale_bound(self):
        rng = np.random.default_rng(1)
        out = cosine_logits(rng.normal(size=(20, 4)), rng.normal(size=(7, 4)))
        assert np.all(np.abs(out.values) <= COSINE_SCALE)

    def test_norm_invariance(self):
        rng = np.random.default_rng(2)
        imgs = rng.normal(size=(6, 16))
        classes = rng.normal(size=(4, 16))
        base = cosine_logits(imgs, classes).values
        scaled = cosine_logits(imgs * 3.7, classes * 0.01).values
        np.testing.assert_allclose(scaled, base, atol=1e-12)

    def test_power_of_two_rescale_is_exact(self):
        rng = np.random.default_rng(3)
        imgs = rng.normal(size=(6, 16))
        classes = rng.normal(size=(4, 16))
        base = cosine_logits(imgs, classes).values
        scaled = cosine_logits(imgs * 4.0, classes * 0.5).values
        np.testing.assert_array_equal(scaled, base)

    def test_zero_norm_image_row_rejected(self):
        with pytest.raises(DegenerateEmbeddingError):
            cosine_logits(np.array([[0.0, 0.0]]), np.array([[1.0, 0.0]]))

    def test_zero_norm_class_row_rejected(self):
        with pytest.raises(DegenerateEmbeddingError):
            cosine_logits(np.array([[1.0, 0.0]]), np.array([[1.0, 0.0], [0.0, 0.0]]))

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            cosine_logits(np.ones((2, 3)), np.ones((2, 4)))


class TestLogitMatrix:
    def test_nonfinite_rejected(self):
        from calibkit.errors import NonFiniteError

        with pytest.raises(NonFiniteError):
            LogitMatrix(values=np.array([[0.0, float("nan")]]))

    def test_one_dimensional_rejected(self):
        with pytest.raises(ShapeError):
            LogitMatrix(values=np.array([1.0, 2.0]))


class TestSoftmax:
    def test_constant_row_is_uniform(self):
        probs = softmax_values(np.array([[5.0, 5.0, 5.0]]))
        np.testing.assert_allclose(probs, [[1 / 3, 1 / 3, 1 / 3]], atol=1e-15)

    def test_log_ratio_row(self):
        probs = softmax_values(np.array([[0.0, math.log(3.0)]]))
        np.testing.assert_allclose(probs, [[0.25, 0.75]], atol=1e-12)

    def test_large_logits_do_not_overflow(self):
        probs = softmax_values(np.array([[1000.0, 0.0]]))
        assert np.all(np.isfinite(probs))
        assert probs[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(4)
        probs = softmax_values(rng.normal(scale=30.0, size=(50, 12)))
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)

    def test_shift_invariance(self):
        rng = np.random.default_rng(5)
        logits = rng.normal(size=(10, 6))
        np.testing.assert_allclose(
            softmax_values(logits + 17.0), softmax_values(logits), atol=1e-15
        )

    def test_wraps_logit_matrix(self):
        probs = softmax(LogitMatrix(values=np.array([[0.0, 0.0]])))
        assert isinstance(probs, ProbabilityMatrix)
        np.testing.assert_allclose(probs.values, [[0.5, 0.5]])

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1))
    def test_permutation_equivariance(self, seed):
        rng = np.random.default_rng(seed)
        logits = rng.normal(scale=5.0, size=(4, 8))
        perm = rng.permutation(8)
        np.testing.assert_allclose(
            softmax_values(logits[:, perm]), softmax_values(logits)[:, perm], atol=1e-15
        )


class TestProbabilityMatrix:
    def test_row_sum_must_be_one(self):
        with pytest.raises(RangeError):
            ProbabilityMatrix(values=np.array([[0.6, 0.6]]))

    def test_negative_entry_rejected(self):
        with pytest.raises(RangeError):
            ProbabilityMatrix(values=np.array([[1.2, -0.2]]))


class TestPredict:
    def _predict(self, rows, labels):
        probs = ProbabilityMatrix(values=np.asarray(rows, dtype=np.float64))
        vec = LabelVector(labels=np.asarray(labels, dtype=np.int64), num_classes=probs.values.shape[1])
        return predict(probs, vec)

    def test_basic_example(self):
        preds = self._predict([[0.2, 0.5, 0.3], [0.7, 0.2, 0.1]], [1, 2])
        np.testing.assert_array_equal(preds.predicted, [1, 0])
        np.testing.assert_allclose(preds.confidence, [0.5, 0.7])
        np.testing.assert_array_equal(preds.correct, [True, False])

    def test_tie_picks_lowest_index(self):
        preds = self._predict([[0.25, 0.25, 0.25, 0.25]], [3])
        assert preds.predicted[0] == 0
        assert preds.confidence[0] == 0.25
        assert not preds.correct[0]

    def test_matches_brute_force_argmax(self):
        rng = np.random.default_rng(6)
        values = softmax_values(rng.normal(scale=4.0, size=(50, 10)))
        labels = rng.integers(0, 10, size=50)
        preds = self._predict(values, labels)
        for i in range(50):
            best = max(range(10), key=lambda j: (values[i, j], -j))
            assert preds.predicted[i] == best
            assert preds.confidence[i] == values[i, best]
            assert preds.correct[i] == (best == labels[i])

    def test_confidence_at_least_uniform(self):
        rng = np.random.default_rng(7)
        for c in (2, 5, 17):
            values = softmax_values(rng.normal(scale=2.0, size=(40, c)))
            preds = self._predict(values, rng.integers(0, c, size=40))
            assert np.all(preds.confidence >= 1.0 / c)
            assert np.all(preds.confidence <= 1.0)

    def test_label_count_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            self._predict([[0.5, 0.5], [0.5, 0.5]], [0])
