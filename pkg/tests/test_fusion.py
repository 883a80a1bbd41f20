"""SVM kernel, SMO optimizer, cross-validation, search, and report ops."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lens.fusion import (
    ConfusionMatrix,
    SvmConfig,
    confusion_matrix,
    gram_matrix,
    kfold_cv,
    kkt_violation,
    percent_change,
    percent_change_table,
    poly_kernel,
    pr_points,
    random_search,
    stratified_folds,
    svm_fit,
    svm_predict,
    svm_scores,
)
from lens.fusion.smo import BinarySvm, SvmModel


def toy_separable():
    x = np.array(
        [[0.0, 0.0], [0.0, 1.0], [3.0, 3.0], [3.0, 4.0],
         [0.0, 3.0], [1.0, 3.0], [3.0, 0.0], [4.0, 0.0]]
    )
    y = np.array([0, 0, 1, 1, 2, 2, 3, 3])
    return x, y


def softmax_features(rng, n_per_class=20):
    feats = np.vstack(
        [rng.dirichlet(np.ones(4) * 0.5, size=n_per_class) for _ in range(4)]
    )
    feats2 = np.vstack(
        [rng.dirichlet(np.ones(4) * 0.5, size=n_per_class) for _ in range(4)]
    )
    return np.hstack([feats, feats2])


class TestKernel:
    def test_zero_vectors(self):
        cfg = SvmConfig(gamma=1.0, coef0=1.0)
        assert poly_kernel(np.zeros(2), np.zeros(2), cfg) == pytest.approx(1.0)

    def test_worked_example(self):
        cfg = SvmConfig(gamma=0.5, coef0=1.0)
        value = poly_kernel(np.array([1.0, 1.0]), np.array([2.0, 3.0]), cfg)
        assert value == pytest.approx(3.5**5)
        assert value == pytest.approx(525.21875)

    def test_orthogonal_with_zero_offset(self):
        cfg = SvmConfig(gamma=1.0, coef0=0.0)
        assert poly_kernel(np.array([1.0, 0.0]), np.array([0.0, 1.0]), cfg) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            poly_kernel(np.zeros(3), np.zeros(4), SvmConfig())

    @given(
        st.lists(st.floats(-3, 3), min_size=4, max_size=4),
        st.lists(st.floats(-3, 3), min_size=4, max_size=4),
    )
    @settings(max_examples=60, deadline=None)
    def test_symmetry(self, a, b):
        cfg = SvmConfig(gamma=0.7, coef0=1.0)
        x, y = np.array(a), np.array(b)
        assert poly_kernel(x, y, cfg) == poly_kernel(y, x, cfg)

    def test_gram_psd_on_random_features(self):
        rng = np.random.default_rng(0)
        for seed in range(5):
            feats = softmax_features(np.random.default_rng(seed), 10)
            gram = gram_matrix(feats, SvmConfig(gamma=1.5, coef0=1.0))
            assert np.linalg.eigvalsh(gram).min() >= -1e-8

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SvmConfig(degree=3)
        with pytest.raises(ValueError):
            SvmConfig(gamma=0.0)


class TestSmo:
    def test_separable_training_accuracy_is_one(self):
        x, y = toy_separable()
        model = svm_fit(x, y, SvmConfig(gamma=1.0, coef0=1.0, C=10.0))
        pred, _ = svm_predict(model, x)
        assert (pred == y).all()
        assert model.converged

    def test_kkt_within_tolerance_at_convergence(self):
        x, y = toy_separable()
        cfg = SvmConfig(gamma=1.0, coef0=1.0, C=10.0)
        model = svm_fit(x, y, cfg)
        assert kkt_violation(model, x, y) <= cfg.tol

    def test_duplicated_training_set_predicts_identically(self):
        x, y = toy_separable()
        cfg = SvmConfig(gamma=1.0, coef0=1.0, C=5.0)
        model_a = svm_fit(x, y, cfg)
        model_b = svm_fit(np.vstack([x, x]), np.concatenate([y, y]), cfg)
        probe = np.random.default_rng(0).uniform(-1, 5, (100, 2))
        pred_a, _ = svm_predict(model_a, probe)
        pred_b, _ = svm_predict(model_b, probe)
        assert (pred_a == pred_b).all()

    def test_zero_passes_returns_untrained_flagged_model(self):
        x, y = toy_separable()
        model = svm_fit(x, y, SvmConfig(max_passes=0))
        assert not model.converged
        assert all(len(c.dual_coef) == 0 for c in model.classifiers)
        pred, _ = svm_predict(model, x[:3])
        assert (pred == 0).all()  # all-zero biases tie-break to class 0

    def test_bias_argmax_prediction(self):
        cfg = SvmConfig()
        clfs = [
            BinarySvm(np.empty((0, 8)), np.empty(0), bias, True, 0)
            for bias in (0.0, 0.0, 0.0, 1.0)
        ]
        model = SvmModel(config=cfg, classifiers=clfs)
        pred, conf = svm_predict(model, np.zeros((1, 8)))
        assert pred[0] == 3
        assert 0 < conf[0] < 1

    def test_tie_breaks_to_lowest_class(self):
        cfg = SvmConfig()
        clfs = [BinarySvm(np.empty((0, 8)), np.empty(0), 0.5, True, 0)
                for _ in range(4)]
        model = SvmModel(config=cfg, classifiers=clfs)
        pred, _ = svm_predict(model, np.zeros((2, 8)))
        assert (pred == 0).all()

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            svm_fit(np.zeros((4, 2)), np.zeros(4, dtype=int), SvmConfig())

    def test_non_finite_features_rejected(self):
        x, y = toy_separable()
        x = x.copy()
        x[0, 0] = np.nan
        with pytest.raises(ValueError):
            svm_fit(x, y, SvmConfig())

    def test_untrained_predict_rejected(self):
        with pytest.raises(ValueError):
            svm_predict(SvmModel(config=SvmConfig()), np.zeros((1, 8)))

    def test_scores_are_distributions(self):
        x, y = toy_separable()
        model = svm_fit(x, y, SvmConfig(gamma=1.0, coef0=1.0, C=5.0))
        scores = svm_scores(model, x)
        assert scores.shape == (8, 4)
        np.testing.assert_allclose(scores.sum(axis=1), 1.0, atol=1e-9)


class TestCrossValidation:
    def test_each_sample_validated_exactly_once(self):
        labels = np.repeat(np.arange(4), 25)
        folds = stratified_folds(labels, 5, seed=0)
        assert sorted(np.concatenate(folds).tolist()) == list(range(100))
        for fold in folds:
            assert len(fold) == 20

    def test_separable_data_scores_one(self):
        rng = np.random.default_rng(1)
        x = np.vstack([rng.normal(3 * c, 0.05, (10, 2)) for c in range(4)])
        y = np.repeat(np.arange(4), 10)
        result = kfold_cv(x, y, SvmConfig(gamma=0.1, coef0=1.0, C=10.0), seed=0)
        assert result.mean == pytest.approx(1.0)

    def test_shuffled_labels_score_chance(self):
        means = []
        for seed in range(10):
            rng = np.random.default_rng(seed)
            feats = softmax_features(rng)
            labels = np.repeat(np.arange(4), 20)
            rng.shuffle(labels)
            means.append(kfold_cv(feats, labels, SvmConfig(), seed=seed).mean)
        assert np.mean(means) == pytest.approx(0.25, abs=0.1)

    def test_fewer_samples_than_folds_rejected(self):
        with pytest.raises(ValueError):
            kfold_cv(np.zeros((3, 2)), np.array([0, 1, 2]), SvmConfig(), k=5)


class TestRandomSearch:
    @pytest.fixture(scope="class")
    def search_data(self):
        rng = np.random.default_rng(2)
        x = np.vstack([rng.normal(2 * c, 0.3, (15, 8)) for c in range(4)])
        y = np.repeat(np.arange(4), 15)
        return x, y

    def test_single_trial_returns_that_config(self, search_data):
        x, y = search_data
        config, result, trials = random_search(x, y, 1, seed=3)
        assert len(trials) == 1
        assert trials[0]["gamma"] == config.gamma

    def test_deterministic_given_seed(self, search_data):
        x, y = search_data
        a = random_search(x, y, 4, seed=11)
        b = random_search(x, y, 4, seed=11)
        assert a[0] == b[0]
        assert a[1].fold_accuracies == b[1].fold_accuracies

    def test_best_at_least_first_trial(self, search_data):
        x, y = search_data
        config, best, trials = random_search(x, y, 6, seed=5)
        assert best.mean >= trials[0]["mean_accuracy"]

    def test_zero_trials_rejected(self, search_data):
        x, y = search_data
        with pytest.raises(ValueError):
            random_search(x, y, 0, seed=0)


class TestReports:
    def test_perfect_predictions_diagonal(self):
        cm = confusion_matrix([0, 1, 2, 3, 2], [0, 1, 2, 3, 2])
        assert cm.accuracy() == 1.0
        assert np.array_equal(np.diag(cm.counts), np.bincount([0, 1, 2, 3, 2]))

    def test_all_theft_prediction(self):
        truths = [0, 1, 2, 3] * 5
        cm = confusion_matrix(truths, [0] * 20)
        assert cm.accuracy() == pytest.approx(0.25)
        assert np.array_equal(cm.counts[:, 0], [5, 5, 5, 5])

    def test_empty_accuracy_undefined(self):
        cm = ConfusionMatrix(counts=np.zeros((4, 4), dtype=int))
        with pytest.raises(ValueError):
            cm.accuracy()

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            confusion_matrix([0, 1], [0])

    def test_percent_change_arithmetic(self):
        assert percent_change([50], [54]) == [pytest.approx(8.0)]
        assert percent_change([10], [10]) == [0.0]

    def test_percent_change_infinity_convention(self):
        out = percent_change([0, 0], [12, 0])
        assert math.isinf(out[0]) and out[0] > 0
        assert out[1] == 0.0

    def test_percent_change_rejects_negative_counts(self):
        with pytest.raises(ValueError):
            percent_change([-1], [2])

    def test_percent_change_table_layout(self):
        spatial = confusion_matrix([0, 1], [0, 0])
        temporal = confusion_matrix([0, 1], [1, 1])
        fused = confusion_matrix([0, 1], [0, 1])
        table = percent_change_table(spatial, temporal, fused)
        assert set(table) == {"spatial", "temporal"}
        assert math.isinf(table["spatial"][1])  # spatial had 0 correct assaults

    def test_pr_threshold_zero_full_recall(self):
        pts = pr_points([(0.9, True), (0.1, True), (0.5, False)], [0.0])
        assert pts[0]["recall"] == 1.0

    def test_pr_above_max_confidence(self):
        pts = pr_points([(0.9, True), (0.5, False)], [0.95])
        assert pts[0]["recall"] == 0.0
        assert pts[0]["zero_alerts"] == 1.0
        assert pts[0]["precision"] == 1.0

    def test_pr_worked_example(self):
        pts = pr_points([(0.9, True), (0.8, False), (0.4, True)], [0.5])
        assert pts[0]["precision"] == pytest.approx(0.5)
        assert pts[0]["recall"] == pytest.approx(0.5)

    def test_pr_requires_positives(self):
        with pytest.raises(ValueError):
            pr_points([(0.5, False)], [0.5])

    def test_recall_and_alerts_non_increasing(self):
        rng = np.random.default_rng(0)
        events = [(float(rng.uniform()), bool(rng.uniform() > 0.5)) for _ in range(200)]
        if not any(t for _, t in events):
            events.append((0.5, True))
        thresholds = np.arange(0.0, 1.0001, 0.05)
        pts = pr_points(events, thresholds)
        recalls = [p["recall"] for p in pts]
        alerts = [p["alerts"] for p in pts]
        assert all(a >= b for a, b in zip(recalls, recalls[1:]))
        assert all(a >= b for a, b in zip(alerts, alerts[1:]))


class TestComplementaryConfusionFixture:
    """Streams that fail on different class pairs fuse into something
    better than either (the qualitative content of the accuracy tables)."""

    @staticmethod
    def build(seed=0, n_per_class=40, stream_a_confuses=(1, 2),
              stream_b_confuses=(2, 3), noise=0.05):
        rng = np.random.default_rng(seed)
        features, labels = [], []
        for cls in range(4):
            for _ in range(n_per_class):
                a = np.full(4, noise)
                if cls in stream_a_confuses:
                    pair = list(stream_a_confuses)
                    split = rng.uniform(0.4, 0.6)
                    a[pair[0]], a[pair[1]] = split, 1.0 - split
                else:
                    a[cls] = 1.0
                a = a / a.sum()
                b = np.full(4, noise)
                if cls in stream_b_confuses:
                    pair = list(stream_b_confuses)
                    split = rng.uniform(0.4, 0.6)
                    b[pair[0]], b[pair[1]] = split, 1.0 - split
                else:
                    b[cls] = 1.0
                b = b / b.sum()
                features.append(np.concatenate([a, b]))
                labels.append(cls)
        return np.array(features), np.array(labels)

    def test_fused_beats_both_streams(self):
        features, labels = self.build(seed=1)
        spatial_acc = (features[:, :4].argmax(axis=1) == labels).mean()
        temporal_acc = (features[:, 4:].argmax(axis=1) == labels).mean()
        assert spatial_acc >= 0.45 and temporal_acc >= 0.45  # sanity: broken streams

        config, cv, _ = random_search(features, labels, 8, seed=2)
        model = svm_fit(features, labels, config)
        pred, _ = svm_predict(model, features)
        fused_acc = (pred == labels).mean()
        assert fused_acc > spatial_acc
        assert fused_acc > temporal_acc
