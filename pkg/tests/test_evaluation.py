import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from hrvload.classifiers import ALL_METHODS, ClassifierSpec, Method
from hrvload.dataset import DataError, FeatureMatrix, ModelId, ModelSpec, StratificationError, encode
from hrvload.evaluation import (
    Protocol,
    UndefinedROCError,
    accuracy,
    auc,
    compare,
    confusion_matrix,
    kfold_cv,
    macro_roc_curve,
    multiclass_roc,
    precision_recall_macro,
    roc_curve,
)
from hrvload.reporting import dumps
from hrvload.synth import SynthConfig, generate


def random_proba(rng, n, k=3):
    P = rng.random((n, k))
    return P / P.sum(axis=1, keepdims=True)


class TestROCCurve:
    def test_perfect_passes_top_left(self):
        c = roc_curve([1, 0, 1, 0], [1, 0, 1, 0])
        assert any(f == 0.0 and t == 1.0 for f, t in zip(c.fpr, c.tpr))
        assert auc(c) == 1.0

    def test_all_identical(self):
        c = roc_curve([0.4] * 6, [1, 0, 1, 0, 0, 1])
        assert c.fpr.tolist() == [0.0, 1.0] and c.tpr.tolist() == [0.0, 1.0]
        assert auc(c) == 0.5

    def test_reversed(self):
        assert auc(roc_curve([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0])) == 0.0

    def test_sentinel_threshold(self):
        c = roc_curve([0.3, 0.7, 0.5], [0, 1, 1])
        assert c.thresholds[0] > 0.7
        assert np.all(np.diff(c.thresholds) < 0)

    def test_single_class(self):
        with pytest.raises(UndefinedROCError):
            roc_curve([0.1, 0.2], [1, 1])

    def test_random_large_near_half(self, rng):
        c = roc_curve(rng.random(10000), rng.integers(0, 2, 10000))
        assert 0.48 <= auc(c) <= 0.52

    @given(st.lists(st.tuples(st.integers(0, 6), st.booleans()), min_size=2, max_size=60))
    def test_monotone_staircase(self, pairs):
        s, l = zip(*pairs)
        if all(l) or not any(l):
            return
        c = roc_curve(s, l)
        assert (c.fpr[0], c.tpr[0]) == (0.0, 0.0)
        assert (c.fpr[-1], c.tpr[-1]) == (1.0, 1.0)
        assert np.all(np.diff(c.fpr) >= 0) and np.all(np.diff(c.tpr) >= 0)


class TestAUC:
    def test_pairwise_oracle(self, rng):
        for _ in range(200):
            n = int(rng.integers(2, 501))
            # quantized scores make ties common
            s = np.round(rng.random(n), int(rng.integers(1, 4)))
            y = rng.integers(0, 2, n)
            y[0], y[1] = 0, 1
            assert abs(auc(roc_curve(s, y)) - oracles.pairwise_auc(s.tolist(), y.tolist())) <= 1e-12

    @settings(max_examples=50)
    @given(st.lists(st.tuples(st.integers(-500, 500), st.booleans()), min_size=2, max_size=80))
    def test_increasing_transform_invariance(self, pairs):
        s, l = map(np.array, zip(*pairs))
        s = s / 100.0
        if l.all() or not l.any():
            return
        base = auc(roc_curve(s, l))
        assert auc(roc_curve(np.exp(s), l)) == pytest.approx(base, abs=1e-12)
        assert auc(roc_curve(3 * s + 7, l)) == pytest.approx(base, abs=1e-12)


class TestMulticlass:
    def test_perfect(self):
        y = np.array([0, 1, 2, 0, 1, 2])
        _, rep = multiclass_roc(np.eye(3)[y], y)
        assert rep.per_class == (1.0, 1.0, 1.0) and rep.micro == 1.0 and rep.macro == 1.0

    def test_uniform(self):
        y = np.array([0, 1, 2, 2, 1])
        _, rep = multiclass_roc(np.full((5, 3), 1 / 3), y)
        assert rep.micro == 0.5 and rep.macro == 0.5

    def test_flatten_oracle(self, rng):
        for _ in range(20):
            y = rng.integers(0, 3, 300)
            P = random_proba(rng, 300)
            _, rep = multiclass_roc(P, y)
            micro, macro = oracles.flatten_auc(P.tolist(), y.tolist())
            assert abs(rep.micro - micro) <= 1e-12
            assert abs(rep.macro - macro) <= 1e-12

    def test_symmetric_instance_micro_equals_macro(self, rng):
        n = 16
        base = rng.integers(0, 10, (n, 3)) / 10.0
        rows, labels = [], []
        for c in range(3):
            for t, o1, o2 in base:
                r = [0.0] * 3
                r[c], r[(c + 1) % 3], r[(c + 2) % 3] = t, o1, o2
                rows.append(r)
                labels.append(c)
        _, rep = multiclass_roc(np.array(rows), np.array(labels))
        assert len(set(rep.per_class)) == 1
        assert rep.micro == rep.macro

    def test_missing_class_named(self, rng):
        with pytest.raises(UndefinedROCError, match="high"):
            multiclass_roc(random_proba(rng, 6), [0, 1, 0, 1, 0, 1])

    def test_macro_curve_endpoints(self, rng):
        y = rng.integers(0, 3, 50)
        curves, _ = multiclass_roc(random_proba(rng, 50), y)
        m = macro_roc_curve(curves)
        assert (m.fpr[0], m.tpr[0]) == (0.0, 0.0) and (m.fpr[-1], m.tpr[-1]) == (1.0, 1.0)


class TestConfusion:
    def test_diagonal(self):
        y = [0, 0, 1, 2, 2, 2]
        assert confusion_matrix(y, y).tolist() == [[2, 0, 0], [0, 1, 0], [0, 0, 3]]

    def test_all_low(self):
        cm = confusion_matrix([0] * 5, [0, 1, 2, 1, 2])
        assert cm[:, 1:].sum() == 0 and cm[:, 0].tolist() == [1, 2, 2]

    def test_oracle_and_trace(self, rng):
        for _ in range(20):
            t = rng.integers(0, 3, 80)
            p = rng.integers(0, 3, 80)
            cm = confusion_matrix(p, t)
            assert cm.tolist() == oracles.confusion(p.tolist(), t.tolist())
            assert cm.sum(axis=1).tolist() == np.bincount(t, minlength=3).tolist()
            assert abs(np.trace(cm) / cm.sum() - accuracy(p, t)) <= 1e-12

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            confusion_matrix([0, 1], [0])


class TestPrecisionRecall:
    def test_perfect(self):
        pr = precision_recall_macro([0, 1, 2], [0, 1, 2])
        assert (pr.precision, pr.recall) == (1.0, 1.0)

    def test_never_predicted_flagged(self):
        pr = precision_recall_macro([0, 0, 1, 1], [0, 2, 1, 2])
        assert pr.undefined_precision == (2,)
        assert pr.precision == pytest.approx((0.5 + 0.5 + 0.0) / 3)

    def test_hand_values(self):
        true = [0, 0, 0, 1, 1, 2, 2, 2, 2]
        pred = [0, 1, 0, 1, 2, 2, 2, 0, 2]
        # per class precision 2/3, 1/2, 3/4 ; recall 2/3, 1/2, 3/4
        pr = precision_recall_macro(pred, true)
        assert pr.precision == pytest.approx((2 / 3 + 1 / 2 + 3 / 4) / 3, abs=1e-15)
        assert pr.recall == pytest.approx((2 / 3 + 1 / 2 + 3 / 4) / 3, abs=1e-15)
        assert pr.undefined_precision == () and pr.undefined_recall == ()


@pytest.fixture(scope="module")
def sessions():
    return generate(SynthConfig(n_sessions=150, seed=8, class_mix=(1 / 3, 1 / 3, 1 / 3)))


class TestKFold:
    def test_separable_tree_perfect(self, rng):
        X = np.repeat(np.arange(3.0), 30)[:, None] + rng.uniform(-0.1, 0.1, (90, 1))
        m = FeatureMatrix.from_arrays(X, np.repeat(np.arange(3), 30))
        cv = kfold_cv(ClassifierSpec(Method.DECISION_TREE), m, k=10, seed=0)
        assert cv.mean == 1.0 and cv.std == 0.0

    def test_folds_and_mean(self, sessions):
        m = encode(sessions, ModelSpec(ModelId.POST_FULL, True))
        a = kfold_cv(ClassifierSpec(Method.GAUSSIAN_NB), m, k=5, seed=3)
        b = kfold_cv(ClassifierSpec(Method.GAUSSIAN_NB), m, k=5, seed=3)
        assert a.folds == b.folds and a.accuracies == b.accuracies
        flat = sorted(i for f in a.folds for i in f)
        assert flat == list(range(len(m)))
        assert abs(a.mean - sum(a.accuracies) / len(a.accuracies)) <= 1e-12
        assert all(0 <= x <= 1 for x in a.accuracies)

    def test_shuffled_labels_near_chance(self, sessions):
        m = encode(sessions, ModelSpec(ModelId.POST_FULL, True))
        for seed in range(10):
            y = np.random.default_rng(seed).permutation(m.y)
            cv = kfold_cv(ClassifierSpec(Method.DECISION_TREE, seed=seed), FeatureMatrix(m.X, y, m.columns),
                          k=10, seed=seed)
            assert 0.20 <= cv.mean <= 0.47, (seed, cv.mean)

    def test_class_smaller_than_k(self, rng):
        m = FeatureMatrix.from_arrays(rng.normal(size=(25, 2)), [0] * 20 + [1] * 5)
        with pytest.raises(StratificationError):
            kfold_cv(ClassifierSpec(Method.KNN), m, k=10)


class TestCompare:
    def test_entry_grid_and_shared_split(self, sessions):
        models = [ModelSpec(ModelId.POST_FULL, True), ModelSpec(ModelId.POST_SHORT, False)]
        specs = [ClassifierSpec(m, {"n_trees": 10} if m is Method.RANDOM_FOREST else {}) for m in ALL_METHODS]
        rep = compare(models, specs, sessions, Protocol(k=5, seed=1))
        assert len(rep.entries) == 14
        assert {(e.model.label, e.spec.name) for e in rep.entries} == {
            (m.label, s.name) for m in models for s in specs}
        assert len(rep.train_rows) + len(rep.test_rows) == len(sessions)
        e = rep.get("post_full+A", "RF")
        assert e.confusion.sum() == len(rep.test_rows)

    def test_deterministic_and_thread_independent(self, sessions):
        models = [ModelSpec(ModelId.POST_SHORT, True)]
        specs = [ClassifierSpec(Method.RANDOM_FOREST, {"n_trees": 10}), ClassifierSpec(Method.LOGISTIC)]
        a = dumps(compare(models, specs, sessions, Protocol(k=5, seed=4)).to_dict())
        b = dumps(compare(models, specs, sessions, Protocol(k=5, seed=4), threads=3).to_dict())
        assert a == b

    def test_empty_grid(self, sessions):
        with pytest.raises(DataError):
            compare([], [ClassifierSpec(Method.KNN)], sessions)
