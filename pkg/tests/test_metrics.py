"""Evaluation metrics against hand tallies and pair-counting oracles."""

import jsonschema
import numpy as np
import pytest

from fewshotword import (ConfusionCounts, DataError, RocCurve, ScoredItem,
                         balanced_accuracy, confusion, f1, macro_report,
                         precision, recall, report_to_dict, roc_auc,
                         with_prediction)
from fewshotword.metrics import REPORT_SCHEMA


def item(i, score, label, word_class="w", pred=None):
    out = ScoredItem(item_id=f"i{i}", word_class=word_class, score=score,
                     true_label=label)
    return out if pred is None else with_prediction(out, pred)


def pair_count_auc(pos_scores, neg_scores):
    wins = ties = 0
    for p in pos_scores:
        for n in neg_scores:
            if p < n:
                wins += 1
            elif p == n:
                ties += 1
    return (wins + 0.5 * ties) / (len(pos_scores) * len(neg_scores))


class TestConfusion:
    def test_single_positive_correct(self):
        c = confusion([item(0, 0.1, "positive", pred=True)])
        assert (c.tp, c.fp, c.tn, c.fn) == (1, 0, 0, 0)

    def test_impostor_predicted_correct_is_fp(self):
        c = confusion([item(0, 0.1, "impostor", pred=True)])
        assert (c.tp, c.fp, c.tn, c.fn) == (0, 1, 0, 0)

    def test_hand_tally(self):
        items = [
            item(0, 0.1, "positive", pred=True),   # tp
            item(1, 0.2, "positive", pred=True),   # tp
            item(2, 0.8, "positive", pred=False),  # fn
            item(3, 0.1, "negative", pred=True),   # fp
            item(4, 0.9, "negative", pred=False),  # tn
            item(5, 0.9, "negative", pred=False),  # tn
            item(6, 0.2, "impostor", pred=True),   # fp
            item(7, 0.7, "impostor", pred=False),  # tn
            item(8, 0.6, "positive", pred=False),  # fn
            item(9, 0.05, "positive", pred=True),  # tp
        ]
        c = confusion(items)
        assert (c.tp, c.fp, c.tn, c.fn) == (3, 2, 3, 2)
        assert c.total == 10

    def test_rejects_unpredicted(self):
        with pytest.raises(DataError):
            confusion([item(0, 0.1, "positive")])

    def test_rejects_negative_counts(self):
        with pytest.raises(DataError):
            ConfusionCounts(tp=-1, fp=0, tn=0, fn=0)


class TestRates:
    def test_formula(self):
        c = ConfusionCounts(tp=8, fp=4, tn=0, fn=2)
        assert precision(c) == pytest.approx(2 / 3)
        assert recall(c) == pytest.approx(0.8)
        assert f1(c) == pytest.approx(2 * (2 / 3) * 0.8 / (2 / 3 + 0.8))

    def test_zero_conventions(self):
        c = ConfusionCounts(tp=0, fp=0, tn=5, fn=0)
        assert precision(c) == 0.0
        assert recall(c) == 0.0
        assert f1(c) == 0.0

    def test_predict_everything_correct_on_balanced_data(self):
        # all predicted correct, half the items really are: perfect
        # recall, coin-flip precision
        items = [item(i, 0.1, "positive", pred=True) for i in range(10)]
        items += [item(10 + i, 0.1, "negative", pred=True)
                  for i in range(10)]
        c = confusion(items)
        assert recall(c) == 1.0
        assert precision(c) == 0.5
        assert f1(c) == pytest.approx(2 / 3)
        assert balanced_accuracy(c) == 0.5

    def test_balanced_accuracy_formula(self, rng):
        for _ in range(200):
            tp, fp, tn, fn = [int(v) for v in rng.randint(0, 40, 4)]
            c = ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)
            if tp + fn == 0 or tn + fp == 0:
                with pytest.raises(DataError):
                    balanced_accuracy(c)
            else:
                expected = 0.5 * (tp / (tp + fn) + tn / (tn + fp))
                assert balanced_accuracy(c) == pytest.approx(expected)

    def test_balanced_accuracy_of_swapped_predictions(self, rng):
        items = [item(i, 0.1, "positive" if rng.rand() < 0.5 else "negative",
                      pred=bool(rng.rand() < 0.5)) for i in range(50)]
        flipped = [with_prediction(it, not it.predicted_correct)
                   for it in items]
        try:
            ba = balanced_accuracy(confusion(items))
        except DataError:
            return
        assert balanced_accuracy(confusion(flipped)) == pytest.approx(1 - ba)


class TestRocAuc:
    def test_perfect_separation(self):
        _, auc = roc_auc([0.1, 0.2, 0.8, 0.9], [True, True, False, False])
        assert auc == 1.0

    def test_all_ties(self):
        _, auc = roc_auc([0.5] * 6, [True, False, True, False, True, False])
        assert auc == 0.5

    def test_worked_example(self):
        _, auc = roc_auc([0.1, 0.4, 0.3, 0.9], [True, True, False, False])
        assert auc == pytest.approx(0.75)

    def test_matches_pair_counting(self, rng):
        for _ in range(100):
            n_pos, n_neg = rng.randint(1, 10), rng.randint(1, 10)
            # quantized scores force plenty of ties
            pos = np.round(rng.rand(n_pos), 1)
            neg = np.round(rng.rand(n_neg), 1)
            scores = np.concatenate((pos, neg))
            labels = np.array([True] * n_pos + [False] * n_neg)
            _, auc = roc_auc(scores, labels)
            assert auc == pytest.approx(pair_count_auc(pos, neg), abs=1e-12)

    def test_trapezoid_equals_mann_whitney(self, rng):
        for _ in range(60):
            n_pos, n_neg = rng.randint(1, 12), rng.randint(1, 12)
            scores = rng.randn(n_pos + n_neg)  # continuous: no ties
            labels = np.array([True] * n_pos + [False] * n_neg)
            curve, auc = roc_auc(scores, labels)
            assert curve.trapezoid_area() == pytest.approx(auc, abs=1e-12)

    def test_increasing_transform_invariance(self, rng):
        scores = rng.rand(20)
        labels = rng.rand(20) < 0.5
        if labels.all() or not labels.any():
            labels[0] = ~labels[0]
        _, auc = roc_auc(scores, labels)
        _, auc2 = roc_auc(np.exp(3 * scores) + 7, labels)
        assert auc2 == pytest.approx(auc, abs=1e-12)

    def test_complement_symmetry(self, rng):
        scores = rng.rand(30)
        labels = np.array([True] * 15 + [False] * 15)
        _, auc = roc_auc(scores, labels)
        _, flipped = roc_auc(-scores, labels)
        assert flipped == pytest.approx(1 - auc, abs=1e-12)

    def test_curve_shape(self, rng):
        curve, _ = roc_auc(rng.rand(12),
                           np.array([True] * 6 + [False] * 6))
        assert curve.points[0] == (0.0, 0.0)
        assert curve.points[-1] == (1.0, 1.0)
        fprs = [p[0] for p in curve.points]
        tprs = [p[1] for p in curve.points]
        assert fprs == sorted(fprs)
        assert tprs == sorted(tprs)

    def test_rejects_single_label(self):
        with pytest.raises(DataError):
            roc_auc([0.1, 0.2], [True, True])


class TestRocCurveType:
    def test_rejects_bad_endpoints(self):
        with pytest.raises(DataError):
            RocCurve(((0.0, 0.1), (1.0, 1.0)))

    def test_rejects_decreasing(self):
        with pytest.raises(DataError):
            RocCurve(((0.0, 0.0), (0.5, 0.8), (0.4, 0.9), (1.0, 1.0)))


class TestMacroReport:
    def test_macro_is_mean_of_per_class(self):
        items = [  # class a perfectly separated, class b all tied
            item(0, 0.1, "positive", "a"), item(1, 0.9, "negative", "a"),
            item(2, 0.5, "positive", "b"), item(3, 0.5, "negative", "b"),
        ]
        report = macro_report(items, tau=0.5)
        assert report.per_class["a"]["balanced_accuracy"] == 1.0
        assert report.per_class["b"]["balanced_accuracy"] == 0.5
        agg = report.aggregate
        assert agg["macro_balanced_accuracy"] == pytest.approx(0.75)
        assert agg["tau"] == 0.5

    def test_excludes_one_sided_classes(self):
        items = [
            item(0, 0.1, "positive", "a"), item(1, 0.9, "negative", "a"),
            item(2, 0.2, "positive", "only-pos"),
            item(3, 0.7, "negative", "only-neg"),
        ]
        report = macro_report(items, tau=0.5)
        assert set(report.per_class) == {"a"}
        assert ("only-pos", "no negatives") in report.excluded
        assert ("only-neg", "no positives") in report.excluded

    def test_micro_pools_all_items(self):
        items = [
            item(0, 0.1, "positive", "a"), item(1, 0.9, "negative", "a"),
            item(2, 0.2, "positive", "b"), item(3, 0.1, "negative", "b"),
        ]
        report = macro_report(items, tau=0.5)
        # predictions: [T, F], [T, T] -> tp=2 fp=1 tn=1 fn=0
        assert report.aggregate["micro_precision"] == pytest.approx(2 / 3)
        assert report.aggregate["micro_recall"] == 1.0

    def test_macro_auc_matches_per_class_oracle(self, rng):
        items = []
        expected = []
        for ci in range(3):
            pos = rng.rand(6)
            neg = rng.rand(6) + 0.2
            expected.append(pair_count_auc(pos, neg))
            for i, s in enumerate(pos):
                items.append(item(f"{ci}p{i}", s, "positive", f"c{ci}"))
            for i, s in enumerate(neg):
                items.append(item(f"{ci}n{i}", s, "negative", f"c{ci}"))
        report = macro_report(items, tau=0.5)
        assert report.aggregate["macro_auc"] == pytest.approx(
            np.mean(expected), abs=1e-12)

    def test_prefilled_predictions_without_tau(self):
        items = [item(0, 0.3, "positive", "a", pred=True),
                 item(1, 0.3, "negative", "a", pred=False)]
        report = macro_report(items)
        assert report.aggregate["tau"] is None
        assert report.per_class["a"]["balanced_accuracy"] == 1.0

    def test_collects_roc_curves(self):
        items = [item(0, 0.1, "positive", "a"),
                 item(1, 0.9, "negative", "a")]
        curves = {}
        macro_report(items, tau=0.5, roc_curves=curves)
        assert set(curves) == {"a"}
        assert isinstance(curves["a"], RocCurve)

    def test_report_dict_validates_against_schema(self, rng):
        items = []
        for ci in range(3):
            for i in range(8):
                label = "positive" if i % 2 else (
                    "impostor" if ci == 0 else "negative")
                items.append(item(f"{ci}-{i}", float(rng.rand()), label,
                                  f"c{ci}"))
        items.append(item("lone", 0.5, "positive", "lonely"))
        report = macro_report(items, tau=0.4)
        payload = report_to_dict(report)
        jsonschema.validate(payload, REPORT_SCHEMA)
        assert payload["excluded"] == [
            {"word_class": "lonely", "reason": "no negatives"}]

    def test_rejects_empty_and_all_excluded(self):
        with pytest.raises(DataError):
            macro_report([], tau=0.5)
        with pytest.raises(DataError):
            macro_report([item(0, 0.5, "positive", "a")], tau=0.5)
