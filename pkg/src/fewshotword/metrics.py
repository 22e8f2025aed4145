"""Confusion-based evaluation: precision/recall/F1, balanced accuracy,
ROC curves with Mann-Whitney AUC, and the per-class-then-averaged report.

Scores throughout are distances: LOWER means more likely a correct
production.  Impostor items count as negatives.  Functions here consume
any objects exposing the ScoredItem fields (word_class, score, true_label,
predicted_correct); the concrete type lives in fewshot.
"""

from dataclasses import dataclass

import numpy as np
import scipy.stats

from .errors import DataError

POSITIVE_LABELS = frozenset(["positive"])
NEGATIVE_LABELS = frozenset(["negative", "impostor"])


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise DataError(f"{name} must be a non-negative integer, got {v!r}")

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class RocCurve:
    """Threshold-sweep operating points as (fpr, tpr) pairs, from (0,0)
    to (1,1), non-decreasing in both coordinates."""

    points: tuple

    def __post_init__(self):
        pts = tuple((float(f), float(t)) for f, t in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise DataError("a curve needs at least the two endpoints")
        if pts[0] != (0.0, 0.0) or pts[-1] != (1.0, 1.0):
            raise DataError(f"curve must run (0,0) -> (1,1), got "
                            f"{pts[0]} -> {pts[-1]}")
        for (f0, t0), (f1, t1) in zip(pts, pts[1:]):
            if f1 < f0 or t1 < t0:
                raise DataError("curve coordinates must be non-decreasing")
        for f, t in pts:
            if not (0.0 <= f <= 1.0 and 0.0 <= t <= 1.0):
                raise DataError(f"point ({f}, {t}) outside the unit square")

    def trapezoid_area(self):
        fpr = np.array([p[0] for p in self.points])
        tpr = np.array([p[1] for p in self.points])
        return float(np.trapezoid(tpr, fpr))


def _require_predicted(item):
    if item.predicted_correct is None:
        raise DataError(f"item {item.item_id!r} has no prediction")
    return item.predicted_correct


def confusion(items):
    """Tally predictions against labels. Impostors count as negatives:
    predicting an impostor "correct" is a false positive.
    """
    tp = fp = tn = fn = 0
    for item in items:
        pred = _require_predicted(item)
        if item.true_label in POSITIVE_LABELS:
            if pred:
                tp += 1
            else:
                fn += 1
        else:
            if pred:
                fp += 1
            else:
                tn += 1
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def precision(c):
    """tp / (tp + fp); 0 when nothing was predicted correct."""
    denom = c.tp + c.fp
    return c.tp / denom if denom else 0.0


def recall(c):
    """tp / (tp + fn); 0 when there are no positives."""
    denom = c.tp + c.fn
    return c.tp / denom if denom else 0.0


def f1(c):
    p, r = precision(c), recall(c)
    return 2.0 * p * r / (p + r) if p + r else 0.0


def balanced_accuracy(c):
    """Mean of sensitivity and specificity, 0.5*(tp/(tp+fn) + tn/(tn+fp)).

    Undefined (and raised) when either side is empty; callers exclude such
    classes rather than invent a value.
    """
    if c.tp + c.fn == 0:
        raise DataError("balanced accuracy undefined without positives")
    if c.tn + c.fp == 0:
        raise DataError("balanced accuracy undefined without negatives")
    return 0.5 * (c.tp / (c.tp + c.fn) + c.tn / (c.tn + c.fp))


def roc_auc(scores, positive):
    """ROC curve and AUC for one class's scores (lower = more positive).

    AUC is the Mann-Whitney statistic: the fraction of (positive,
    negative) pairs where the positive scores strictly lower, with half
    credit for ties.  The curve sweeps thresholds over the distinct scores
    ascending, so its trapezoidal area equals the AUC, ties included.
    """
    scores = np.asarray(scores, dtype=np.float64)
    positive = np.asarray(positive, dtype=bool)
    if scores.shape != positive.shape or scores.ndim != 1:
        raise DataError("scores and positive flags must be equal-length 1-D")
    if not np.all(np.isfinite(scores)):
        raise DataError("scores must be finite")
    n_pos = int(positive.sum())
    n_neg = int(scores.shape[0] - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise DataError("AUC needs at least one positive and one negative")

    # rank-sum form: ranks are ascending with ties averaged, so the rank
    # sum of the negatives counts pos<neg pairs plus half the ties
    ranks = scipy.stats.rankdata(scores, method="average")
    u = float(ranks[~positive].sum()) - n_neg * (n_neg + 1) / 2.0
    auc = u / (n_pos * n_neg)

    order = np.argsort(scores, kind="stable")
    sorted_pos = positive[order]
    boundaries = np.flatnonzero(np.diff(scores[order])) + 1
    cum_tp = np.cumsum(sorted_pos)
    group_ends = np.concatenate((boundaries, [scores.shape[0]]))
    points = [(0.0, 0.0)]
    for end in group_ends:
        tp = int(cum_tp[end - 1])
        fp = int(end - tp)
        points.append((fp / n_neg, tp / n_pos))
    return RocCurve(tuple(points)), auc


EXCLUSION_NO_POS = "no positives"
EXCLUSION_NO_NEG = "no negatives"


@dataclass(frozen=True)
class EvaluationReport:
    """Per-class metrics plus pooled and averaged aggregates.

    per_class maps word class to a metrics dict; excluded lists classes
    left out of the macro averages, each with its reason.  aggregate holds
    micro (pooled) precision/recall/F1, macro (class-averaged) balanced
    accuracy and AUC, and the threshold used (None when predictions were
    supplied externally).
    """

    per_class: dict
    aggregate: dict
    excluded: tuple


REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["per_class", "aggregate", "excluded"],
    "additionalProperties": False,
    "properties": {
        "per_class": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["counts", "precision", "recall", "f1",
                             "balanced_accuracy", "auc", "n_pos", "n_neg"],
                "additionalProperties": False,
                "properties": {
                    "counts": {
                        "type": "object",
                        "required": ["tp", "fp", "tn", "fn"],
                        "additionalProperties": False,
                        "properties": {
                            "tp": {"type": "integer", "minimum": 0},
                            "fp": {"type": "integer", "minimum": 0},
                            "tn": {"type": "integer", "minimum": 0},
                            "fn": {"type": "integer", "minimum": 0},
                        },
                    },
                    "precision": {"type": "number", "minimum": 0, "maximum": 1},
                    "recall": {"type": "number", "minimum": 0, "maximum": 1},
                    "f1": {"type": "number", "minimum": 0, "maximum": 1},
                    "balanced_accuracy":
                        {"type": "number", "minimum": 0, "maximum": 1},
                    "auc": {"type": "number", "minimum": 0, "maximum": 1},
                    "n_pos": {"type": "integer", "minimum": 1},
                    "n_neg": {"type": "integer", "minimum": 1},
                },
            },
        },
        "aggregate": {
            "type": "object",
            "required": ["micro_precision", "micro_recall", "micro_f1",
                         "macro_balanced_accuracy", "macro_auc", "tau"],
            "additionalProperties": False,
            "properties": {
                "micro_precision": {"type": "number", "minimum": 0, "maximum": 1},
                "micro_recall": {"type": "number", "minimum": 0, "maximum": 1},
                "micro_f1": {"type": "number", "minimum": 0, "maximum": 1},
                "macro_balanced_accuracy":
                    {"type": "number", "minimum": 0, "maximum": 1},
                "macro_auc": {"type": "number", "minimum": 0, "maximum": 1},
                "tau": {"type": ["number", "null"]},
            },
        },
        "excluded": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["word_class", "reason"],
                "additionalProperties": False,
                "properties": {
                    "word_class": {"type": "string"},
                    "reason": {"type": "string"},
                },
            },
        },
    },
}


def report_to_dict(report):
    """JSON-ready form of an EvaluationReport, matching REPORT_SCHEMA."""
    per_class = {}
    for name, m in report.per_class.items():
        c = m["counts"]
        per_class[name] = {
            "counts": {"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn},
            "precision": m["precision"],
            "recall": m["recall"],
            "f1": m["f1"],
            "balanced_accuracy": m["balanced_accuracy"],
            "auc": m["auc"],
            "n_pos": m["n_pos"],
            "n_neg": m["n_neg"],
        }
    return {
        "per_class": per_class,
        "aggregate": dict(report.aggregate),
        "excluded": [{"word_class": w, "reason": r} for w, r in report.excluded],
    }


def macro_report(items, tau=None, roc_curves=None):
    """Per-class metrics plus macro and micro aggregates.

    With tau given, predictions are derived as score < tau; otherwise
    every item must carry a prediction already (the supervised baseline
    path).  Classes without both a positive and a negative are excluded
    from the macro averages and reported.  roc_curves, if a dict, receives
    each included class's RocCurve.
    """
    items = sorted(items, key=lambda it: it.item_id)
    if not items:
        raise DataError("no scored items")
    if tau is not None:
        from .fewshot import classify, with_prediction
        items = [with_prediction(it, classify(it.score, tau)) for it in items]
    by_class = {}
    for it in items:
        by_class.setdefault(it.word_class, []).append(it)

    per_class = {}
    excluded = []
    for name in sorted(by_class):
        group = by_class[name]
        n_pos = sum(1 for it in group if it.true_label in POSITIVE_LABELS)
        n_neg = len(group) - n_pos
        if n_pos == 0:
            excluded.append((name, EXCLUSION_NO_POS))
            continue
        if n_neg == 0:
            excluded.append((name, EXCLUSION_NO_NEG))
            continue
        counts = confusion(group)
        curve, auc = roc_auc([it.score for it in group],
                             [it.true_label in POSITIVE_LABELS for it in group])
        if roc_curves is not None:
            roc_curves[name] = curve
        per_class[name] = {
            "counts": counts,
            "precision": precision(counts),
            "recall": recall(counts),
            "f1": f1(counts),
            "balanced_accuracy": balanced_accuracy(counts),
            "auc": auc,
            "n_pos": n_pos,
            "n_neg": n_neg,
        }
    if not per_class:
        raise DataError("no class has both positives and negatives")

    pooled = confusion(items)
    n = len(per_class)
    aggregate = {
        "micro_precision": precision(pooled),
        "micro_recall": recall(pooled),
        "micro_f1": f1(pooled),
        "macro_balanced_accuracy":
            sum(m["balanced_accuracy"] for m in per_class.values()) / n,
        "macro_auc": sum(m["auc"] for m in per_class.values()) / n,
        "tau": tau,
    }
    return EvaluationReport(per_class=per_class, aggregate=aggregate,
                            excluded=tuple(excluded))
