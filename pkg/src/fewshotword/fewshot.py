"""Few-shot word assessment: score inputs against per-class templates,
calibrate a single global distance threshold on a dev split, and classify.

An input counts as a correct production of its target class when its
score (mean distance to that class's templates, or distance to the class
barycentre) falls strictly below the threshold.
"""

import dataclasses
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .align import dtw, ned
from .barycentre import DbaConfig, EdbConfig, dba, edb
from .errors import DataError
from .features import MfccConfig, extract_mfcc, load_wav
from .metrics import NEGATIVE_LABELS, POSITIVE_LABELS, macro_report
from .seqdata import CodeSequence, FeatureSequence, read_cseq, read_fseq

log = logging.getLogger(__name__)

REPRESENTATIONS = ("mfcc", "continuous-import", "discrete-import")
MODES = ("all-templates", "barycentre")
REDUCTIONS = ("mean", "min")


@dataclass(frozen=True)
class ClassModel:
    """Reference material for one word class: either the template set
    itself or a single barycentre standing in for it."""

    word_class: str
    representation: str  # continuous | discrete
    mode: str
    templates: tuple

    def __post_init__(self):
        if self.representation not in ("continuous", "discrete"):
            raise DataError(f"representation must be continuous or discrete, "
                            f"got {self.representation!r}")
        if self.mode not in MODES:
            raise DataError(f"mode must be one of {MODES}, got {self.mode!r}")
        object.__setattr__(self, "templates", tuple(self.templates))
        if not self.templates:
            raise DataError(f"class {self.word_class!r} has no templates")
        if self.mode == "barycentre" and len(self.templates) != 1:
            raise DataError("barycentre mode stores exactly one sequence")
        want = FeatureSequence if self.representation == "continuous" \
            else CodeSequence
        for t in self.templates:
            if not isinstance(t, want):
                raise DataError(f"class {self.word_class!r}: expected "
                                f"{want.__name__}, got {type(t).__name__}")


@dataclass(frozen=True)
class Threshold:
    tau: float
    representation: str
    calibration_accuracy: float

    def __post_init__(self):
        if not math.isfinite(self.tau):
            raise DataError(f"tau must be finite, got {self.tau}")
        if not (0.0 <= self.calibration_accuracy <= 1.0):
            raise DataError(f"calibration_accuracy must be in [0,1], got "
                            f"{self.calibration_accuracy}")


@dataclass(frozen=True)
class ScoredItem:
    item_id: str
    word_class: str
    score: float
    true_label: str
    predicted_correct: bool = None

    def __post_init__(self):
        if not (math.isfinite(self.score) and self.score >= 0.0):
            raise DataError(f"item {self.item_id!r}: score must be finite "
                            f"and >= 0, got {self.score}")
        if self.true_label not in POSITIVE_LABELS | NEGATIVE_LABELS:
            raise DataError(f"item {self.item_id!r}: unknown label "
                            f"{self.true_label!r}")


def with_prediction(item, predicted_correct):
    return dataclasses.replace(item, predicted_correct=bool(predicted_correct))


def _distance(a, b):
    if isinstance(a, FeatureSequence):
        return dtw(a, b).normalized_cost
    return ned(a, b)


def score(input_seq, model, reduction="mean"):
    """Distance of an input to a class model.

    all-templates mode reduces the per-template distances (normalized DTW
    cost for continuous, NED for discrete) by mean (default) or min;
    barycentre mode is the single distance to the stored barycentre.
    """
    if reduction not in REDUCTIONS:
        raise DataError(f"reduction must be one of {REDUCTIONS}, "
                        f"got {reduction!r}")
    want = FeatureSequence if model.representation == "continuous" \
        else CodeSequence
    if not isinstance(input_seq, want):
        raise DataError(f"model {model.word_class!r} is "
                        f"{model.representation}, input is "
                        f"{type(input_seq).__name__}")
    values = [_distance(input_seq, t) for t in model.templates]
    return float(min(values) if reduction == "min" else np.mean(values))


def classify(score_value, tau):
    """Correct iff the distance is strictly below the threshold."""
    if not (math.isfinite(score_value) and math.isfinite(tau)):
        raise DataError(f"score and tau must be finite, got "
                        f"{score_value}, {tau}")
    return bool(score_value < tau)


def _class_count_arrays(items):
    """Per class: sorted positive and negative score arrays.

    Classes missing either side are dropped (reported by the caller).
    """
    by_class = {}
    for it in items:
        pos, neg = by_class.setdefault(it.word_class, ([], []))
        (pos if it.true_label in POSITIVE_LABELS else neg).append(it.score)
    usable = {}
    for name in sorted(by_class):
        pos, neg = by_class[name]
        if pos and neg:
            usable[name] = (np.sort(np.array(pos, dtype=np.float64)),
                            np.sort(np.array(neg, dtype=np.float64)))
    return usable, set(by_class) - set(usable)


def _candidate_taus(scores):
    distinct = np.unique(np.asarray(scores, dtype=np.float64))
    eps = 1e-9 * max(1.0, abs(float(distinct[-1])))
    inner = (distinct[:-1] + distinct[1:]) / 2.0
    return np.concatenate(([distinct[0] - eps], inner, [distinct[-1] + eps]))


def _macro_ba_at(usable, taus):
    """Macro balanced accuracy at each candidate threshold (vectorized:
    a prediction is correct iff score < tau, so per-side counts are
    searchsorted positions in the sorted score arrays)."""
    total = np.zeros(taus.shape[0], np.float64)
    for pos, neg in usable.values():
        tpr = np.searchsorted(pos, taus, side="left") / pos.shape[0]
        fpr = np.searchsorted(neg, taus, side="left") / neg.shape[0]
        total += 0.5 * (tpr + (1.0 - fpr))
    return total / len(usable)


def calibrate(dev, representation=""):
    """Choose the single global threshold maximizing macro balanced
    accuracy on the dev items.

    Candidates are the midpoints between consecutive distinct scores plus
    one value below the minimum and one above the maximum, so accept-all
    and reject-all are both reachable.  The smallest optimal candidate is
    returned.
    """
    dev = list(dev)
    if not dev:
        raise DataError("no dev items")
    usable, skipped = _class_count_arrays(dev)
    if not usable:
        raise DataError("no class has both positives and negatives")
    for name in sorted(skipped):
        log.warning("calibrate: class %r lacks positives or negatives, excluded",
                    name)
    taus = _candidate_taus([it.score for it in dev])
    accuracy = _macro_ba_at(usable, taus)
    best = int(np.argmax(accuracy))  # first occurrence = smallest tau
    return Threshold(tau=float(taus[best]), representation=representation,
                     calibration_accuracy=float(accuracy[best]))


def calibrate_per_class(dev, representation=""):
    """Diagnostic: an independent threshold per class, same candidate rule
    applied to each class's own scores. Returns {class: Threshold}."""
    dev = list(dev)
    if not dev:
        raise DataError("no dev items")
    usable, skipped = _class_count_arrays(dev)
    if not usable:
        raise DataError("no class has both positives and negatives")
    for name in sorted(skipped):
        log.warning("calibrate_per_class: class %r lacks positives or "
                    "negatives, excluded", name)
    out = {}
    for name, (pos, neg) in usable.items():
        taus = _candidate_taus(np.concatenate((pos, neg)))
        accuracy = _macro_ba_at({name: (pos, neg)}, taus)
        best = int(np.argmax(accuracy))
        out[name] = Threshold(tau=float(taus[best]),
                              representation=representation,
                              calibration_accuracy=float(accuracy[best]))
    return out


def load_sequence(path, representation, mfcc_cfg=None):
    """Read one item in the run's representation: extract MFCCs from a
    WAV, or import a prepared .fseq / .cseq file."""
    if representation == "mfcc":
        samples, rate = load_wav(path)
        return extract_mfcc(samples, rate, mfcc_cfg or MfccConfig())
    if representation == "continuous-import":
        return read_fseq(path)
    if representation == "discrete-import":
        return read_cseq(path)
    raise DataError(f"representation must be one of {REPRESENTATIONS}, "
                    f"got {representation!r}")


def build_models(manifest, representation, mode, mfcc_cfg=None,
                 dba_cfg=None, edb_cfg=None):
    """One ClassModel per word class from the manifest's template entries.

    With mode=barycentre the class templates are aggregated by dba
    (continuous) or edb (discrete) and the single result is stored.
    """
    if representation not in REPRESENTATIONS:
        raise DataError(f"representation must be one of {REPRESENTATIONS}, "
                        f"got {representation!r}")
    if mode not in MODES:
        raise DataError(f"mode must be one of {MODES}, got {mode!r}")
    rep_kind = "discrete" if representation == "discrete-import" \
        else "continuous"
    models = {}
    for name in manifest.classes():
        entries = manifest.templates_for(name)
        if not entries:
            continue
        seqs = [load_sequence(e.path, representation, mfcc_cfg)
                for e in entries]
        if mode == "barycentre":
            if rep_kind == "continuous":
                seqs = [dba(seqs, dba_cfg or DbaConfig())]
            else:
                seqs = [edb(seqs, edb_cfg or EdbConfig())]
        models[name] = ClassModel(word_class=name, representation=rep_kind,
                                  mode=mode, templates=tuple(seqs))
    if not models:
        raise DataError("manifest has no template entries")
    return models


def evaluate_split(manifest, split, models, tau=None, representation="mfcc",
                   reduction="mean", mfcc_cfg=None, jobs=1, roc_curves=None):
    """Score every item of a split against its target class's model.

    Negatives and impostors are scored against the class they were
    presented as.  Returns (items sorted by id, report); the report is
    None when tau is None (no predictions to tally).
    """
    entries = manifest.by_role(split)
    if not entries:
        raise DataError(f"split {split!r} is empty")
    for e in entries:
        if e.word_class not in models:
            raise DataError(f"item {e.id!r}: no model for class "
                            f"{e.word_class!r}")

    def score_entry(e):
        seq = load_sequence(e.path, representation, mfcc_cfg)
        value = score(seq, models[e.word_class], reduction)
        return ScoredItem(item_id=e.id, word_class=e.word_class,
                          score=value, true_label=e.label)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            items = list(pool.map(score_entry, entries))
    else:
        items = [score_entry(e) for e in entries]
    items.sort(key=lambda it: it.item_id)
    if tau is None:
        return items, None
    items = [with_prediction(it, classify(it.score, tau)) for it in items]
    report = macro_report(items, tau=tau, roc_curves=roc_curves)
    return items, report
