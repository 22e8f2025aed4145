"""Few-shot isolated-word assessment from reference templates.

An input utterance is encoded (MFCC frames or K-means codes), compared to
a handful of per-class templates with DTW or normalized edit distance, and
judged correct when its distance falls below a single globally calibrated
threshold.  Template sets can be condensed to one barycentre per class.
A softmax regression baseline and a confusion/ROC metrics stack round out
the toolkit.
"""

from .align import (DtwResult, WarpPath, cosine_distance,
                    cosine_frame_distances, dtw, edit_distance, ned)
from .barycentre import (DbaConfig, EdbConfig, dba, edb,
                         median_length_prototype)
from .baseline import (SoftmaxModel, TrainConfig, assess, load_model,
                       predict_proba, save_model, train)
from .errors import DataError, FscError, InvariantError
from .features import (KMeansConfig, MfccConfig, extract_mfcc, load_codebook,
                       load_wav, mean_pool, quantize, save_codebook,
                       train_codebook)
from .fewshot import (ClassModel, ScoredItem, Threshold, build_models,
                      calibrate, calibrate_per_class, classify,
                      evaluate_split, load_sequence, score, with_prediction)
from .metrics import (ConfusionCounts, EvaluationReport, RocCurve,
                      balanced_accuracy, confusion, f1, macro_report,
                      precision, recall, report_to_dict, roc_auc)
from .seqdata import (Codebook, CodeSequence, FeatureSequence, Manifest,
                      ManifestEntry, load_manifest, read_cseq, read_fseq,
                      write_cseq, write_fseq)

__version__ = "0.1.0"

__all__ = [
    "DtwResult", "WarpPath", "cosine_distance", "cosine_frame_distances",
    "dtw", "edit_distance", "ned",
    "DbaConfig", "EdbConfig", "dba", "edb", "median_length_prototype",
    "SoftmaxModel", "TrainConfig", "assess", "load_model", "predict_proba",
    "save_model", "train",
    "DataError", "FscError", "InvariantError",
    "KMeansConfig", "MfccConfig", "extract_mfcc", "load_codebook",
    "load_wav", "mean_pool", "quantize", "save_codebook", "train_codebook",
    "ClassModel", "ScoredItem", "Threshold", "build_models", "calibrate",
    "calibrate_per_class", "classify", "evaluate_split", "load_sequence",
    "score", "with_prediction",
    "ConfusionCounts", "EvaluationReport", "RocCurve", "balanced_accuracy",
    "confusion", "f1", "macro_report", "precision", "recall",
    "report_to_dict", "roc_auc",
    "Codebook", "CodeSequence", "FeatureSequence", "Manifest",
    "ManifestEntry", "load_manifest", "read_cseq", "read_fseq",
    "write_cseq", "write_fseq",
]
