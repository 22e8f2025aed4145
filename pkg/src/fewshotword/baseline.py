"""Supervised comparison system: multinomial softmax regression on
mean-pooled feature vectors, trained on the template set only.

Deliberately simple and fully deterministic: zero init, full-batch
gradient descent, L2 on the weights only.  Scores are 1 - P(target) so
lower still means "more likely correct", matching the metrics stack.
"""

import json
import logging
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DataError
from .seqdata import FeatureSequence, atomic_write_bytes, read_fseq, write_fseq

log = logging.getLogger(__name__)

MAX_HALVINGS = 20


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 500
    l2: float = 1e-3
    seed: int = 0  # reserved for future minibatching; training is exact

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise DataError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise DataError(f"epochs must be >= 1, got {self.epochs}")
        if self.l2 < 0:
            raise DataError(f"l2 must be >= 0, got {self.l2}")


@dataclass(frozen=True)
class SoftmaxModel:
    weights: np.ndarray  # C x D
    bias: np.ndarray  # C
    classes: tuple

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64, copy=True)
        b = np.array(self.bias, dtype=np.float64, copy=True)
        classes = tuple(str(c) for c in self.classes)
        if w.ndim != 2 or b.ndim != 1:
            raise DataError(f"need 2-D weights and 1-D bias, got shapes "
                            f"{w.shape} and {b.shape}")
        if len(classes) < 2:
            raise DataError(f"need >= 2 classes, got {len(classes)}")
        if not (w.shape[0] == b.shape[0] == len(classes)):
            raise DataError(f"class count mismatch: {w.shape[0]} weight rows, "
                            f"{b.shape[0]} biases, {len(classes)} names")
        if len(set(classes)) != len(classes):
            raise DataError("duplicate class names")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise DataError("non-finite parameters")
        w.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)
        object.__setattr__(self, "classes", classes)

    @property
    def dim(self):
        return self.weights.shape[1]


def _softmax_rows(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _loss_and_grad(w, b, x, y_onehot, l2):
    """Mean cross-entropy plus (l2/2)|W|^2, with analytic gradients.

    The log-probabilities come from the shifted logits directly (not from
    log of the normalized probabilities), so the loss is finite even for
    extreme parameters.
    """
    n = x.shape[0]
    logits = x @ w.T + b
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    log_p = shifted - log_z[:, None]
    loss = -float((y_onehot * log_p).sum()) / n + 0.5 * l2 * float((w * w).sum())
    p = np.exp(log_p)
    delta = (p - y_onehot) / n
    grad_w = delta.T @ x + l2 * w
    grad_b = delta.sum(axis=0)
    return loss, grad_w, grad_b


def train(samples, cfg=None, trace=None):
    """Fit the model by full-batch gradient descent.

    samples is a list of (vector, class_name) pairs.  Class order is the
    sorted distinct names.  If a step raises the loss, the learning rate
    is halved and the epoch retried (up to 20 halvings) so the recorded
    loss trace is non-increasing; training stops early once no step
    improves.  trace, if given, receives the initial loss and the loss
    after every accepted epoch.
    """
    cfg = cfg or TrainConfig()
    if not samples:
        raise DataError("no training samples")
    classes = tuple(sorted({name for _, name in samples}))
    if len(classes) < 2:
        raise DataError(f"need >= 2 classes, got {classes}")
    index = {name: i for i, name in enumerate(classes)}
    vectors = [np.asarray(v, dtype=np.float64) for v, _ in samples]
    dims = {v.shape for v in vectors}
    if len(dims) > 1 or vectors[0].ndim != 1:
        raise DataError(f"inconsistent sample shapes: {sorted(dims)}")
    x = np.stack(vectors)
    if not np.all(np.isfinite(x)):
        raise DataError("non-finite training vectors")
    y = np.array([index[name] for _, name in samples])
    y_onehot = np.zeros((x.shape[0], len(classes)), np.float64)
    y_onehot[np.arange(x.shape[0]), y] = 1.0

    w = np.zeros((len(classes), x.shape[1]), np.float64)
    b = np.zeros(len(classes), np.float64)
    lr = cfg.learning_rate
    loss, grad_w, grad_b = _loss_and_grad(w, b, x, y_onehot, cfg.l2)
    if trace is not None:
        trace.append(loss)
    for epoch in range(cfg.epochs):
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            w_new = w - lr * grad_w
            b_new = b - lr * grad_b
            new_loss, new_gw, new_gb = _loss_and_grad(w_new, b_new, x,
                                                      y_onehot, cfg.l2)
            if new_loss <= loss:
                accepted = True
                break
            lr *= 0.5
        if not accepted:
            log.debug("train: no improving step at epoch %d, stopping", epoch)
            break
        w, b = w_new, b_new
        loss, grad_w, grad_b = new_loss, new_gw, new_gb
        if trace is not None:
            trace.append(loss)
    return SoftmaxModel(weights=w, bias=b, classes=classes)


def predict_proba(model, x):
    """softmax(Wx + b), log-sum-exp stabilized."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.dim,):
        raise DataError(f"expected vector of dim {model.dim}, got shape "
                        f"{x.shape}")
    return _softmax_rows((model.weights @ x + model.bias)[None, :])[0]


def assess(model, x, target_class):
    """Judge one reading attempt: correct iff the model's argmax class is
    the target (ties to the lowest class index).  The returned score,
    1 - P(target), is a distance-like value for the metrics stack.
    """
    if target_class not in model.classes:
        raise DataError(f"unknown class {target_class!r}")
    p = predict_proba(model, x)
    predicted = int(np.argmax(p))
    target = model.classes.index(target_class)
    return predicted == target, float(1.0 - p[target])


def save_model(model, prefix, cfg=None, loss_trace=None):
    """Persist as <prefix>.fseq (weight matrix) + <prefix>.json (bias,
    class order, training config, loss trace)."""
    prefix = str(prefix)
    write_fseq(FeatureSequence(model.weights.astype(np.float32)),
               prefix + ".fseq")
    sidecar = {
        "bias": [float(v) for v in model.bias],
        "classes": list(model.classes),
        "config": asdict(cfg) if cfg is not None else None,
        "loss_trace": list(loss_trace) if loss_trace is not None else None,
    }
    payload = json.dumps(sidecar, indent=2).encode() + b"\n"
    atomic_write_bytes(prefix + ".json", payload)


def load_model(prefix):
    prefix = str(prefix)
    try:
        weights = read_fseq(prefix + ".fseq").frames
    except OSError as e:
        raise DataError(f"{prefix}.fseq: file not found") from e
    try:
        with open(prefix + ".json", "rb") as fh:
            sidecar = json.load(fh)
    except (OSError, ValueError) as e:
        raise DataError(f"{prefix}.json: unreadable sidecar: {e}") from e
    for key in ("bias", "classes"):
        if key not in sidecar:
            raise DataError(f"{prefix}.json: missing key {key!r}")
    return SoftmaxModel(weights=weights, bias=np.array(sidecar["bias"]),
                        classes=tuple(sidecar["classes"]))
