"""Distances between sequences.

Continuous feature sequences are compared with dynamic time warping over
per-frame cosine distances; discrete code sequences with Levenshtein
distance and its length-normalised variant (NED).
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DataError
from .seqdata import CodeSequence, FeatureSequence

ZERO_NORM_EPS = 1e-12


@dataclass(frozen=True)
class WarpPath:
    """Monotone alignment path: (i, j) index pairs into the two sequences."""

    steps: np.ndarray  # (L, 2) int64

    def __post_init__(self):
        steps = np.array(self.steps, dtype=np.int64, copy=True)
        steps.flags.writeable = False
        object.__setattr__(self, "steps", steps)

    def __len__(self):
        return self.steps.shape[0]

    def validate(self, ta, tb):
        """Check path invariants: endpoints and unit increments."""
        s = self.steps
        if tuple(s[0]) != (0, 0):
            raise DataError(f"path must start at (0, 0), got {tuple(s[0])}")
        if tuple(s[-1]) != (ta - 1, tb - 1):
            raise DataError(f"path must end at ({ta - 1}, {tb - 1}), got {tuple(s[-1])}")
        di = np.diff(s[:, 0])
        dj = np.diff(s[:, 1])
        ok = (di >= 0) & (di <= 1) & (dj >= 0) & (dj <= 1) & ((di + dj) >= 1)
        if not np.all(ok):
            raise DataError("path steps must increment i, j, or both by exactly 1")


@dataclass(frozen=True)
class DtwResult:
    raw_cost: float
    path: WarpPath
    normalized_cost: float


def cosine_frame_distances(a, b):
    """Pairwise cosine distances between the rows of two (T, D) matrices.

    Computed in float64 as half the squared distance of the unit-normalised
    rows, which equals 1 - cos and is exactly 0.0 for identical frames and
    exactly 2.0 for antipodal ones.  Rows with norm below 1e-12 are defined
    to have similarity 0 (distance 1) against everything.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    za = na < ZERO_NORM_EPS
    zb = nb < ZERO_NORM_EPS
    an = np.divide(a, na[:, None], out=np.zeros_like(a), where=~za[:, None])
    bn = np.divide(b, nb[:, None], out=np.zeros_like(b), where=~zb[:, None])
    out = np.empty((a.shape[0], b.shape[0]), np.float64)
    # Chunk rows of `a` so the (chunk, Tb, D) diff buffer stays small.
    chunk = max(1, int(4e6 // max(1, b.shape[0] * a.shape[1])))
    for start in range(0, a.shape[0], chunk):
        diff = an[start:start + chunk, None, :] - bn[None, :, :]
        out[start:start + chunk] = 0.5 * np.einsum("ijd,ijd->ij", diff, diff)
    np.minimum(out, 2.0, out=out)
    if za.any():
        out[za, :] = 1.0
    if zb.any():
        out[:, zb] = 1.0
    return out


def cosine_distance(u, v):
    """Cosine distance 1 - (u.v)/(|u||v|) in [0, 2]; zero-norm inputs give 1."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 1 or v.ndim != 1:
        raise DataError("cosine_distance expects 1-D vectors")
    if u.shape[0] != v.shape[0]:
        raise DataError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    return float(cosine_frame_distances(u[None, :], v[None, :])[0, 0])


def dtw(a, b):
    """Dynamic time warping between two FeatureSequences.

    Classic DP with moves {(i-1,j), (i,j-1), (i-1,j-1)} and unit step
    weights over the cosine frame-distance matrix.  Backtracking breaks
    ties preferring diagonal, then vertical, then horizontal, so the path
    is deterministic.  normalized_cost is raw_cost divided by path length.
    """
    if not isinstance(a, FeatureSequence) or not isinstance(b, FeatureSequence):
        raise DataError("dtw expects FeatureSequence inputs")
    if a.dim != b.dim:
        raise DataError(f"dimension mismatch: {a.dim} vs {b.dim}")
    cost = cosine_frame_distances(a.frames, b.frames)
    acc = _kernels.dtw_accumulate(cost)
    steps = _kernels.dtw_backtrack(acc)
    path = WarpPath(steps)
    raw = float(acc[-1, -1])
    return DtwResult(raw_cost=raw, path=path, normalized_cost=raw / len(path))


def _check_codes(a, b):
    if not isinstance(a, CodeSequence) or not isinstance(b, CodeSequence):
        raise DataError("expected CodeSequence inputs")
    if a.alphabet_size != b.alphabet_size:
        raise DataError(f"alphabet-size mismatch: {a.alphabet_size} vs "
                        f"{b.alphabet_size}")


def edit_distance(a, b):
    """Unit-cost Levenshtein distance between two CodeSequences."""
    _check_codes(a, b)
    return int(_kernels.levenshtein(a.codes, b.codes))


def ned(a, b):
    """Normalised edit distance: Levenshtein / max(|a|, |b|), in [0, 1]."""
    _check_codes(a, b)
    return int(_kernels.levenshtein(a.codes, b.codes)) / max(len(a), len(b))
