"""Template aggregation.

dba averages continuous feature sequences under DTW alignment; edb runs a
median-string local search over code sequences under NED.  Both keep the
prototype length fixed to the initializer's choice (dba) or let it drift
one symbol per accepted move (edb), and both guarantee a non-increasing
objective trace.
"""

import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .align import dtw
from .errors import DataError
from .seqdata import CodeSequence, FeatureSequence

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DbaConfig:
    max_iters: int = 10
    rel_tolerance: float = 1e-6  # on total raw DTW cost

    def __post_init__(self):
        if self.max_iters < 1:
            raise DataError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.rel_tolerance < 0:
            raise DataError(f"rel_tolerance must be >= 0, got {self.rel_tolerance}")


EDB_ALPHABETS = ("full-codebook", "observed-codes")


@dataclass(frozen=True)
class EdbConfig:
    alphabet: str = "full-codebook"
    max_iters: int = 1000  # safety cap, not an expected stopping reason

    def __post_init__(self):
        if self.alphabet not in EDB_ALPHABETS:
            raise DataError(f"alphabet must be one of {EDB_ALPHABETS}, "
                            f"got {self.alphabet!r}")
        if self.max_iters < 1:
            raise DataError(f"max_iters must be >= 1, got {self.max_iters}")


def median_length_prototype(templates):
    """Index of the first template whose length is the lower median length.

    Lower median: element (n-1)//2 of the sorted lengths, so an even count
    picks the shorter of the two middle values.
    """
    if not templates:
        raise DataError("no templates given")
    lengths = [len(t) for t in templates]
    target = sorted(lengths)[(len(lengths) - 1) // 2]
    return lengths.index(target)


def _total_raw_cost(templates, prototype):
    return sum(dtw(t, prototype).raw_cost for t in templates)


def dba(templates, cfg=None, trace=None):
    """DTW barycentre of a set of feature sequences.

    Starts from the median-length template and repeatedly replaces each
    prototype frame with the arithmetic mean of all template frames the DTW
    alignments map onto it.  The prototype length never changes.  Stops on
    relative objective decrease below cfg.rel_tolerance, at cfg.max_iters
    evaluations, or if an update fails to improve (the pre-update prototype
    is returned, keeping the trace non-increasing).

    trace, if given, is a list that receives the total raw DTW cost of each
    evaluated prototype.
    """
    cfg = cfg or DbaConfig()
    if not templates:
        raise DataError("no templates given")
    for t in templates:
        if not isinstance(t, FeatureSequence):
            raise DataError(f"expected FeatureSequence, got {type(t).__name__}")
    dims = {t.dim for t in templates}
    if len(dims) > 1:
        raise DataError(f"mixed dimensionality: {sorted(dims)}")
    rates = {t.frame_rate_hz for t in templates}
    rate = rates.pop() if len(rates) == 1 else None

    init = templates[median_length_prototype(templates)]
    prototype = FeatureSequence(init.frames.copy(), frame_rate_hz=rate)
    prev_cost = None
    for it in range(cfg.max_iters):
        results = [dtw(t, prototype) for t in templates]
        cost = float(sum(r.raw_cost for r in results))
        if prev_cost is not None and cost > prev_cost:
            # mean update is not a guaranteed descent step for cosine
            # costs; discard it rather than emit an increasing trace
            log.debug("dba: update raised cost %.6g -> %.6g, rolling back",
                      prev_cost, cost)
            return previous
        if trace is not None:
            trace.append(cost)
        if cost == 0.0:
            return prototype
        if prev_cost is not None:
            if (prev_cost - cost) / prev_cost < cfg.rel_tolerance:
                return prototype
        if it == cfg.max_iters - 1:
            break  # never return an unevaluated update
        sums = np.zeros((len(prototype), prototype.dim), np.float64)
        counts = np.zeros(len(prototype), np.int64)
        for t, r in zip(templates, results):
            steps = r.path.steps
            frames = t.frames.astype(np.float64)
            np.add.at(sums, steps[:, 1], frames[steps[:, 0]])
            np.add.at(counts, steps[:, 1], 1)
        previous = prototype
        prototype = FeatureSequence(
            (sums / counts[:, None]).astype(np.float32), frame_rate_hz=rate)
        prev_cost = cost
    return prototype


def _observed_symbols(templates):
    return sorted(set(int(c) for t in templates for c in t.codes))


def _pack(templates):
    """Flatten code sequences for the total_ned kernel."""
    flat = np.concatenate([t.codes for t in templates]).astype(np.int64)
    offsets = np.zeros(len(templates) + 1, np.int64)
    np.cumsum([len(t) for t in templates], out=offsets[1:])
    return flat, offsets


def _neighbours(codes, symbols):
    """All single-edit variants in tie-break order: deletions left to
    right, substitutions left to right with symbols ascending, insertions
    before each position then at the end with symbols ascending.  A
    deletion that would empty the sequence is skipped (sequences must keep
    at least one code), as are no-op substitutions.
    """
    length = codes.shape[0]
    if length > 1:
        for pos in range(length):
            yield np.delete(codes, pos)
    for pos in range(length):
        for sym in symbols:
            if sym != codes[pos]:
                cand = codes.copy()
                cand[pos] = sym
                yield cand
    for pos in range(length + 1):
        for sym in symbols:
            yield np.insert(codes, pos, sym)


def edb(templates, cfg=None, trace=None):
    """Median string of a set of code sequences under total NED.

    Steepest-descent local search from the median-length template: every
    round evaluates all single-edit neighbours (deletion, substitution, and
    insertion of each alphabet symbol at each position) and moves to the
    best one if it strictly lowers the summed NED to the templates.  Ties
    go to the earliest neighbour in generation order.

    trace, if given, receives the objective of the start prototype and of
    each accepted move.
    """
    cfg = cfg or EdbConfig()
    if not templates:
        raise DataError("no templates given")
    for t in templates:
        if not isinstance(t, CodeSequence):
            raise DataError(f"expected CodeSequence, got {type(t).__name__}")
    alphabet_sizes = {t.alphabet_size for t in templates}
    if len(alphabet_sizes) > 1:
        raise DataError(f"mixed alphabet sizes: {sorted(alphabet_sizes)}")
    k = alphabet_sizes.pop()
    if cfg.alphabet == "full-codebook":
        symbols = list(range(k))
    else:
        symbols = _observed_symbols(templates)

    flat, offsets = _pack(templates)
    current = templates[median_length_prototype(templates)].codes.astype(np.int64)
    objective = float(_kernels.total_ned(current, flat, offsets))
    if trace is not None:
        trace.append(objective)
    for _ in range(cfg.max_iters):
        best_cand = None
        best_obj = objective
        for cand in _neighbours(current, symbols):
            obj = float(_kernels.total_ned(cand, flat, offsets))
            if obj < best_obj:  # strict: ties keep the earlier neighbour
                best_obj = obj
                best_cand = cand
        if best_cand is None:
            break
        current = best_cand
        objective = best_obj
        if trace is not None:
            trace.append(objective)
    else:
        log.warning("edb: stopped at max_iters=%d with improving moves left",
                    cfg.max_iters)
    return CodeSequence(current, alphabet_size=k)
