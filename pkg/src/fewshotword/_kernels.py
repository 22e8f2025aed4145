"""Hot dynamic-programming kernels.

The DTW and edit-distance inner loops dominate runtime, so they are
compiled with numba when it is importable.  Setting ``FSC_NO_NUMBA=1``
(or running without numba installed) keeps the exact same functions as
plain Python over numpy arrays — same operations in the same order, so
both paths return bit-identical results.  ``benchmarks/bench_kernels.py``
times one path against the other.
"""

import os

import numpy as np


def _want_numba():
    flag = os.environ.get("FSC_NO_NUMBA", "").strip().lower()
    if flag in {"1", "true", "yes", "on"}:
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def dtw_accumulate(cost):
    """Accumulated-cost table for DTW over a precomputed frame-distance matrix.

    Moves are (i-1,j), (i,j-1), (i-1,j-1) with unit step weights.
    """
    ta, tb = cost.shape
    acc = np.empty((ta, tb), np.float64)
    acc[0, 0] = cost[0, 0]
    for j in range(1, tb):
        acc[0, j] = acc[0, j - 1] + cost[0, j]
    for i in range(1, ta):
        acc[i, 0] = acc[i - 1, 0] + cost[i, 0]
        for j in range(1, tb):
            m = acc[i - 1, j - 1]
            if acc[i - 1, j] < m:
                m = acc[i - 1, j]
            if acc[i, j - 1] < m:
                m = acc[i, j - 1]
            acc[i, j] = cost[i, j] + m
    return acc


def dtw_backtrack(acc):
    """Optimal warp path from an accumulated-cost table.

    Ties between predecessors are broken deterministically: diagonal,
    then vertical (i-1, j), then horizontal (i, j-1).  Returns an (L, 2)
    int64 array of (i, j) pairs from (0, 0) to (ta-1, tb-1).
    """
    ta, tb = acc.shape
    maxlen = ta + tb - 1
    path = np.empty((maxlen, 2), np.int64)
    i = ta - 1
    j = tb - 1
    pos = maxlen - 1
    path[pos, 0] = i
    path[pos, 1] = j
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            d = acc[i - 1, j - 1]
            v = acc[i - 1, j]
            h = acc[i, j - 1]
            if d <= v and d <= h:
                i -= 1
                j -= 1
            elif v <= h:
                i -= 1
            else:
                j -= 1
        pos -= 1
        path[pos, 0] = i
        path[pos, 1] = j
    return path[pos:, :].copy()


def levenshtein(a, b):
    """Unit-cost Levenshtein distance between two int64 code arrays."""
    la = a.shape[0]
    lb = b.shape[0]
    prev = np.empty(lb + 1, np.int64)
    cur = np.empty(lb + 1, np.int64)
    for j in range(lb + 1):
        prev[j] = j
    for i in range(1, la + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, lb + 1):
            m = prev[j - 1]
            if b[j - 1] != ai:
                m += 1
            if prev[j] + 1 < m:
                m = prev[j] + 1
            if cur[j - 1] + 1 < m:
                m = cur[j - 1] + 1
            cur[j] = m
        tmp = prev
        prev = cur
        cur = tmp
    return prev[lb]


def total_ned(cand, flat, offsets):
    """Sum of length-normalised edit distances from `cand` to each sequence.

    The sequences are packed into `flat` with `offsets` (len n+1) marking
    segment boundaries.  This is the inner objective of the edit-distance
    barycentre search, evaluated once per candidate neighbour.
    """
    total = 0.0
    lc = cand.shape[0]
    for k in range(offsets.shape[0] - 1):
        seg = flat[offsets[k]:offsets[k + 1]]
        d = levenshtein(cand, seg)
        ls = seg.shape[0]
        longer = lc if lc > ls else ls
        total += d / longer
    return total


# Keep undecorated references so tests can compare the two paths directly.
PY_IMPLS = {
    "dtw_accumulate": dtw_accumulate,
    "dtw_backtrack": dtw_backtrack,
    "levenshtein": levenshtein,
    "total_ned": total_ned,
}

NUMBA_ENABLED = _want_numba()

if NUMBA_ENABLED:
    from numba import njit

    _jit = njit(cache=True, nogil=True)
    dtw_accumulate = _jit(dtw_accumulate)
    dtw_backtrack = _jit(dtw_backtrack)
    levenshtein = _jit(levenshtein)
    # total_ned resolves the global name `levenshtein` when it is first
    # compiled, i.e. after the rebinding above, so it calls the jitted one.
    total_ned = _jit(total_ned)
