"""Template aggregation: DBA descent behavior and EDB median strings."""

import itertools

import numpy as np
import pytest

from fewshotword import (CodeSequence, DataError, DbaConfig, EdbConfig,
                         FeatureSequence, dba, dtw, edb,
                         median_length_prototype, ned)
from tests.conftest import random_cseq, random_fseq


class TestMedianLengthPrototype:
    def test_odd_count(self, rng):
        seqs = [random_fseq(rng, t=5, d=2), random_fseq(rng, t=9, d=2),
                random_fseq(rng, t=7, d=2)]
        assert median_length_prototype(seqs) == 2  # length 7

    def test_even_count_takes_lower(self, rng):
        seqs = [random_fseq(rng, t=4, d=2), random_fseq(rng, t=8, d=2)]
        assert median_length_prototype(seqs) == 0

    def test_ties_take_first(self, rng):
        seqs = [random_fseq(rng, t=6, d=2) for _ in range(3)]
        assert median_length_prototype(seqs) == 0

    def test_rejects_empty(self):
        with pytest.raises(DataError):
            median_length_prototype([])


def total_cost(templates, prototype):
    return sum(dtw(t, prototype).raw_cost for t in templates)


def one_dba_step(templates, prototype):
    """Independent reimplementation of a single update: gather template
    frames mapped to each prototype frame and average them."""
    mapped = [[] for _ in range(len(prototype))]
    for t in templates:
        for i, j in dtw(t, prototype).path.steps:
            mapped[j].append(t.frames[i].astype(np.float64))
    rows = [np.mean(group, axis=0) for group in mapped]
    return FeatureSequence(np.stack(rows).astype(np.float32))


class TestDba:
    def test_identical_templates_fixed_point(self, rng):
        base = random_fseq(rng, t=6, d=3)
        trace = []
        out = dba([base, base, base], trace=trace)
        assert np.array_equal(out.frames, base.frames)
        assert trace == [0.0]  # converged at the first evaluation

    def test_two_single_frames_average(self):
        u = FeatureSequence(np.array([[2.0, 0.0]], np.float32))
        v = FeatureSequence(np.array([[0.0, 2.0]], np.float32))
        out = dba([u, v])
        assert np.allclose(out.frames, [[1.0, 1.0]])

    def test_singleton_returns_template_exactly(self, rng):
        base = random_fseq(rng, t=5, d=2)
        assert np.array_equal(dba([base]).frames, base.frames)

    def test_trace_non_increasing(self, rng):
        for _ in range(40):
            d = rng.randint(1, 5)
            templates = [random_fseq(rng, max_t=10, d=d)
                         for _ in range(rng.randint(3, 16))]
            trace = []
            out = dba(templates, trace=trace)
            assert all(a >= b for a, b in zip(trace, trace[1:]))
            # the returned prototype achieves the last traced value
            assert total_cost(templates, out) == pytest.approx(
                trace[-1], abs=1e-9)

    def test_single_update_matches_independent_step(self, rng):
        for _ in range(25):
            templates = [random_fseq(rng, max_t=4, d=2) for _ in range(3)]
            start_idx = median_length_prototype(templates)
            start = FeatureSequence(templates[start_idx].frames.copy())
            expected = one_dba_step(templates, start)
            got = dba(templates, DbaConfig(max_iters=2))
            if total_cost(templates, start) == 0.0:
                expected = start  # converged before any update
            elif total_cost(templates, expected) > total_cost(templates,
                                                              start):
                expected = start  # update rejected, rollback
            assert np.array_equal(got.frames, expected.frames)

    def test_result_never_worse_than_its_start(self, rng):
        # descent from the median-length template can only improve on that
        # start; beating the best-of-all-templates start is not guaranteed
        for _ in range(25):
            templates = [random_fseq(rng, max_t=4, d=2) for _ in range(3)]
            start = templates[median_length_prototype(templates)]
            out = dba(templates)
            assert (total_cost(templates, out)
                    <= total_cost(templates, start) + 1e-9)

    def test_prototype_length_fixed(self, rng):
        templates = [random_fseq(rng, t=t, d=2) for t in (4, 7, 9)]
        assert len(dba(templates)) == 7

    def test_frame_rate_propagates_when_shared(self, rng):
        frames = rng.randn(4, 2).astype(np.float32)
        seqs = [FeatureSequence(frames, frame_rate_hz=100.0),
                FeatureSequence(frames + 1, frame_rate_hz=100.0)]
        assert dba(seqs).frame_rate_hz == 100.0

    def test_rejects_bad_inputs(self, rng):
        with pytest.raises(DataError):
            dba([])
        with pytest.raises(DataError):
            dba([random_fseq(rng, t=3, d=2), random_fseq(rng, t=3, d=3)])
        with pytest.raises(DataError):
            dba([random_cseq(rng, 4)])


def brute_force_median(templates, k, max_len):
    best_obj, best_seq = np.inf, None
    for length in range(1, max_len + 1):
        for combo in itertools.product(range(k), repeat=length):
            cand = CodeSequence(np.array(combo), alphabet_size=k)
            obj = sum(ned(cand, t) for t in templates)
            if obj < best_obj - 1e-12:
                best_obj, best_seq = obj, cand
    return best_seq, best_obj


def total_ned_of(templates, seq):
    return sum(ned(seq, t) for t in templates)


class TestEdb:
    def test_identical_sequences_fixed_point(self, rng):
        base = random_cseq(rng, 4, t=5)
        trace = []
        out = edb([base, base, base], trace=trace)
        assert np.array_equal(out.codes, base.codes)
        assert trace == [0.0]

    def test_known_median(self):
        templates = [CodeSequence([0, 1], 3), CodeSequence([0, 1], 3),
                     CodeSequence([0, 2], 3)]
        trace = []
        out = edb(templates, trace=trace)
        assert out.codes.tolist() == [0, 1]
        assert trace[-1] == pytest.approx(0.5)

    def test_trace_strictly_decreasing(self, rng):
        for _ in range(30):
            k = rng.randint(2, 5)
            templates = [random_cseq(rng, k, max_t=6)
                         for _ in range(rng.randint(3, 8))]
            trace = []
            out = edb(templates, trace=trace)
            assert all(a > b for a, b in zip(trace, trace[1:]))
            assert total_ned_of(templates, out) == pytest.approx(trace[-1])

    def test_never_worse_than_start_and_often_global(self, rng):
        hits = 0
        for _ in range(30):
            templates = [random_cseq(rng, 2, max_t=4) for _ in range(3)]
            start = templates[median_length_prototype(templates)]
            out = edb(templates)
            max_len = max(len(t) for t in templates) + 1
            _, best_obj = brute_force_median(templates, 2, max_len)
            got_obj = total_ned_of(templates, out)
            assert got_obj <= total_ned_of(templates, start) + 1e-12
            assert got_obj >= best_obj - 1e-12
            if got_obj <= best_obj + 1e-12:
                hits += 1
        assert hits >= 24  # local search reaches the optimum most times

    def test_singleton_returns_template(self, rng):
        base = random_cseq(rng, 3, t=4)
        out = edb([base])
        assert np.array_equal(out.codes, base.codes)

    def test_length_bound(self, rng):
        for _ in range(20):
            templates = [random_cseq(rng, 3, max_t=6) for _ in range(4)]
            out = edb(templates)
            assert len(out) <= max(len(t) for t in templates) + 1000

    def test_observed_codes_alphabet(self):
        # K is large but only two symbols occur; the restricted search
        # must stay within the observed set
        templates = [CodeSequence([7, 9, 9], 100), CodeSequence([7, 9], 100),
                     CodeSequence([9, 9], 100)]
        out = edb(templates, EdbConfig(alphabet="observed-codes"))
        assert set(out.codes.tolist()) <= {7, 9}

    def test_full_vs_observed_agree_when_alphabet_covered(self, rng):
        # with every symbol observed the two settings search identically
        templates = [CodeSequence([0, 1, 1], 2), CodeSequence([1, 0], 2),
                     CodeSequence([0, 0, 1], 2)]
        full = edb(templates, EdbConfig(alphabet="full-codebook"))
        observed = edb(templates, EdbConfig(alphabet="observed-codes"))
        assert np.array_equal(full.codes, observed.codes)

    def test_deterministic(self, rng):
        templates = [random_cseq(rng, 3, max_t=6) for _ in range(5)]
        a = edb(templates)
        b = edb(templates)
        assert np.array_equal(a.codes, b.codes)

    def test_rejects_bad_inputs(self, rng):
        with pytest.raises(DataError):
            edb([])
        with pytest.raises(DataError):
            edb([CodeSequence([0], 2), CodeSequence([0], 3)])
        with pytest.raises(DataError):
            edb([random_fseq(rng, t=3, d=2)])
        with pytest.raises(DataError):
            EdbConfig(alphabet="everything")
