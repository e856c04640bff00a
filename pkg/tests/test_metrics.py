import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beamprobe import (
    AnalysisConfig,
    CandidateEntry,
    DecodingStep,
    UtteranceTrace,
    average_rank,
    confidence,
    coverage_curve,
    diversity_ttr,
    entropy,
    language_metrics,
    language_wer,
    mean_entropy,
    normalize_text,
    rank_reference_tokens,
    read_traces,
    wer,
)
from beamprobe.alignment import AlignmentResult, OpKind, RankedToken
from beamprobe.trace_model import bundled_example_trace_path

from conftest import make_language_traces, make_step


def _alignment_with_ranks(ranks):
    ranked = tuple(RankedToken(i, r, OpKind.REPLACE) for i, r in enumerate(ranks))
    return AlignmentResult(ops=(), ranked=ranked, edit_distance=0)


def _single_step_trace(uid, candidates, chosen_idx=0, language="fi", duration=2.0):
    cands = tuple(CandidateEntry(t, lp) for t, lp in candidates)
    chosen = cands[chosen_idx]
    step = DecodingStep(chosen.token_id, chosen.log_prob, cands)
    return UtteranceTrace(
        uid, language, duration, "x", (chosen.token_id,), (chosen.token_id,), (step,),
    )


class TestAverageRank:
    def test_pooled_not_per_utterance(self):
        alignments = [_alignment_with_ranks([1, 3]), _alignment_with_ranks([5])]
        assert average_rank(alignments) == pytest.approx(3.0, abs=0)

    def test_all_rank_one(self):
        assert average_rank([_alignment_with_ranks([1, 1, 1])]) == 1.0

    def test_empty_errors(self):
        with pytest.raises(ValueError, match="no reference tokens"):
            average_rank([])

    def test_penalty_boundary_when_nothing_found(self):
        # every reference token absent from its step's candidates
        steps = tuple(
            DecodingStep(t, -0.5, (CandidateEntry(t, -0.5),)) for t in (70, 71)
        )
        trace = UtteranceTrace("u", "fi", 1.0, "x", (80, 81, 82), (70, 71), steps)
        config = AnalysisConfig(k_cand=4, k_entropy=1, k_diversity=1, k_pca=1)
        result = rank_reference_tokens(trace, config)
        assert average_rank([result]) == 5.0  # k_cand + 1 exactly


class TestConfidence:
    def test_two_steps(self):
        t1 = _single_step_trace("a", [(1, math.log(0.9)), (2, -3.0)])
        t2 = _single_step_trace("b", [(1, math.log(0.7)), (2, -3.0)])
        assert confidence([t1, t2]) == pytest.approx(0.8, abs=1e-12)

    def test_upper_bound(self):
        t = _single_step_trace("a", [(1, 0.0), (2, -3.0)])
        assert confidence([t]) == 1.0

    def test_zero_steps_error(self):
        trace = UtteranceTrace("e", "fi", 1.0, "x", (), (), ())
        with pytest.raises(ValueError, match="no decoding steps"):
            confidence([trace])

    def test_chosen_outside_window_uses_stored_log_prob(self):
        step = DecodingStep(42, -1.5, (CandidateEntry(7, -0.5),))
        trace = UtteranceTrace("u", "fi", 1.0, "x", (7,), (42,), (step,))
        assert confidence([trace]) == pytest.approx(math.exp(-1.5), abs=1e-15)


class TestEntropy:
    def test_uniform_fifty(self):
        lp = math.log(1 / 50)
        step = DecodingStep(0, lp, tuple(CandidateEntry(i, lp) for i in range(50)))
        assert entropy(step, 50) == pytest.approx(math.log2(50), abs=1e-12)

    def test_single_candidate_zero_bits(self):
        step = DecodingStep(5, -0.3, (CandidateEntry(5, -0.3),))
        assert entropy(step, 50) == 0.0

    def test_three_quarters_one_quarter(self):
        step = DecodingStep(
            1, math.log(0.75),
            (CandidateEntry(1, math.log(0.75)), CandidateEntry(2, math.log(0.25))),
        )
        expected = -(0.75 * math.log2(0.75) + 0.25 * math.log2(0.25))
        assert entropy(step, 50) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.8112781244591328, abs=1e-12)

    def test_renormalizes_over_window(self):
        # only the top-2 window participates
        step = DecodingStep(
            1, -0.5,
            (CandidateEntry(1, -0.5), CandidateEntry(2, -0.9), CandidateEntry(3, -1.2)),
        )
        p = np.exp([-0.5, -0.9])
        p = p / p.sum()
        expected = float(-(p * np.log2(p)).sum())
        assert entropy(step, 2) == pytest.approx(expected, abs=1e-12)

    def test_bounded_by_log2_k(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            step = make_step(rng, k_max=5)
            k = len(step.candidates)
            assert 0.0 <= entropy(step, 5) <= math.log2(max(k, 2)) + 1e-12

    def test_no_candidates_error(self):
        step = DecodingStep(1, -0.5, ())
        with pytest.raises(ValueError, match="no candidates"):
            entropy(step, 5)

    def test_depends_only_on_probability_multiset(self):
        # same log-probs attached to different token ids: entropy unchanged
        lps = (-0.4, -1.3, -2.7)
        a = DecodingStep(1, -0.4, tuple(CandidateEntry(i, lp) for i, lp in zip((1, 2, 3), lps)))
        b = DecodingStep(9, -0.4, tuple(CandidateEntry(i, lp) for i, lp in zip((9, 5, 7), lps)))
        assert entropy(a, 3) == entropy(b, 3)


class TestDiversity:
    def test_hand_count(self):
        t1 = _single_step_trace("a", [(1, -0.1), (10, -0.5), (11, -0.9)])
        t2 = _single_step_trace("b", [(2, -0.1), (10, -0.4), (12, -0.8)])
        # pooled non-top-1 candidates: [10, 11, 10, 12] -> 3 unique / 4
        assert diversity_ttr([t1, t2], 3) == pytest.approx(0.75, abs=0)

    def test_all_identical(self):
        traces = [
            _single_step_trace(str(i), [(1, -0.1), (7, -0.5)]) for i in range(4)
        ]
        assert diversity_ttr(traces, 2) == pytest.approx(1 / 4, abs=0)

    def test_all_distinct(self):
        traces = [
            _single_step_trace(str(i), [(1, -0.1), (100 + i, -0.5)]) for i in range(4)
        ]
        assert diversity_ttr(traces, 2) == 1.0

    def test_no_alternates_error(self):
        t = _single_step_trace("a", [(1, -0.1)])
        with pytest.raises(ValueError, match="diversity undefined"):
            diversity_ttr([t], 5)

    def test_order_invariance(self):
        traces = make_language_traces(17, "sv", 5)
        forward = diversity_ttr(traces, 5)
        assert diversity_ttr(traces[::-1], 5) == forward


class TestWer:
    def test_one_third(self):
        assert wer("a b c", "a x c") == pytest.approx(1 / 3, abs=0)

    def test_identical(self):
        assert wer("kala meri", "kala meri") == 0.0

    def test_normalization_strips_case_and_punctuation(self):
        assert wer("Hello, World", "hello world") == 0.0
        assert wer("Hello, World", "hello world", normalize=False) > 0.0

    def test_empty_reference_error(self):
        with pytest.raises(ValueError, match="empty"):
            wer("...", "something")

    def test_normalize_text(self):
        assert normalize_text("  Tere,   MAAILM!  ") == "tere maailm"
        assert normalize_text("a b") == "a b"

    def test_language_wer_pools_over_corpus(self):
        t1 = _single_step_trace("a", [(1, -0.1)])
        t1 = UtteranceTrace(
            "a", "fi", 1.0, "yks kaks kolme", t1.reference_tokens,
            t1.hypothesis_tokens, t1.steps, hypothesis_text="yks kaks kolme",
        )
        t2 = UtteranceTrace(
            "b", "fi", 1.0, "nelja viis", t1.reference_tokens,
            t1.hypothesis_tokens, t1.steps, hypothesis_text="nelja kuus",
        )
        # distances 0 + 1, reference words 3 + 2
        assert language_wer([t1, t2]) == pytest.approx(1 / 5, abs=0)

    def test_language_wer_nan_without_hypothesis_text(self):
        t = _single_step_trace("a", [(1, -0.1)])
        assert math.isnan(language_wer([t]))


class TestLanguageMetrics:
    def test_bundled_fixture_values(self):
        (trace,) = read_traces(bundled_example_trace_path())
        m = language_metrics([trace])
        assert m.avg_rank == pytest.approx(71 / 7, abs=1e-12)
        assert m.language == "tr"
        assert m.n_ref_tokens == 7
        assert m.n_hyp_tokens == 10
        assert m.n_utterances == 1
        assert 0.0 <= m.avg_confidence <= 1.0
        assert m.wer > 0.0

    def test_duplicated_utterances_scale_counts_not_means(self):
        traces = make_language_traces(3, "et", 3)
        single = language_metrics(traces)
        double = language_metrics(traces + traces)
        assert double.avg_rank == pytest.approx(single.avg_rank, abs=1e-12)
        assert double.avg_confidence == pytest.approx(single.avg_confidence, abs=1e-12)
        assert double.avg_entropy_bits == pytest.approx(single.avg_entropy_bits, abs=1e-12)
        assert double.wer == pytest.approx(single.wer, abs=1e-12)
        assert double.n_utterances == 2 * single.n_utterances
        assert double.n_hyp_tokens == 2 * single.n_hyp_tokens

    def test_zero_utterances_error(self):
        with pytest.raises(ValueError, match="no traces"):
            language_metrics([])

    def test_mixed_languages_rejected(self):
        traces = make_language_traces(3, "et", 1) + make_language_traces(4, "fi", 1)
        with pytest.raises(ValueError, match="mixed languages"):
            language_metrics(traces)

    def test_alignment_count_mismatch_rejected(self):
        traces = make_language_traces(3, "et", 2)
        alignments = [rank_reference_tokens(traces[0], AnalysisConfig())]
        with pytest.raises(ValueError, match="index-aligned"):
            language_metrics(traces, alignments)

    def test_exclude_special_tokens(self):
        bos = 50258
        steps = (
            DecodingStep(bos, -0.01, (CandidateEntry(bos, -0.01),)),
            DecodingStep(5, -0.2, (CandidateEntry(5, -0.2), CandidateEntry(6, -1.0))),
        )
        trace = UtteranceTrace("u", "fi", 1.0, "yks", (bos, 5), (bos, 5), steps,
                               hypothesis_text="yks")
        inc = language_metrics([trace], config=AnalysisConfig())
        exc = language_metrics([trace], config=AnalysisConfig(include_special_tokens=False))
        # special step has probability ~1, so excluding it lowers confidence
        assert exc.avg_confidence < inc.avg_confidence
        assert exc.avg_rank == 1.0 and inc.avg_rank == 1.0


class TestCoverage:
    def _trace(self, uid, duration, tokens):
        steps = tuple(
            DecodingStep(t, -0.3, (CandidateEntry(t, -0.3),)) for t in tokens
        )
        return UtteranceTrace(uid, "et", duration, "x", tuple(tokens), tuple(tokens), steps)

    def test_single_utterance_full_fraction_at_first_boundary(self):
        points = coverage_curve([self._trace("a", 30.0, [1, 2, 3])], window_sec=600)
        assert len(points) == 1
        assert points[0].fraction_of_final == 1.0
        assert points[0].unique_tokens == 3
        assert points[0].cumulative_sec == pytest.approx(30.0)

    def test_identical_utterances_add_nothing(self):
        t1 = self._trace("a", 600.0, [1, 2])
        t2 = self._trace("b", 600.0, [1, 2])
        points = coverage_curve([t1, t2], window_sec=600)
        assert [p.unique_tokens for p in points] == [2, 2]
        assert [p.fraction_of_final for p in points] == [1.0, 1.0]

    def test_monotone_and_ends_at_one(self):
        traces = make_language_traces(5, "et", 30)
        points = coverage_curve(traces, window_sec=20.0)
        fractions = [p.fraction_of_final for p in points]
        assert fractions == sorted(fractions)
        assert fractions[-1] == 1.0
        counts = [p.unique_tokens for p in points]
        assert counts == sorted(counts)

    def test_empty_error(self):
        with pytest.raises(ValueError, match="no traces"):
            coverage_curve([])

    def test_bad_window_error(self):
        with pytest.raises(ValueError, match="window_sec"):
            coverage_curve(make_language_traces(5, "et", 1), window_sec=0)


class TestPoolingOracles:
    """Invariant: metrics equal naive loop recomputations exactly-ish."""

    @staticmethod
    def naive_confidence(traces):
        vals = []
        for t in traces:
            for s in t.steps:
                lp = None
                for c in s.candidates:
                    if c.token_id == s.chosen_id:
                        lp = c.log_prob
                        break
                if lp is None:
                    lp = s.chosen_log_prob
                vals.append(math.exp(lp))
        return math.fsum(vals) / len(vals)

    @staticmethod
    def naive_entropy_mean(traces, k):
        vals = []
        for t in traces:
            for s in t.steps:
                lps = [c.log_prob for c in s.candidates][:k]
                probs = [math.exp(v) for v in lps]
                z = math.fsum(probs)
                h = 0.0
                for p in probs:
                    q = p / z
                    if q > 0:
                        h -= q * math.log2(q)
                vals.append(h)
        return math.fsum(vals) / len(vals)

    @given(st.integers(0, 10_000))
    @settings(max_examples=60, deadline=None)
    def test_confidence_and_entropy_match_naive(self, seed):
        traces = make_language_traces(seed, "xx", int(1 + seed % 5))
        assert confidence(traces) == pytest.approx(self.naive_confidence(traces), abs=1e-12)
        assert mean_entropy(traces, 5) == pytest.approx(
            self.naive_entropy_mean(traces, 5), abs=1e-12
        )
