"""Per-language sub-token metrics: rank, confidence, entropy, diversity, WER.

All aggregates pool raw counts over every relevant item of a language (total
sub-tokens, total steps), never averages of per-utterance averages.
"""

from __future__ import annotations

import math
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _accel
from .alignment import AlignmentResult, rank_reference_tokens
from .trace_model import AnalysisConfig, DecodingStep, UtteranceTrace, is_special_token


@dataclass(frozen=True)
class LanguageMetrics:
    """Aggregated sub-token metrics for one language."""

    language: str
    avg_rank: float
    avg_confidence: float
    avg_entropy_bits: float
    diversity_ttr: float
    wer: float
    n_utterances: int
    n_ref_tokens: int
    n_hyp_tokens: int


@dataclass(frozen=True)
class CoveragePoint:
    cumulative_sec: float
    unique_tokens: int
    fraction_of_final: float


def average_rank(alignments: Iterable[AlignmentResult]) -> float:
    """Mean rank pooled over every reference token of every alignment."""
    total = 0
    count = 0
    for result in alignments:
        for ranked in result.ranked:
            total += ranked.rank
            count += 1
    if count == 0:
        raise ValueError("no reference tokens")
    return total / count


def confidence(traces: Iterable[UtteranceTrace]) -> float:
    """Mean probability of the chosen sub-token over all decoding steps."""
    total = 0.0
    count = 0
    for trace in traces:
        for step in trace.steps:
            total += step.chosen_prob()
            count += 1
    if count == 0:
        raise ValueError("no decoding steps")
    return total / count


def entropy(step: DecodingStep, k_entropy: int) -> float:
    """Shannon entropy (bits) of the renormalized top-k candidate probs."""
    if not step.candidates:
        raise ValueError("step has no candidates")
    log_probs = np.array([c.log_prob for c in step.candidates[:k_entropy]], dtype=np.float64)
    probs = np.exp(log_probs)
    total = probs.sum()
    if total <= 0.0:
        return 0.0
    renorm = probs / total
    nonzero = renorm > 0.0
    return float(-np.sum(renorm[nonzero] * np.log2(renorm[nonzero])))


def mean_entropy(traces: Iterable[UtteranceTrace], k_entropy: int) -> float:
    """Average per-step entropy pooled over all steps of all traces."""
    total = 0.0
    count = 0
    for trace in traces:
        for step in trace.steps:
            total += entropy(step, k_entropy)
            count += 1
    if count == 0:
        raise ValueError("no decoding steps")
    return total / count


def diversity_ttr(traces: Iterable[UtteranceTrace], k_diversity: int) -> float:
    """Type-token ratio of candidates ranked 2..k pooled over all steps."""
    seen: set[int] = set()
    occurrences = 0
    for trace in traces:
        for step in trace.steps:
            for cand in step.candidates[1:k_diversity]:
                seen.add(cand.token_id)
                occurrences += 1
    if occurrences == 0:
        raise ValueError("diversity undefined: no non-top-1 candidates")
    return len(seen) / occurrences


def normalize_text(text: str) -> str:
    """NFC, lowercase, strip punctuation (Unicode P*), collapse whitespace."""
    text = unicodedata.normalize("NFC", text).lower()
    text = "".join(ch for ch in text if not unicodedata.category(ch).startswith("P"))
    return " ".join(text.split())


def word_edit_stats(
    reference_text: str, hypothesis_text: str, normalize: bool = True
) -> tuple[int, int]:
    """Word-level edit distance and reference word count for one pair."""
    ref = normalize_text(reference_text) if normalize else reference_text
    hyp = normalize_text(hypothesis_text) if normalize else hypothesis_text
    ref_words = ref.split()
    hyp_words = hyp.split()
    if not ref_words:
        raise ValueError("reference is empty after normalization")
    ids: dict[str, int] = {}
    ref_ids = np.array([ids.setdefault(w, len(ids)) for w in ref_words], dtype=np.int64)
    hyp_ids = np.array([ids.setdefault(w, len(ids)) for w in hyp_words], dtype=np.int64)
    return int(_accel.edit_distance(ref_ids, hyp_ids)), len(ref_words)


def wer(reference_text: str, hypothesis_text: str, normalize: bool = True) -> float:
    """Word error rate: word-level edit distance over reference word count."""
    distance, n_ref = word_edit_stats(reference_text, hypothesis_text, normalize)
    return distance / n_ref


def language_wer(traces: Sequence[UtteranceTrace], normalize: bool = True) -> float:
    """Corpus WER: summed edit distances over summed reference word counts.

    Returns NaN when any trace lacks a hypothesis transcription.
    """
    total_distance = 0
    total_words = 0
    for trace in traces:
        if not trace.hypothesis_text:
            return math.nan
        distance, n_ref = word_edit_stats(trace.reference_text, trace.hypothesis_text, normalize)
        total_distance += distance
        total_words += n_ref
    if total_words == 0:
        raise ValueError("no reference words")
    return total_distance / total_words


def language_metrics(
    traces: Sequence[UtteranceTrace],
    alignments: Sequence[AlignmentResult] | None = None,
    config: AnalysisConfig | None = None,
) -> LanguageMetrics:
    """Assemble all per-language metrics from traces (and their alignments).

    Alignments are computed on demand when not supplied; when supplied they
    must be index-aligned with ``traces``.
    """
    if not traces:
        raise ValueError("no traces for language")
    config = config or AnalysisConfig()
    language = traces[0].language
    for trace in traces:
        if trace.language != language:
            raise ValueError(
                f"mixed languages: {trace.language!r} vs {language!r} "
                f"(utterance {trace.utterance_id!r})"
            )
    if alignments is None:
        alignments = [rank_reference_tokens(t, config) for t in traces]
    elif len(alignments) != len(traces):
        raise ValueError("alignments must be index-aligned with traces")

    if config.include_special_tokens:
        avg_rank_value = average_rank(alignments)
        conf_value = confidence(traces)
        entropy_value = mean_entropy(traces, config.k_entropy)
        diversity_value = diversity_ttr(traces, config.k_diversity)
    else:
        avg_rank_value = _average_rank_excluding_special(traces, alignments)
        filtered = [_steps_excluding_special(t) for t in traces]
        conf_value = _pooled_confidence(filtered)
        entropy_value = _pooled_entropy(filtered, config.k_entropy)
        diversity_value = _pooled_diversity(filtered, config.k_diversity)

    return LanguageMetrics(
        language=language,
        avg_rank=avg_rank_value,
        avg_confidence=conf_value,
        avg_entropy_bits=entropy_value,
        diversity_ttr=diversity_value,
        wer=language_wer(traces),
        n_utterances=len(traces),
        n_ref_tokens=sum(len(t.reference_tokens) for t in traces),
        n_hyp_tokens=sum(len(t.hypothesis_tokens) for t in traces),
    )


def _average_rank_excluding_special(traces, alignments) -> float:
    total = 0
    count = 0
    for trace, result in zip(traces, alignments):
        for ranked in result.ranked:
            if is_special_token(trace.reference_tokens[ranked.ref_index]):
                continue
            total += ranked.rank
            count += 1
    if count == 0:
        raise ValueError("no reference tokens")
    return total / count


def _steps_excluding_special(trace: UtteranceTrace) -> list[DecodingStep]:
    return [s for s in trace.steps if not is_special_token(s.chosen_id)]


def _pooled_confidence(step_lists: Sequence[Sequence[DecodingStep]]) -> float:
    total = 0.0
    count = 0
    for steps in step_lists:
        for step in steps:
            total += step.chosen_prob()
            count += 1
    if count == 0:
        raise ValueError("no decoding steps")
    return total / count


def _pooled_entropy(step_lists: Sequence[Sequence[DecodingStep]], k: int) -> float:
    total = 0.0
    count = 0
    for steps in step_lists:
        for step in steps:
            total += entropy(step, k)
            count += 1
    if count == 0:
        raise ValueError("no decoding steps")
    return total / count


def _pooled_diversity(step_lists: Sequence[Sequence[DecodingStep]], k: int) -> float:
    seen: set[int] = set()
    occurrences = 0
    for steps in step_lists:
        for step in steps:
            for cand in step.candidates[1:k]:
                if is_special_token(cand.token_id):
                    continue
                seen.add(cand.token_id)
                occurrences += 1
    if occurrences == 0:
        raise ValueError("diversity undefined: no non-top-1 candidates")
    return len(seen) / occurrences


def coverage_curve(
    traces: Sequence[UtteranceTrace], window_sec: float = 600.0
) -> list[CoveragePoint]:
    """Cumulative unique hypothesis-token counts at duration-window boundaries.

    Traces are consumed in the given order; each utterance belongs to the
    window its cumulative audio end falls in. The fraction column is relative
    to the final unique-token total, so the curve is non-decreasing and ends
    at 1.0.
    """
    if not traces:
        raise ValueError("no traces")
    if window_sec <= 0:
        raise ValueError("window_sec must be positive")
    cumulative = 0.0
    ends: list[float] = []
    token_sets: list[set[int]] = []
    for trace in traces:
        cumulative += trace.audio_duration_sec
        ends.append(cumulative)
        token_sets.append(set(trace.hypothesis_tokens))
    n_windows = max(1, math.ceil(ends[-1] / window_sec - 1e-12))
    final_unique = len(set().union(*token_sets))
    points: list[CoveragePoint] = []
    seen: set[int] = set()
    idx = 0
    covered_sec = 0.0
    for k in range(1, n_windows + 1):
        boundary = k * window_sec
        while idx < len(traces) and ends[idx] <= boundary + 1e-9:
            seen |= token_sets[idx]
            covered_sec = ends[idx]
            idx += 1
        if k == n_windows:
            # numerical guard: the last window always closes the full set
            while idx < len(traces):
                seen |= token_sets[idx]
                covered_sec = ends[idx]
                idx += 1
        points.append(
            CoveragePoint(
                cumulative_sec=covered_sec,
                unique_tokens=len(seen),
                fraction_of_final=len(seen) / final_unique if final_unique else 1.0,
            )
        )
    return points
