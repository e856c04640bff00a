"""Shared builders for synthetic decoder traces."""

from __future__ import annotations

import numpy as np
import pytest

from beamprobe import (
    AnalysisConfig,
    CandidateEntry,
    DecodingStep,
    UtteranceTrace,
    write_traces,
)

WORDS = [
    "kala", "meri", "taevas", "laul", "linn", "metsa", "jogi", "tuul",
    "paike", "lumi", "kivi", "leht", "vesi", "ranna", "maja", "tee",
]


def make_step(rng: np.random.Generator, vocab_size: int = 400, k_max: int = 5,
              top1_prob: float = 0.8) -> DecodingStep:
    """Random valid decoding step with canonically sorted candidates.

    ``top1_prob`` doubles as a sharpness control: higher values produce more
    peaked candidate distributions (higher confidence, lower entropy).
    """
    k = int(rng.integers(2, k_max + 1))
    ids = rng.choice(vocab_size, size=k, replace=False)
    temperature = 0.25 + 1.6 * (1.0 - top1_prob)
    scores = rng.normal(size=k) / temperature
    probs = np.exp(scores - scores.max())
    probs = np.maximum(probs / probs.sum(), 1e-300)
    log_probs = np.log(np.minimum(probs, 1.0))
    order = sorted(range(k), key=lambda i: (-log_probs[i], ids[i]))
    candidates = tuple(
        CandidateEntry(int(ids[i]), float(log_probs[i])) for i in order
    )
    chosen_pos = 0 if rng.random() < top1_prob else int(rng.integers(0, k))
    chosen = candidates[chosen_pos]
    return DecodingStep(
        chosen_id=chosen.token_id,
        chosen_log_prob=chosen.log_prob,
        candidates=candidates,
    )


def make_texts(rng: np.random.Generator, word_error_prob: float) -> tuple[str, str]:
    n = int(rng.integers(3, 7))
    ref_words = [WORDS[int(rng.integers(0, len(WORDS)))] for _ in range(n)]
    hyp_words = [
        (WORDS[int(rng.integers(0, len(WORDS)))] if rng.random() < word_error_prob else w)
        for w in ref_words
    ]
    return " ".join(ref_words), " ".join(hyp_words)


def make_trace(
    rng: np.random.Generator,
    language: str,
    index: int,
    n_steps: int | None = None,
    vocab_size: int = 400,
    k_max: int = 5,
    quality: float = 0.8,
) -> UtteranceTrace:
    """Random valid trace; higher ``quality`` means fewer reference edits."""
    if n_steps is None:
        n_steps = int(rng.integers(3, 9))
    steps = tuple(make_step(rng, vocab_size, k_max, top1_prob=quality) for _ in range(n_steps))
    hypothesis = tuple(s.chosen_id for s in steps)
    reference: list[int] = []
    for tok in hypothesis:
        r = rng.random()
        if r < quality:
            reference.append(tok)
        elif r < quality + (1 - quality) * 0.6:
            reference.append(int(rng.integers(0, vocab_size)))  # substitution
        # else: deletion relative to hypothesis
    if not reference:
        reference = [int(hypothesis[0])]
    if rng.random() > quality:
        reference.insert(int(rng.integers(0, len(reference) + 1)), int(rng.integers(0, vocab_size)))
    ref_text, hyp_text = make_texts(rng, word_error_prob=(1 - quality) * 0.7)
    return UtteranceTrace(
        utterance_id=f"{language}_{index:04d}",
        language=language,
        audio_duration_sec=float(rng.uniform(2.0, 8.0)),
        reference_text=ref_text,
        hypothesis_text=hyp_text,
        reference_tokens=tuple(reference),
        hypothesis_tokens=hypothesis,
        steps=steps,
    )


def make_language_traces(
    seed: int, language: str, n_utterances: int, quality: float = 0.8, **kwargs
) -> list[UtteranceTrace]:
    rng = np.random.default_rng(seed)
    return [make_trace(rng, language, i, quality=quality, **kwargs) for i in range(n_utterances)]


BUNDLE_LANGUAGES = (
    # code, training_hours, quality: quality rises with hours
    ("aa", 12000.0, 0.92),
    ("bb", 3000.0, 0.85),
    ("cc", 800.0, 0.75),
    ("dd", 150.0, 0.65),
    ("ee", 30.0, 0.55),
)


def write_bundle(tmp_path, seed: int = 7, n_utterances: int = 6):
    """Five-language synthetic bundle: trace file + matching manifest."""
    traces = []
    for i, (code, _hours, quality) in enumerate(BUNDLE_LANGUAGES):
        traces.extend(make_language_traces(seed + i, code, n_utterances, quality))
    traces_path = tmp_path / "traces.jsonl"
    write_traces(traces, traces_path)
    manifest_path = tmp_path / "manifest.csv"
    lines = ["code,training_hours,tier"]
    for code, hours, _quality in BUNDLE_LANGUAGES:
        lines.append(f"{code},{hours},")
    manifest_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return traces_path, manifest_path


@pytest.fixture
def bundle(tmp_path):
    return write_bundle(tmp_path)


@pytest.fixture
def default_config():
    return AnalysisConfig()
