"""Decoder-trace data model, validation, and file IO.

A trace file is newline-delimited JSON, one utterance per line. Each record
carries the beam-search hypothesis, the tokenized reference, and for every
decoding step the chosen sub-token plus the top-K candidate (id, log-prob)
pairs emitted by the decoder.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

DEFAULT_VOCAB_SIZE = 51865
# Ids at or above this are control tokens (BOS/EOS/language/timestamps) in
# the multilingual BPE vocabulary this toolkit targets.
SPECIAL_TOKEN_FLOOR = 50257

TIER_HIGH = "High"
TIER_MEDIUM = "Medium"
TIER_LOW = "Low"
_VALID_TIERS = (TIER_HIGH, TIER_MEDIUM, TIER_LOW)

# Hour thresholds used to derive a tier when the manifest has no tier column.
HIGH_TIER_MIN_HOURS = 4000.0
LOW_TIER_MAX_HOURS = 100.0


class TraceError(Exception):
    """Base class for trace-file problems."""


class TraceFormatError(TraceError):
    """A record could not be parsed; carries line number and field."""

    def __init__(self, message: str, line_no: int, field_name: str | None = None):
        self.line_no = line_no
        self.field_name = field_name
        where = f"line {line_no}"
        if field_name:
            where += f", field {field_name!r}"
        super().__init__(f"{message} ({where})")


class TraceValidationError(TraceError):
    """A parsed record violates a model invariant; carries the utterance id."""

    def __init__(self, message: str, utterance_id: str):
        self.utterance_id = utterance_id
        super().__init__(f"{message} (utterance {utterance_id!r})")


class ManifestError(ValueError):
    """Language manifest is malformed."""


@dataclass(frozen=True)
class CandidateEntry:
    """One (sub-token id, log-probability) candidate at a decoding step."""

    token_id: int
    log_prob: float


@dataclass(frozen=True)
class DecodingStep:
    """Chosen sub-token plus the ranked candidate list for one step."""

    chosen_id: int
    chosen_log_prob: float
    candidates: tuple[CandidateEntry, ...]

    def chosen_rank(self) -> int | None:
        """1-indexed position of the chosen token in the candidate list."""
        for pos, cand in enumerate(self.candidates, start=1):
            if cand.token_id == self.chosen_id:
                return pos
        return None

    def chosen_prob(self) -> float:
        """Probability of the chosen token.

        Prefers the candidate-list entry when the chosen token appears there;
        otherwise falls back to the stored ``chosen_log_prob``.
        """
        for cand in self.candidates:
            if cand.token_id == self.chosen_id:
                return math.exp(cand.log_prob)
        return math.exp(self.chosen_log_prob)


@dataclass(frozen=True)
class UtteranceTrace:
    """One utterance's beam path with per-step candidate snapshots.

    ``hypothesis_text`` is optional on the wire; WER is only computable for
    traces that carry it.
    """

    utterance_id: str
    language: str
    audio_duration_sec: float
    reference_text: str
    reference_tokens: tuple[int, ...]
    hypothesis_tokens: tuple[int, ...]
    steps: tuple[DecodingStep, ...]
    hypothesis_text: str = ""


@dataclass(frozen=True)
class LanguageInfo:
    code: str
    training_hours: float
    tier: str


@dataclass(frozen=True)
class LanguageManifest:
    """Per-language training-hours/tier metadata, keyed by ISO code."""

    languages: dict[str, LanguageInfo]

    def __contains__(self, code: str) -> bool:
        return code in self.languages

    def __getitem__(self, code: str) -> LanguageInfo:
        return self.languages[code]

    def codes(self) -> list[str]:
        return sorted(self.languages)


@dataclass(frozen=True)
class AnalysisConfig:
    """Knobs shared by the metric and embedding computations."""

    k_cand: int = 50
    k_entropy: int = 50
    k_diversity: int = 50
    k_pca: int = 10
    include_special_tokens: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.k_cand < 1:
            raise ValueError("k_cand must be positive")
        for name in ("k_entropy", "k_diversity", "k_pca"):
            value = getattr(self, name)
            if value < 1:
                raise ValueError(f"{name} must be positive")
            if value > self.k_cand:
                raise ValueError(f"{name} ({value}) must not exceed k_cand ({self.k_cand})")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def is_special_token(token_id: int, special_floor: int = SPECIAL_TOKEN_FLOOR) -> bool:
    return token_id >= special_floor


def validate_trace(trace: UtteranceTrace, vocab_size: int = DEFAULT_VOCAB_SIZE) -> list[str]:
    """Check all model invariants; raise on violation.

    Returns a list of non-fatal warnings (currently: steps whose chosen token
    is missing from the recorded candidate window).
    """
    uid = trace.utterance_id
    if trace.audio_duration_sec <= 0:
        raise TraceValidationError("audio_duration_sec must be positive", uid)
    if len(trace.steps) != len(trace.hypothesis_tokens):
        raise TraceValidationError(
            f"steps length {len(trace.steps)} != hypothesis length "
            f"{len(trace.hypothesis_tokens)}",
            uid,
        )
    warnings: list[str] = []
    all_tokens = list(trace.reference_tokens) + list(trace.hypothesis_tokens)
    for tok in all_tokens:
        if not 0 <= tok < vocab_size:
            raise TraceValidationError(f"token id {tok} outside vocabulary [0, {vocab_size})", uid)
    for s, (step, hyp_tok) in enumerate(zip(trace.steps, trace.hypothesis_tokens)):
        if step.chosen_id != hyp_tok:
            raise TraceValidationError(
                f"step {s} chosen_id {step.chosen_id} != hypothesis token {hyp_tok}", uid
            )
        if step.chosen_log_prob > 0:
            raise TraceValidationError(f"step {s} chosen_log_prob > 0", uid)
        seen: set[int] = set()
        prev_key: tuple[float, int] | None = None
        for cand in step.candidates:
            if not 0 <= cand.token_id < vocab_size:
                raise TraceValidationError(
                    f"step {s} candidate id {cand.token_id} outside vocabulary", uid
                )
            if cand.log_prob > 0:
                raise TraceValidationError(
                    f"step {s} candidate {cand.token_id} has log_prob > 0", uid
                )
            if cand.token_id in seen:
                raise TraceValidationError(
                    f"step {s} duplicate candidate id {cand.token_id}", uid
                )
            seen.add(cand.token_id)
            key = (-cand.log_prob, cand.token_id)
            if prev_key is not None and key < prev_key:
                raise TraceValidationError(
                    f"step {s} candidates not in canonical order "
                    "(descending log_prob, ties by ascending id)",
                    uid,
                )
            prev_key = key
        if step.candidates and step.chosen_id not in seen:
            warnings.append(
                f"utterance {uid} step {s}: chosen token {step.chosen_id} "
                "not in recorded candidate window"
            )
    return warnings


def _require(record: dict, key: str, line_no: int):
    if key not in record:
        raise TraceFormatError("missing field", line_no, key)
    return record[key]


def _as_int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{what} must be an integer, got {value!r}")
    return value


def _as_float(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{what} must be a number, got {value!r}")
    return float(value)


def _as_str(value, what: str) -> str:
    if not isinstance(value, str):
        raise ValueError(f"{what} must be a string, got {value!r}")
    return value


def _parse_record(record: dict, line_no: int) -> UtteranceTrace:
    try:
        utterance_id = _as_str(_require(record, "utterance_id", line_no), "utterance_id")
        language = _as_str(_require(record, "language", line_no), "language")
        duration = _as_float(_require(record, "audio_duration_sec", line_no), "audio_duration_sec")
        reference_text = _as_str(_require(record, "reference_text", line_no), "reference_text")
        reference_tokens = tuple(
            _as_int(t, "reference token") for t in _require(record, "reference_tokens", line_no)
        )
        hypothesis_tokens = tuple(
            _as_int(t, "hypothesis token") for t in _require(record, "hypothesis_tokens", line_no)
        )
        hypothesis_text = _as_str(record.get("hypothesis_text", ""), "hypothesis_text")
    except (TypeError, ValueError) as exc:
        raise TraceFormatError(f"bad scalar field: {exc}", line_no) from exc
    raw_steps = _require(record, "steps", line_no)
    if not isinstance(raw_steps, list):
        raise TraceFormatError("steps must be a list", line_no, "steps")
    steps = []
    for s, raw in enumerate(raw_steps):
        if not isinstance(raw, dict):
            raise TraceFormatError(f"step {s} must be an object", line_no, "steps")
        try:
            chosen_id = _as_int(raw["chosen_id"], "chosen_id")
            chosen_log_prob = _as_float(raw["chosen_log_prob"], "chosen_log_prob")
            candidates = tuple(
                CandidateEntry(_as_int(pair[0], "candidate id"), _as_float(pair[1], "candidate log_prob"))
                for pair in raw["candidates"]
            )
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise TraceFormatError(f"bad step {s}: {exc}", line_no, "steps") from exc
        steps.append(DecodingStep(chosen_id, chosen_log_prob, candidates))
    return UtteranceTrace(
        utterance_id=utterance_id,
        language=language,
        audio_duration_sec=duration,
        reference_text=reference_text,
        reference_tokens=reference_tokens,
        hypothesis_tokens=hypothesis_tokens,
        steps=tuple(steps),
        hypothesis_text=hypothesis_text,
    )


def read_traces(
    path: str | Path,
    vocab_size: int = DEFAULT_VOCAB_SIZE,
    warning_sink: list[str] | None = None,
) -> Iterator[UtteranceTrace]:
    """Stream validated traces from a newline-delimited JSON file.

    Raises :class:`TraceFormatError` on unparseable lines and
    :class:`TraceValidationError` on invariant violations. Non-fatal warnings
    are appended to ``warning_sink`` when provided.
    """
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                record = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise TraceFormatError(f"invalid JSON: {exc.msg}", line_no) from exc
            if not isinstance(record, dict):
                raise TraceFormatError("record must be a JSON object", line_no)
            trace = _parse_record(record, line_no)
            warnings = validate_trace(trace, vocab_size=vocab_size)
            if warning_sink is not None:
                warning_sink.extend(warnings)
            yield trace


def _trace_to_record(trace: UtteranceTrace) -> dict:
    record = {
        "utterance_id": trace.utterance_id,
        "language": trace.language,
        "audio_duration_sec": trace.audio_duration_sec,
        "reference_text": trace.reference_text,
    }
    if trace.hypothesis_text:
        record["hypothesis_text"] = trace.hypothesis_text
    record.update({
        "reference_tokens": list(trace.reference_tokens),
        "hypothesis_tokens": list(trace.hypothesis_tokens),
        "steps": [
            {
                "chosen_id": step.chosen_id,
                "chosen_log_prob": step.chosen_log_prob,
                "candidates": [[c.token_id, c.log_prob] for c in step.candidates],
            }
            for step in trace.steps
        ],
    })
    return record


def write_traces(traces: Iterable[UtteranceTrace], path: str | Path) -> int:
    """Serialize traces one-per-line; returns the number written.

    Serialization is canonical (fixed key order, shortest round-trip float
    repr), so writing the same traces twice produces identical bytes and
    log-probs survive a read/write cycle exactly.
    """
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for trace in traces:
            validate_trace(trace)
            fh.write(json.dumps(_trace_to_record(trace), ensure_ascii=False))
            fh.write("\n")
            count += 1
    return count


def group_by_language(traces: Iterable[UtteranceTrace]) -> dict[str, list[UtteranceTrace]]:
    """Bucket traces by language code, preserving file order within a language."""
    grouped: dict[str, list[UtteranceTrace]] = {}
    for trace in traces:
        grouped.setdefault(trace.language, []).append(trace)
    return grouped


def tier_for_hours(hours: float) -> str:
    if hours > HIGH_TIER_MIN_HOURS:
        return TIER_HIGH
    if hours < LOW_TIER_MAX_HOURS:
        return TIER_LOW
    return TIER_MEDIUM


def load_manifest(path: str | Path) -> LanguageManifest:
    """Load a ``code,training_hours[,tier]`` CSV into a manifest.

    The tier column is optional; missing tiers are derived from the hour
    thresholds (>4000 High, 100..4000 Medium, <100 Low).
    """
    languages: dict[str, LanguageInfo] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "code" not in reader.fieldnames:
            raise ManifestError("manifest must have a header with a 'code' column")
        if "training_hours" not in reader.fieldnames:
            raise ManifestError("manifest must have a 'training_hours' column")
        for row_no, row in enumerate(reader, start=2):
            code = (row.get("code") or "").strip()
            if not code:
                raise ManifestError(f"row {row_no}: empty language code")
            if code in languages:
                raise ManifestError(f"row {row_no}: duplicate language code {code!r}")
            try:
                hours = float(row["training_hours"])
            except (TypeError, ValueError) as exc:
                raise ManifestError(f"row {row_no}: bad training_hours") from exc
            if hours <= 0:
                raise ManifestError(f"row {row_no}: non-positive training_hours for {code!r}")
            tier = (row.get("tier") or "").strip()
            if not tier:
                tier = tier_for_hours(hours)
            elif tier not in _VALID_TIERS:
                raise ManifestError(f"row {row_no}: unknown tier {tier!r}")
            languages[code] = LanguageInfo(code=code, training_hours=hours, tier=tier)
    if not languages:
        raise ManifestError("manifest has no language rows")
    return LanguageManifest(languages=languages)


def load_vocabulary(path: str | Path) -> dict[int, str]:
    """Load an optional ``token_id<TAB>token_string`` TSV for display."""
    vocab: dict[int, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t", 1)
            if len(parts) != 2:
                raise ValueError(f"vocabulary line {line_no}: expected 'id<TAB>string'")
            vocab[int(parts[0])] = parts[1]
    return vocab


def default_manifest_path() -> Path:
    """Shipped manifest with the 20 analyzed languages and training hours."""
    return Path(__file__).parent / "data" / "whisper_training_hours.csv"


def bundled_example_trace_path() -> Path:
    """Shipped single-utterance trace used in docs and the alignment demo."""
    return Path(__file__).parent / "data" / "table2_trace.jsonl"


def bundled_example_vocab_path() -> Path:
    return Path(__file__).parent / "data" / "table2_vocab.tsv"
