"""Levenshtein alignment of reference vs. hypothesis sub-token sequences.

Alignment is computed on token ids with unit costs (Equal free). Among
co-minimal paths the traversal prefers, at each position from the start of
the sequences: diagonal (Equal, then Replace), then Delete, then Insert.
This keeps substitutions positionally aligned; runs of inserts/deletes are
emitted after the substituted region they follow.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from . import _accel
from .trace_model import AnalysisConfig, UtteranceTrace


class OpKind(Enum):
    EQUAL = "equal"
    REPLACE = "replace"
    DELETE = "delete"
    INSERT = "insert"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class EditOp:
    """One alignment operation; indices refer to reference / hypothesis."""

    kind: OpKind
    ref_index: int | None
    hyp_index: int | None

    def __post_init__(self):
        if self.kind in (OpKind.EQUAL, OpKind.REPLACE):
            if self.ref_index is None or self.hyp_index is None:
                raise ValueError(f"{self.kind.value} op needs both indices")
        elif self.kind is OpKind.DELETE:
            if self.ref_index is None or self.hyp_index is not None:
                raise ValueError("delete op carries ref_index only")
        else:
            if self.hyp_index is None or self.ref_index is not None:
                raise ValueError("insert op carries hyp_index only")


@dataclass(frozen=True)
class RankedToken:
    """Rank assigned to one reference token (penalty rank for misses)."""

    ref_index: int
    rank: int
    op_kind: OpKind


@dataclass(frozen=True)
class AlignmentResult:
    ops: tuple[EditOp, ...]
    ranked: tuple[RankedToken, ...]
    edit_distance: int


def edit_distance(reference: Sequence[int], hypothesis: Sequence[int]) -> int:
    """Minimal unit-cost edit distance between two token-id sequences."""
    a = np.asarray(reference, dtype=np.int64)
    b = np.asarray(hypothesis, dtype=np.int64)
    return int(_accel.edit_distance(a, b))


def align(reference: Sequence[int], hypothesis: Sequence[int]) -> list[EditOp]:
    """Minimal-cost edit script mapping ``reference`` to ``hypothesis``.

    Deterministic: walks from the front using suffix costs, taking the
    diagonal whenever it stays on a minimal path, else Delete, else Insert.
    """
    ref = np.asarray(reference, dtype=np.int64)
    hyp = np.asarray(hypothesis, dtype=np.int64)
    m, n = ref.shape[0], hyp.shape[0]
    if m == 0 and n == 0:
        return []
    # suffix[i, j] = distance between ref[i:] and hyp[j:]
    rev = _accel.levenshtein_costs(ref[::-1].copy(), hyp[::-1].copy())
    suffix = rev[::-1, ::-1]
    ops: list[EditOp] = []
    i = j = 0
    while i < m or j < n:
        here = suffix[i, j]
        if i < m and j < n:
            step_cost = 0 if ref[i] == hyp[j] else 1
            if suffix[i + 1, j + 1] + step_cost == here:
                kind = OpKind.EQUAL if step_cost == 0 else OpKind.REPLACE
                ops.append(EditOp(kind, int(i), int(j)))
                i += 1
                j += 1
                continue
        if i < m and suffix[i + 1, j] + 1 == here:
            ops.append(EditOp(OpKind.DELETE, int(i), None))
            i += 1
            continue
        ops.append(EditOp(OpKind.INSERT, None, int(j)))
        j += 1
    return ops


def rank_reference_tokens(trace: UtteranceTrace, config: AnalysisConfig) -> AlignmentResult:
    """Align a trace and rank every reference token against step candidates.

    A reference token aligned (Equal or Replace) to step ``s`` gets the
    1-indexed position of its id in that step's candidate list, clipped to
    the top ``k_cand`` window; absent or deleted tokens get ``k_cand + 1``.
    Inserted hypothesis tokens contribute no rank.
    """
    k = config.k_cand
    ops = align(trace.reference_tokens, trace.hypothesis_tokens)
    penalty = k + 1
    ranked: list[RankedToken] = []
    for op in ops:
        if op.kind is OpKind.INSERT:
            continue
        if op.kind is OpKind.DELETE:
            ranked.append(RankedToken(op.ref_index, penalty, op.kind))
            continue
        token = trace.reference_tokens[op.ref_index]
        step = trace.steps[op.hyp_index]
        rank = penalty
        for pos, cand in enumerate(step.candidates, start=1):
            if pos > k:
                break
            if cand.token_id == token:
                rank = pos
                break
        ranked.append(RankedToken(op.ref_index, rank, op.kind))
    distance = sum(1 for op in ops if op.kind is not OpKind.EQUAL)
    return AlignmentResult(ops=tuple(ops), ranked=tuple(ranked), edit_distance=distance)


def format_alignment_table(
    trace: UtteranceTrace,
    result: AlignmentResult,
    vocab: dict[int, str] | None = None,
) -> str:
    """Render an alignment as a fixed-width table.

    Columns: position, reference token, hypothesis token, operation, rank.
    Inserts show a blank reference cell and no rank; deletes show a
    ``(deleted)`` hypothesis cell.
    """
    def show(token_id: int) -> str:
        if vocab and token_id in vocab:
            return vocab[token_id]
        return str(token_id)

    rank_by_ref = {r.ref_index: r.rank for r in result.ranked}
    rows = [("Position", "GT", "Output", "Operation", "Rank")]
    for pos, op in enumerate(result.ops):
        gt = show(trace.reference_tokens[op.ref_index]) if op.ref_index is not None else ""
        if op.kind is OpKind.DELETE:
            out = "(deleted)"
        elif op.hyp_index is not None:
            out = show(trace.hypothesis_tokens[op.hyp_index])
        else:
            out = ""
        rank = str(rank_by_ref[op.ref_index]) if op.ref_index is not None else "--"
        rows.append((str(pos), gt, out, op.kind.value, rank))
    widths = [max(len(row[c]) for row in rows) for c in range(5)]
    lines = ["  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip() for row in rows]
    return "\n".join(lines)
