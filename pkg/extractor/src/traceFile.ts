import { traceRecordSchema, type TraceRecord, type UtteranceTrace } from "./types.js";

/**
 * Serialize one trace as a JSON line in the analyzer's wire format.
 *
 * JSON.stringify emits shortest round-trip representations for doubles, so
 * log-probabilities survive write/read exactly.
 */
export function traceToJsonLine(trace: UtteranceTrace): string {
  const record: TraceRecord = {
    utterance_id: trace.utteranceId,
    language: trace.language,
    audio_duration_sec: trace.audioDurationSec,
    reference_text: trace.referenceText,
    ...(trace.hypothesisText ? { hypothesis_text: trace.hypothesisText } : {}),
    reference_tokens: trace.referenceTokens,
    hypothesis_tokens: trace.hypothesisTokens,
    steps: trace.steps.map((s) => ({
      chosen_id: s.chosenId,
      chosen_log_prob: s.chosenLogProb,
      candidates: s.candidates.map((c) => [c.tokenId, c.logProb] as [number, number]),
    })),
  };
  return JSON.stringify(record);
}

export interface ValidationIssue {
  utteranceId: string;
  message: string;
  warning: boolean;
}

/**
 * Structural and invariant checks mirroring the analyzer's reader: schema
 * shape, steps aligned with the hypothesis, candidates canonically sorted
 * and duplicate-free. A chosen token missing from its candidate window is
 * reported as a warning, not an error.
 */
export function validateTrace(trace: UtteranceTrace, vocabSize: number): ValidationIssue[] {
  const issues: ValidationIssue[] = [];
  const uid = trace.utteranceId;
  const error = (message: string) => issues.push({ utteranceId: uid, message, warning: false });
  const warn = (message: string) => issues.push({ utteranceId: uid, message, warning: true });

  const parsed = traceRecordSchema.safeParse(JSON.parse(traceToJsonLine(trace)));
  if (!parsed.success) {
    error(`schema: ${parsed.error.issues[0]?.message ?? "invalid"}`);
    return issues;
  }
  if (trace.audioDurationSec <= 0) error("audio_duration_sec must be positive");
  if (trace.steps.length !== trace.hypothesisTokens.length) {
    error(`steps length ${trace.steps.length} != hypothesis length ${trace.hypothesisTokens.length}`);
  }
  for (const tok of [...trace.referenceTokens, ...trace.hypothesisTokens]) {
    if (tok < 0 || tok >= vocabSize) error(`token id ${tok} outside vocabulary`);
  }
  trace.steps.forEach((step, s) => {
    if (step.chosenId !== trace.hypothesisTokens[s]) {
      error(`step ${s}: chosen_id ${step.chosenId} != hypothesis token`);
    }
    if (step.chosenLogProb > 0) error(`step ${s}: chosen_log_prob > 0`);
    const seen = new Set<number>();
    let found = false;
    for (let i = 0; i < step.candidates.length; i++) {
      const cand = step.candidates[i]!;
      if (cand.logProb > 0) error(`step ${s}: candidate log_prob > 0`);
      if (seen.has(cand.tokenId)) error(`step ${s}: duplicate candidate ${cand.tokenId}`);
      seen.add(cand.tokenId);
      if (i > 0) {
        const prev = step.candidates[i - 1]!;
        const ordered =
          prev.logProb > cand.logProb ||
          (prev.logProb === cand.logProb && prev.tokenId < cand.tokenId);
        if (!ordered) error(`step ${s}: candidates not in canonical order`);
      }
      if (cand.tokenId === step.chosenId) {
        found = true;
        if (cand.logProb !== step.chosenLogProb) {
          error(`step ${s}: chosen_log_prob disagrees with candidate entry`);
        }
      }
    }
    if (step.candidates.length > 0 && !found) {
      warn(`step ${s}: chosen token outside recorded candidate window`);
    }
  });
  return issues;
}
