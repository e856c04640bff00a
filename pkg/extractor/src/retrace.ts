import type { Decoder } from "./decoder.js";
import type {
  CandidatePair,
  ClipInfo,
  ExtractorConfig,
  TraceStep,
  UtteranceTrace,
} from "./types.js";

/**
 * Top-k (id, logProb) pairs of a distribution, sorted by descending
 * log-probability with ties broken by ascending id (the trace file's
 * canonical candidate order).
 */
export function topKCandidates(logProbs: Float64Array, k: number): CandidatePair[] {
  const top: CandidatePair[] = [];
  let worst = -Infinity;
  for (let id = 0; id < logProbs.length; id++) {
    const lp = logProbs[id]!;
    if (top.length === k && lp <= worst) continue;
    let lo = 0;
    let hi = top.length;
    while (lo < hi) {
      const mid = (lo + hi) >> 1;
      const other = top[mid]!;
      if (other.logProb > lp || (other.logProb === lp && other.tokenId < id)) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    top.splice(lo, 0, { tokenId: id, logProb: lp });
    if (top.length > k) top.pop();
    worst = top[top.length - 1]!.logProb;
  }
  return top;
}

/**
 * Two-stage extraction for one clip: beam-search transcription, then a
 * step-by-step re-trace that feeds the committed prefix back through the
 * decoder and records the top-k candidates of the full next-token
 * distribution along with the chosen token's own log-probability.
 */
export function transcribeAndRetrace(
  decoder: Decoder,
  clip: ClipInfo,
  config: ExtractorConfig,
): UtteranceTrace {
  const hypothesis = decoder.transcribe(clip, {
    beamSize: config.beamSize,
    temperature: config.temperature,
  });
  const steps: TraceStep[] = [];
  for (let s = 0; s < hypothesis.length; s++) {
    const prefix = hypothesis.slice(0, s);
    const dist = decoder.nextTokenDistribution(clip, prefix);
    if (dist.length !== decoder.vocabSize) {
      throw new Error(
        `decoder returned ${dist.length} log-probs, expected ${decoder.vocabSize}`,
      );
    }
    const chosenId = hypothesis[s]!;
    steps.push({
      chosenId,
      chosenLogProb: dist[chosenId]!,
      candidates: topKCandidates(dist, config.kCand),
    });
  }
  const referenceTokens = decoder.tokenize(clip.referenceText);
  const roundTrip = decoder.detokenize(referenceTokens);
  if (roundTrip !== clip.referenceText) {
    throw new Error(
      `tokenizer round-trip mismatch for ${clip.clipId}: ` +
        `${JSON.stringify(roundTrip)} != ${JSON.stringify(clip.referenceText)}`,
    );
  }
  return {
    utteranceId: clip.clipId,
    language: clip.language,
    audioDurationSec: clip.durationSec,
    referenceText: clip.referenceText,
    hypothesisText: decoder.detokenize(hypothesis),
    referenceTokens,
    hypothesisTokens: hypothesis,
    steps,
  };
}
