import { z } from "zod";

/** Ids at or above this are control tokens in the target BPE vocabulary. */
export const SPECIAL_TOKEN_FLOOR = 50257;
export const EOS_TOKEN = 50257;
export const BOS_TOKEN = 50258;
export const DEFAULT_VOCAB_SIZE = 51865;

export const extractorConfigSchema = z
  .object({
    modelId: z.string().default("whisper-large-v2"),
    beamSize: z.number().int().min(1).default(5),
    temperature: z.number().min(0).default(0.2),
    kCand: z.number().int().min(1).default(50),
    minutesPerLanguage: z.number().positive().default(10),
    languages: z.array(z.string().min(1)).nonempty(),
    datasetVersion: z.string().default("common_voice_17_0"),
    sampleSeed: z.number().int().nonnegative().default(0),
  })
  .refine((cfg) => cfg.kCand >= cfg.beamSize, {
    message: "kCand must be at least beamSize",
  });

export type ExtractorConfig = z.infer<typeof extractorConfigSchema>;

/** One dataset clip: opaque audio reference plus validated transcript. */
export interface ClipInfo {
  clipId: string;
  language: string;
  durationSec: number;
  referenceText: string;
  /** Opaque handle the decoder resolves (file path, dataset row id, ...). */
  audioRef: string;
}

export interface CandidatePair {
  tokenId: number;
  logProb: number;
}

export interface TraceStep {
  chosenId: number;
  chosenLogProb: number;
  candidates: CandidatePair[];
}

export interface UtteranceTrace {
  utteranceId: string;
  language: string;
  audioDurationSec: number;
  referenceText: string;
  hypothesisText: string;
  referenceTokens: number[];
  hypothesisTokens: number[];
  steps: TraceStep[];
}

/** Wire format of one trace-file line (the analyzer's input schema). */
export const traceRecordSchema = z.object({
  utterance_id: z.string(),
  language: z.string(),
  audio_duration_sec: z.number().positive(),
  reference_text: z.string(),
  hypothesis_text: z.string().optional(),
  reference_tokens: z.array(z.number().int().nonnegative()),
  hypothesis_tokens: z.array(z.number().int().nonnegative()),
  steps: z.array(
    z.object({
      chosen_id: z.number().int().nonnegative(),
      chosen_log_prob: z.number().max(0),
      candidates: z.array(z.tuple([z.number().int().nonnegative(), z.number().max(0)])),
    }),
  ),
});

export type TraceRecord = z.infer<typeof traceRecordSchema>;

export interface SampledClip {
  clip: ClipInfo;
  /** 1-based window index for multi-window (coverage) extractions. */
  window: number;
}

export interface SamplingManifestRow {
  language: string;
  clipId: string;
  durationSec: number;
  window: number;
}
