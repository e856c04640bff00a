import { SeededRng, hashString } from "./rng.js";
import {
  BOS_TOKEN,
  DEFAULT_VOCAB_SIZE,
  EOS_TOKEN,
  SPECIAL_TOKEN_FLOOR,
  type ClipInfo,
} from "./types.js";

export interface TranscribeOptions {
  beamSize: number;
  temperature: number;
}

/**
 * Model abstraction: hypothesis generation plus teacher-forced re-tracing.
 *
 * A real backend (e.g. a Whisper runtime) implements this interface; the
 * pipeline itself never touches model internals. `nextTokenDistribution`
 * must return log-probabilities over the full vocabulary given the audio
 * and the committed prefix.
 */
export interface Decoder {
  readonly vocabSize: number;
  tokenize(text: string): number[];
  detokenize(tokenIds: number[]): string;
  transcribe(clip: ClipInfo, options: TranscribeOptions): number[];
  nextTokenDistribution(clip: ClipInfo, prefix: number[]): Float64Array;
}

export interface MockLanguageProfile {
  /** Additive score boost of the intended token; drives confidence. */
  boost: number;
  /** Per-word corruption probability; drives WER. */
  errorRate: number;
}

const DEFAULT_PROFILE: MockLanguageProfile = { boost: 11.5, errorRate: 0.15 };

/** 32-bit mixer for cheap per-(step, token) background scores. */
function mix32(a: number, b: number): number {
  let h = (a ^ Math.imul(b, 0x9e3779b1)) >>> 0;
  h = Math.imul(h ^ (h >>> 16), 0x85ebca6b) >>> 0;
  h = Math.imul(h ^ (h >>> 13), 0xc2b2ae35) >>> 0;
  return (h ^ (h >>> 16)) >>> 0;
}

/**
 * Deterministic stand-in decoder for tests and dry runs.
 *
 * Hypotheses are derived from the clip transcript with a per-language
 * corruption rate; step distributions are uniform background noise with the
 * intended next token boosted, so chosen-token confidence and candidate
 * sharpness follow the language profile. Everything is a pure function of
 * (seed, clip id, step), so re-tracing is exactly reproducible.
 */
export class MockDecoder implements Decoder {
  readonly vocabSize: number;
  private readonly seed: number;
  private readonly profiles: Map<string, MockLanguageProfile>;
  private readonly wordToId = new Map<string, number>();
  private readonly idToWord = new Map<number, string>();
  private nextWordId = 1000;
  private readonly hypothesisCache = new Map<string, number[]>();

  constructor(
    seed = 0,
    profiles: Record<string, MockLanguageProfile> = {},
    vocabSize = DEFAULT_VOCAB_SIZE,
  ) {
    this.seed = seed;
    this.vocabSize = vocabSize;
    this.profiles = new Map(Object.entries(profiles));
  }

  private profileFor(language: string): MockLanguageProfile {
    return this.profiles.get(language) ?? DEFAULT_PROFILE;
  }

  private wordId(word: string): number {
    const known = this.wordToId.get(word);
    if (known !== undefined) return known;
    const id = this.nextWordId++;
    if (id >= SPECIAL_TOKEN_FLOOR) throw new Error("mock word inventory exhausted");
    this.wordToId.set(word, id);
    this.idToWord.set(id, word);
    return id;
  }

  tokenize(text: string): number[] {
    const words = text.split(" ").filter((w) => w.length > 0);
    return [BOS_TOKEN, ...words.map((w) => this.wordId(w)), EOS_TOKEN];
  }

  detokenize(tokenIds: number[]): string {
    const words: string[] = [];
    for (const id of tokenIds) {
      if (id >= SPECIAL_TOKEN_FLOOR) continue;
      const word = this.idToWord.get(id);
      if (word === undefined) throw new Error(`unknown token id ${id}`);
      words.push(word);
    }
    return words.join(" ");
  }

  transcribe(clip: ClipInfo, options: TranscribeOptions): number[] {
    if (options.beamSize < 1) throw new RangeError("beamSize must be >= 1");
    if (options.temperature < 0) throw new RangeError("temperature must be >= 0");
    const cached = this.hypothesisCache.get(clip.clipId);
    if (cached) return [...cached];
    const profile = this.profileFor(clip.language);
    const rng = new SeededRng(hashString(`${this.seed}:hyp:${clip.clipId}`));
    const refWords = clip.referenceText.split(" ").filter((w) => w.length > 0);
    const hypWords: string[] = [];
    for (const word of refWords) {
      const r = rng.nextFloat();
      if (r >= profile.errorRate) {
        hypWords.push(word);
      } else if (r < profile.errorRate * 0.5) {
        hypWords.push(this.corrupt(word, rng)); // substitution
      } else if (r < profile.errorRate * 0.8) {
        continue; // deletion
      } else {
        hypWords.push(word);
        hypWords.push(this.corrupt(word, rng)); // insertion
      }
    }
    if (hypWords.length === 0) hypWords.push(this.corrupt(refWords[0] ?? "ta", rng));
    const tokens = [BOS_TOKEN, ...hypWords.map((w) => this.wordId(w)), EOS_TOKEN];
    this.hypothesisCache.set(clip.clipId, tokens);
    return [...tokens];
  }

  private corrupt(word: string, rng: SeededRng): string {
    const variants = [`${word}st`, `${word}ga`, word.slice(0, Math.max(1, word.length - 2)) + "ne"];
    const pick = variants[rng.nextBelow(variants.length)]!;
    return pick === word ? `${word}ne` : pick;
  }

  nextTokenDistribution(clip: ClipInfo, prefix: number[]): Float64Array {
    const hypothesis = this.hypothesisCache.get(clip.clipId);
    if (!hypothesis) {
      throw new Error(`transcribe ${clip.clipId} before re-tracing it`);
    }
    const step = prefix.length;
    const target = step < hypothesis.length ? hypothesis[step]! : EOS_TOKEN;
    const profile = this.profileFor(clip.language);
    const stepSeed = Number(hashString(`${this.seed}:dist:${clip.clipId}:${step}`) & 0xffffffffn);
    const scores = new Float64Array(this.vocabSize);
    let maxScore = -Infinity;
    for (let v = 0; v < this.vocabSize; v++) {
      let s = mix32(stepSeed, v) / 4294967296; // uniform [0, 1)
      if (v === target) s += profile.boost;
      scores[v] = s;
      if (s > maxScore) maxScore = s;
    }
    // log-softmax
    let total = 0;
    for (let v = 0; v < this.vocabSize; v++) total += Math.exp(scores[v]! - maxScore);
    const logTotal = Math.log(total) + maxScore;
    for (let v = 0; v < this.vocabSize; v++) scores[v] = scores[v]! - logTotal;
    return scores;
  }
}
