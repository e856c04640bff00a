import { readFileSync } from "node:fs";

import { SeededRng, hashString } from "./rng.js";
import type { ClipInfo } from "./types.js";

/** Source of dataset clips for one or more languages. */
export interface ClipCatalog {
  languages(): string[];
  clipsFor(language: string): ClipInfo[];
}

export class StaticCatalog implements ClipCatalog {
  private byLanguage = new Map<string, ClipInfo[]>();

  constructor(clips: Iterable<ClipInfo>) {
    for (const clip of clips) {
      const bucket = this.byLanguage.get(clip.language) ?? [];
      bucket.push(clip);
      this.byLanguage.set(clip.language, bucket);
    }
  }

  languages(): string[] {
    return [...this.byLanguage.keys()].sort();
  }

  clipsFor(language: string): ClipInfo[] {
    const clips = this.byLanguage.get(language);
    if (!clips || clips.length === 0) {
      throw new Error(`language ${language} not available in catalog`);
    }
    return [...clips];
  }
}

/**
 * Load a catalog from a TSV with header
 * `language<TAB>clip_id<TAB>duration_sec<TAB>text<TAB>audio_ref`.
 */
export function loadCatalogTsv(path: string): StaticCatalog {
  const lines = readFileSync(path, "utf-8").split("\n");
  const clips: ClipInfo[] = [];
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i]!.trim();
    if (!line || i === 0) continue;
    const parts = line.split("\t");
    if (parts.length < 5) {
      throw new Error(`catalog line ${i + 1}: expected 5 tab-separated fields`);
    }
    const durationSec = Number(parts[2]);
    if (!Number.isFinite(durationSec) || durationSec <= 0) {
      throw new Error(`catalog line ${i + 1}: bad duration ${parts[2]}`);
    }
    clips.push({
      language: parts[0]!,
      clipId: parts[1]!,
      durationSec,
      referenceText: parts[3]!,
      audioRef: parts[4]!,
    });
  }
  return new StaticCatalog(clips);
}

const SYLLABLES = [
  "ka", "la", "mi", "to", "ve", "su", "ra", "ne", "do", "pi",
  "ta", "lu", "me", "ko", "si", "va", "re", "nu", "de", "po",
];

function syntheticWord(rng: SeededRng): string {
  const n = 2 + rng.nextBelow(3);
  let word = "";
  for (let i = 0; i < n; i++) word += SYLLABLES[rng.nextBelow(SYLLABLES.length)];
  return word;
}

/**
 * Deterministic synthetic catalog for tests and dry runs.
 *
 * Each language gets a Zipf-ish word inventory so extraction produces
 * realistic token-coverage behavior (frequent words dominate early).
 */
export function syntheticCatalog(
  languages: string[],
  opts: { clipsPerLanguage?: number; seed?: number } = {},
): StaticCatalog {
  const clipsPerLanguage = opts.clipsPerLanguage ?? 300;
  const seed = opts.seed ?? 1234;
  const clips: ClipInfo[] = [];
  for (const language of languages) {
    const rng = new SeededRng(hashString(`${language}:${seed}`));
    const vocabulary: string[] = [];
    const vocabularySize = 200;
    while (vocabulary.length < vocabularySize) {
      const word = syntheticWord(rng);
      if (!vocabulary.includes(word)) vocabulary.push(word);
    }
    for (let i = 0; i < clipsPerLanguage; i++) {
      const nWords = 4 + rng.nextBelow(7);
      const words: string[] = [];
      for (let w = 0; w < nWords; w++) {
        // Zipf-ish: rank ~ floor(V * u^4) concentrates on early ranks
        const u = rng.nextFloat();
        const rank = Math.min(vocabularySize - 1, Math.floor(vocabularySize * u * u * u * u));
        words.push(vocabulary[rank]!);
      }
      const clipId = `${language}_clip_${String(i).padStart(5, "0")}`;
      clips.push({
        language,
        clipId,
        durationSec: 2.5 + rng.nextFloat() * 5.5,
        referenceText: words.join(" "),
        audioRef: `synthetic://${clipId}`,
      });
    }
  }
  return new StaticCatalog(clips);
}
