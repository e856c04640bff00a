import type { ClipCatalog } from "./catalog.js";
import { SeededRng, hashString } from "./rng.js";
import type { ClipInfo, SampledClip, SamplingManifestRow } from "./types.js";

export interface SamplingResult {
  language: string;
  clips: SampledClip[];
  totalSec: number;
}

/**
 * Seeded random sample whose cumulative duration first reaches the target.
 *
 * The pool is shuffled with a per-(seed, language) generator and consumed
 * until the running duration crosses `minutes * 60`, so the total lands in
 * [target, target + longest_clip). Throws when the pool cannot reach the
 * target.
 */
export function sampleUtterances(
  catalog: ClipCatalog,
  language: string,
  minutes: number,
  seed: number,
): SamplingResult {
  const windows = sampleWindows(catalog, language, minutes, 1, seed);
  return windows[0]!;
}

/**
 * Draw `nWindows` disjoint samples of `minutes` each (coverage experiments).
 */
export function sampleWindows(
  catalog: ClipCatalog,
  language: string,
  minutes: number,
  nWindows: number,
  seed: number,
): SamplingResult[] {
  if (minutes <= 0) throw new RangeError("minutes must be positive");
  if (nWindows < 1) throw new RangeError("nWindows must be at least 1");
  const targetSec = minutes * 60;
  const rng = new SeededRng(hashString(`${seed}:${language}`));
  const pool = rng.shuffle(catalog.clipsFor(language));
  const results: SamplingResult[] = [];
  let cursor = 0;
  for (let w = 1; w <= nWindows; w++) {
    const clips: SampledClip[] = [];
    let total = 0;
    while (total < targetSec) {
      const clip: ClipInfo | undefined = pool[cursor];
      if (clip === undefined) {
        throw new Error(
          `language ${language}: pool exhausted at ${total.toFixed(1)}s ` +
            `of window ${w}/${nWindows} (target ${targetSec}s per window)`,
        );
      }
      cursor += 1;
      clips.push({ clip, window: w });
      total += clip.durationSec;
    }
    results.push({ language, clips, totalSec: total });
  }
  return results;
}

export function manifestRows(results: Iterable<SamplingResult>): SamplingManifestRow[] {
  const rows: SamplingManifestRow[] = [];
  for (const result of results) {
    for (const { clip, window } of result.clips) {
      rows.push({
        language: result.language,
        clipId: clip.clipId,
        durationSec: clip.durationSec,
        window,
      });
    }
  }
  return rows;
}

export function manifestCsv(rows: SamplingManifestRow[]): string {
  const lines = ["language,clip_id,duration_sec,window"];
  for (const row of rows) {
    lines.push(`${row.language},${row.clipId},${row.durationSec},${row.window}`);
  }
  return lines.join("\n") + "\n";
}
