import { appendFileSync, writeFileSync } from "node:fs";

import type { ClipCatalog } from "./catalog.js";
import type { Decoder } from "./decoder.js";
import { manifestCsv, manifestRows, sampleWindows, type SamplingResult } from "./sampling.js";
import { transcribeAndRetrace } from "./retrace.js";
import { traceToJsonLine, validateTrace, type ValidationIssue } from "./traceFile.js";
import type { ExtractorConfig, UtteranceTrace } from "./types.js";

export interface ExtractionReport {
  tracesWritten: number;
  skipped: { clipId: string; reason: string }[];
  warnings: ValidationIssue[];
  samplingRows: number;
}

export interface ExtractOptions {
  /** Windows per language (coverage experiments extract several). */
  windowsPerLanguage?: number;
  onTrace?: (trace: UtteranceTrace) => void;
}

/**
 * Full extraction: sample clips per language, transcribe and re-trace each,
 * validate, and append to the trace file. A sampling manifest (language,
 * clip id, duration, window) is written alongside for reproducibility.
 *
 * Per-clip decoder failures are skipped and reported, matching the
 * best-effort behavior expected of long dataset runs.
 */
export function extractTraces(
  decoder: Decoder,
  catalog: ClipCatalog,
  config: ExtractorConfig,
  tracesPath: string,
  samplingManifestPath: string,
  options: ExtractOptions = {},
): ExtractionReport {
  const windows = options.windowsPerLanguage ?? 1;
  const report: ExtractionReport = {
    tracesWritten: 0,
    skipped: [],
    warnings: [],
    samplingRows: 0,
  };
  const sampled: SamplingResult[] = [];
  for (const language of config.languages) {
    sampled.push(
      ...sampleWindows(catalog, language, config.minutesPerLanguage, windows, config.sampleSeed),
    );
  }
  const rows = manifestRows(sampled);
  writeFileSync(samplingManifestPath, manifestCsv(rows), "utf-8");
  report.samplingRows = rows.length;

  writeFileSync(tracesPath, "", "utf-8");
  for (const result of sampled) {
    for (const { clip } of result.clips) {
      let trace: UtteranceTrace;
      try {
        trace = transcribeAndRetrace(decoder, clip, config);
      } catch (err) {
        report.skipped.push({ clipId: clip.clipId, reason: String(err) });
        continue;
      }
      const issues = validateTrace(trace, decoder.vocabSize);
      const errors = issues.filter((i) => !i.warning);
      if (errors.length > 0) {
        report.skipped.push({ clipId: clip.clipId, reason: errors[0]!.message });
        continue;
      }
      report.warnings.push(...issues);
      appendFileSync(tracesPath, traceToJsonLine(trace) + "\n", "utf-8");
      report.tracesWritten += 1;
      options.onTrace?.(trace);
    }
  }
  return report;
}
