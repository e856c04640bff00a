import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { spawnSync } from "node:child_process";

import { describe, expect, it } from "vitest";

import { syntheticCatalog } from "../src/catalog.js";
import { MockDecoder } from "../src/decoder.js";
import { extractTraces } from "../src/extract.js";
import { extractorConfigSchema } from "../src/types.js";

const PROFILES = {
  de: { boost: 13.0, errorRate: 0.06 },
  lv: { boost: 10.4, errorRate: 0.3 },
  et: { boost: 11.0, errorRate: 0.22 },
};

function analyzerAvailable(): boolean {
  const probe = spawnSync("beamprobe", ["--version"], { encoding: "utf-8" });
  return probe.status === 0;
}

function extract(dir: string, languages: string[], minutes: number, windows = 1) {
  const config = extractorConfigSchema.parse({
    languages,
    minutesPerLanguage: minutes,
    sampleSeed: 5,
  });
  const catalog = syntheticCatalog(languages, {
    clipsPerLanguage: Math.ceil((minutes * windows * 60) / 3) + 50,
    seed: 5,
  });
  const decoder = new MockDecoder(5, PROFILES);
  const tracesPath = join(dir, "traces.jsonl");
  const samplingPath = join(dir, "sampling.csv");
  const report = extractTraces(decoder, catalog, config, tracesPath, samplingPath, {
    windowsPerLanguage: windows,
  });
  return { tracesPath, samplingPath, report };
}

describe("end-to-end extraction", () => {
  it("writes validated traces and a sampling manifest", () => {
    const dir = mkdtempSync(join(tmpdir(), "extractor-"));
    const { tracesPath, samplingPath, report } = extract(dir, ["de", "lv"], 2);
    expect(report.skipped).toEqual([]);
    expect(report.warnings).toEqual([]);
    expect(report.tracesWritten).toBeGreaterThan(20);
    const lines = readFileSync(tracesPath, "utf-8").trim().split("\n");
    expect(lines).toHaveLength(report.tracesWritten);
    const sampling = readFileSync(samplingPath, "utf-8").trim().split("\n");
    expect(sampling).toHaveLength(report.samplingRows + 1);
    const langs = new Set(lines.map((l) => JSON.parse(l).language));
    expect(langs).toEqual(new Set(["de", "lv"]));
  });

  it("is reproducible for a fixed seed", () => {
    const d1 = mkdtempSync(join(tmpdir(), "extractor-"));
    const d2 = mkdtempSync(join(tmpdir(), "extractor-"));
    const a = extract(d1, ["et"], 1.5);
    const b = extract(d2, ["et"], 1.5);
    expect(readFileSync(a.tracesPath, "utf-8")).toBe(readFileSync(b.tracesPath, "utf-8"));
    expect(readFileSync(a.samplingPath, "utf-8")).toBe(readFileSync(b.samplingPath, "utf-8"));
  });
});

describe.skipIf(!analyzerAvailable())("against the installed analyzer CLI", () => {
  it("emitted traces pass the analyzer's validation and metrics", () => {
    const dir = mkdtempSync(join(tmpdir(), "extractor-"));
    const { tracesPath } = extract(dir, ["de", "lv"], 2);
    const manifestPath = join(dir, "hours.csv");
    const metricsPath = join(dir, "metrics.csv");
    const hours = "code,training_hours,tier\nde,13344,High\nlv,65,Low\n";
    writeFileSync(manifestPath, hours, "utf-8");
    const proc = spawnSync(
      "beamprobe",
      ["metrics", "--traces", tracesPath, "--manifest", manifestPath, "--out", metricsPath],
      { encoding: "utf-8" },
    );
    expect(proc.stderr).toBe("");
    expect(proc.status).toBe(0);
    const body = readFileSync(metricsPath, "utf-8");
    const rows = body.trim().split("\n").slice(1);
    const byLang = new Map(rows.map((r) => [r.split(",")[0]!, r.split(",")]));
    const col = (lang: string, idx: number) => Number(byLang.get(lang)![idx]);
    // header: language,training_hours,tier,wer,avg_rank,avg_confidence,...
    expect(col("de", 3)).toBeLessThan(col("lv", 3)); // WER direction
    expect(col("de", 5)).toBeGreaterThan(col("lv", 5)); // confidence direction
  });

  it("a six-window extraction yields a monotone coverage curve", () => {
    const dir = mkdtempSync(join(tmpdir(), "extractor-"));
    const { tracesPath } = extract(dir, ["et"], 1, 6);
    const coveragePath = join(dir, "coverage.csv");
    const proc = spawnSync(
      "beamprobe",
      [
        "coverage", "--traces", tracesPath, "--language", "et",
        "--window-sec", "60", "--out", coveragePath,
      ],
      { encoding: "utf-8" },
    );
    expect(proc.status).toBe(0);
    const lines = readFileSync(coveragePath, "utf-8").trim().split("\n");
    const fractions = lines
      .filter((l) => !l.startsWith("#") && !l.startsWith("cumulative"))
      .map((l) => Number(l.split(",")[2]));
    expect(fractions.length).toBeGreaterThanOrEqual(6);
    for (let i = 1; i < fractions.length; i++) {
      expect(fractions[i]!).toBeGreaterThanOrEqual(fractions[i - 1]!);
    }
    expect(fractions[fractions.length - 1]).toBe(1.0);
    // sub-linear novelty: the first of six windows covers clearly more than
    // the 1/6 a uniform-novelty process would give, but not everything
    expect(fractions[0]!).toBeGreaterThan(0.25);
    expect(fractions[0]!).toBeLessThan(1.0);
  });
});
