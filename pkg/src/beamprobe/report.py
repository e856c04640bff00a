"""End-to-end pipeline: traces + manifest in, report CSV bundle out.

Outputs are a pure function of (inputs, config, seed): languages are
processed in sorted order, floats are serialized with shortest round-trip
repr, and the run manifest carries input digests instead of timestamps, so
re-running with identical inputs reproduces every byte.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import __version__
from .alignment import rank_reference_tokens
from .embedding import build_frequency_matrix, pca_2d, standardize, tsne_2d
from .metrics import LanguageMetrics, coverage_curve, language_metrics
from .stats import MIN_LANGUAGES, CorrelationResult, correlate
from .trace_model import AnalysisConfig, LanguageManifest, group_by_language, load_manifest, read_traces

log = logging.getLogger(__name__)

CORRELATED_METRICS = ("wer", "avg_rank", "avg_confidence", "avg_entropy_bits", "diversity_ttr")

METRICS_HEADER = (
    "language,training_hours,tier,wer,avg_rank,avg_confidence,avg_entropy_bits,"
    "diversity_ttr,n_utterances,n_hyp_tokens,n_ref_tokens"
)
STATS_HEADER = (
    "metric_name,pearson_r_loghours,spearman_rho,p_value_permutation,"
    "n_permutations,seed,n_languages"
)


@dataclass
class PipelineResult:
    outputs: list[Path]
    metrics: dict[str, LanguageMetrics]
    correlations: list[CorrelationResult]
    failures: dict[str, str]
    warnings: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_metrics_csv(
    path: Path, metrics: Sequence[LanguageMetrics], manifest: LanguageManifest
) -> None:
    lines = [METRICS_HEADER]
    for m in sorted(metrics, key=lambda m: m.language):
        if m.language in manifest:
            info = manifest[m.language]
            hours, tier = _fmt(info.training_hours), info.tier
        else:
            hours, tier = "", ""
        lines.append(
            ",".join(
                [
                    m.language,
                    hours,
                    tier,
                    _fmt(m.wer),
                    _fmt(m.avg_rank),
                    _fmt(m.avg_confidence),
                    _fmt(m.avg_entropy_bits),
                    _fmt(m.diversity_ttr),
                    str(m.n_utterances),
                    str(m.n_hyp_tokens),
                    str(m.n_ref_tokens),
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_stats_csv(path: Path, results: Sequence[CorrelationResult]) -> None:
    lines = [STATS_HEADER]
    for r in results:
        lines.append(
            ",".join(
                [
                    r.metric_name,
                    _fmt(r.pearson_r_loghours),
                    _fmt(r.spearman_rho),
                    _fmt(r.p_value_permutation),
                    str(r.n_permutations),
                    str(r.seed),
                    str(r.n_languages),
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_embedding_csv(path: Path, result, languages: Sequence[str], params: dict) -> None:
    lines = [f"# {key} = {_fmt(value)}" for key, value in params.items()]
    if result.explained_variance_ratio is not None:
        r1, r2 = result.explained_variance_ratio
        lines.append(f"# explained_variance_ratio = {_fmt(r1)},{_fmt(r2)}")
    if result.final_kl is not None:
        lines.append(f"# final_kl = {_fmt(result.final_kl)}")
    if result.effective_perplexity is not None:
        lines.append(f"# effective_perplexity = {_fmt(result.effective_perplexity)}")
    lines.append("language,dim1,dim2")
    for lang, (d1, d2) in zip(languages, result.coordinates):
        lines.append(f"{lang},{_fmt(float(d1))},{_fmt(float(d2))}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_coverage_csv(path: Path, points, language: str, window_sec: float) -> None:
    lines = [
        f"# language = {language}",
        f"# window_sec = {_fmt(window_sec)}",
        "cumulative_sec,unique_tokens,fraction_of_final",
    ]
    for p in points:
        lines.append(f"{_fmt(p.cumulative_sec)},{p.unique_tokens},{_fmt(p.fraction_of_final)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def run_pipeline(
    traces_path: str | Path,
    manifest_path: str | Path,
    out_dir: str | Path,
    config: AnalysisConfig | None = None,
    n_permutations: int = 10000,
    coverage_language: str | None = None,
    window_sec: float = 600.0,
) -> PipelineResult:
    """Compute metrics, correlations, and embeddings; write the CSV bundle.

    Per-language failures are collected rather than raised; partial outputs
    are still written. Callers should treat a non-empty ``failures`` map as a
    failed run.
    """
    config = config or AnalysisConfig()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = load_manifest(manifest_path)
    warnings_sink: list[str] = []
    by_language = group_by_language(read_traces(traces_path, warning_sink=warnings_sink))
    if not by_language:
        raise ValueError(f"no traces found in {traces_path}")

    failures: dict[str, str] = {}
    metrics: dict[str, LanguageMetrics] = {}
    for language in sorted(by_language):
        try:
            traces = by_language[language]
            alignments = [rank_reference_tokens(t, config) for t in traces]
            metrics[language] = language_metrics(traces, alignments, config)
        except (ValueError, KeyError) as exc:
            failures[language] = str(exc)
            log.error("language %s failed: %s", language, exc)

    outputs: list[Path] = []
    metrics_path = out / "metrics.csv"
    write_metrics_csv(metrics_path, list(metrics.values()), manifest)
    outputs.append(metrics_path)

    correlations: list[CorrelationResult] = []
    for name in CORRELATED_METRICS:
        values = {
            lang: getattr(m, name)
            for lang, m in metrics.items()
            if lang in manifest and math.isfinite(getattr(m, name))
        }
        if len(values) < MIN_LANGUAGES:
            warnings_sink.append(
                f"skipping correlation for {name}: only {len(values)} usable languages"
            )
            continue
        try:
            correlations.append(
                correlate(values, manifest, n_permutations, config.seed, metric_name=name)
            )
        except ValueError as exc:
            warnings_sink.append(f"skipping correlation for {name}: {exc}")
    stats_path = out / "stats.csv"
    write_stats_csv(stats_path, correlations)
    outputs.append(stats_path)

    usable = {lang: by_language[lang] for lang in metrics}
    if len(usable) >= 3:
        freq = build_frequency_matrix(
            usable,
            config.k_pca,
            include_special_tokens=config.include_special_tokens,
        )
        standardized, _ = standardize(freq.matrix)
        pca = pca_2d(standardized, seed=config.seed)
        pca_path = out / "pca.csv"
        write_embedding_csv(
            pca_path, pca, freq.languages, {"method": "pca", "k_top": config.k_pca}
        )
        outputs.append(pca_path)
        if len(usable) >= 4:
            tsne = tsne_2d(standardized, perplexity=20.0, seed=config.seed)
            tsne_path = out / "tsne.csv"
            write_embedding_csv(
                tsne_path,
                tsne,
                freq.languages,
                {
                    "method": "tsne",
                    "k_top": config.k_pca,
                    "perplexity_requested": 20.0,
                    "seed": config.seed,
                },
            )
            outputs.append(tsne_path)
        else:
            warnings_sink.append("skipping t-SNE: need at least 4 languages")
    else:
        warnings_sink.append("skipping PCA/t-SNE: need at least 3 languages")

    if coverage_language is not None:
        if coverage_language not in by_language:
            failures[coverage_language] = "coverage requested for language with no traces"
        else:
            points = coverage_curve(by_language[coverage_language], window_sec)
            coverage_path = out / "coverage.csv"
            write_coverage_csv(coverage_path, points, coverage_language, window_sec)
            outputs.append(coverage_path)

    run_manifest = {
        "tool": "beamprobe",
        "version": __version__,
        "config": {
            "k_cand": config.k_cand,
            "k_entropy": config.k_entropy,
            "k_diversity": config.k_diversity,
            "k_pca": config.k_pca,
            "include_special_tokens": config.include_special_tokens,
            "seed": config.seed,
        },
        "n_permutations": n_permutations,
        "window_sec": window_sec,
        "coverage_language": coverage_language,
        "inputs": {
            "traces": {"name": Path(traces_path).name, "sha256": _sha256(traces_path)},
            "manifest": {"name": Path(manifest_path).name, "sha256": _sha256(manifest_path)},
        },
        "languages": sorted(by_language),
        "failures": failures,
        "warnings": warnings_sink,
        "outputs": [p.name for p in outputs],
    }
    manifest_out = out / "run_manifest.json"
    manifest_out.write_text(
        json.dumps(run_manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    outputs.append(manifest_out)

    for warning in warnings_sink:
        log.warning("%s", warning)
    return PipelineResult(
        outputs=outputs,
        metrics=metrics,
        correlations=correlations,
        failures=failures,
        warnings=warnings_sink,
    )
