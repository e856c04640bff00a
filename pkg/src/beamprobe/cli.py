"""Command-line interface.

Subcommands: ``run``, ``metrics``, ``align``, ``embed``, ``correlate``,
``coverage``. A flat ``key = value`` config file can supply any flag value;
explicit flags override the file.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import __version__
from .alignment import format_alignment_table, rank_reference_tokens
from .embedding import build_frequency_matrix, pca_2d, standardize, tsne_2d
from .metrics import coverage_curve, language_metrics
from .report import (
    run_pipeline,
    write_coverage_csv,
    write_embedding_csv,
    write_metrics_csv,
    write_stats_csv,
)
from .stats import correlate
from .trace_model import (
    AnalysisConfig,
    TraceError,
    group_by_language,
    load_manifest,
    load_vocabulary,
    read_traces,
)

log = logging.getLogger("beamprobe")

_CONFIG_KEYS = {
    "traces",
    "manifest",
    "out",
    "out_dir",
    "seed",
    "k_cand",
    "k_entropy",
    "k_diversity",
    "k_pca",
    "k",
    "include_special_tokens",
    "permutations",
    "window_sec",
    "method",
    "perplexity",
    "language",
    "utterance",
    "vocab",
    "metrics",
    "coverage_language",
}

_BOOL_STRINGS = {
    "true": True,
    "1": True,
    "yes": True,
    "false": False,
    "0": False,
    "no": False,
}


def load_config_file(path: str | Path) -> dict[str, str]:
    """Parse a flat ``key = value`` file; '#' starts a comment line."""
    values: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {line_no}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise ValueError(f"config line {line_no}: unknown key {key!r}")
        values[key] = value.strip()
    return values


class _Resolver:
    """Merge precedence: explicit flag > config file > default."""

    def __init__(self, args: argparse.Namespace):
        self.args = vars(args)
        self.file_values = (
            load_config_file(self.args["config"]) if self.args.get("config") else {}
        )

    def get(self, key: str, default=None, cast=str, required: bool = False):
        value = self.args.get(key)
        if value is None and key in self.file_values:
            raw = self.file_values[key]
            value = self._cast(raw, cast, key)
        if value is None:
            value = default
        if value is None and required:
            raise SystemExit(f"error: missing required option --{key.replace('_', '-')}")
        return value

    @staticmethod
    def _cast(raw: str, cast, key: str):
        if cast is bool:
            try:
                return _BOOL_STRINGS[raw.lower()]
            except KeyError:
                raise SystemExit(f"error: config key {key!r}: not a boolean: {raw!r}")
        try:
            return cast(raw)
        except ValueError:
            raise SystemExit(f"error: config key {key!r}: bad value {raw!r}")

    def analysis_config(self) -> AnalysisConfig:
        return AnalysisConfig(
            k_cand=self.get("k_cand", 50, int),
            k_entropy=self.get("k_entropy", 50, int),
            k_diversity=self.get("k_diversity", 50, int),
            k_pca=self.get("k_pca", 10, int),
            include_special_tokens=self.get("include_special_tokens", True, bool),
            seed=self.get("seed", 0, int),
        )


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--traces", help="trace file (newline-delimited JSON)")
    parser.add_argument("--manifest", help="language manifest CSV")
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--seed", type=int, help="random seed (default 0)")
    parser.add_argument("--out-dir", dest="out_dir", help="output directory")
    parser.add_argument("--k-cand", dest="k_cand", type=int, help="candidate depth (default 50)")
    parser.add_argument("--k-entropy", dest="k_entropy", type=int, help="entropy window (default 50)")
    parser.add_argument("--k-diversity", dest="k_diversity", type=int, help="diversity window (default 50)")
    parser.add_argument("--k-pca", dest="k_pca", type=int, help="frequency-vector window (default 10)")
    parser.add_argument(
        "--include-special-tokens",
        dest="include_special_tokens",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="include BOS/EOS/control tokens in token-level metrics (default: include)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamprobe",
        description="Sub-token level diagnostics for beam-search decoder traces.",
    )
    parser.add_argument("--version", action="version", version=f"beamprobe {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="full pipeline: metrics, stats, embeddings")
    _add_common(p_run)
    p_run.add_argument("--permutations", type=int, help="permutation count (default 10000)")
    p_run.add_argument("--coverage-language", dest="coverage_language", help="also emit a coverage curve for this language")
    p_run.add_argument("--window-sec", dest="window_sec", type=float, help="coverage window seconds (default 600)")

    p_metrics = sub.add_parser("metrics", help="per-language metrics CSV")
    _add_common(p_metrics)
    p_metrics.add_argument("--out", help="output CSV path")

    p_align = sub.add_parser("align", help="print the alignment table for one utterance")
    _add_common(p_align)
    p_align.add_argument("--trace", help="trace file (alias for --traces)")
    p_align.add_argument("--utterance", help="utterance id to align")
    p_align.add_argument("--vocab", help="token_id<TAB>string TSV for display")

    p_embed = sub.add_parser("embed", help="PCA or t-SNE coordinates CSV")
    _add_common(p_embed)
    p_embed.add_argument("--method", choices=["pca", "tsne"], help="projection method")
    p_embed.add_argument("--k", type=int, help="candidate window for frequency vectors (alias of --k-pca)")
    p_embed.add_argument("--perplexity", type=float, help="t-SNE perplexity (default 20)")
    p_embed.add_argument("--out", help="output CSV path")

    p_corr = sub.add_parser("correlate", help="correlate metrics CSV against manifest hours")
    _add_common(p_corr)
    p_corr.add_argument("--metrics", help="metrics CSV produced by the metrics subcommand")
    p_corr.add_argument("--permutations", type=int, help="permutation count (default 10000)")
    p_corr.add_argument("--out", help="output CSV path")

    p_cov = sub.add_parser("coverage", help="cumulative unique-token coverage curve")
    _add_common(p_cov)
    p_cov.add_argument("--language", help="language code")
    p_cov.add_argument("--window-sec", dest="window_sec", type=float, help="window seconds (default 600)")
    p_cov.add_argument("--out", help="output CSV path")

    return parser


def _cmd_run(res: _Resolver) -> int:
    result = run_pipeline(
        traces_path=res.get("traces", required=True),
        manifest_path=res.get("manifest", required=True),
        out_dir=res.get("out_dir", required=True),
        config=res.analysis_config(),
        n_permutations=res.get("permutations", 10000, int),
        coverage_language=res.get("coverage_language"),
        window_sec=res.get("window_sec", 600.0, float),
    )
    for path in result.outputs:
        print(path)
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if result.failures:
        for language, message in sorted(result.failures.items()):
            print(f"error: language {language}: {message}", file=sys.stderr)
        return 1
    return 0


def _cmd_metrics(res: _Resolver) -> int:
    config = res.analysis_config()
    manifest = load_manifest(res.get("manifest", required=True))
    by_language = group_by_language(read_traces(res.get("traces", required=True)))
    rows = []
    failures = 0
    for language in sorted(by_language):
        try:
            rows.append(language_metrics(by_language[language], config=config))
        except ValueError as exc:
            print(f"error: language {language}: {exc}", file=sys.stderr)
            failures += 1
    out = Path(res.get("out", required=True))
    write_metrics_csv(out, rows, manifest)
    print(out)
    return 1 if failures else 0


def _cmd_align(res: _Resolver) -> int:
    traces_path = res.get("traces") or res.get("trace")
    if traces_path is None:
        raise SystemExit("error: missing required option --trace")
    utterance_id = res.get("utterance", required=True)
    config = res.analysis_config()
    vocab_path = res.get("vocab")
    vocab = load_vocabulary(vocab_path) if vocab_path else None
    for trace in read_traces(traces_path):
        if trace.utterance_id == utterance_id:
            result = rank_reference_tokens(trace, config)
            print(format_alignment_table(trace, result, vocab))
            ranks = [r.rank for r in result.ranked]
            avg = sum(ranks) / len(ranks) if ranks else float("nan")
            print(f"\nedit_distance = {result.edit_distance}")
            print(f"average_rank = {avg!r} over {len(ranks)} reference tokens")
            return 0
    print(f"error: utterance {utterance_id!r} not found", file=sys.stderr)
    return 1


def _cmd_embed(res: _Resolver) -> int:
    method = res.get("method", required=True)
    k_top = res.get("k", None, int) or res.get("k_pca", 10, int)
    config = res.analysis_config()
    by_language = group_by_language(read_traces(res.get("traces", required=True)))
    freq = build_frequency_matrix(
        by_language, k_top, include_special_tokens=config.include_special_tokens
    )
    standardized, _ = standardize(freq.matrix)
    seed = res.get("seed", 0, int)
    params = {"method": method, "k_top": k_top, "seed": seed}
    if method == "pca":
        result = pca_2d(standardized, seed=seed)
    else:
        perplexity = res.get("perplexity", 20.0, float)
        result = tsne_2d(standardized, perplexity=perplexity, seed=seed)
        params["perplexity_requested"] = perplexity
    out = Path(res.get("out", required=True))
    write_embedding_csv(out, result, freq.languages, params)
    print(out)
    return 0


def _read_metrics_csv(path: str | Path) -> dict[str, dict[str, float]]:
    """metric_name -> {language -> value} from a metrics.csv file."""
    per_metric: dict[str, dict[str, float]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            language = row["language"]
            for name in ("wer", "avg_rank", "avg_confidence", "avg_entropy_bits", "diversity_ttr"):
                raw = (row.get(name) or "").strip()
                if not raw:
                    continue
                value = float(raw)
                per_metric.setdefault(name, {})[language] = value
    return per_metric


def _cmd_correlate(res: _Resolver) -> int:
    manifest = load_manifest(res.get("manifest", required=True))
    per_metric = _read_metrics_csv(res.get("metrics", required=True))
    n_perm = res.get("permutations", 10000, int)
    seed = res.get("seed", 0, int)
    results = []
    for name, values in per_metric.items():
        finite = {k: v for k, v in values.items() if v == v}
        try:
            results.append(correlate(finite, manifest, n_perm, seed, metric_name=name))
        except ValueError as exc:
            print(f"warning: skipping {name}: {exc}", file=sys.stderr)
    out = Path(res.get("out", required=True))
    write_stats_csv(out, results)
    print(out)
    return 0


def _cmd_coverage(res: _Resolver) -> int:
    language = res.get("language", required=True)
    window_sec = res.get("window_sec", 600.0, float)
    by_language = group_by_language(read_traces(res.get("traces", required=True)))
    if language not in by_language:
        print(f"error: no traces for language {language!r}", file=sys.stderr)
        return 1
    points = coverage_curve(by_language[language], window_sec)
    out = Path(res.get("out", required=True))
    write_coverage_csv(out, points, language, window_sec)
    print(out)
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "metrics": _cmd_metrics,
    "align": _cmd_align,
    "embed": _cmd_embed,
    "correlate": _cmd_correlate,
    "coverage": _cmd_coverage,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](_Resolver(args))
    except (OSError, ValueError, TraceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
