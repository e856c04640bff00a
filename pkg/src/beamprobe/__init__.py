"""beamprobe: sub-token diagnostics for multilingual ASR beam-search traces.

Given per-step decoder snapshots (chosen sub-token plus top-K candidates
with log-probabilities), the toolkit computes per-language rank, confidence,
entropy, and diversity metrics, WER, token-coverage curves, frequency-vector
embeddings (PCA and exact t-SNE), and correlations against training-data
hours.
"""

__version__ = "0.1.0"

from ._accel import BACKEND as KERNEL_BACKEND
from .alignment import (
    AlignmentResult,
    EditOp,
    OpKind,
    RankedToken,
    align,
    edit_distance,
    format_alignment_table,
    rank_reference_tokens,
)
from .embedding import (
    EmbeddingResult,
    FrequencyMatrix,
    FrequencyVector,
    build_frequency_matrix,
    build_frequency_vector,
    conditional_affinities,
    effective_perplexity,
    pca_2d,
    standardize,
    tsne_2d,
)
from .metrics import (
    CoveragePoint,
    LanguageMetrics,
    average_rank,
    confidence,
    coverage_curve,
    diversity_ttr,
    entropy,
    language_metrics,
    language_wer,
    mean_entropy,
    normalize_text,
    wer,
)
from .report import PipelineResult, run_pipeline
from .stats import CorrelationResult, correlate, pearson, rank_average, spearman
from .trace_model import (
    DEFAULT_VOCAB_SIZE,
    AnalysisConfig,
    CandidateEntry,
    DecodingStep,
    LanguageInfo,
    LanguageManifest,
    ManifestError,
    TraceError,
    TraceFormatError,
    TraceValidationError,
    UtteranceTrace,
    default_manifest_path,
    group_by_language,
    load_manifest,
    load_vocabulary,
    read_traces,
    validate_trace,
    write_traces,
)

__all__ = [
    "KERNEL_BACKEND",
    "AlignmentResult",
    "AnalysisConfig",
    "CandidateEntry",
    "CorrelationResult",
    "CoveragePoint",
    "DecodingStep",
    "DEFAULT_VOCAB_SIZE",
    "EditOp",
    "EmbeddingResult",
    "FrequencyMatrix",
    "FrequencyVector",
    "LanguageInfo",
    "LanguageManifest",
    "LanguageMetrics",
    "ManifestError",
    "OpKind",
    "PipelineResult",
    "RankedToken",
    "TraceError",
    "TraceFormatError",
    "TraceValidationError",
    "UtteranceTrace",
    "align",
    "average_rank",
    "build_frequency_matrix",
    "build_frequency_vector",
    "conditional_affinities",
    "confidence",
    "correlate",
    "coverage_curve",
    "default_manifest_path",
    "diversity_ttr",
    "edit_distance",
    "effective_perplexity",
    "entropy",
    "format_alignment_table",
    "group_by_language",
    "language_metrics",
    "language_wer",
    "load_manifest",
    "load_vocabulary",
    "mean_entropy",
    "normalize_text",
    "pca_2d",
    "pearson",
    "rank_average",
    "rank_reference_tokens",
    "read_traces",
    "run_pipeline",
    "spearman",
    "standardize",
    "tsne_2d",
    "validate_trace",
    "wer",
    "write_traces",
]
