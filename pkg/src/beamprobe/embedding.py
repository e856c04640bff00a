"""Per-language sub-token frequency vectors and 2-D projections.

Frequency vectors count how often each vocabulary id appears among the top-k
candidates over all decoding steps of a language. After standardization the
matrix is projected with PCA (SVD) and with exact t-SNE.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import _accel
from .trace_model import (
    DEFAULT_VOCAB_SIZE,
    UtteranceTrace,
    is_special_token,
)

METHOD_PCA = "pca"
METHOD_TSNE = "tsne"


@dataclass(frozen=True)
class FrequencyVector:
    """Sparse candidate-occurrence counts for one language."""

    language: str
    counts: dict[int, int]
    total: int


@dataclass(frozen=True)
class FrequencyMatrix:
    """Dense language-by-vocabulary matrix of candidate frequencies."""

    languages: tuple[str, ...]
    matrix: np.ndarray


@dataclass(frozen=True)
class EmbeddingResult:
    method: str
    coordinates: np.ndarray
    seed: int
    labels: tuple[str, ...] | None = None
    explained_variance_ratio: tuple[float, float] | None = None
    components: np.ndarray | None = None
    final_kl: float | None = None
    kl_after_exaggeration: float | None = None
    effective_perplexity: float | None = None


def build_frequency_vector(
    language: str,
    traces: Sequence[UtteranceTrace],
    k_top: int,
    include_special_tokens: bool = True,
) -> FrequencyVector:
    """Count token ids among the top-k candidates of every decoding step."""
    counts: dict[int, int] = {}
    total = 0
    for trace in traces:
        for step in trace.steps:
            for cand in step.candidates[:k_top]:
                if not include_special_tokens and is_special_token(cand.token_id):
                    continue
                counts[cand.token_id] = counts.get(cand.token_id, 0) + 1
                total += 1
    if total == 0:
        raise ValueError(f"language {language!r} has no candidate occurrences")
    return FrequencyVector(language=language, counts=counts, total=total)


def build_frequency_matrix(
    traces_by_language: Mapping[str, Sequence[UtteranceTrace]],
    k_top: int,
    vocab_size: int = DEFAULT_VOCAB_SIZE,
    relative: bool = True,
    include_special_tokens: bool = True,
) -> FrequencyMatrix:
    """Stack per-language frequency vectors into a dense matrix.

    Rows are ordered by language code. With ``relative`` (the default) each
    row is divided by its total so rows sum to 1, which controls for unequal
    token counts across languages.
    """
    if len(traces_by_language) < 2:
        raise ValueError("need at least 2 languages")
    languages = tuple(sorted(traces_by_language))
    matrix = np.zeros((len(languages), vocab_size), dtype=np.float64)
    for row, language in enumerate(languages):
        vector = build_frequency_vector(
            language, traces_by_language[language], k_top, include_special_tokens
        )
        for token_id, count in vector.counts.items():
            matrix[row, token_id] = count
        if relative:
            matrix[row] /= vector.total
    return FrequencyMatrix(languages=languages, matrix=matrix)


def standardize(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Center and scale columns to unit sample std; drop zero-variance columns.

    Returns the standardized matrix and the indices of the kept columns.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 2:
        raise ValueError("need a 2-D matrix with at least 2 rows")
    std = matrix.std(axis=0, ddof=1)
    kept = np.flatnonzero(std > 0.0)
    if kept.size == 0:
        raise ValueError("all columns have zero variance")
    sub = matrix[:, kept]
    return (sub - sub.mean(axis=0)) / std[kept], kept


def pca_2d(matrix: np.ndarray, seed: int = 0) -> EmbeddingResult:
    """Project rows onto the first two principal components via SVD.

    Component signs are fixed by making each component's largest-magnitude
    loading positive, so results are platform-stable. If the matrix has rank
    below 2 the second component is zeroed with a warning.
    """
    x = np.asarray(matrix, dtype=np.float64)
    if x.shape[0] < 3:
        raise ValueError("need at least 3 rows for a 2-D projection")
    x = x - x.mean(axis=0)
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    total_var = float(np.sum(s**2))
    if total_var <= 0.0:
        raise ValueError("matrix has no variance")
    tol = s[0] * max(x.shape) * np.finfo(np.float64).eps
    rank = int(np.sum(s > tol))
    coords = u[:, :2] * s[:2]
    components = vt[:2].copy()
    if rank < 2:
        warnings.warn("matrix rank < 2: second principal component zeroed")
        coords[:, 1] = 0.0
        components[1] = 0.0
    for comp in range(2):
        pivot = int(np.argmax(np.abs(components[comp])))
        if components[comp, pivot] < 0:
            components[comp] *= -1.0
            coords[:, comp] *= -1.0
    ratios = (float(s[0] ** 2 / total_var), float(s[1] ** 2 / total_var))
    return EmbeddingResult(
        method=METHOD_PCA,
        coordinates=coords,
        seed=seed,
        explained_variance_ratio=ratios,
        components=components,
    )


def effective_perplexity(perplexity: float, n_rows: int) -> float:
    """Requested perplexity clamped to (n-2)/3, floored at 1."""
    return max(min(perplexity, (n_rows - 2) / 3.0), 1.0)


def conditional_affinities(
    matrix: np.ndarray, perplexity: float, tol: float = 1e-5
) -> tuple[np.ndarray, np.ndarray]:
    """Bisection-calibrated Gaussian conditional distributions.

    Returns ``(p_cond, betas)``; row perplexities of ``p_cond`` match the
    clamped target within ``tol`` wherever that target is reachable.
    """
    x = np.asarray(matrix, dtype=np.float64)
    target = effective_perplexity(perplexity, x.shape[0])
    d2 = _accel.pairwise_sq_distances(x)
    return _accel.gaussian_conditional_probs(d2, target, tol=tol)


def tsne_2d(
    matrix: np.ndarray,
    perplexity: float = 20.0,
    seed: int = 0,
    n_iter: int = 1000,
    early_exaggeration: float = 12.0,
    exaggeration_iters: int = 250,
    learning_rate: float = 200.0,
    momentum_early: float = 0.5,
    momentum_late: float = 0.8,
    init: str = "pca",
) -> EmbeddingResult:
    """Exact (dense) t-SNE to two dimensions.

    Bandwidths are bisection-fit so each point's conditional-distribution
    perplexity matches the clamped target; affinities are symmetrized and the
    embedding is optimized by momentum gradient descent with per-parameter
    gain safeguards. Initialization defaults to PCA coordinates rescaled to a
    1e-4 standard deviation, making runs with a fixed seed bit-reproducible.
    """
    x = np.asarray(matrix, dtype=np.float64)
    n = x.shape[0]
    if n < 4:
        raise ValueError("too few points for t-SNE (need at least 4 rows)")
    target = effective_perplexity(perplexity, n)
    d2 = _accel.pairwise_sq_distances(x)
    p_cond, _ = _accel.gaussian_conditional_probs(d2, target)
    p = (p_cond + p_cond.T) / (2.0 * n)
    p = np.maximum(p, 1e-300)
    np.fill_diagonal(p, 0.0)

    if init == "pca":
        y = pca_2d(x, seed=seed).coordinates.copy()
        spread = y[:, 0].std()
        if spread > 0.0:
            y /= spread
        y *= 1e-4
    elif init == "random":
        y = _seeded_normal(seed, n) * 1e-4
    else:
        raise ValueError(f"unknown init {init!r}")

    velocity = np.zeros_like(y)
    gains = np.ones_like(y)
    kl_after_exaggeration: float | None = None
    kl = 0.0
    for it in range(n_iter):
        exaggerating = it < exaggeration_iters
        p_eff = p * early_exaggeration if exaggerating else p
        kl, grad = _accel.tsne_kl_grad(p_eff, y)
        if it == exaggeration_iters:
            kl_after_exaggeration = kl
        same_sign = np.sign(grad) == np.sign(velocity)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.maximum(gains, 0.01, out=gains)
        momentum = momentum_early if exaggerating else momentum_late
        velocity = momentum * velocity - learning_rate * gains * grad
        y = y + velocity
        y = y - y.mean(axis=0)
    return EmbeddingResult(
        method=METHOD_TSNE,
        coordinates=y,
        seed=seed,
        final_kl=float(kl),
        kl_after_exaggeration=kl_after_exaggeration,
        effective_perplexity=target,
    )


def _seeded_normal(seed: int, n: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, 2))
