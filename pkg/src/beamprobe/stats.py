"""Metric-vs-training-hours correlation with a permutation p-value.

Pearson is computed against log10 hours (the hour spread covers three orders
of magnitude); Spearman uses average ranks and needs no transform. The
p-value is a two-sided permutation test on Spearman's rho with add-one
smoothing, so p >= 1/(n_permutations + 1) always.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import _accel
from .trace_model import LanguageManifest

MIN_LANGUAGES = 5
MIN_PERMUTATIONS = 1000


@dataclass(frozen=True)
class CorrelationResult:
    metric_name: str
    pearson_r_loghours: float
    spearman_rho: float
    p_value_permutation: float
    n_permutations: int
    seed: int
    n_languages: int


def rank_average(values: np.ndarray) -> np.ndarray:
    """Average ranks (1-based); ties share the mean of their rank block."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0], dtype=np.float64)
    i = 0
    while i < values.shape[0]:
        j = i
        while j + 1 < values.shape[0] and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc)) * math.sqrt(float(yc @ yc))
    if denom == 0.0:
        raise ValueError("degenerate input: zero variance")
    return float(xc @ yc) / denom


def spearman(x: np.ndarray, y: np.ndarray) -> float:
    return pearson(rank_average(x), rank_average(y))


def correlate(
    metric_values: Mapping[str, float],
    manifest: LanguageManifest,
    n_permutations: int = 10000,
    seed: int = 0,
    metric_name: str = "metric",
) -> CorrelationResult:
    """Correlate a per-language metric against manifest training hours.

    Only languages present in both inputs participate (sorted by code for a
    deterministic order). Metric values are permuted with a seeded generator;
    the permutation stream is identical across kernel backends.
    """
    if n_permutations < MIN_PERMUTATIONS:
        raise ValueError(f"need at least {MIN_PERMUTATIONS} permutations")
    codes = sorted(code for code in metric_values if code in manifest)
    if len(codes) < MIN_LANGUAGES:
        raise ValueError(
            f"need at least {MIN_LANGUAGES} languages with metric and manifest "
            f"entries, got {len(codes)}"
        )
    hours = np.array([manifest[c].training_hours for c in codes], dtype=np.float64)
    values = np.array([metric_values[c] for c in codes], dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise ValueError(f"metric {metric_name!r} has non-finite values")
    if np.all(values == values[0]):
        raise ValueError(f"degenerate metric {metric_name!r}: constant values")

    pearson_r = pearson(np.log10(hours), values)

    rx = rank_average(hours)
    ry = rank_average(values)
    rx_c = rx - rx.mean()
    ry_c = ry - ry.mean()
    denom = math.sqrt(float(rx_c @ rx_c)) * math.sqrt(float(ry_c @ ry_c))
    rho = float(rx_c @ ry_c) / denom
    exceed = _accel.perm_abs_exceed_count(rx_c, ry_c, abs(rho), denom, n_permutations, seed)
    p_value = (1 + exceed) / (n_permutations + 1)

    return CorrelationResult(
        metric_name=metric_name,
        pearson_r_loghours=pearson_r,
        spearman_rho=rho,
        p_value_permutation=p_value,
        n_permutations=n_permutations,
        seed=seed,
        n_languages=len(codes),
    )
