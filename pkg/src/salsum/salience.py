"""Sentence salience: ROUGE-L F1 labels, degree bucketing, sharpening."""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .metrics.rouge import rouge_l

DEFAULT_THRESHOLDS = (0.1, 0.3, 0.5)


@dataclass(frozen=True)
class SalienceAllocation:
    scores: list[float]
    levels: list[int]
    K: int

    def __post_init__(self):
        if len(self.scores) != len(self.levels):
            raise ValueError("scores and levels must have the same length")
        if any(not 0 <= lv < self.K for lv in self.levels):
            raise ValueError(f"levels must lie in [0, {self.K})")


def sentence_salience_scores(doc_sentences: Sequence[Sequence[str]], reference: Sequence[str]) -> list[float]:
    if not doc_sentences:
        raise ValueError("document has no sentences")
    if not reference:
        raise ValueError("reference summary is empty")
    return [rouge_l(sent, reference).f1 for sent in doc_sentences]


def allocate_levels(scores: Sequence[float], thresholds: Sequence[float] = DEFAULT_THRESHOLDS) -> list[int]:
    """Bucket scores into degrees; a score equal to a threshold goes to the upper bucket."""
    thresholds = list(thresholds)
    if any(not 0 < t < 1 for t in thresholds) or any(
        a >= b for a, b in zip(thresholds, thresholds[1:])
    ):
        raise ValueError(f"thresholds must be strictly ascending in (0, 1): {thresholds}")
    return [bisect_right(thresholds, s) for s in scores]


def allocate(doc_sentences, reference, thresholds=DEFAULT_THRESHOLDS) -> SalienceAllocation:
    scores = sentence_salience_scores(doc_sentences, reference)
    return SalienceAllocation(scores, allocate_levels(scores, thresholds), len(thresholds) + 1)


def sharpen(probs, T: float) -> np.ndarray:
    """Temperature-sharpen a distribution: p**(1/T), renormalized.

    Works on the last axis, so a (sentences, K) matrix is sharpened row-wise.
    Computed in log space to stay finite for very small T.
    """
    if T <= 0:
        raise ValueError(f"temperature must be positive, got {T}")
    p = np.asarray(probs, dtype=np.float64)
    if (p < 0).any():
        raise ValueError("probabilities must be non-negative")
    if (p.sum(axis=-1) <= 0).any():
        raise ValueError("cannot sharpen an all-zero distribution")
    if T == 1:
        # a distribution (up to rounding) is returned unchanged, bit for bit
        total = p.sum(axis=-1, keepdims=True)
        return p.copy() if np.all(np.abs(total - 1.0) <= 1e-9) else p / total
    with np.errstate(divide="ignore"):
        logits = np.log(p) / T
    logits -= logits.max(axis=-1, keepdims=True)
    q = np.exp(logits)
    return q / q.sum(axis=-1, keepdims=True)


def expected_salience_embedding(probs, emb_table) -> np.ndarray:
    """Probability-weighted mean of the salience-degree embedding rows."""
    p = np.asarray(probs, dtype=np.float64)
    table = np.asarray(emb_table, dtype=np.float64)
    if table.ndim != 2 or p.shape[-1] != table.shape[0]:
        raise ValueError(f"probs of width {p.shape[-1]} do not match table {table.shape}")
    if np.any(np.abs(p.sum(axis=-1) - 1) > 1e-6):
        raise ValueError("salience probabilities must sum to 1")
    return p @ table
