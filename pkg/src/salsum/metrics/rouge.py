"""ROUGE-N, ROUGE-L and ROUGE-Lsum on lowercased word/punctuation tokens.

No stemming and no stop-word removal.
"""
from __future__ import annotations

from collections import Counter
from typing import Sequence

from ..textcore import lcs_length, ngrams, split_sentences, tokenize, union_lcs_positions
from .score import MetricScore, ratio


def rouge_n(cand: Sequence[str], ref: Sequence[str], n: int) -> MetricScore:
    cand_grams = ngrams(cand, n)
    ref_grams = ngrams(ref, n)
    overlap = sum((cand_grams & ref_grams).values())
    return MetricScore.from_pr(
        ratio(overlap, sum(cand_grams.values())),
        ratio(overlap, sum(ref_grams.values())),
    )


def rouge_l(cand: Sequence[str], ref: Sequence[str]) -> MetricScore:
    if not cand or not ref:
        return MetricScore(0.0, 0.0, 0.0)
    lcs = lcs_length(cand, ref)
    return MetricScore.from_pr(lcs / len(cand), lcs / len(ref))


def rouge_lsum(cand: str, ref: str) -> MetricScore:
    """Summary-level ROUGE-L over sentence splits of both texts.

    For every reference sentence the union of its LCS hits against all
    candidate sentences is taken. A hit is only credited while the token
    still has unused occurrences on both sides, so a candidate token is
    never counted twice and precision stays within [0, 1].
    """
    cand_sents = [t for t in (tokenize(s) for s in split_sentences(cand)) if t]
    ref_sents = [t for t in (tokenize(s) for s in split_sentences(ref)) if t]
    cand_total = sum(len(s) for s in cand_sents)
    ref_total = sum(len(s) for s in ref_sents)
    if cand_total == 0 or ref_total == 0:
        return MetricScore(0.0, 0.0, 0.0)

    cand_left = Counter(t for s in cand_sents for t in s)
    ref_left = Counter(t for s in ref_sents for t in s)
    hits = 0
    for ref_sent in ref_sents:
        for pos in sorted(union_lcs_positions(ref_sent, cand_sents)):
            token = ref_sent[pos]
            if cand_left[token] > 0 and ref_left[token] > 0:
                cand_left[token] -= 1
                ref_left[token] -= 1
                hits += 1
    return MetricScore.from_pr(hits / cand_total, hits / ref_total)
