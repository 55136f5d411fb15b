"""Beam search with GNMT length penalty and n-gram blocking, plus greedy decoding.

Decoders only see a ``step`` callable: given a list of generated prefixes
(without the start token) it returns an (n, V) array of next-token
log-probabilities. ``-inf`` marks tokens that may not be produced.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

StepFn = Callable[[Sequence[Sequence[int]]], np.ndarray]


@dataclass(frozen=True)
class DecodeConfig:
    beam_width: int = 5
    alpha: float = 1.5
    block_n: int = 3
    max_len: int = 100
    temperature: float = 0.5

    def __post_init__(self):
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.block_n < 0:
            raise ValueError("block_n must be >= 0")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")


@dataclass(frozen=True)
class Hypothesis:
    tokens: tuple[int, ...]
    logprob: float
    finished: bool = False

    def score(self, alpha: float) -> float:
        return self.logprob / length_penalty(max(len(self.tokens), 1), alpha)


def length_penalty(length: int, alpha: float) -> float:
    if length < 1:
        raise ValueError("length must be >= 1")
    return ((5 + length) / 6) ** alpha


def violates_block(tokens: Sequence[int], next_token: int, n: int) -> bool:
    """True when appending ``next_token`` would repeat an n-gram of ``tokens``."""
    if n <= 0 or len(tokens) < n - 1:
        return False
    if n == 1:
        return next_token in tokens
    tail = tuple(tokens[len(tokens) - n + 1:]) + (next_token,)
    return any(tuple(tokens[i:i + n]) == tail for i in range(len(tokens) - n + 1))


def _rank_key(h: Hypothesis, alpha: float):
    return (-h.score(alpha), h.tokens)


def select_best(finished: Sequence[Hypothesis], unfinished: Sequence[Hypothesis], alpha: float) -> Hypothesis:
    pool = finished or unfinished
    return min(pool, key=lambda h: _rank_key(h, alpha))


def beam_search(step: StepFn, cfg: DecodeConfig, eos: int) -> Hypothesis:
    """Keep the ``beam_width`` best expansions by cumulative log-probability.

    Expansions ending in ``eos`` leave the beam as finished hypotheses.
    The search stops when the beam empties or ``max_len`` tokens have been
    generated; the best finished hypothesis by length-normalized score wins,
    falling back to the best unfinished one.
    """
    live = [Hypothesis((), 0.0)]
    finished: list[Hypothesis] = []
    for _ in range(cfg.max_len):
        logp = np.asarray(step([h.tokens for h in live]), dtype=np.float64)
        candidates = []
        for h, row in zip(live, logp):
            for tok in np.flatnonzero(np.isfinite(row)):
                tok = int(tok)
                if violates_block(h.tokens, tok, cfg.block_n):
                    continue
                candidates.append(Hypothesis(h.tokens + (tok,), h.logprob + float(row[tok]), tok == eos))
        candidates.sort(key=lambda h: (-h.logprob, h.tokens))
        live = []
        for h in candidates[:cfg.beam_width]:
            (finished if h.finished else live).append(h)
        if not live:
            break
    if not finished and not live:
        return Hypothesis((), 0.0)
    return select_best(finished, live, cfg.alpha)


def greedy(step: StepFn, cfg: DecodeConfig, eos: int) -> Hypothesis:
    tokens: list[int] = []
    logprob = 0.0
    for _ in range(cfg.max_len):
        row = np.asarray(step([tuple(tokens)])[0], dtype=np.float64)
        best, best_lp = None, -math.inf
        for tok in range(len(row)):
            if row[tok] > best_lp and not violates_block(tokens, tok, cfg.block_n):
                best, best_lp = tok, float(row[tok])
        if best is None:
            break
        tokens.append(best)
        logprob += best_lp
        if best == eos:
            return Hypothesis(tuple(tokens), logprob, True)
    return Hypothesis(tuple(tokens), logprob, False)


def strip_eos(h: Hypothesis, eos: int) -> list[int]:
    return list(h.tokens[:-1] if h.finished and h.tokens and h.tokens[-1] == eos else h.tokens)
