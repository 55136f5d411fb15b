"""Exact-match METEOR.

Unigrams are aligned one-to-one on identical surface forms. Among the
alignments with the most matches, the one with the fewest chunks is used.
"""
from __future__ import annotations

from collections import Counter, defaultdict
from functools import lru_cache
from typing import NamedTuple, Sequence

EXACT_SEARCH_MAX_LEN = 50
_STATE_LIMIT = 200_000


class Alignment(NamedTuple):
    matches: int
    chunks: int


class _SearchBudgetExceeded(Exception):
    pass


def _exact_alignment(cand: Sequence[str], ref: Sequence[str]) -> Alignment:
    ref_slots: dict[str, list[int]] = defaultdict(list)
    for j, tok in enumerate(ref):
        ref_slots[tok].append(j)
    cand_count = Counter(cand)
    need = {w: min(c, len(ref_slots[w])) for w, c in cand_count.items()}
    # remaining[i] = occurrences of cand[i] at positions >= i
    remaining = []
    seen: Counter = Counter()
    for tok in reversed(cand):
        seen[tok] += 1
        remaining.append(seen[tok])
    remaining.reverse()
    word_mask = {w: sum(1 << j for j in slots) for w, slots in ref_slots.items()}
    states = 0

    @lru_cache(maxsize=None)
    def best(i: int, prev: int, used: int) -> int:
        # max number of adjacent matched pairs obtainable from position i on
        nonlocal states
        states += 1
        if states > _STATE_LIMIT:
            raise _SearchBudgetExceeded
        if i == len(cand):
            return 0
        w = cand[i]
        matched = bin(used & word_mask.get(w, 0)).count("1")
        result = -1
        if remaining[i] - 1 >= need[w] - matched:
            result = best(i + 1, -1, used)
        if matched < need[w]:
            for j in ref_slots[w]:
                if used >> j & 1:
                    continue
                gain = 1 if prev >= 0 and j == prev + 1 else 0
                result = max(result, gain + best(i + 1, j, used | 1 << j))
        return result

    m = sum(need.values())
    adjacent = best(0, -1, 0)
    return Alignment(m, m - adjacent)


def _greedy_alignment(cand: Sequence[str], ref: Sequence[str]) -> Alignment:
    free: dict[str, list[int]] = defaultdict(list)
    for j, tok in enumerate(ref):
        free[tok].append(j)
    m = chunks = 0
    prev = -2
    for tok in cand:
        slots = free.get(tok)
        if not slots:
            prev = -2
            continue
        j = prev + 1 if prev + 1 in slots else slots[0]
        slots.remove(j)
        m += 1
        if j != prev + 1:
            chunks += 1
        prev = j
    return Alignment(m, chunks)


def align(cand: Sequence[str], ref: Sequence[str]) -> Alignment:
    """Return (matches, chunks) of the chosen unigram alignment."""
    if max(len(cand), len(ref)) <= EXACT_SEARCH_MAX_LEN:
        try:
            return _exact_alignment(cand, ref)
        except _SearchBudgetExceeded:
            pass
    return _greedy_alignment(cand, ref)


def meteor_from_alignment(m: int, chunks: int, cand_len: int, ref_len: int) -> float:
    if m == 0:
        return 0.0
    p = m / cand_len
    r = m / ref_len
    fmean = 10 * p * r / (r + 9 * p)
    penalty = 0.5 * (chunks / m) ** 3
    return fmean * (1 - penalty)


def meteor(cand: Sequence[str], ref: Sequence[str]) -> float:
    m, chunks = align(cand, ref)
    return meteor_from_alignment(m, chunks, len(cand), len(ref))
