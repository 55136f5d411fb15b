"""Brute-force reference implementations used to check the production code.

Nothing here imports the code paths it checks; every routine is
deliberately exponential and refuses inputs beyond its budget.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


class BudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class OracleBudget:
    max_len: int = 8
    max_alphabet: int = 5
    max_plans: int = 200_000


DEFAULT_BUDGET = OracleBudget()


def lcs_bruteforce(a: Sequence, b: Sequence, budget: OracleBudget = DEFAULT_BUDGET) -> int:
    """Longest common subsequence by trying every subsequence of ``a``."""
    if len(a) > budget.max_len or len(b) > budget.max_len:
        raise BudgetExceeded(f"sequences longer than {budget.max_len}")
    a, b = list(a), list(b)

    def is_subsequence(sub, seq):
        it = iter(seq)
        return all(any(x == y for y in it) for x in sub)

    for size in range(min(len(a), len(b)), 0, -1):
        for idx in itertools.combinations(range(len(a)), size):
            if is_subsequence([a[i] for i in idx], b):
                return size
    return 0


def ngram_overlap_bruteforce(cand: Sequence, ref: Sequence, n: int) -> tuple[int, int, int]:
    """(clipped overlap, #cand n-grams, #ref n-grams) by pairing windows one at a time."""
    cw = [tuple(cand[i:i + n]) for i in range(len(cand) - n + 1)]
    rw = [tuple(ref[i:i + n]) for i in range(len(ref) - n + 1)]
    free = [True] * len(rw)
    overlap = 0
    for g in cw:
        for j, h in enumerate(rw):
            if free[j] and g == h:
                free[j] = False
                overlap += 1
                break
    return overlap, len(cw), len(rw)


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def rouge_n_bruteforce(cand, ref, n) -> tuple[float, float, float]:
    o, c, r = ngram_overlap_bruteforce(cand, ref, n)
    p = o / c if c else 0.0
    rec = o / r if r else 0.0
    return p, rec, _f1(p, rec)


def rouge_l_bruteforce(cand, ref) -> tuple[float, float, float]:
    if not cand or not ref:
        return 0.0, 0.0, 0.0
    lcs = lcs_bruteforce(cand, ref, OracleBudget(max_len=max(len(cand), len(ref), 8)))
    p, r = lcs / len(cand), lcs / len(ref)
    return p, r, _f1(p, r)


def meteor_alignment_bruteforce(cand: Sequence, ref: Sequence, max_len: int = 7) -> tuple[int, int]:
    """Enumerate every one-to-one exact-match alignment; return (max m, min chunks at that m)."""
    if len(cand) > max_len or len(ref) > max_len:
        raise BudgetExceeded(f"sequences longer than {max_len}")
    best = (0, 0)

    def chunks_of(pairs):
        ch = 0
        prev = None
        for i, j in pairs:
            if prev is None or not (i == prev[0] + 1 and j == prev[1] + 1):
                ch += 1
            prev = (i, j)
        return ch

    def rec(i, used, pairs):
        nonlocal best
        if i == len(cand):
            m = len(pairs)
            if m == 0:
                return
            ch = chunks_of(pairs)
            if m > best[0] or (m == best[0] and ch < best[1]):
                best = (m, ch)
            return
        rec(i + 1, used, pairs)
        for j in range(len(ref)):
            if j not in used and ref[j] == cand[i]:
                rec(i + 1, used | {j}, pairs + [(i, j)])

    rec(0, frozenset(), [])
    return best


def meteor_bruteforce(cand, ref) -> float:
    m, ch = meteor_alignment_bruteforce(cand, ref)
    if m == 0:
        return 0.0
    p, r = m / len(cand), m / len(ref)
    return 10 * p * r / (r + 9 * p) * (1 - 0.5 * (ch / m) ** 3)


def wmd_bruteforce(p, q, costs, grid: float = 0.25, budget: OracleBudget = DEFAULT_BUDGET) -> float:
    """Cheapest transport plan among all plans whose cells are multiples of ``grid``.

    With masses on the grid, every vertex of the transport polytope lies on
    the grid too, so the enumeration already reaches the continuous optimum.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    costs = np.asarray(costs, dtype=float)
    if len(p) > 3 or len(q) > 3:
        raise BudgetExceeded("at most 3 support points per side")
    pu = np.rint(p / grid).astype(int)
    qu = np.rint(q / grid).astype(int)
    if not (np.allclose(pu * grid, p) and np.allclose(qu * grid, q)) or pu.sum() != qu.sum():
        raise ValueError("masses must lie on the grid and balance")

    best = math.inf
    plans = 0

    def rows(i, col_left, acc_cost):
        nonlocal best, plans
        if i == len(pu):
            if all(c == 0 for c in col_left):
                best = min(best, acc_cost)
            return
        for split in _compositions(pu[i], col_left):
            plans += 1
            if plans > budget.max_plans:
                raise BudgetExceeded("too many plans")
            cost = sum(k * grid * costs[i, j] for j, k in enumerate(split))
            rows(i + 1, [c - k for c, k in zip(col_left, split)], acc_cost + cost)

    rows(0, list(qu), 0.0)
    return best


def _compositions(total: int, caps: Sequence[int]):
    if not caps:
        if total == 0:
            yield ()
        return
    for k in range(min(total, caps[0]) + 1):
        for rest in _compositions(total - k, caps[1:]):
            yield (k,) + rest


def best_sequence_bruteforce(step: Callable, vocab_size: int, eos: int, max_len: int, alpha: float,
                             block_n: int) -> tuple[tuple[int, ...], float]:
    """Score every sequence up to ``max_len`` and return the best (tokens, score).

    Finished sequences (ending in ``eos``) beat unfinished ones; unfinished
    sequences are only those that reach ``max_len``. Ties go to the
    lexicographically smaller token sequence.
    """
    if vocab_size > 4 or max_len > 5:
        raise BudgetExceeded("vocab <= 4 and max_len <= 5 required")

    def blocked(seq):
        if block_n <= 0:
            return False
        grams = [tuple(seq[i:i + block_n]) for i in range(len(seq) - block_n + 1)]
        return len(grams) != len(set(grams))

    def penalty(length):
        return ((5 + length) / 6) ** alpha

    finished, unfinished = [], []
    for length in range(1, max_len + 1):
        for seq in itertools.product(range(vocab_size), repeat=length):
            if eos in seq[:-1] or blocked(seq):
                continue
            done = seq[-1] == eos
            if not done and length < max_len:
                continue
            lp = 0.0
            for t in range(length):
                lp += float(step([seq[:t]])[0][seq[t]])
            if lp == -math.inf:
                continue
            (finished if done else unfinished).append((-(lp / penalty(length)), seq))
    pool = finished or unfinished
    if not pool:
        return (), 0.0
    neg, seq = min(pool)
    return seq, -neg
