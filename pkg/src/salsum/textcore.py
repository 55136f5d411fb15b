"""Tokenization, sentence splitting, n-grams and LCS.

Everything here is a pure function of its inputs.
"""
from __future__ import annotations

import re
from collections import Counter
from typing import Sequence

TokenSeq = list[str]

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")

ABBREVIATIONS = frozenset(
    {"dr.", "mr.", "mrs.", "ms.", "inc.", "co.", "u.s.", "e.g.", "i.e."}
)

_TERMINATOR_RE = re.compile(r"[.!?]+[\"')\]]*(?=\s)")
_OPENERS = "\"'(["


def tokenize(text: str) -> TokenSeq:
    """Lowercase ``text`` and split it into word and punctuation tokens."""
    return _TOKEN_RE.findall(text.lower())


def _is_abbreviation(text: str, end: int) -> bool:
    start = end
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    word = text[start:end].lower().lstrip("\"'([")
    return word in ABBREVIATIONS


def _starts_sentence(line: str, pos: int) -> bool:
    rest = line[pos:].lstrip()
    rest = rest.lstrip(_OPENERS)
    return bool(rest) and rest[0].isupper()


def split_sentences(text: str) -> list[str]:
    """Split ``text`` into sentences.

    Newlines are hard boundaries (dialogue turns, paragraphs). Inside a line a
    boundary is a run of ``.``/``!``/``?`` followed by whitespace and an
    uppercase letter, unless the word ending there is a known abbreviation.
    """
    sentences: list[str] = []
    for line in text.splitlines():
        start = 0
        for m in _TERMINATOR_RE.finditer(line):
            if not _starts_sentence(line, m.end()) or _is_abbreviation(line, m.start() + 1):
                continue
            piece = line[start:m.end()].strip()
            if piece:
                sentences.append(piece)
            start = m.end()
        piece = line[start:].strip()
        if piece:
            sentences.append(piece)
    return sentences


def ngrams(seq: Sequence[str], n: int) -> Counter:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return Counter(tuple(seq[i:i + n]) for i in range(len(seq) - n + 1))


def _lcs_table(a: Sequence, b: Sequence) -> list[list[int]]:
    table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i, x in enumerate(a):
        row, nxt = table[i], table[i + 1]
        for j, y in enumerate(b):
            if x == y:
                nxt[j + 1] = row[j] + 1
            else:
                nxt[j + 1] = max(row[j + 1], nxt[j])
    return table


def lcs_length(a: Sequence, b: Sequence) -> int:
    """Length of the longest common subsequence, O(|a|*|b|) DP."""
    return _lcs_table(a, b)[len(a)][len(b)]


def lcs_positions(ref: Sequence, cand: Sequence) -> set[int]:
    """Positions of ``ref`` matched by one LCS of ``ref`` and ``cand``.

    The traceback prefers matches, then moving up in ``ref``; it is fixed so
    results are reproducible.
    """
    table = _lcs_table(ref, cand)
    i, j = len(ref), len(cand)
    hits: set[int] = set()
    while i > 0 and j > 0:
        if ref[i - 1] == cand[j - 1]:
            hits.add(i - 1)
            i -= 1
            j -= 1
        elif table[i - 1][j] >= table[i][j - 1]:
            i -= 1
        else:
            j -= 1
    return hits


def union_lcs_positions(ref_sentence: Sequence, cand_sentences: Sequence[Sequence]) -> set[int]:
    hits: set[int] = set()
    for cand in cand_sentences:
        hits |= lcs_positions(ref_sentence, cand)
    return hits


def union_lcs(ref_sentence: Sequence, cand_sentences: Sequence[Sequence]) -> int:
    """Number of reference positions covered by the LCS with any candidate sentence."""
    return len(union_lcs_positions(ref_sentence, cand_sentences))
