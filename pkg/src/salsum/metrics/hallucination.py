from __future__ import annotations

from typing import Sequence

from ..textcore import ngrams


def novel_ngrams(summary: Sequence[str], source: Sequence[str], n: int) -> set[tuple[str, ...]]:
    """n-grams of ``summary`` that never occur in ``source``."""
    return set(ngrams(summary, n)) - set(ngrams(source, n))


def mark_novel(summary: Sequence[str], source: Sequence[str], n: int = 1) -> str:
    """Render ``summary`` with tokens covered by a novel n-gram wrapped in brackets."""
    novel = novel_ngrams(summary, source, n)
    flagged = [False] * len(summary)
    for i in range(len(summary) - n + 1):
        if tuple(summary[i:i + n]) in novel:
            for k in range(i, i + n):
                flagged[k] = True
    return " ".join(f"[{t}]" if f else t for t, f in zip(summary, flagged))
