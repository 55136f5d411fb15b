"""Corpus ingestion, vocabulary, and model-input preprocessing."""
from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .metrics.embedding import EmbeddingTable, load_embedding_table
from .salience import DEFAULT_THRESHOLDS, allocate
from .textcore import split_sentences, tokenize

PAD, UNK, BOS, EOS, SENT = 0, 1, 2, 3, 4
RESERVED = ("<pad>", "<unk>", "<s>", "</s>", "<sent>")


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class Example:
    id: str
    document: str
    summary: str | None = None


@dataclass(frozen=True)
class DatasetProfile:
    name: str
    max_src_tokens: int
    max_tgt_tokens: int

    def __post_init__(self):
        if self.max_src_tokens < 8 or self.max_tgt_tokens < 8:
            raise ValueError(f"profile {self.name}: limits must be >= 8")


PROFILES = {
    "cnndm": DatasetProfile("cnndm", 512, 100),
    "samsum": DatasetProfile("samsum", 256, 50),
    "edt": DatasetProfile("edt", 512, 40),
}


def get_profile(name: str, max_src: int | None = None, max_tgt: int | None = None) -> DatasetProfile:
    if name == "custom":
        if max_src is None or max_tgt is None:
            raise ValueError("custom profile needs both max_src and max_tgt")
        return DatasetProfile("custom", max_src, max_tgt)
    try:
        base = PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; choose from {sorted(PROFILES) + ['custom']}") from None
    return DatasetProfile(
        base.name,
        base.max_src_tokens if max_src is None else max_src,
        base.max_tgt_tokens if max_tgt is None else max_tgt,
    )


def load_corpus(path, require_summary: bool = True) -> list[Example]:
    """Read a JSON-lines corpus of ``{id, document, summary}`` records."""
    examples: list[Example] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(rec, dict):
                raise CorpusError(f"{path}:{lineno}: expected a JSON object")
            fields = ("id", "document", "summary") if require_summary else ("id", "document")
            for key in fields:
                if not isinstance(rec.get(key), str):
                    raise CorpusError(f"{path}:{lineno}: missing or non-string field {key!r}")
            if not rec["id"]:
                raise CorpusError(f"{path}:{lineno}: empty id")
            if not rec["document"].strip():
                raise CorpusError(f"{path}:{lineno}: empty document")
            if rec["id"] in seen:
                raise CorpusError(f"{path}:{lineno}: duplicate id {rec['id']!r}")
            seen.add(rec["id"])
            summary = rec.get("summary")
            examples.append(Example(rec["id"], rec["document"], summary if isinstance(summary, str) else None))
    return examples


def write_jsonl(path, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


class Vocab:
    """Word-level vocabulary; ids 0-4 are the reserved specials."""

    def __init__(self, tokens: Sequence[str]):
        if tuple(tokens[:len(RESERVED)]) != RESERVED:
            raise ValueError("vocabulary must start with the reserved tokens")
        self.itos = list(tokens)
        self.stoi = {t: i for i, t in enumerate(self.itos)}
        if len(self.stoi) != len(self.itos):
            raise ValueError("duplicate token in vocabulary")

    def __len__(self) -> int:
        return len(self.itos)

    def __contains__(self, token: str) -> bool:
        return token in self.stoi

    def encode(self, tokens: Sequence[str]) -> list[int]:
        return [self.stoi.get(t, UNK) for t in tokens]

    def decode(self, ids: Sequence[int]) -> list[str]:
        return [self.itos[i] for i in ids]


def build_vocab(corpus: Sequence[Example], cap: int) -> Vocab:
    """Keep the ``cap - 5`` most frequent tokens, ties broken alphabetically."""
    if cap <= len(RESERVED):
        raise ValueError(f"vocabulary cap must exceed {len(RESERVED)}")
    counts: Counter = Counter()
    for ex in corpus:
        counts.update(tokenize(ex.document))
        if ex.summary:
            counts.update(tokenize(ex.summary))
    for special in RESERVED:
        counts.pop(special, None)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocab(list(RESERVED) + [tok for tok, _ in ranked[:cap - len(RESERVED)]])


@dataclass(frozen=True)
class Prepared:
    id: str
    input_ids: list[int]
    target_ids: list[int] | None
    sentence_of_token: list[int]
    levels: list[int] | None
    scores: list[float] | None


def preprocess(example: Example, profile: DatasetProfile, vocab: Vocab,
               thresholds: Sequence[float] = DEFAULT_THRESHOLDS) -> Prepared:
    """Marker-prefixed, truncated ids plus oracle salience levels.

    Salience is scored on the full sentences; levels of sentences lost to
    truncation are dropped. The target is ``<s> ... </s>`` and, like the
    source, respects the profile limit including the specials.
    """
    sentences = [t for t in (tokenize(s) for s in split_sentences(example.document)) if t]

    input_ids: list[int] = []
    sentence_of_token: list[int] = []
    for k, sent in enumerate(sentences):
        for tok_id in [SENT] + vocab.encode(sent):
            if len(input_ids) == profile.max_src_tokens:
                break
            input_ids.append(tok_id)
            sentence_of_token.append(k)
    if input_ids and input_ids[-1] == SENT:
        input_ids.pop()
        sentence_of_token.pop()
    n_kept = input_ids.count(SENT)
    if n_kept == 0:
        raise CorpusError(f"example {example.id!r}: no sentence survives preprocessing")

    target_ids = levels = scores = None
    if example.summary is not None:
        ref = tokenize(example.summary)
        body = vocab.encode(ref)[:profile.max_tgt_tokens - 2]
        target_ids = [BOS] + body + [EOS]
        if ref:
            alloc = allocate(sentences, ref, thresholds)
            levels = alloc.levels[:n_kept]
            scores = alloc.scores[:n_kept]
    return Prepared(example.id, input_ids, target_ids, sentence_of_token, levels, scores)


def unk_rate(prepared: Sequence[Prepared]) -> float:
    ids = [i for p in prepared for i in p.input_ids]
    return ids.count(UNK) / len(ids) if ids else 0.0


def detokenize(tokens: Sequence[str]) -> str:
    return " ".join(tokens)


def load_embeddings(path, idf_path=None) -> EmbeddingTable:
    return load_embedding_table(path, idf_path)


# -- synthetic corpora ------------------------------------------------------

_ONSETS = "b d f g k l m n p r s t v z".split()
_VOWELS = "a e i o u".split()


def _word_pool(rng: random.Random, size: int, taken: set[str]) -> list[str]:
    pool: list[str] = []
    while len(pool) < size:
        w = "".join(rng.choice(_ONSETS) + rng.choice(_VOWELS) for _ in range(rng.randint(2, 3)))
        if w not in taken:
            taken.add(w)
            pool.append(w)
    return pool


def synthetic_corpus(n: int, seed: int = 0, n_sentences: int = 4, sentence_len: tuple[int, int] = (4, 7),
                     pool_size: int = 24) -> list[Example]:
    """Copy-the-lead corpus: the summary is the document's first sentence.

    Lead sentences and the remaining sentences draw from disjoint word pools,
    so the lead is always the single most salient sentence.
    """
    rng = random.Random(seed)
    taken: set[str] = set()
    lead_pool = _word_pool(rng, pool_size, taken)
    body_pool = _word_pool(rng, pool_size, taken)

    def sentence(pool):
        words = [rng.choice(pool) for _ in range(rng.randint(*sentence_len))]
        return " ".join(words).capitalize() + "."

    out = []
    for i in range(n):
        lead = sentence(lead_pool)
        rest = [sentence(body_pool) for _ in range(n_sentences - 1)]
        out.append(Example(f"syn-{i:05d}", " ".join([lead] + rest), lead))
    return out


def write_synthetic_embeddings(path, tokens: Iterable[str], dim: int = 16, seed: int = 0) -> None:
    import numpy as np

    rng = np.random.default_rng(seed)
    with open(path, "w", encoding="utf-8") as fh:
        for tok in sorted(set(tokens)):
            vec = rng.standard_normal(dim)
            fh.write(tok + " " + " ".join(f"{x:.6f}" for x in vec) + "\n")
