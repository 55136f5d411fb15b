"""Embedding-based similarity: greedy cosine matching and word mover's score."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .score import MetricScore
from .transport import TransportResult, optimal_transport

UNK = "<unk>"


class EmbeddingFileError(ValueError):
    pass


@dataclass(frozen=True)
class EmbeddingTable:
    """Static token vectors, optionally with per-token idf weights.

    A ``<unk>`` entry, when present, stands in for unknown tokens.
    """

    vectors: Mapping[str, np.ndarray]
    idf: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(
            self, "vectors", {t: np.asarray(v, dtype=np.float64) for t, v in self.vectors.items()}
        )
        object.__setattr__(self, "idf", dict(self.idf or {}))
        dims = {v.shape for v in self.vectors.values()}
        if len(dims) > 1:
            raise ValueError(f"mixed embedding dimensions: {sorted(dims)}")
        if dims and (len(next(iter(dims))) != 1 or next(iter(dims))[0] < 1):
            raise ValueError("embeddings must be non-empty vectors")
        if any(w < 0 for w in self.idf.values()):
            raise ValueError("idf weights must be non-negative")

    @property
    def dim(self) -> int:
        return len(next(iter(self.vectors.values()))) if self.vectors else 0

    def vector(self, token: str) -> np.ndarray:
        v = self.vectors.get(token)
        if v is None:
            v = self.vectors.get(UNK)
        if v is None:
            raise KeyError(f"token {token!r} has no embedding and the table has no {UNK}")
        return v

    def matrix(self, tokens: Sequence[str]) -> np.ndarray:
        return np.stack([self.vector(t) for t in tokens])

    def weight(self, token: str) -> float:
        # tokens missing from the idf list are treated as maximally rare
        if not self.idf:
            return 1.0
        return self.idf.get(token, max(self.idf.values()))


def _parse_lines(path: Path, min_fields: int):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < min_fields:
                raise EmbeddingFileError(f"{path}:{lineno}: expected at least {min_fields} fields")
            try:
                values = [float(x) for x in parts[1:]]
            except ValueError as exc:
                raise EmbeddingFileError(f"{path}:{lineno}: non-numeric field ({exc})") from None
            if not all(np.isfinite(values)):
                raise EmbeddingFileError(f"{path}:{lineno}: non-finite value")
            yield lineno, parts[0], values


def load_embedding_table(path, idf_path=None) -> EmbeddingTable:
    """Read ``token v1 .. vd`` lines (and optional ``token weight`` idf lines)."""
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    dim = None
    for lineno, token, values in _parse_lines(path, 2):
        if dim is None:
            dim = len(values)
        elif len(values) != dim:
            raise EmbeddingFileError(f"{path}:{lineno}: dimension {len(values)}, expected {dim}")
        if token in vectors:
            raise EmbeddingFileError(f"{path}:{lineno}: duplicate token {token!r}")
        vectors[token] = np.array(values, dtype=np.float64)
    idf: dict[str, float] = {}
    if idf_path is not None:
        for lineno, token, values in _parse_lines(Path(idf_path), 2):
            if len(values) != 1 or values[0] < 0:
                raise EmbeddingFileError(f"{idf_path}:{lineno}: expected one non-negative weight")
            idf[token] = values[0]
    return EmbeddingTable(vectors, idf)


def _check(cand, ref, emb: EmbeddingTable):
    if not cand or not ref:
        raise ValueError("candidate and reference must be non-empty")
    if not emb.vectors:
        raise ValueError("empty embedding table")


def _unit_rows(mat: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    return np.divide(mat, norms, out=np.zeros_like(mat), where=norms > 0)


def bert_score(cand: Sequence[str], ref: Sequence[str], emb: EmbeddingTable,
               use_idf: bool = False) -> MetricScore:
    """Greedy max-cosine matching; negative similarities count as zero."""
    _check(cand, ref, emb)
    sim = _unit_rows(emb.matrix(ref)) @ _unit_rows(emb.matrix(cand)).T
    sim = np.clip(sim, 0.0, 1.0)

    def side(tokens, best):
        w = np.array([emb.weight(t) if use_idf else 1.0 for t in tokens])
        total = w.sum()
        return float((w * best).sum() / total) if total > 0 else 0.0

    recall = side(ref, sim.max(axis=1))
    precision = side(cand, sim.max(axis=0))
    return MetricScore.from_pr(precision, recall)


def _distribution(tokens: Sequence[str], emb: EmbeddingTable):
    counts = Counter(tokens)
    types = sorted(counts)
    mass = np.array([counts[t] * emb.weight(t) for t in types], dtype=np.float64)
    if mass.sum() <= 0:
        mass = np.array([float(counts[t]) for t in types])
    return types, mass / mass.sum()


def word_movers_transport(cand: Sequence[str], ref: Sequence[str], emb: EmbeddingTable) -> TransportResult:
    """Optimal transport of the candidate's unigram mass onto the reference's."""
    _check(cand, ref, emb)
    cand_types, p = _distribution(cand, emb)
    ref_types, q = _distribution(ref, emb)
    a, b = emb.matrix(cand_types), emb.matrix(ref_types)
    cost = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)
    # renormalize so both sides carry exactly the same total
    q = q * (p.sum() / q.sum())
    return optimal_transport(p, q, cost)


def mover_score(cand: Sequence[str], ref: Sequence[str], emb: EmbeddingTable) -> float:
    """1 / (1 + WMD); equals 1 only when the transport cost is zero."""
    return 1.0 / (1.0 + word_movers_transport(cand, ref, emb).cost)
