"""Small encoder-decoder transformer with salience guidance.

A linear classifier reads the encoder state at every sentence-marker token
and predicts a salience degree for that sentence. The decoder's
cross-attention adds a per-degree salience embedding to the key of every
source token (the token's sentence decides which embedding), leaving queries
and values untouched. Training uses the oracle degrees; inference uses the
temperature-sharpened expectation of the predicted degrees.

Everything runs in float64 on CPU.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Sequence

import numpy as np
import torch
from torch import nn
from torch.nn import functional as F

from .data import BOS, EOS, PAD, SENT, Prepared
from .salience import sharpen

DTYPE = torch.float64


@dataclass(frozen=True)
class ModelConfig:
    d_model: int = 64
    n_heads: int = 2
    enc_layers: int = 2
    dec_layers: int = 2
    ffn_dim: int = 128
    vocab_size: int = 8000
    K: int = 4
    lambda_sal: float = 0.5
    max_src_len: int = 512
    max_tgt_len: int = 100
    seed: int = 0

    def __post_init__(self):
        for f in ("d_model", "n_heads", "ffn_dim", "K", "max_src_len", "max_tgt_len"):
            if getattr(self, f) < 1:
                raise ValueError(f"{f} must be >= 1")
        if self.enc_layers < 0 or self.dec_layers < 0:
            raise ValueError("layer counts must be >= 0")
        if self.d_model % self.n_heads:
            raise ValueError("d_model must be divisible by n_heads")
        if self.vocab_size < 5:
            raise ValueError("vocab_size must cover the 5 reserved tokens")
        if self.lambda_sal < 0:
            raise ValueError("lambda_sal must be >= 0")

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def sinusoidal_positions(n: int, d: int) -> torch.Tensor:
    pos = torch.arange(n, dtype=DTYPE)[:, None]
    i = torch.arange(d, dtype=DTYPE)[None, :]
    angle = pos / torch.pow(torch.tensor(10000.0, dtype=DTYPE), (2 * torch.div(i, 2, rounding_mode="floor")) / d)
    out = torch.zeros(n, d, dtype=DTYPE)
    out[:, 0::2] = torch.sin(angle[:, 0::2])
    out[:, 1::2] = torch.cos(angle[:, 1::2])
    return out


class MultiHeadAttention(nn.Module):
    def __init__(self, d_model: int, n_heads: int):
        super().__init__()
        self.n_heads = n_heads
        self.head_dim = d_model // n_heads
        self.q_proj = nn.Linear(d_model, d_model, dtype=DTYPE)
        self.k_proj = nn.Linear(d_model, d_model, dtype=DTYPE)
        self.v_proj = nn.Linear(d_model, d_model, dtype=DTYPE)
        self.o_proj = nn.Linear(d_model, d_model, dtype=DTYPE)

    def _heads(self, x: torch.Tensor) -> torch.Tensor:
        b, n, _ = x.shape
        return x.view(b, n, self.n_heads, self.head_dim).transpose(1, 2)

    def forward(self, x_q, x_kv, mask=None, key_offset=None, return_weights=False):
        """``mask`` is boolean, broadcastable to (batch, heads, q, k); True = attend.

        ``key_offset`` (batch, k, d_model) is added to the projected keys.
        """
        q = self._heads(self.q_proj(x_q))
        keys = self.k_proj(x_kv)
        if key_offset is not None:
            keys = keys + key_offset
        k = self._heads(keys)
        v = self._heads(self.v_proj(x_kv))
        scores = q @ k.transpose(-1, -2) / math.sqrt(self.head_dim)
        if mask is not None:
            scores = scores.masked_fill(~mask, float("-inf"))
        weights = torch.softmax(scores, dim=-1)
        ctx = (weights @ v).transpose(1, 2).reshape(x_q.shape[0], x_q.shape[1], -1)
        out = self.o_proj(ctx)
        return (out, weights) if return_weights else out


class FeedForward(nn.Module):
    def __init__(self, d_model: int, ffn_dim: int):
        super().__init__()
        self.fc1 = nn.Linear(d_model, ffn_dim, dtype=DTYPE)
        self.fc2 = nn.Linear(ffn_dim, d_model, dtype=DTYPE)

    def forward(self, x):
        return self.fc2(F.gelu(self.fc1(x)))


class EncoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.self_attn = MultiHeadAttention(cfg.d_model, cfg.n_heads)
        self.ffn = FeedForward(cfg.d_model, cfg.ffn_dim)
        self.norm1 = nn.LayerNorm(cfg.d_model, dtype=DTYPE)
        self.norm2 = nn.LayerNorm(cfg.d_model, dtype=DTYPE)

    def forward(self, x, mask):
        x = self.norm1(x + self.self_attn(x, x, mask))
        return self.norm2(x + self.ffn(x))


class DecoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.self_attn = MultiHeadAttention(cfg.d_model, cfg.n_heads)
        self.cross_attn = MultiHeadAttention(cfg.d_model, cfg.n_heads)
        self.ffn = FeedForward(cfg.d_model, cfg.ffn_dim)
        self.norm1 = nn.LayerNorm(cfg.d_model, dtype=DTYPE)
        self.norm2 = nn.LayerNorm(cfg.d_model, dtype=DTYPE)
        self.norm3 = nn.LayerNorm(cfg.d_model, dtype=DTYPE)

    def forward(self, y, self_mask, memory, memory_mask, key_salience):
        y = self.norm1(y + self.self_attn(y, y, self_mask))
        y = self.norm2(y + self.cross_attn(y, memory, memory_mask, key_offset=key_salience))
        return self.norm3(y + self.ffn(y))


@dataclass
class EncodedDocument:
    hidden: torch.Tensor  # (src_len, d_model)
    marker_positions: list[int]
    sentence_of_token: list[int]


@dataclass
class Batch:
    src: torch.Tensor            # (B, S) token ids, PAD-filled
    src_mask: torch.Tensor       # (B, S) bool
    sentence_of_token: torch.Tensor  # (B, S), 0 on padding
    marker_index: torch.Tensor   # (N, 2) rows of (example, position)
    marker_sentence: torch.Tensor  # (N,) sentence number of each marker
    n_sentences: int             # max sentences per example
    levels: torch.Tensor | None  # (N,)
    tgt_in: torch.Tensor | None  # (B, T)
    tgt_out: torch.Tensor | None  # (B, T), PAD-filled


def sentence_index(input_ids: Sequence[int]) -> list[int]:
    """Sentence number of every token; tokens before the first marker join sentence 0."""
    out, k = [], -1
    for tok in input_ids:
        if tok == SENT:
            k += 1
        out.append(max(k, 0))
    return out


def make_batch(items: Sequence[Prepared], need_targets: bool = True) -> Batch:
    B = len(items)
    S = max(len(p.input_ids) for p in items)
    src = torch.full((B, S), PAD, dtype=torch.long)
    sent = torch.zeros((B, S), dtype=torch.long)
    markers, marker_sent, levels = [], [], []
    for b, p in enumerate(items):
        ids = list(p.input_ids)
        if SENT not in ids:
            raise ValueError(f"example {p.id!r} has no sentence marker")
        src[b, :len(ids)] = torch.tensor(ids)
        sent[b, :len(ids)] = torch.tensor(sentence_index(ids))
        k = 0
        for pos, tok in enumerate(ids):
            if tok == SENT:
                markers.append((b, pos))
                marker_sent.append(k)
                k += 1
        if need_targets:
            if p.levels is None or len(p.levels) != k:
                raise ValueError(f"example {p.id!r}: oracle salience levels missing or misaligned")
            levels.extend(p.levels)
    tgt_in = tgt_out = None
    if need_targets:
        if any(p.target_ids is None for p in items):
            raise ValueError("training batch needs target ids")
        T = max(len(p.target_ids) for p in items) - 1
        tgt_in = torch.full((B, T), PAD, dtype=torch.long)
        tgt_out = torch.full((B, T), PAD, dtype=torch.long)
        for b, p in enumerate(items):
            t = torch.tensor(p.target_ids)
            tgt_in[b, :len(t) - 1] = t[:-1]
            tgt_out[b, :len(t) - 1] = t[1:]
    return Batch(
        src=src,
        src_mask=src != PAD,
        sentence_of_token=sent,
        marker_index=torch.tensor(markers, dtype=torch.long),
        marker_sentence=torch.tensor(marker_sent, dtype=torch.long),
        n_sentences=max(marker_sent) + 1,
        levels=torch.tensor(levels, dtype=torch.long) if need_targets else None,
        tgt_in=tgt_in,
        tgt_out=tgt_out,
    )


class SeasonModel(nn.Module):
    """Parameters and forward computations of the salience-guided summarizer."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        gen = torch.Generator().manual_seed(cfg.seed)
        d = cfg.d_model
        self.tok_emb = nn.Parameter(torch.empty(cfg.vocab_size, d, dtype=DTYPE))
        self.sal_emb = nn.Parameter(torch.empty(cfg.K, d, dtype=DTYPE))
        self.classifier = nn.Linear(d, cfg.K, dtype=DTYPE)
        self.encoder = nn.ModuleList(EncoderLayer(cfg) for _ in range(cfg.enc_layers))
        self.decoder = nn.ModuleList(DecoderLayer(cfg) for _ in range(cfg.dec_layers))
        self.register_buffer(
            "positions", sinusoidal_positions(max(cfg.max_src_len, cfg.max_tgt_len) + 1, d), persistent=False
        )
        self._init(gen)

    def _init(self, gen: torch.Generator) -> None:
        with torch.no_grad():
            for name, p in self.named_parameters():
                if "norm" in name:
                    p.fill_(1.0 if name.endswith("weight") else 0.0)
                elif name.endswith("bias"):
                    p.zero_()
                else:
                    fan_in = p.shape[-1]
                    p.copy_(torch.randn(p.shape, generator=gen, dtype=DTYPE) / math.sqrt(fan_in))

    # -- pieces ------------------------------------------------------------

    def embed(self, ids: torch.Tensor) -> torch.Tensor:
        n = ids.shape[-1]
        return self.tok_emb[ids] * math.sqrt(self.cfg.d_model) + self.positions[:n]

    def encode_batch(self, src: torch.Tensor, src_mask: torch.Tensor) -> torch.Tensor:
        x = self.embed(src)
        attn_mask = src_mask[:, None, None, :]
        for layer in self.encoder:
            x = layer(x, attn_mask)
        return x

    def salience_logits(self, hidden: torch.Tensor, marker_index: torch.Tensor) -> torch.Tensor:
        marker_states = hidden[marker_index[:, 0], marker_index[:, 1]]
        return self.classifier(marker_states)

    def key_salience(self, sentence_vectors: torch.Tensor, sentence_of_token: torch.Tensor) -> torch.Tensor:
        """Broadcast (B, n_sent, d) sentence salience vectors to (B, S, d) per-token offsets."""
        idx = sentence_of_token[..., None].expand(-1, -1, sentence_vectors.shape[-1])
        return torch.gather(sentence_vectors, 1, idx)

    def sentence_vectors(self, batch: Batch, per_sentence: torch.Tensor) -> torch.Tensor:
        """Scatter per-marker salience vectors (N, d) into a padded (B, n_sent, d) block."""
        out = torch.zeros(batch.src.shape[0], batch.n_sentences, self.cfg.d_model, dtype=DTYPE)
        return out.index_put((batch.marker_index[:, 0], batch.marker_sentence), per_sentence)

    def decode_hidden(self, tgt_in, memory, src_mask, key_salience) -> torch.Tensor:
        T = tgt_in.shape[1]
        y = self.embed(tgt_in)
        causal = torch.ones(T, T, dtype=torch.bool).tril()
        self_mask = causal[None, None] & (tgt_in != PAD)[:, None, None, :] | torch.eye(T, dtype=torch.bool)
        mem_mask = src_mask[:, None, None, :]
        for layer in self.decoder:
            y = layer(y, self_mask, memory, mem_mask, key_salience)
        return y

    def output_logits(self, y: torch.Tensor) -> torch.Tensor:
        return y @ self.tok_emb.T

    # -- public surface ----------------------------------------------------

    def encode(self, input_ids: Sequence[int]) -> EncodedDocument:
        ids = list(input_ids)
        if len(ids) > self.cfg.max_src_len:
            raise ValueError(f"input of length {len(ids)} exceeds max_src_len={self.cfg.max_src_len}")
        if SENT not in ids:
            raise ValueError("input has no sentence-marker token")
        src = torch.tensor([ids])
        hidden = self.encode_batch(src, torch.ones_like(src, dtype=torch.bool))[0]
        markers = [i for i, t in enumerate(ids) if t == SENT]
        return EncodedDocument(hidden, markers, sentence_index(ids))

    def predict_salience(self, enc: EncodedDocument) -> torch.Tensor:
        """(n_sentences, K) softmax over degrees at each marker state."""
        logits = self.classifier(enc.hidden[enc.marker_positions])
        return torch.softmax(logits, dim=-1)

    def saca(self, queries: torch.Tensor, enc: EncodedDocument, salience, layer: int = 0,
             return_weights: bool = False):
        """Salience-aware cross-attention of ``queries`` (T, d) over ``enc``.

        ``salience`` is either a sequence of hard degrees (one per sentence)
        or a (n_sentences, K) probability matrix.
        """
        n_sent = len(enc.marker_positions)
        sal = torch.as_tensor(salience)
        if sal.dim() == 1:
            if sal.shape[0] != n_sent:
                raise ValueError(f"{sal.shape[0]} salience levels for {n_sent} sentences")
            vectors = self.sal_emb[sal.long()]
        else:
            if sal.shape != (n_sent, self.cfg.K):
                raise ValueError(f"salience matrix {tuple(sal.shape)} does not match ({n_sent}, {self.cfg.K})")
            vectors = sal.to(DTYPE) @ self.sal_emb
        if queries.shape[-1] != self.cfg.d_model:
            raise ValueError("query width does not match d_model")
        offsets = vectors[torch.tensor(enc.sentence_of_token)]
        attn = self.decoder[layer].cross_attn
        return attn(queries[None], enc.hidden[None], None, key_offset=offsets[None], return_weights=return_weights)

    def forward_loss(self, batch: Batch):
        """Return (nll, sal_ce, total) for a teacher-forced batch using oracle degrees."""
        if batch.levels is None or batch.tgt_in is None:
            raise ValueError("batch lacks oracle salience levels or targets")
        memory = self.encode_batch(batch.src, batch.src_mask)
        logits = self.salience_logits(memory, batch.marker_index)
        sal_ce = F.cross_entropy(logits, batch.levels)
        sentence_vecs = self.sentence_vectors(batch, self.sal_emb[batch.levels])
        key_sal = self.key_salience(sentence_vecs, batch.sentence_of_token)
        y = self.decode_hidden(batch.tgt_in, memory, batch.src_mask, key_sal)
        out = self.output_logits(y)
        nll = F.cross_entropy(out.reshape(-1, out.shape[-1]), batch.tgt_out.reshape(-1), ignore_index=PAD)
        total = nll + self.cfg.lambda_sal * sal_ce
        return nll, sal_ce, total

    # -- inference ---------------------------------------------------------

    @torch.no_grad()
    def stepper(self, input_ids: Sequence[int], temperature: float = 0.5, levels: Sequence[int] | None = None):
        """Return ``step(prefixes) -> (n, V)`` next-token log-probabilities.

        Salience comes from the classifier, sharpened at ``temperature``,
        unless hard ``levels`` are given. Reserved non-output tokens are masked
        before normalization, so each row is a distribution over allowed tokens.
        """
        enc = self.encode(input_ids)
        if levels is None:
            probs = sharpen(self.predict_salience(enc).numpy(), temperature)
            vectors = torch.from_numpy(probs) @ self.sal_emb
        else:
            vectors = self.sal_emb[torch.tensor(list(levels))]
        offsets = vectors[torch.tensor(enc.sentence_of_token)][None]
        memory = enc.hidden[None]
        src_mask = torch.ones(1, memory.shape[1], dtype=torch.bool)
        banned = [PAD, BOS, SENT]

        @torch.no_grad()
        def step(prefixes: Sequence[Sequence[int]]) -> np.ndarray:
            n = len(prefixes)
            tgt = torch.tensor([[BOS] + list(p) for p in prefixes])
            y = self.decode_hidden(
                tgt, memory.expand(n, -1, -1), src_mask.expand(n, -1), offsets.expand(n, -1, -1)
            )
            logits = self.output_logits(y[:, -1])
            logits[:, banned] = float("-inf")
            return torch.log_softmax(logits, dim=-1).numpy()

        return step


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


__all__ = [
    "Batch", "EOS", "EncodedDocument", "ModelConfig", "SeasonModel", "make_batch",
    "parameter_count", "sentence_index", "sinusoidal_positions",
]
