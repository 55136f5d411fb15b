"""Multi-task training loop (Adam, fixed-seed shuffling)."""
from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass
from typing import Sequence

import torch

from .data import Prepared
from .model import ModelConfig, SeasonModel, make_batch

log = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 5
    lr: float = 1e-3
    batch_size: int = 8
    seed: int = 0


@dataclass
class EpochLog:
    epoch: int
    nll: float
    sal_ce: float
    total: float


def batches(items: Sequence[Prepared], size: int, rng: random.Random | None = None):
    order = list(range(len(items)))
    if rng is not None:
        rng.shuffle(order)
    for i in range(0, len(order), size):
        yield make_batch([items[j] for j in order[i:i + size]])


@torch.no_grad()
def corpus_loss(model: SeasonModel, items: Sequence[Prepared], batch_size: int = 32) -> EpochLog:
    """Token/sentence-weighted mean losses over the whole corpus."""
    sums = [0.0, 0.0]
    counts = [0, 0]
    for batch in batches(items, batch_size):
        nll, sal_ce, _ = model.forward_loss(batch)
        n_tok = int((batch.tgt_out != 0).sum())
        n_sent = len(batch.levels)
        sums[0] += float(nll) * n_tok
        sums[1] += float(sal_ce) * n_sent
        counts[0] += n_tok
        counts[1] += n_sent
    nll, sal = sums[0] / counts[0], sums[1] / counts[1]
    return EpochLog(0, nll, sal, nll + model.cfg.lambda_sal * sal)


def train(corpus: Sequence[Prepared], model_cfg: ModelConfig, train_cfg: TrainConfig = TrainConfig(),
          model: SeasonModel | None = None) -> tuple[SeasonModel, list[EpochLog]]:
    """Train a fresh (or the given) model; returns it with one log entry per epoch.

    Each entry holds the mean batch losses seen during that epoch.
    """
    if not corpus:
        raise ValueError("cannot train on an empty corpus")
    torch.use_deterministic_algorithms(True)
    model = model or SeasonModel(model_cfg)
    model.train()
    opt = torch.optim.Adam(model.parameters(), lr=train_cfg.lr)
    rng = random.Random(train_cfg.seed)
    history: list[EpochLog] = []
    for epoch in range(1, train_cfg.epochs + 1):
        sums = [0.0, 0.0, 0.0]
        n = 0
        for batch in batches(corpus, train_cfg.batch_size, rng):
            nll, sal_ce, total = model.forward_loss(batch)
            if not math.isfinite(total.item()):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch}, batch {n}: nll={nll.item()}, sal_ce={sal_ce.item()}"
                )
            opt.zero_grad()
            total.backward()
            opt.step()
            sums[0] += nll.item()
            sums[1] += sal_ce.item()
            sums[2] += total.item()
            n += 1
        entry = EpochLog(epoch, sums[0] / n, sums[1] / n, sums[2] / n)
        log.info("epoch %d nll=%.4f sal_ce=%.4f total=%.4f", epoch, entry.nll, entry.sal_ce, entry.total)
        history.append(entry)
    model.eval()
    return model, history


@torch.no_grad()
def salience_accuracy(model: SeasonModel, items: Sequence[Prepared]) -> tuple[float, float]:
    """(classifier accuracy, majority-class accuracy) against the oracle degrees."""
    correct = total = 0
    counts = [0] * model.cfg.K
    for p in items:
        probs = model.predict_salience(model.encode(p.input_ids))
        pred = probs.argmax(dim=-1).tolist()
        correct += sum(a == b for a, b in zip(pred, p.levels))
        total += len(p.levels)
        for lv in p.levels:
            counts[lv] += 1
    return correct / total, max(counts) / total
