"""Checkpoint container: a magic line, a JSON header, then raw float64 tensors.

Header and tensor order are canonical, so identical weights give identical bytes.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch

from .data import Vocab
from .model import DTYPE, ModelConfig, SeasonModel

MAGIC = b"SALSUM-CHECKPOINT 1\n"


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, model: SeasonModel, vocab: Vocab, meta: dict | None = None) -> None:
    state = model.state_dict()
    tensors, blobs, offset = [], [], 0
    for name in sorted(state):
        arr = np.ascontiguousarray(state[name].detach().cpu().numpy().astype("<f8"))
        blob = arr.tobytes()
        tensors.append({"name": name, "shape": list(arr.shape), "offset": offset, "nbytes": len(blob)})
        blobs.append(blob)
        offset += len(blob)
    header = {
        "config": model.cfg.to_dict(),
        "vocab": vocab.itos,
        "meta": meta or {},
        "tensors": tensors,
    }
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(json.dumps(header, sort_keys=True, ensure_ascii=False).encode("utf-8") + b"\n")
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path) -> tuple[SeasonModel, Vocab, dict]:
    raw = Path(path).read_bytes()
    if not raw.startswith(MAGIC):
        raise CheckpointError(f"{path}: not a checkpoint (bad magic)")
    end = raw.index(b"\n", len(MAGIC))
    header = json.loads(raw[len(MAGIC):end])
    body = memoryview(raw)[end + 1:]
    cfg = ModelConfig.from_dict(header["config"])
    vocab = Vocab(header["vocab"])
    if len(vocab) != cfg.vocab_size:
        raise CheckpointError(f"{path}: vocabulary size {len(vocab)} != config vocab_size {cfg.vocab_size}")
    model = SeasonModel(cfg)
    expected = model.state_dict()
    if sorted(expected) != [t["name"] for t in header["tensors"]]:
        raise CheckpointError(f"{path}: tensor names do not match the model layout")
    state = {}
    for t in header["tensors"]:
        shape = tuple(t["shape"])
        if shape != tuple(expected[t["name"]].shape):
            raise CheckpointError(f"{path}: {t['name']} has shape {shape}, model expects {tuple(expected[t['name']].shape)}")
        arr = np.frombuffer(body[t["offset"]:t["offset"] + t["nbytes"]], dtype="<f8").reshape(shape)
        state[t["name"]] = torch.tensor(arr.copy(), dtype=DTYPE)
    model.load_state_dict(state)
    model.eval()
    return model, vocab, header["meta"]
