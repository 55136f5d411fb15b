"""Flat ``key = value`` run configuration. Precedence: flags > file > defaults."""
from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    corpus: str | None = None
    embeddings: str | None = None
    idf: str | None = None
    checkpoint: str | None = None
    output: str | None = None
    profile: str = "cnndm"
    max_src: int | None = None
    max_tgt: int | None = None
    seed: int = 0
    # model
    d_model: int = 64
    n_heads: int = 2
    enc_layers: int = 2
    dec_layers: int = 2
    ffn_dim: int = 128
    vocab_cap: int = 8000
    lambda_sal: float = 0.5
    thresholds: str = "0.1,0.3,0.5"
    # training
    epochs: int = 5
    lr: float = 1e-3
    batch_size: int = 8
    # decoding
    beam: int = 5
    alpha: float = 1.5
    block_n: int = 3
    max_len: int | None = None
    temperature: float = 0.5

    @property
    def threshold_values(self) -> tuple[float, ...]:
        try:
            values = tuple(float(x) for x in self.thresholds.split(","))
        except ValueError:
            raise ConfigError(f"bad thresholds {self.thresholds!r}") from None
        if any(b <= a for a, b in zip(values, values[1:])) or not all(0 <= v <= 1 for v in values):
            raise ConfigError(f"thresholds must be strictly increasing within [0, 1], got {self.thresholds!r}")
        return values


_TYPES = {
    f.name: (int if "int" in str(f.type) else float if "float" in str(f.type) else str)
    for f in fields(RunConfig)
}


def _coerce(key: str, raw: str, where: str):
    kind = _TYPES[key]
    if raw.lower() in ("", "none") and key not in ("profile", "thresholds"):
        return None
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{where}: {key} expects {kind.__name__}, got {raw!r}") from None


def read_config_file(path) -> dict:
    values = {}
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw, f"{path}:{lineno}")
    return values


def resolve(config_path=None, overrides: dict | None = None) -> RunConfig:
    cfg = RunConfig()
    if config_path is not None:
        cfg = replace(cfg, **read_config_file(config_path))
    flags = {k: v for k, v in (overrides or {}).items() if v is not None}
    unknown = set(flags) - set(_TYPES)
    if unknown:
        raise ConfigError(f"unknown settings {sorted(unknown)}")
    return replace(cfg, **flags)


def require_file(value: str | None, what: str) -> Path:
    if value is None:
        raise ConfigError(f"no {what} given")
    path = Path(value)
    if not path.is_file():
        raise ConfigError(f"{what} {path} does not exist")
    return path


def require_parent(value: str | None, what: str) -> Path:
    if value is None:
        raise ConfigError(f"no {what} given")
    path = Path(value)
    if not path.parent.exists():
        raise ConfigError(f"directory for {what} {path} does not exist")
    return path
